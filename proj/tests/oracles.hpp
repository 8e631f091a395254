#pragma once

// Slow reference computations used only by the tests. They work from the raw
// channel entries and deliberately avoid the library's own routines.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "macres/channel.hpp"

namespace oracle {

struct Joint {
  int sx, sy, sz;
  std::vector<double> p;  // [x][y][z]

  double at(int x, int y, int z) const { return p[(x * sy + y) * sz + z]; }
  double pz(int z) const {
    double s = 0;
    for (int x = 0; x < sx; ++x)
      for (int y = 0; y < sy; ++y) s += at(x, y, z);
    return s;
  }
  double pyz(int y, int z) const {
    double s = 0;
    for (int x = 0; x < sx; ++x) s += at(x, y, z);
    return s;
  }
  double pxz(int x, int z) const {
    double s = 0;
    for (int y = 0; y < sy; ++y) s += at(x, y, z);
    return s;
  }
  double py(int y) const {
    double s = 0;
    for (int x = 0; x < sx; ++x)
      for (int z = 0; z < sz; ++z) s += at(x, y, z);
    return s;
  }
  double px(int x) const {
    double s = 0;
    for (int y = 0; y < sy; ++y)
      for (int z = 0; z < sz; ++z) s += at(x, y, z);
    return s;
  }
};

inline Joint joint(const macres::ChannelSpec& ch) {
  Joint j{ch.size_x(), ch.size_y(), ch.size_z(), {}};
  for (int x = 0; x < j.sx; ++x)
    for (int y = 0; y < j.sy; ++y)
      for (int z = 0; z < j.sz; ++z) j.p.push_back(ch.q_x()[x] * ch.q_y()[y] * ch.w(x, y, z));
  return j;
}

inline double plogp(double v) { return v > 0 ? -v * std::log(v) : 0.0; }

// Mutual informations through entropies.
struct Infos {
  double xz_given_y, yz, xz, yz_given_x, sum;
};

inline Infos infos(const Joint& j) {
  double hz = 0, hyz = 0, hxz = 0, hxyz = 0, hy = 0, hx = 0, hxy = 0;
  for (int z = 0; z < j.sz; ++z) hz += plogp(j.pz(z));
  for (int y = 0; y < j.sy; ++y) {
    hy += plogp(j.py(y));
    for (int z = 0; z < j.sz; ++z) hyz += plogp(j.pyz(y, z));
  }
  for (int x = 0; x < j.sx; ++x) {
    hx += plogp(j.px(x));
    for (int z = 0; z < j.sz; ++z) hxz += plogp(j.pxz(x, z));
  }
  for (int x = 0; x < j.sx; ++x)
    for (int y = 0; y < j.sy; ++y) {
      double m = 0;
      for (int z = 0; z < j.sz; ++z) {
        hxyz += plogp(j.at(x, y, z));
        m += j.at(x, y, z);
      }
      hxy += plogp(m);
    }
  // H(Z|Y) = H(YZ) - H(Y), H(Z|XY) = H(XYZ) - H(XY), etc.
  const double hz_y = hyz - hy, hz_x = hxz - hx, hz_xy = hxyz - hxy;
  return {hz_y - hz_xy, hz - hz_y, hz - hz_x, hz_x - hz_xy, hz - hz_xy};
}

enum class Kind { CondXGivenY, MarginalY, MarginalX, CondYGivenX };

// Single-letter density written straight from its definition. Only called on
// the support.
inline double density(const Joint& j, Kind k, int x, int y, int z) {
  const double pxy = j.px(x) * j.py(y);
  const double w = j.at(x, y, z) / pxy;
  switch (k) {
    case Kind::CondXGivenY: return std::log(w / (j.pyz(y, z) / j.py(y)));
    case Kind::MarginalY: return std::log((j.pyz(y, z) / j.py(y)) / j.pz(z));
    case Kind::MarginalX: return std::log((j.pxz(x, z) / j.px(x)) / j.pz(z));
    case Kind::CondYGivenX: return std::log(w / (j.pxz(x, z) / j.px(x)));
  }
  return 0;
}

inline double info_of(const Infos& i, Kind k) {
  switch (k) {
    case Kind::CondXGivenY: return i.xz_given_y;
    case Kind::MarginalY: return i.yz;
    case Kind::MarginalX: return i.xz;
    case Kind::CondYGivenX: return i.yz_given_x;
  }
  return 0;
}

// P(sum of n letter densities > n (I + eps)) by walking every sequence of
// support triples.
inline double atypicality(const macres::ChannelSpec& ch, Kind k, double eps, int n) {
  const Joint j = joint(ch);
  std::vector<double> prob, dens;
  for (int x = 0; x < j.sx; ++x)
    for (int y = 0; y < j.sy; ++y)
      for (int z = 0; z < j.sz; ++z)
        if (j.at(x, y, z) > 0) {
          prob.push_back(j.at(x, y, z));
          dens.push_back(density(j, k, x, y, z));
        }
  const double threshold = n * (info_of(infos(j), k) + eps);
  const std::size_t K = prob.size();
  std::vector<std::size_t> idx(n, 0);
  double total = 0;
  for (;;) {
    double p = 1, d = 0;
    for (int t = 0; t < n; ++t) {
      p *= prob[idx[t]];
      d += dens[idx[t]];
    }
    if (d > threshold) total += p;
    int t = n - 1;
    while (t >= 0 && ++idx[t] == K) idx[t--] = 0;
    if (t < 0) break;
  }
  return total;
}

inline std::vector<int> word(std::uint64_t index, int alphabet, int n) {
  std::vector<int> w(n);
  for (int t = n - 1; t >= 0; --t) {
    w[t] = static_cast<int>(index % alphabet);
    index /= alphabet;
  }
  return w;
}

inline std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// Induced output law and the three decomposition pieces, straight from the
// definitions, for explicit codeword lists.
struct Decomposition {
  std::vector<double> induced;
  std::vector<double> target;
  double tv, atyp1, atyp2, typ_excess;
};

inline Decomposition decompose(const macres::ChannelSpec& ch,
                               const std::vector<std::vector<int>>& c1,
                               const std::vector<std::vector<int>>& c2, double eps1,
                               double eps2, Kind k1, Kind k2) {
  const Joint j = joint(ch);
  const Infos inf = infos(j);
  const int n = static_cast<int>(c1.front().size());
  const std::uint64_t nz = ipow(j.sz, n);
  const double scale = 1.0 / (static_cast<double>(c1.size()) * static_cast<double>(c2.size()));
  Decomposition d;
  d.induced.assign(nz, 0.0);
  d.target.assign(nz, 0.0);
  std::vector<double> typical(nz, 0.0);
  d.atyp1 = d.atyp2 = 0;
  for (std::uint64_t zi = 0; zi < nz; ++zi) {
    const auto z = word(zi, j.sz, n);
    double q = 1;
    for (int t = 0; t < n; ++t) q *= j.pz(z[t]);
    d.target[zi] = q;
    for (const auto& x : c1)
      for (const auto& y : c2) {
        double p = 1, s1 = 0, s2 = 0;
        for (int t = 0; t < n && p > 0; ++t) {
          p *= ch.w(x[t], y[t], z[t]);
          if (p > 0) {
            s1 += density(j, k1, x[t], y[t], z[t]);
            s2 += density(j, k2, x[t], y[t], z[t]);
          }
        }
        if (p == 0) continue;
        p *= scale;
        d.induced[zi] += p;
        const bool bad1 = s1 > n * (info_of(inf, k1) + eps1);
        const bool bad2 = s2 > n * (info_of(inf, k2) + eps2);
        if (bad1) d.atyp1 += p;
        if (bad2) d.atyp2 += p;
        if (!bad1 && !bad2) typical[zi] += p;
      }
  }
  d.tv = d.typ_excess = 0;
  for (std::uint64_t zi = 0; zi < nz; ++zi) {
    d.tv += 0.5 * std::abs(d.induced[zi] - d.target[zi]);
    d.typ_excess += std::max(typical[zi] - d.target[zi], 0.0);
  }
  return d;
}

// Phi by composite Simpson integration of the Gaussian density from 0.
inline double normal_cdf(double a) {
  const int m = 20000;
  const double h = a / m;
  double s = 0;
  for (int i = 0; i <= m; ++i) {
    const double t = i * h;
    const double f = std::exp(-0.5 * t * t);
    s += (i == 0 || i == m) ? f : (i % 2 ? 4 * f : 2 * f);
  }
  return 0.5 + s * h / 3.0 / std::sqrt(2.0 * M_PI);
}

// Convex closure of the two orthants above the corner points
// A = (I(X;Z|Y), I(Y;Z)) and B = (I(X;Z), I(Y;Z|X)): the point is inside iff
// some lambda in [0,1] puts lambda A + (1-lambda) B below it in both
// coordinates. Each coordinate constraint is linear in lambda.
inline bool hull_member(const Infos& i, double r1, double r2, double tol = 1e-12) {
  double lo = 0, hi = 1;
  auto restrict = [&](double a, double b, double r) {
    // lambda a + (1 - lambda) b <= r  <=>  lambda (a - b) <= r - b
    const double slope = a - b, rhs = r - b + tol;
    if (slope > 0) hi = std::min(hi, rhs / slope);
    else if (slope < 0) lo = std::max(lo, rhs / slope);
    else if (rhs < 0) hi = -1;
  };
  restrict(i.xz_given_y, i.xz, r1);
  restrict(i.yz, i.yz_given_x, r2);
  return lo <= hi;
}

// Random channel with full-support inputs; W rows from normalized
// exponentials, some entries zeroed when `sparse`.
inline macres::ChannelSpec random_channel(std::mt19937_64& gen, int sx, int sy, int sz,
                                          bool sparse = false) {
  std::exponential_distribution<double> e(1.0);
  std::bernoulli_distribution drop(0.3);
  auto normalize = [](std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    for (double& x : v) x /= s;
  };
  std::vector<double> w;
  for (int r = 0; r < sx * sy; ++r) {
    std::vector<double> row(sz);
    for (auto& v : row) v = e(gen);
    if (sparse) {
      for (auto& v : row)
        if (drop(gen)) v = 0;
      if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0; })) row[0] = 1;
    }
    normalize(row);
    // Force an exact unit sum so validation never trips on rounding.
    double rest = 0;
    for (int z = 1; z < sz; ++z) rest += row[z];
    if (row[0] > 0) row[0] = 1.0 - rest;
    w.insert(w.end(), row.begin(), row.end());
  }
  std::vector<double> qx(sx), qy(sy);
  for (auto& v : qx) v = 0.2 + e(gen);
  for (auto& v : qy) v = 0.2 + e(gen);
  normalize(qx);
  normalize(qy);
  return macres::ChannelSpec(sx, sy, sz, std::move(w), std::move(qx), std::move(qy), "random");
}

}  // namespace oracle
