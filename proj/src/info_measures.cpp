#include "macres/info_measures.hpp"

#include <algorithm>
#include <cmath>

#include "macres/errors.hpp"
#include "macres/rng.hpp"

namespace macres {

std::string_view to_string(DensityVariant v) {
  switch (v) {
    case DensityVariant::CondXGivenY: return "conditional-x-given-y";
    case DensityVariant::MarginalY: return "marginal-y";
    case DensityVariant::MarginalX: return "marginal-x";
    case DensityVariant::CondYGivenX: return "conditional-y-given-x";
  }
  return "?";
}

DensityVariant parse_density_variant(std::string_view s) {
  for (auto v : {DensityVariant::CondXGivenY, DensityVariant::MarginalY,
                 DensityVariant::MarginalX, DensityVariant::CondYGivenX}) {
    if (s == to_string(v)) return v;
  }
  throw ValidationError("unknown density variant \"" + std::string(s) + "\"");
}

namespace {

// Numerator and denominator of the density ratio; both zero off the support.
std::pair<double, double> density_ratio_parts(const JointDist& j, DensityVariant v, int x, int y,
                                              int z) {
  switch (v) {
    case DensityVariant::CondXGivenY:
      return {j.channel().w(x, y, z), j.q_y(y) > 0.0 ? j.q_z_given_y(z, y) : 0.0};
    case DensityVariant::MarginalY:
      return {j.q_y(y) > 0.0 ? j.q_z_given_y(z, y) : 0.0, j.q_z(z)};
    case DensityVariant::MarginalX:
      return {j.q_x(x) > 0.0 ? j.q_z_given_x(z, x) : 0.0, j.q_z(z)};
    case DensityVariant::CondYGivenX:
      return {j.channel().w(x, y, z), j.q_x(x) > 0.0 ? j.q_z_given_x(z, x) : 0.0};
  }
  return {0.0, 0.0};
}

bool uses_x(DensityVariant v) { return v != DensityVariant::MarginalY; }
bool uses_y(DensityVariant v) { return v != DensityVariant::MarginalX; }

}  // namespace

double info_density(const JointDist& joint, DensityVariant variant, int x, int y, int z) {
  const bool x_ok = !uses_x(variant) || joint.q_x(x) > 0.0;
  const bool y_ok = !uses_y(variant) || joint.q_y(y) > 0.0;
  if (!x_ok || !y_ok) throw DomainError("information density queried off the input support");
  const auto [num, den] = density_ratio_parts(joint, variant, x, y, z);
  if (num <= 0.0 || den <= 0.0) throw DomainError("information density queried off the joint support");
  return std::log(num / den);
}

std::vector<double> density_table(const JointDist& joint, DensityVariant variant) {
  const int sx = joint.size_x(), sy = joint.size_y(), sz = joint.size_z();
  std::vector<double> t(static_cast<std::size_t>(sx) * sy * sz, kPosInf);
  for (int x = 0; x < sx; ++x) {
    if (uses_x(variant) && joint.q_x(x) <= 0.0) continue;
    for (int y = 0; y < sy; ++y) {
      if (uses_y(variant) && joint.q_y(y) <= 0.0) continue;
      for (int z = 0; z < sz; ++z) {
        const auto [num, den] = density_ratio_parts(joint, variant, x, y, z);
        if (num > 0.0 && den > 0.0) {
          t[(static_cast<std::size_t>(x) * sy + y) * sz + z] = std::log(num / den);
        }
      }
    }
  }
  return t;
}

double sequence_info_density(const JointDist& joint, DensityVariant variant,
                             std::span<const int> x, std::span<const int> y,
                             std::span<const int> z) {
  const std::size_t n = z.size();
  if ((uses_x(variant) && x.size() != n) || (uses_y(variant) && y.size() != n)) {
    throw DomainError("sequence length mismatch");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const int xk = uses_x(variant) ? x[k] : 0;
    const int yk = uses_y(variant) ? y[k] : 0;
    if ((uses_x(variant) && joint.q_x(xk) <= 0.0) || (uses_y(variant) && joint.q_y(yk) <= 0.0)) {
      return kPosInf;
    }
    const auto [num, den] = density_ratio_parts(joint, variant, xk, yk, z[k]);
    if (num <= 0.0 || den <= 0.0) return kPosInf;
    acc += std::log(num / den);
  }
  return acc;
}

MomentSummary density_moments(const JointDist& joint, DensityVariant variant) {
  const auto table = density_table(joint, variant);
  const auto probs = joint.probs();
  CompensatedSum mean;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) mean += probs[i] * table[i];
  }
  MomentSummary m;
  m.mean = mean.value();
  CompensatedSum var, third;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    const double d = table[i] - m.mean;
    var += probs[i] * d * d;
    third += probs[i] * std::abs(d) * d * d;
  }
  m.variance = std::max(0.0, var.value());
  m.third_abs = std::max(0.0, third.value());
  return m;
}

InfoQuantities mutual_informations(const JointDist& joint) {
  InfoQuantities iq;
  iq.i_xz_given_y = density_moments(joint, DensityVariant::CondXGivenY).mean;
  iq.i_yz = density_moments(joint, DensityVariant::MarginalY).mean;
  iq.i_xz = density_moments(joint, DensityVariant::MarginalX).mean;
  iq.i_yz_given_x = density_moments(joint, DensityVariant::CondYGivenX).mean;
  const double route_a = iq.i_xz_given_y + iq.i_yz;
  const double route_b = iq.i_xz + iq.i_yz_given_x;
  if (std::abs(route_a - route_b) > 1e-10) {
    throw Error("chain rule violated: " + std::to_string(route_a) + " vs " + std::to_string(route_b));
  }
  iq.sum_rate = 0.5 * (route_a + route_b);
  return iq;
}

double mutual_information(const InfoQuantities& iq, DensityVariant variant) {
  switch (variant) {
    case DensityVariant::CondXGivenY: return iq.i_xz_given_y;
    case DensityVariant::MarginalY: return iq.i_yz;
    case DensityVariant::MarginalX: return iq.i_xz;
    case DensityVariant::CondYGivenX: return iq.i_yz_given_x;
  }
  return 0.0;
}

double renyi_divergence(const DistVector& p, const DistVector& q, double alpha) {
  if (p.size() != q.size()) throw DomainError("Renyi divergence: index sets differ");
  if (!(alpha > 0.0) || alpha == 1.0) throw DomainError("Renyi order must be positive and != 1");
  CompensatedSum acc;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) {
      if (alpha > 1.0) return kPosInf;
      continue;
    }
    acc += std::exp(alpha * std::log(p[i]) + (1.0 - alpha) * std::log(q[i]));
  }
  const double s = acc.value();
  if (s <= 0.0) return kPosInf;  // disjoint supports with alpha < 1
  return std::log(s) / (alpha - 1.0);
}

double kl_divergence(const DistVector& p, const DistVector& q) {
  if (p.size() != q.size()) throw DomainError("KL divergence: index sets differ");
  CompensatedSum acc;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kPosInf;
    acc += p[i] * std::log(p[i] / q[i]);
  }
  return acc.value();
}

std::pair<DistVector, DistVector> density_measures(const JointDist& joint, DensityVariant variant) {
  const int sx = joint.size_x(), sy = joint.size_y(), sz = joint.size_z();
  const std::size_t total = static_cast<std::size_t>(sx) * sy * sz;
  std::vector<double> p(total), q(total);
  for (int x = 0; x < sx; ++x) {
    for (int y = 0; y < sy; ++y) {
      for (int z = 0; z < sz; ++z) {
        const std::size_t i = (static_cast<std::size_t>(x) * sy + y) * sz + z;
        const double qx = joint.q_x(x), qy = joint.q_y(y);
        switch (variant) {
          case DensityVariant::CondXGivenY:
            p[i] = joint.prob(x, y, z);
            q[i] = qx * joint.q_yz(y, z);
            break;
          case DensityVariant::MarginalY:
            p[i] = qx * joint.q_yz(y, z);
            q[i] = qx * qy * joint.q_z(z);
            break;
          case DensityVariant::MarginalX:
            p[i] = qy * joint.q_xz(x, z);
            q[i] = qx * qy * joint.q_z(z);
            break;
          case DensityVariant::CondYGivenX:
            p[i] = joint.prob(x, y, z);
            q[i] = qy * joint.q_xz(x, z);
            break;
        }
      }
    }
  }
  DistVector dp{std::move(p), 1, static_cast<int>(total)};
  DistVector dq{std::move(q), 1, static_cast<int>(total)};
  return {std::move(dp), std::move(dq)};
}

double density_renyi_divergence(const JointDist& joint, DensityVariant variant, double alpha) {
  const auto [p, q] = density_measures(joint, variant);
  return renyi_divergence(p, q, alpha);
}

double normal_cdf(double a) { return 0.5 * std::erfc(-a / std::sqrt(2.0)); }

double q_function(double a) { return 0.5 * std::erfc(a / std::sqrt(2.0)); }

double q_inverse(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("q_inverse: eps must lie in (0,1)");
  // Q is strictly decreasing; Q(-40) rounds to 1 and Q(40) to 0.
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (q_function(mid) > eps) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double berry_esseen_delta(const MomentSummary& m, std::int64_t n) {
  if (n < 1) throw DomainError("Berry-Esseen: n must be >= 1");
  if (!(m.variance > 0.0)) throw DomainError("Berry-Esseen: zero variance (degenerate density)");
  return m.third_abs / (std::pow(m.variance, 1.5) * std::sqrt(static_cast<double>(n)));
}

BerryEsseenCheck empirical_berry_esseen(const JointDist& joint, DensityVariant variant,
                                        std::int64_t n, std::int64_t samples, std::uint64_t seed,
                                        std::span<const double> grid) {
  if (samples < 1) throw DomainError("Berry-Esseen check needs at least one sample");
  const MomentSummary m = density_moments(joint, variant);
  BerryEsseenCheck out;
  out.delta = berry_esseen_delta(m, n);
  out.slack = 3.0 * std::sqrt(0.25 / static_cast<double>(samples));

  const auto table = density_table(joint, variant);
  const auto probs = joint.probs();
  const double sigma_sqrt_n = std::sqrt(m.variance * static_cast<double>(n));
  const double center = m.mean * static_cast<double>(n);

  std::vector<double> stats(static_cast<std::size_t>(samples));
  const Rng root(seed);
  for (std::int64_t s = 0; s < samples; ++s) {
    Rng rng = root.split(static_cast<std::uint64_t>(s));
    double sum = 0.0;
    for (std::int64_t k = 0; k < n; ++k) sum += table[rng.categorical(probs)];
    stats[s] = (sum - center) / sigma_sqrt_n;
  }
  std::sort(stats.begin(), stats.end());
  for (double a : grid) {
    // Small absolute slack keeps lattice points that round just above `a`.
    const auto cnt = std::upper_bound(stats.begin(), stats.end(), a + 1e-12) - stats.begin();
    const double f = static_cast<double>(cnt) / static_cast<double>(samples);
    const double dev = std::abs(f - normal_cdf(a));
    if (dev > out.max_deviation) {
      out.max_deviation = dev;
      out.worst_point = a;
    }
  }
  out.holds = out.max_deviation <= out.delta + out.slack;
  return out;
}

}  // namespace macres
