// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "macres/bounds.hpp"
#include "macres/cli.hpp"
#include "macres/errors.hpp"
#include "macres/experiments.hpp"
#include "macres/resolvability.hpp"
#include "macres/rng.hpp"
#include "oracles.hpp"

using namespace macres;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > limit_s) {
    out.ok = false;
    out.detail += " [over time limit " + std::to_string(limit_s) + " s]";
  }
  if (!out.ok) ++failures;
  std::printf("%s  %-28s %7.2fs  %s\n", out.ok ? "PASS" : "FAIL", name.c_str(), secs, out.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::vector<std::vector<int>> rows(const CodebookPair& cb, bool first) {
  std::vector<std::vector<int>> out;
  const auto m = first ? cb.m1() : cb.m2();
  for (std::uint64_t i = 0; i < m; ++i) {
    const auto r = first ? cb.x(i) : cb.y(i);
    out.emplace_back(r.begin(), r.end());
  }
  return out;
}

Outcome adder_analytics() {
  const double l2 = std::log(2.0);
  const JointDist j(adder_mac());
  const auto iq = mutual_informations(j);
  const auto m2 = density_moments(j, DensityVariant::MarginalY);
  const double errs[] = {std::abs(iq.i_xz_given_y - l2), std::abs(iq.i_yz - 0.5 * l2),
                         std::abs(iq.sum_rate - 1.5 * l2), std::abs(m2.variance - l2 * l2 / 4)};
  double worst = 0;
  for (double e : errs) worst = std::max(worst, e);
  return {worst <= 1e-9, "max abs error " + fmt(worst)};
}

Outcome exact_decomposition() {
  const ChannelSpec channels[] = {adder_mac(), noisy_adder_mac()};
  const RatePair shapes[] = {{0.8, 0.5, 1}, {0.5, 0.3, 1}, {1.0, 0.6, 1}, {0.3, 0.8, 1}};
  int count = 0, oracle_checked = 0;
  double worst_excess = -1, worst_mass = 0, worst_oracle = 0;
  for (const auto& ch : channels) {
    for (int n = 1; n <= 6; ++n) {
      for (const auto& shape : shapes) {
        for (int t = 0; t < 11; ++t) {
          const RatePair rates{shape.r1, shape.r2, n};
          const auto cb = sample_codebooks(ch, rates, derive_seed(77, {std::uint64_t(n), std::uint64_t(count)}));
          const TypParams tp{0.05 + 0.02 * (t % 5), 0.1, n, t % 2 ? Corner::B : Corner::A};
          const auto d = decompose_tv(ch, cb, tp);
          worst_excess = std::max(worst_excess, d.tv - d.rhs());
          worst_mass = std::max(worst_mass, std::abs(d.induced_mass - 1.0));
          if (n <= 3) {
            const auto o = oracle::decompose(ch, rows(cb, true), rows(cb, false), tp.eps1, tp.eps2,
                                             tp.corner == Corner::A ? oracle::Kind::CondXGivenY
                                                                    : oracle::Kind::CondYGivenX,
                                             tp.corner == Corner::A ? oracle::Kind::MarginalY
                                                                    : oracle::Kind::MarginalX);
            worst_oracle = std::max({worst_oracle, std::abs(o.tv - d.tv), std::abs(o.atyp1 - d.p_atyp1),
                                     std::abs(o.atyp2 - d.p_atyp2), std::abs(o.typ_excess - d.typ_excess)});
            ++oracle_checked;
          }
          ++count;
        }
      }
    }
  }
  const bool ok = count >= 500 && worst_excess <= 1e-12 && worst_mass <= 1e-9 && worst_oracle <= 1e-12;
  return {ok, std::to_string(count) + " codebooks; max(tv - rhs) " + fmt(worst_excess) + ", max mass error " +
                  fmt(worst_mass) + ", brute-force agreement " + fmt(worst_oracle) + " on " +
                  std::to_string(oracle_checked)};
}

Outcome tv_decay() {
  ExperimentConfig cfg;
  cfg.channel = adder_mac();
  cfg.r1 = 0.85;
  cfg.r2 = 0.45;
  cfg.ns = {2, 4, 6, 8};
  cfg.trials = 50;
  cfg.seed = 20240601;
  const auto med = median_tv_by_n(run_tv_sweep(cfg));
  bool decreasing = true;
  std::string detail = "medians";
  for (std::size_t i = 0; i < med.size(); ++i) {
    detail += " n=" + std::to_string(med[i].first) + ":" + fmt(med[i].second);
    if (i > 0 && !(med[i].second < med[i - 1].second)) decreasing = false;
  }
  const bool halved = med.back().second <= med.front().second / 2;

  cfg.r1 = 0.30;
  cfg.ns = {8};
  const double below = median_tv_by_n(run_tv_sweep(cfg)).at(0).second;
  detail += "; contrast (0.30,0.45) n=8: " + fmt(below);
  return {decreasing && halved && below >= 0.05, detail};
}

Outcome lemma_dominance() {
  ExperimentConfig cfg;
  cfg.channel = noisy_adder_mac();
  cfg.r1 = 0.9;
  cfg.r2 = 0.6;
  cfg.trials = 10000;
  cfg.seed = 99;
  cfg.eps1 = cfg.eps2 = 0.1;
  int checked = 0, skipped = 0, bad = 0;
  double worst = -1;
  for (int n : {2, 4}) {
    cfg.ns = {n};
    for (double delta : {0.25, 0.5, 1.0 - 1e-6}) {
      std::vector<ConcentrationRequest> reqs(3);
      reqs[0].policy = ThresholdPolicy::LemmaTypical;
      reqs[1].policy = ThresholdPolicy::LemmaAtypical;
      reqs[1].set = TypicalSet::T1;
      reqs[2].policy = ThresholdPolicy::LemmaAtypical;
      reqs[2].set = TypicalSet::T2;
      for (auto& r : reqs) {
        r.delta = delta;
        const auto s = run_concentration_check(cfg, r).at(0);
        if (s.vacuous) {
          ++skipped;
          continue;
        }
        ++checked;
        worst = std::max(worst, s.frequency - (s.bound + 3 * s.sigma));
        if (!(s.frequency <= s.bound + 3 * s.sigma)) ++bad;
      }
    }
  }
  return {bad == 0 && checked > 0, std::to_string(checked) + " (n, delta, lemma) cases, " +
                                       std::to_string(skipped) + " vacuous; max(freq - bound - 3 sigma) " +
                                       fmt(worst)};
}

Outcome renyi_oracle() {
  const auto ch = noisy_adder_mac();
  const JointDist j(ch);
  const auto grid = default_alpha_grid();
  int cases = 0, bad = 0;
  double worst_ratio = 0;
  for (auto [set, kind] : {std::pair{TypicalSet::T1, oracle::Kind::CondXGivenY},
                           std::pair{TypicalSet::T2, oracle::Kind::MarginalY}}) {
    const auto variant = typical_set_variant(set, Corner::A);
    for (double eps : {0.05, 0.1, 0.2}) {
      for (int n = 1; n <= 6; ++n) {
        const double exact = oracle::atypicality(ch, kind, eps, n);
        const auto r = renyi_atypicality_bound(j, variant, eps, n, grid);
        if (!(r.bound >= exact)) ++bad;
        for (const auto& e : r.grid) {
          const double b = std::exp(-n * e.exponent);
          if (!(b >= exact)) ++bad;
          worst_ratio = std::max(worst_ratio, exact / b);
          ++cases;
        }
      }
    }
  }
  // alpha -> 1: D_alpha of the density measures approaches the mutual information.
  const auto iq = mutual_informations(j);
  double limit_err = 0;
  for (auto v : {DensityVariant::CondXGivenY, DensityVariant::MarginalY}) {
    const auto [p, q] = density_measures(j, v);
    limit_err = std::max({limit_err, std::abs(density_renyi_divergence(j, v, 1.0 + 1e-4) - mutual_information(iq, v)),
                          std::abs(kl_divergence(p, q) - mutual_information(iq, v))});
  }
  return {bad == 0 && limit_err <= 1e-3,
          std::to_string(cases) + " (set, eps, n, alpha) cases; max exact/bound " + fmt(worst_ratio) +
              "; alpha->1 gap " + fmt(limit_err)};
}

Outcome berry_esseen() {
  const JointDist j(adder_mac());
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(-5.0 + 0.1 * i);
  const auto r = empirical_berry_esseen(j, DensityVariant::MarginalY, 100, 100000, 4242, grid);
  const double limit = r.delta + 3 * std::sqrt(0.25 / 1e5);
  return {r.max_deviation <= limit, "max deviation " + fmt(r.max_deviation) + " at " + fmt(r.worst_point) +
                                        " vs " + fmt(limit)};
}

Outcome second_order() {
  double worst_rt = 0;
  for (int k = 1; k < 1000; ++k) {
    const double eps = k / 1000.0;
    worst_rt = std::max(worst_rt, std::abs(q_function(q_inverse(eps)) - eps));
  }
  const auto [m1, m2] = second_order_moments(JointDist(adder_mac()), Corner::A);
  std::vector<double> scaled;
  std::string detail;
  for (double n : {1e2, 1e3, 1e4, 1e5, 1e6}) {
    const double ep = second_order_eps_prime(m2, 0.1, 0.25, static_cast<std::int64_t>(n));
    scaled.push_back(std::abs(ep - 0.1) * std::sqrt(n) / std::log(n));
  }
  // Q is 1/sqrt(2 pi)-Lipschitz, so the scaled gap stays below
  // d / sqrt(2 pi V) + rho / (V^1.5 log n) <= the same at n = 100.
  const double cap = 0.25 / std::sqrt(2 * M_PI * m2.variance) +
                     m2.third_abs / (std::pow(m2.variance, 1.5) * std::log(100.0));
  bool bounded = true;
  for (double s : scaled) bounded = bounded && std::isfinite(s) && s <= cap;
  int rejected = 0;
  const double bad_d[] = {0.0, -0.1, 0.5, 0.7};
  for (double d : bad_d) {
    try {
      second_order_rhs(0.1, 0.1, 0.5, 0.5, 100, 1.5, d, 2, 3);
    } catch (const DomainError&) {
      ++rejected;
    }
  }
  bool accepts = true;
  try {
    second_order_rhs(0.1, 0.1, 0.5, 0.5, 100, 1.5, 0.25, 2, 3);
  } catch (const DomainError&) {
    accepts = false;
  }
  detail = "Q(Qinv) error " + fmt(worst_rt) + "; |eps'-eps| sqrt(n)/log n:";
  for (double s : scaled) detail += " " + fmt(s);
  detail += " (cap " + fmt(cap) + ")";
  detail += "; rejected " + std::to_string(rejected) + "/4 bad d";
  return {worst_rt <= 1e-10 && bounded && rejected == 4 && accepts, detail};
}

Outcome region() {
  std::mt19937_64 gen(2718);
  long points = 0, disagreements = 0;
  for (int c = 0; c < 5; ++c) {
    const auto ch = oracle::random_channel(gen, 2 + c % 2, 2 + (c + 1) % 2, 3 + c % 2, c % 2 == 1);
    const auto iq = mutual_informations(JointDist(ch));
    const auto o = oracle::infos(oracle::joint(ch));
    const double top = 1.25 * iq.sum_rate;
    for (int a = 0; a < 100; ++a)
      for (int b = 0; b < 100; ++b) {
        const double r1 = top * a / 99.0, r2 = top * b / 99.0;
        if (first_order_region(iq, r1, r2, false) != oracle::hull_member(o, r1, r2)) ++disagreements;
        ++points;
      }
  }
  return {disagreements == 0, std::to_string(points) + " points, " + std::to_string(disagreements) +
                                  " disagreements"};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const std::string base = std::string(MACRES_CLI) +
                           " experiment --channel builtin:noisy-adder --r1 0.7 --r2 0.45 --n 2,3,4"
                           " --trials 20 --seed 5150";
  const std::string files[] = {"acceptance_det_a.csv", "acceptance_det_b.csv", "acceptance_det_c.csv"};
  const std::string threads[] = {"1", "1", "4"};
  for (int i = 0; i < 3; ++i) {
    const std::string cmd = base + " --threads " + threads[i] + " --out " + files[i] + " 2>/dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
  }
  const std::string a = slurp(files[0]), b = slurp(files[1]), c = slurp(files[2]);
  for (const auto& f : files) std::remove(f.c_str());
  const bool ok = !a.empty() && a == b && a == c && a.rfind(kCsvHeader, 0) == 0;
  return {ok, std::to_string(a.size()) + " bytes, identical across repeats and thread counts: " +
                  (ok ? "yes" : "no")};
}

}  // namespace

int main() {
  criterion("adder-analytics", 1, adder_analytics);
  criterion("exact-decomposition", 120, exact_decomposition);
  criterion("tv-decay", 600, tv_decay);
  criterion("lemma-dominance", 600, lemma_dominance);
  criterion("renyi-oracle", 300, renyi_oracle);
  criterion("berry-esseen", 60, berry_esseen);
  criterion("second-order-formulas", 1, second_order);
  criterion("region-oracle", 60, region);
  criterion("determinism", 600, determinism);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
