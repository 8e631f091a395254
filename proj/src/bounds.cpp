#include "macres/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "macres/errors.hpp"

namespace macres {

double BoundReport::param(std::string_view key) const {
  for (const auto& [k, v] : params) {
    if (k == key) return v;
  }
  throw DomainError("bound report has no parameter \"" + std::string(key) + "\"");
}

double BoundReport::term(std::string_view key) const {
  for (const auto& [k, v] : terms) {
    if (k == key) return v;
  }
  throw DomainError("bound report has no term \"" + std::string(key) + "\"");
}

namespace {

// JSON has no infinity; non-finite values are written as strings.
nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

nlohmann::ordered_json BoundReport::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind;
  for (const auto& [k, v] : params) j["param_" + k] = number(v);
  for (const auto& [k, v] : terms) j["term_" + k] = number(v);
  j["total"] = number(total);
  j["tv_threshold"] = number(tv_threshold);
  j["vacuous"] = vacuous;
  if (!notes.empty()) j["notes"] = notes;
  return j;
}

double hoeffding_bound(double mu, double delta) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw DomainError("hoeffding_bound: mu must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("hoeffding_bound: delta must lie in (0,1)");
  return std::exp(-(delta * delta / 3.0) * mu);
}

double janson_bound(std::int64_t n_terms, std::int64_t chi, double delta) {
  if (n_terms < 1) throw DomainError("janson_bound: need at least one term");
  if (chi < 1) throw DomainError("janson_bound: chi must be >= 1");
  if (!(delta > 0.0)) throw DomainError("janson_bound: delta must be positive");
  return std::exp(-2.0 * delta * delta / (static_cast<double>(chi) * static_cast<double>(n_terms)));
}

double lemma_typical_bound(double mutual_info, double eps, double rate, std::int64_t n,
                           double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("lemma_typical_bound: delta must lie in (0,1)");
  if (!(eps > 0.0)) throw DomainError("lemma_typical_bound: eps must be positive");
  if (n < 1) throw DomainError("lemma_typical_bound: n must be >= 1");
  const double mean_bound = std::exp(-static_cast<double>(n) * (mutual_info + eps - rate));
  return std::exp(-(delta * delta / 3.0) * mean_bound);
}

double lemma_atypical_bound(double mu, double delta, double r1, double r2, std::int64_t n) {
  if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("lemma_atypical_bound: mu must lie in (0,1]");
  if (!(delta > 0.0)) throw DomainError("lemma_atypical_bound: delta must be positive");
  if (n < 0) throw DomainError("lemma_atypical_bound: n must be >= 0");
  const double count = std::exp(static_cast<double>(n) * std::min(r1, r2));
  return std::exp(-2.0 * delta * delta * mu * mu * count);
}

std::vector<double> default_alpha_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 10; ++k) g.push_back(1.0 + std::ldexp(1.0, -k));
  g.push_back(1.5);
  g.push_back(2.0);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

double renyi_atypicality_exponent(const JointDist& joint, DensityVariant variant, double eps,
                                  double alpha) {
  if (!(alpha > 1.0)) throw DomainError("Renyi atypicality bound needs alpha > 1");
  const double info = density_moments(joint, variant).mean;
  const double div = density_renyi_divergence(joint, variant, alpha);
  return (alpha - 1.0) * (info + eps - div);
}

RenyiAtypicality renyi_atypicality_bound(const JointDist& joint, DensityVariant variant,
                                         double eps, int n, std::span<const double> alpha_grid) {
  if (!(eps > 0.0)) throw DomainError("Renyi atypicality bound needs eps > 0");
  if (n < 1) throw DomainError("block length must be >= 1");
  if (alpha_grid.empty()) throw DomainError("empty alpha grid");
  const double info = density_moments(joint, variant).mean;
  RenyiAtypicality out;
  out.beta_sup = kNegInf;
  for (double a : alpha_grid) {
    if (!(a > 1.0)) throw DomainError("alpha grid must lie in (1, inf)");
    AlphaEvaluation ev;
    ev.alpha = a;
    ev.divergence = density_renyi_divergence(joint, variant, a);
    ev.exponent = (a - 1.0) * (info + eps - ev.divergence);
    out.grid.push_back(ev);
    if (ev.exponent > out.beta_sup) {
      out.beta_sup = ev.exponent;
      out.best_alpha = a;
    }
  }
  if (!(out.beta_sup > 0.0)) {
    throw DomainError("no alpha in the grid yields a positive exponent; eps too small");
  }
  out.beta = 0.5 * out.beta_sup;
  out.bound = std::exp(-n * out.beta);
  out.chernoff = std::exp(-n * out.beta_sup);
  return out;
}

EpsBetaGrid EpsBetaGrid::defaults() {
  EpsBetaGrid g;
  for (int i = 1; i <= 30; ++i) g.eps.push_back(i / 100.0);
  const double lo = std::log(0.001), hi = std::log(0.1);
  for (int i = 0; i < 20; ++i) g.beta.push_back(std::exp(lo + (hi - lo) * i / 19.0));
  return g;
}

double FirstOrderExponents::min() const { return std::min({pair, first, second}); }

std::pair<double, double> corner_point(const InfoQuantities& iq, Corner corner) {
  if (corner == Corner::A) return {iq.i_xz_given_y, iq.i_yz};
  return {iq.i_xz, iq.i_yz_given_x};
}

FirstOrderExponents first_order_exponents(const InfoQuantities& iq, double r1, double r2,
                                          double eps, double beta, Corner corner) {
  FirstOrderExponents e;
  e.pair = std::min(r1, r2) - 2.0 * beta;
  if (corner == Corner::A) {
    e.first = r1 - 2.0 * beta - eps - iq.i_xz_given_y;
    e.second = r2 - 2.0 * beta - eps - iq.i_yz;
  } else {
    // Conditional set belongs to the second transmitter.
    e.first = r2 - 2.0 * beta - eps - iq.i_yz_given_x;
    e.second = r1 - 2.0 * beta - eps - iq.i_xz;
  }
  return e;
}

BoundReport first_order_rhs(const InfoQuantities& iq, double r1, double r2, int n, double eps,
                            double beta, int size_x, int size_y, int size_z, Corner corner) {
  if (n < 1) throw DomainError("block length must be >= 1");
  if (!(eps > 0.0) || !(beta > 0.0)) throw DomainError("eps and beta must be positive");
  const auto e = first_order_exponents(iq, r1, r2, eps, beta, corner);
  const double nn = n;
  const int cond_size = corner == Corner::A ? size_y : size_x;
  const double atyp = 2.0 * std::exp(-2.0 * std::exp(nn * e.pair));
  const double typ1 = std::exp(nn * (std::log(size_z) + std::log(cond_size)) -
                               std::exp(nn * e.first) / 3.0);
  const double typ2 = std::exp(nn * std::log(size_z) - std::exp(nn * e.second) / 3.0);

  BoundReport r;
  r.kind = "first-order";
  r.params = {{"n", nn}, {"R1", r1}, {"R2", r2}, {"eps", eps}, {"beta", beta},
              {"corner", corner == Corner::A ? 0.0 : 1.0},
              {"exponent_pair", e.pair}, {"exponent_first", e.first}, {"exponent_second", e.second},
              {"gamma1", beta / 2.0}, {"gamma2", e.min() / 2.0}};
  r.terms = {{"atypical", atyp}, {"typical_conditional", typ1}, {"typical_marginal", typ2}};
  r.total = atyp + typ1 + typ2;
  r.tv_threshold = 7.0 * std::exp(-nn * beta);
  r.vacuous = !(r.total <= 1.0);
  return r;
}

BoundReport first_order_certificate(const InfoQuantities& iq, double r1, double r2, int n,
                                    const EpsBetaGrid& grid, int size_x, int size_y, int size_z,
                                    Corner corner) {
  const auto [c1, c2] = corner_point(iq, corner);
  if (!(r1 > c1) || !(r2 > c2)) {
    throw DomainError("rates must lie strictly above the corner point (" + std::to_string(c1) +
                      ", " + std::to_string(c2) + ")");
  }
  if (grid.eps.empty() || grid.beta.empty()) throw DomainError("empty (eps, beta) grid");
  double best = kNegInf, best_eps = 0.0, best_beta = 0.0;
  for (double eps : grid.eps) {
    for (double beta : grid.beta) {
      const double score =
          std::min(beta, first_order_exponents(iq, r1, r2, eps, beta, corner).min());
      if (score > best) {
        best = score;
        best_eps = eps;
        best_beta = beta;
      }
    }
  }
  BoundReport r = first_order_rhs(iq, r1, r2, n, best_eps, best_beta, size_x, size_y, size_z, corner);
  r.kind = "first-order-certificate";
  r.params.emplace_back("score", best);
  if (!(best > 0.0)) r.notes.push_back("no grid point makes every exponent positive");
  return r;
}

std::pair<MomentSummary, MomentSummary> second_order_moments(const JointDist& joint, Corner corner) {
  if (corner == Corner::A) {
    return {density_moments(joint, DensityVariant::CondXGivenY),
            density_moments(joint, DensityVariant::MarginalY)};
  }
  return {density_moments(joint, DensityVariant::MarginalX),
          density_moments(joint, DensityVariant::CondYGivenX)};
}

RatePair second_order_rates(const InfoQuantities& iq, const MomentSummary& m1,
                            const MomentSummary& m2, double eps, double c, int n, Corner corner) {
  if (!(c > 1.0)) throw DomainError("second-order rates need c > 1");
  if (n < 1) throw DomainError("block length must be >= 1");
  if (m1.variance < 0.0 || m2.variance < 0.0) throw DomainError("negative variance");
  const double qinv = q_inverse(eps);
  const double nn = n;
  const double log_term = c * std::log(nn) / nn;
  const double i1 = corner == Corner::A ? iq.i_xz_given_y : iq.i_xz;
  const double i2 = corner == Corner::A ? iq.i_yz : iq.i_yz_given_x;
  return {i1 + std::sqrt(m1.variance / nn) * qinv + log_term,
          i2 + std::sqrt(m2.variance / nn) * qinv + log_term, n};
}

double second_order_eps_prime(const MomentSummary& m, double eps, double d, std::int64_t n) {
  if (!(d > 0.0)) throw DomainError("eps': d must be positive");
  if (!(m.variance > 0.0)) throw DomainError("eps': zero variance");
  if (n < 1) throw DomainError("block length must be >= 1");
  const double nn = static_cast<double>(n);
  const double shift = d * std::log(nn) / std::sqrt(nn * m.variance);
  return q_function(q_inverse(eps) + shift) + m.third_abs / (std::pow(m.variance, 1.5) * std::sqrt(nn));
}

TypParams second_order_typ_params(const MomentSummary& m1, const MomentSummary& m2, double eps,
                                  double d, int n) {
  if (!(d > 0.0)) throw DomainError("typical slacks: d must be positive");
  if (n < 1) throw DomainError("block length must be >= 1");
  const double qinv = q_inverse(eps);
  const double nn = n;
  TypParams p;
  p.n = n;
  p.eps1 = std::sqrt(m1.variance / nn) * qinv + d * std::log(nn) / nn;
  p.eps2 = std::sqrt(m2.variance / nn) * qinv + d * std::log(nn) / nn;
  return p;
}

BoundReport second_order_rhs(double eps_prime1, double eps_prime2, double r1, double r2,
                             std::int64_t n, double c, double d, int size_y, int size_z) {
  if (!(c > 1.0)) throw DomainError("second-order bound needs c > 1");
  if (!(d > 0.0 && d < c - 1.0)) {
    throw DomainError("second-order bound needs d in (0, c-1); got d = " + std::to_string(d) +
                      ", c = " + std::to_string(c));
  }
  if (n < 1) throw DomainError("block length must be >= 1");
  const double nn = static_cast<double>(n);
  const double e2 = std::min(eps_prime1 * eps_prime1, eps_prime2 * eps_prime2);
  const double atyp = 2.0 * std::exp(-(2.0 * e2 / nn) * std::exp(nn * std::min(r1, r2)));
  const double typ = 2.0 * std::exp(nn * (std::log(size_z) + std::log(size_y)) -
                                    std::pow(nn, c - d - 1.0) / 3.0);
  BoundReport r;
  r.kind = "second-order";
  r.params = {{"n", nn}, {"R1", r1}, {"R2", r2}, {"c", c}, {"d", d},
              {"eps_prime1", eps_prime1}, {"eps_prime2", eps_prime2}};
  r.terms = {{"atypical", atyp}, {"typical", typ}};
  r.total = atyp + typ;
  r.tv_threshold = (eps_prime1 + eps_prime2) * (1.0 + 1.0 / std::sqrt(nn)) + 3.0 / std::sqrt(nn);
  r.vacuous = !(r.total <= 1.0);
  if (atyp > 1.0) r.notes.push_back("atypical term vacuous");
  if (typ > 1.0) r.notes.push_back("typical term vacuous");
  return r;
}

SecondOrderPlan second_order_plan(const JointDist& joint, double eps, double c, double d, int n,
                                  Corner corner) {
  const auto iq = mutual_informations(joint);
  const auto [m1, m2] = second_order_moments(joint, corner);
  SecondOrderPlan plan;
  plan.rates = second_order_rates(iq, m1, m2, eps, c, n, corner);

  // Slacks follow the rate they belong to; T1 is the conditional set.
  const auto slacks = second_order_typ_params(m1, m2, eps, d, n);
  plan.typ = slacks;
  plan.typ.corner = corner;
  if (corner == Corner::B) std::swap(plan.typ.eps1, plan.typ.eps2);

  auto eps_prime = [&](const MomentSummary& m, bool& degenerate) {
    if (m.variance > 0.0) return second_order_eps_prime(m, eps, d, n);
    degenerate = true;
    return 0.0;
  };
  plan.eps_prime1 = eps_prime(m1, plan.degenerate1);
  plan.eps_prime2 = eps_prime(m2, plan.degenerate2);

  const int side = corner == Corner::A ? joint.size_y() : joint.size_x();
  // A degenerate component has no atypical mass, so its deviation event is
  // empty; only the other component enters the atypical term.
  const double a1 = plan.degenerate1 ? plan.eps_prime2 : plan.eps_prime1;
  const double a2 = plan.degenerate2 ? plan.eps_prime1 : plan.eps_prime2;
  plan.report = second_order_rhs(a1, a2, plan.rates.r1, plan.rates.r2, n, c, d, side, joint.size_z());
  if (plan.degenerate1 || plan.degenerate2) {
    if (plan.degenerate1 && plan.degenerate2) {
      plan.report.total -= plan.report.term("atypical");
      plan.report.terms[0].second = 0.0;
    }
    for (auto& [k, v] : plan.report.params) {
      if (k == "eps_prime1") v = plan.eps_prime1;
      if (k == "eps_prime2") v = plan.eps_prime2;
    }
    const double rn = std::sqrt(static_cast<double>(n));
    plan.report.tv_threshold = (plan.eps_prime1 + plan.eps_prime2) * (1.0 + 1.0 / rn) + 3.0 / rn;
    plan.report.vacuous = !(plan.report.total <= 1.0);
  }
  plan.report.params.emplace_back("eps", eps);
  plan.report.params.emplace_back("eps1", plan.typ.eps1);
  plan.report.params.emplace_back("eps2", plan.typ.eps2);
  plan.report.params.emplace_back("corner", corner == Corner::A ? 0.0 : 1.0);
  if (plan.degenerate1) plan.report.notes.push_back("rate-1 density has zero variance; eps'1 = 0");
  if (plan.degenerate2) plan.report.notes.push_back("rate-2 density has zero variance; eps'2 = 0");
  return plan;
}

}  // namespace macres
