#include "macres/resolvability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "enumerate.hpp"
#include "macres/errors.hpp"

namespace macres {

Corner parse_corner(std::string_view s) {
  if (s == "A" || s == "a") return Corner::A;
  if (s == "B" || s == "b") return Corner::B;
  throw ValidationError("corner must be A or B, got \"" + std::string(s) + "\"");
}

std::string_view to_string(Corner c) { return c == Corner::A ? "A" : "B"; }

void TypParams::validate() const {
  if (!(eps1 > 0.0) || !(eps2 > 0.0)) throw DomainError("typical-set slacks must be positive");
  if (n < 1) throw DomainError("block length must be >= 1");
}

DensityVariant typical_set_variant(TypicalSet which, Corner corner) {
  if (corner == Corner::A) {
    return which == TypicalSet::T1 ? DensityVariant::CondXGivenY : DensityVariant::MarginalY;
  }
  return which == TypicalSet::T1 ? DensityVariant::CondYGivenX : DensityVariant::MarginalX;
}

double total_variation(const DistVector& p, const DistVector& q) {
  if (p.size() != q.size()) throw DomainError("total variation: index sets differ");
  CompensatedSum acc;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc.value();
}

double total_variation_positive_part(const DistVector& p, const DistVector& q) {
  if (p.size() != q.size()) throw DomainError("total variation: index sets differ");
  CompensatedSum acc;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::max(p[i] - q[i], 0.0);
  return acc.value();
}

bool is_typical(const JointDist& joint, const TypParams& params, TypicalSet which,
                std::span<const int> x, std::span<const int> y, std::span<const int> z) {
  const auto variant = typical_set_variant(which, params.corner);
  const auto iq = mutual_informations(joint);
  const double eps = which == TypicalSet::T1 ? params.eps1 : params.eps2;
  const double density = sequence_info_density(joint, variant, x, y, z);
  const double n = static_cast<double>(z.size());
  return density <= n * (mutual_information(iq, variant) + eps);
}

TvDecomposition decompose_tv(const ChannelSpec& ch, const CodebookPair& cb,
                             const TypParams& params, const EnumerationBudget& budget) {
  params.validate();
  if (params.n != cb.n()) throw DomainError("typical-set block length differs from codebook");
  check_enumeration_budget(ch, cb, budget);

  const JointDist joint(ch);
  const auto iq = mutual_informations(joint);
  const auto v1 = typical_set_variant(TypicalSet::T1, params.corner);
  const auto v2 = typical_set_variant(TypicalSet::T2, params.corner);
  detail::TypicalityTables typ;
  typ.first = density_table(joint, v1);
  typ.second = density_table(joint, v2);
  typ.first_threshold = cb.n() * (mutual_information(iq, v1) + params.eps1);
  typ.second_threshold = cb.n() * (mutual_information(iq, v2) + params.eps2);

  const auto masses = detail::accumulate_outputs(ch, cb, &typ, resolve_threads(budget.threads));
  const auto target = product_output_distribution(joint, cb.n(), budget);

  CompensatedSum tv, l1, a1, a2, excess, mass;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double p = masses.total[i], q = target[i];
    tv += std::max(p - q, 0.0);
    l1 += std::abs(p - q);
    a1 += masses.atyp1[i];
    a2 += masses.atyp2[i];
    excess += std::max(masses.typical[i] - q, 0.0);
    mass += p;
  }
  TvDecomposition d;
  d.tv = tv.value();
  d.tv_half_l1 = 0.5 * l1.value();
  d.p_atyp1 = a1.value();
  d.p_atyp2 = a2.value();
  d.typ_excess = excess.value();
  d.induced_mass = mass.value();

  std::ostringstream why;
  why.precision(17);
  if (std::abs(d.induced_mass - 1.0) > 1e-9) why << "induced mass " << d.induced_mass << "; ";
  if (std::abs(d.tv - d.tv_half_l1) > 1e-12) why << "tv formulas " << d.tv << " vs " << d.tv_half_l1 << "; ";
  if (!d.inequality_holds()) why << "tv " << d.tv << " > atypical+typical " << d.rhs() << "; ";
  if (!why.str().empty()) throw Error("decomposition check failed: " + why.str());
  return d;
}

namespace {

// Walks all compositions (c_0..c_{K-1}) of n over the support letters.
void compositions(std::span<const double> log_p, std::span<const double> dens, int n,
                  double threshold, std::size_t k, int remaining, double log_coef_and_prob,
                  double density, CompensatedSum& atypical) {
  if (k + 1 == log_p.size()) {
    const int c = remaining;
    const double lp = log_coef_and_prob - std::lgamma(c + 1.0) + c * log_p[k];
    const double d = density + c * dens[k];
    if (d > threshold) atypical += std::exp(lp);
    return;
  }
  for (int c = 0; c <= remaining; ++c) {
    compositions(log_p, dens, n, threshold, k + 1, remaining - c,
                 log_coef_and_prob - std::lgamma(c + 1.0) + c * log_p[k], density + c * dens[k],
                 atypical);
  }
}

}  // namespace

double atypicality_probability(const JointDist& joint, DensityVariant variant, double eps, int n) {
  if (n < 1) throw DomainError("block length must be >= 1");
  const auto table = density_table(joint, variant);
  const auto probs = joint.probs();
  std::vector<double> log_p, dens;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) {
      log_p.push_back(std::log(probs[i]));
      dens.push_back(table[i]);
    }
  }
  const double threshold = n * (density_moments(joint, variant).mean + eps);
  CompensatedSum atypical;
  compositions(log_p, dens, n, threshold, 0, n, std::lgamma(n + 1.0), 0.0, atypical);
  return std::clamp(atypical.value(), 0.0, 1.0);
}

RegionCheck region_check(const InfoQuantities& iq, double r1, double r2, bool strict) {
  constexpr double tol = 1e-12;
  struct Constraint {
    const char* name;
    double slack;
  };
  const Constraint cs[] = {{"r1-min", r1 - iq.i_xz},
                           {"r2-min", r2 - iq.i_yz},
                           {"sum-rate", r1 + r2 - iq.sum_rate}};
  RegionCheck rc;
  rc.member = true;
  rc.margin = kPosInf;
  for (const auto& c : cs) {
    const bool ok = strict ? c.slack > tol : c.slack >= -tol;
    if (!ok) {
      rc.member = false;
      rc.violated.emplace_back(c.name);
    }
    if (c.slack < rc.margin) {
      rc.margin = c.slack;
      rc.binding = c.name;
    }
  }
  return rc;
}

bool first_order_region(const InfoQuantities& iq, double r1, double r2, bool strict) {
  return region_check(iq, r1, r2, strict).member;
}

}  // namespace macres
