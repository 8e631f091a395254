#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "macres/info_measures.hpp"
#include "macres/resolvability.hpp"

namespace macres {

// Evaluated closed-form bound with the parameters it was evaluated at.
// Values above 1 are kept as computed and flagged vacuous.
struct BoundReport {
  std::string kind;
  std::vector<std::pair<std::string, double>> params;
  std::vector<std::pair<std::string, double>> terms;
  double total = 0.0;
  double tv_threshold = 0.0;  // the TV level whose exceedance the bound controls
  bool vacuous = false;
  std::vector<std::string> notes;

  double param(std::string_view key) const;
  double term(std::string_view key) const;
  double clamped_total() const { return total > 1.0 ? 1.0 : total; }
  // Flat key-value record: kind, param_*, term_*, total, tv_threshold, vacuous.
  nlohmann::ordered_json to_json() const;
};

// Chernoff-Hoeffding: P(A > mu(1+delta)) <= exp(-(delta^2/3) mu), 0 < delta < 1.
double hoeffding_bound(double mu, double delta);
// Janson with chi independent classes: P(A >= EA + delta) <= exp(-2 delta^2 / (chi n)).
double janson_bound(std::int64_t n_terms, std::int64_t chi, double delta);

// Typical-term lemma: exp(-(delta^2/3) exp(-n(I + eps - R))).
double lemma_typical_bound(double mutual_info, double eps, double rate, std::int64_t n, double delta);
// Atypical-term lemma: exp(-2 delta^2 mu^2 exp(n min(R1,R2))).
double lemma_atypical_bound(double mu, double delta, double r1, double r2, std::int64_t n);

// Renyi-based tail bound on P(not typical).
struct AlphaEvaluation {
  double alpha = 0.0;
  double divergence = 0.0;  // D_alpha of the joint from the reference product
  double exponent = 0.0;    // (alpha-1)(I + eps - D_alpha)
};

struct RenyiAtypicality {
  double best_alpha = 0.0;
  double beta_sup = 0.0;  // best exponent; any beta below it is admissible
  double beta = 0.0;      // beta_sup / 2
  double bound = 0.0;     // exp(-n beta)
  double chernoff = 0.0;  // exp(-n beta_sup)
  std::vector<AlphaEvaluation> grid;
};

std::vector<double> default_alpha_grid();
double renyi_atypicality_exponent(const JointDist& joint, DensityVariant variant, double eps,
                                  double alpha);
// Throws DomainError when no grid order yields a positive exponent.
RenyiAtypicality renyi_atypicality_bound(const JointDist& joint, DensityVariant variant,
                                         double eps, int n, std::span<const double> alpha_grid);

// ---- first order ---------------------------------------------------------

struct EpsBetaGrid {
  std::vector<double> eps;
  std::vector<double> beta;

  // eps in {0.01, ..., 0.30} step 0.01, beta log-spaced over [0.001, 0.1] (20 points).
  static EpsBetaGrid defaults();
};

// The three quantities that must be positive: min(R1,R2) - 2 beta,
// R1 - 2 beta - eps - I1, R2 - 2 beta - eps - I2.
struct FirstOrderExponents {
  double pair = 0.0;
  double first = 0.0;
  double second = 0.0;

  double min() const;
};

// Rate thresholds (for R1, for R2) of the given corner: (I(X;Z|Y), I(Y;Z)) for A,
// (I(X;Z), I(Y;Z|X)) for B.
std::pair<double, double> corner_point(const InfoQuantities& iq, Corner corner);

FirstOrderExponents first_order_exponents(const InfoQuantities& iq, double r1, double r2,
                                          double eps, double beta, Corner corner = Corner::A);

// Three union-bound terms at fixed (eps, beta) and TV threshold 7 exp(-n beta).
// For corner B the |Y|^n factor becomes |X|^n and the rate roles swap.
BoundReport first_order_rhs(const InfoQuantities& iq, double r1, double r2, int n, double eps,
                            double beta, int size_x, int size_y, int size_z,
                            Corner corner = Corner::A);

// Grid search for (eps, beta) maximizing min(beta, exponents); requires the
// rates strictly above the corner point.
BoundReport first_order_certificate(const InfoQuantities& iq, double r1, double r2, int n,
                                    const EpsBetaGrid& grid, int size_x, int size_y, int size_z,
                                    Corner corner = Corner::A);

// ---- second order --------------------------------------------------------

// R_k = I_k + sqrt(V_k/n) Qinv(eps) + c log(n)/n. `m1`, `m2` must be the
// moments matching the corner (see second_order_moments).
RatePair second_order_rates(const InfoQuantities& iq, const MomentSummary& m1,
                            const MomentSummary& m2, double eps, double c, int n, Corner corner);
std::pair<MomentSummary, MomentSummary> second_order_moments(const JointDist& joint, Corner corner);

// Q(Qinv(eps) + d log(n) / sqrt(n V)) + rho / (V^{3/2} sqrt(n)).
double second_order_eps_prime(const MomentSummary& m, double eps, double d, std::int64_t n);

// Typical-set slacks eps_k = sqrt(V_k/n) Qinv(eps) + d log(n)/n.
TypParams second_order_typ_params(const MomentSummary& m1, const MomentSummary& m2, double eps,
                                  double d, int n);

// 2 exp(-(2 min(e1^2, e2^2)/n) exp(n min(R1,R2)))
//   + 2 exp(n(log|Z| + log|Y|) - n^{c-d-1}/3),
// TV threshold (e1 + e2)(1 + 1/sqrt(n)) + 3/sqrt(n). Requires d in (0, c-1).
BoundReport second_order_rhs(double eps_prime1, double eps_prime2, double r1, double r2,
                             std::int64_t n, double c, double d, int size_y, int size_z);

// Everything the second-order statement needs at one block length. A
// component whose density is constant on the support (zero variance) has
// exact atypicality probability 0 once its slack is positive; its eps' is
// then taken as 0 and the component is flagged degenerate.
struct SecondOrderPlan {
  RatePair rates;
  TypParams typ;
  double eps_prime1 = 0.0;
  double eps_prime2 = 0.0;
  bool degenerate1 = false;
  bool degenerate2 = false;
  BoundReport report;
};

SecondOrderPlan second_order_plan(const JointDist& joint, double eps, double c, double d, int n,
                                  Corner corner);

}  // namespace macres
