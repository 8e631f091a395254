#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "macres/channel.hpp"

namespace macres {

// Which single-letter information density is meant.
//   CondXGivenY: i(x;z|y) = log W(z|x,y) / q(z|y)
//   MarginalY:   i(y;z)   = log q(z|y) / q(z)
//   MarginalX:   i(x;z)   = log q(z|x) / q(z)
//   CondYGivenX: i(y;z|x) = log W(z|x,y) / q(z|x)
enum class DensityVariant { CondXGivenY, MarginalY, MarginalX, CondYGivenX };

std::string_view to_string(DensityVariant v);
DensityVariant parse_density_variant(std::string_view s);

struct MomentSummary {
  double mean = 0.0;      // nats
  double variance = 0.0;  // central second moment
  double third_abs = 0.0; // central absolute third moment
};

struct InfoQuantities {
  double i_xz_given_y = 0.0;
  double i_yz = 0.0;
  double i_xz = 0.0;
  double i_yz_given_x = 0.0;
  double sum_rate = 0.0;
};

// Information density of one symbol triple. Throws DomainError off the joint
// support.
double info_density(const JointDist& joint, DensityVariant variant, int x, int y, int z);

// Sum of single-letter densities over a sequence triple; +inf if any letter
// is off the support (the numerator vanishes while the triple is still
// queried). `x` is ignored for MarginalY and `y` for MarginalX.
double sequence_info_density(const JointDist& joint, DensityVariant variant,
                             std::span<const int> x, std::span<const int> y,
                             std::span<const int> z);

// Table of single-letter densities indexed [x][y][z]; entries off the joint
// support are +inf.
std::vector<double> density_table(const JointDist& joint, DensityVariant variant);

InfoQuantities mutual_informations(const JointDist& joint);
MomentSummary density_moments(const JointDist& joint, DensityVariant variant);
double mutual_information(const InfoQuantities& iq, DensityVariant variant);

// D_alpha(p || q) in nats. Returns +inf when alpha > 1 and p is not
// absolutely continuous with respect to q.
double renyi_divergence(const DistVector& p, const DistVector& q, double alpha);
double kl_divergence(const DistVector& p, const DistVector& q);

// The product reference measure a density compares against, as a pair of
// distributions over the (x,y,z) index space. For CondXGivenY this is
// q(x,y,z) versus qX qY q(z|y).
std::pair<DistVector, DistVector> density_measures(const JointDist& joint, DensityVariant variant);
double density_renyi_divergence(const JointDist& joint, DensityVariant variant, double alpha);

// Gaussian tail Q(a) = 1 - Phi(a) and its inverse.
double q_function(double a);
double q_inverse(double eps);
double normal_cdf(double a);

// Uniform Berry-Esseen deviation bound rho / (sigma^3 sqrt(n)).
double berry_esseen_delta(const MomentSummary& m, std::int64_t n);

struct BerryEsseenCheck {
  double max_deviation = 0.0;  // sup over the grid of |F_emp - Phi|
  double worst_point = 0.0;
  double delta = 0.0;          // berry_esseen_delta
  double slack = 0.0;          // 3 sqrt(0.25 / samples)
  bool holds = false;
};

// Draws `samples` sums of n i.i.d. single-letter densities under the joint,
// normalizes to (S - n mean) / (sigma sqrt(n)) and compares the empirical
// CDF with Phi on `grid`.
BerryEsseenCheck empirical_berry_esseen(const JointDist& joint, DensityVariant variant,
                                        std::int64_t n, std::int64_t samples,
                                        std::uint64_t seed, std::span<const double> grid);

}  // namespace macres
