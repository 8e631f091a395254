#pragma once

#include <span>
#include <string>
#include <vector>

#include "macres/channel.hpp"
#include "macres/codebook.hpp"
#include "macres/info_measures.hpp"

namespace macres {

// Which corner of the rate region the typical sets are built for. Corner A
// conditions the first transmitter on the second (T1 uses i(x;z|y), T2 uses
// i(y;z)); corner B swaps the roles of X and Y.
enum class Corner { A, B };

Corner parse_corner(std::string_view s);
std::string_view to_string(Corner c);

struct TypParams {
  double eps1 = 0.1;  // slack of the conditional set T1
  double eps2 = 0.1;  // slack of the marginal set T2
  int n = 1;
  Corner corner = Corner::A;

  void validate() const;
};

enum class TypicalSet { T1, T2 };

DensityVariant typical_set_variant(TypicalSet which, Corner corner);

// Half-L1 distance between two mass functions on the same index set.
double total_variation(const DistVector& p, const DistVector& q);
// Same quantity computed as sum of positive parts.
double total_variation_positive_part(const DistVector& p, const DistVector& q);

// T1: i(x^n;z^n|y^n) <= n(I(X;Z|Y) + eps1); T2: i(y^n;z^n) <= n(I(Y;Z) + eps2),
// with roles swapped for corner B. Off-support triples are never typical.
bool is_typical(const JointDist& joint, const TypParams& params, TypicalSet which,
                std::span<const int> x, std::span<const int> y, std::span<const int> z);

// Exact total variation of one codebook draw, split into the atypical masses
// and the excess of the typical part over the target law.
struct TvDecomposition {
  double tv = 0.0;          // sum of positive parts
  double tv_half_l1 = 0.0;  // half L1 norm, must agree with tv
  double p_atyp1 = 0.0;
  double p_atyp2 = 0.0;
  double typ_excess = 0.0;  // sum_z max(typical mass(z) - q(z), 0)
  double induced_mass = 0.0;

  double rhs() const { return p_atyp1 + p_atyp2 + typ_excess; }
  bool inequality_holds(double slack = 1e-12) const { return tv <= rhs() + slack; }
};

// Throws Error if the computed terms violate tv <= rhs within 1e-12, if the
// two TV formulas disagree by more than 1e-12, or if the induced mass is off
// by more than 1e-9.
TvDecomposition decompose_tv(const ChannelSpec& ch, const CodebookPair& cb,
                             const TypParams& params, const EnumerationBudget& budget = {});

// Exact P((X^n,Y^n,Z^n) not in T) for the set built from `variant` with
// slack eps, obtained by summing over letter-count compositions.
double atypicality_probability(const JointDist& joint, DensityVariant variant, double eps, int n);

// Rate region: convex closure of the two corner regions, described by
// R1 >= I(X;Z), R2 >= I(Y;Z), R1 + R2 >= I(X,Y;Z).
struct RegionCheck {
  bool member = false;
  std::vector<std::string> violated;  // "r1-min", "r2-min", "sum-rate"
  std::string binding;                // tightest constraint
  double margin = 0.0;                // smallest constraint slack
};

RegionCheck region_check(const InfoQuantities& iq, double r1, double r2, bool strict);
bool first_order_region(const InfoQuantities& iq, double r1, double r2, bool strict);

}  // namespace macres
