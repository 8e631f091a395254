#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "macres/channel.hpp"

namespace macres {

// Work limits for exact enumeration over codeword pairs and output words.
struct EnumerationBudget {
  std::uint64_t max_pairs = 10'000'000;     // M1 * M2
  std::uint64_t max_outputs = 1'000'000;    // |Z|^n
  double max_work = 1e10;                   // M1 * M2 * |Z|^n * n
  unsigned threads = 0;                     // 0 = hardware concurrency
};

struct RatePair {
  double r1 = 0.0;  // nats per channel use
  double r2 = 0.0;
  int n = 1;

  void validate() const;
};

// Number of codewords for rate r at block length n: ceil(exp(n r)).
std::uint64_t codebook_size(double rate, int n, std::uint64_t cap);

class CodebookPair {
 public:
  CodebookPair(int n, std::vector<int> c1, std::vector<int> c2, std::uint64_t m1,
               std::uint64_t m2, RatePair nominal, std::uint64_t seed);

  int n() const { return n_; }
  std::uint64_t m1() const { return m1_; }
  std::uint64_t m2() const { return m2_; }
  std::span<const int> x(std::uint64_t m) const { return {c1_.data() + m * n_, static_cast<std::size_t>(n_)}; }
  std::span<const int> y(std::uint64_t m) const { return {c2_.data() + m * n_, static_cast<std::size_t>(n_)}; }
  std::span<const int> c1() const { return c1_; }
  std::span<const int> c2() const { return c2_; }

  const RatePair& nominal() const { return nominal_; }
  double effective_r1() const;
  double effective_r2() const;
  RatePair effective() const { return {effective_r1(), effective_r2(), n_}; }
  std::uint64_t seed() const { return seed_; }

 private:
  int n_;
  std::vector<int> c1_;  // M1 x n, row-major
  std::vector<int> c2_;  // M2 x n
  std::uint64_t m1_;
  std::uint64_t m2_;
  RatePair nominal_;
  std::uint64_t seed_;
};

// Every symbol of every codeword is drawn i.i.d. from qX (resp. qY). Row m of
// C1 uses the stream split(1).split(m), row m of C2 split(2).split(m).
CodebookPair sample_codebooks(const ChannelSpec& ch, const RatePair& rates, std::uint64_t seed,
                              const EnumerationBudget& budget = {});

// Builds a codebook pair from explicit codeword lists, for tests and dumps.
CodebookPair make_codebooks(const ChannelSpec& ch, int n, std::vector<std::vector<int>> c1,
                            std::vector<std::vector<int>> c2);

// Throws BudgetError if exhaustive evaluation over Z^n would exceed `budget`.
void check_enumeration_budget(const ChannelSpec& ch, const CodebookPair& cb,
                              const EnumerationBudget& budget);

DistVector induced_output_distribution(const ChannelSpec& ch, const CodebookPair& cb,
                                       const EnumerationBudget& budget = {});
double induced_point_prob(const ChannelSpec& ch, const CodebookPair& cb, std::span<const int> z);

// Product law q_Z^{(x)n} over Z^n.
DistVector product_output_distribution(const JointDist& joint, int n,
                                       const EnumerationBudget& budget = {});

// Plain-text codebook dump: a header of `key value` lines followed by the
// C1 and C2 symbol rows.
void write_codebooks(std::ostream& os, const CodebookPair& cb);
CodebookPair read_codebooks(std::istream& is, const ChannelSpec& ch);

unsigned resolve_threads(unsigned requested);

}  // namespace macres
