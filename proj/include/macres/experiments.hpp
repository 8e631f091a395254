#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "macres/bounds.hpp"
#include "macres/channel.hpp"
#include "macres/codebook.hpp"
#include "macres/resolvability.hpp"

namespace macres {

enum class RateSchedule {
  Fixed,         // (r1, r2) as given
  CornerOffset,  // corner point of `corner` plus (r1, r2)
  SecondOrder,   // second-order rates from (eps, c, d, corner)
};

enum class TypPolicy {
  Fixed,        // eps1 / eps2 as given
  SecondOrder,  // slacks from the second-order choice at each n
};

struct ExperimentConfig {
  ChannelSpec channel = adder_mac();
  RateSchedule schedule = RateSchedule::Fixed;
  double r1 = 0.0;
  double r2 = 0.0;
  double eps = 0.1;  // target probability for the second-order schedule
  double c = 1.5;
  double d = 0.25;
  Corner corner = Corner::A;
  std::vector<int> ns{2, 4};
  int trials = 10;
  std::uint64_t seed = 1;
  TypPolicy typ_policy = TypPolicy::Fixed;
  double eps1 = 0.1;
  double eps2 = 0.1;
  double beta = 0.01;            // first-order bound parameter
  bool record_runtime = false;   // runtime_ms is 0 unless set
  unsigned workers = 0;          // 0 = hardware concurrency
  EnumerationBudget budget{};
  std::string output_path;

  void validate() const;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  int n = 0;
  std::int64_t trial = 0;
  double r1_nominal = 0.0;
  double r2_nominal = 0.0;
  double r1_eff = 0.0;
  double r2_eff = 0.0;
  std::uint64_t m1 = 0;
  std::uint64_t m2 = 0;
  double tv = 0.0;
  double p_atyp1 = 0.0;
  double p_atyp2 = 0.0;
  double typ_excess = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double bound_total = 0.0;
  bool bound_vacuous = false;
  double runtime_ms = 0.0;
};

// Per-trial seed; independent of how trials are spread over workers.
std::uint64_t trial_seed(std::uint64_t master, int n, std::int64_t trial);

// Nominal rates and typical-set parameters used for block length n.
struct TrialPlan {
  RatePair rates;
  TypParams typ;
};
TrialPlan plan_for(const ExperimentConfig& cfg, int n);

// Samples and decomposes every (n, trial); records sorted by (n, trial).
std::vector<TrialRecord> run_tv_sweep(const ExperimentConfig& cfg);

enum class ThresholdPolicy {
  FirstOrderTv,   // P(tv > 7 exp(-n beta)) vs the first-order union bound
  SecondOrderTv,  // P(tv > second-order threshold) vs the second-order bound
  LemmaAtypical,  // P(P_atyp > mu (1 + delta)) vs the atypical-term lemma
  LemmaTypical,   // P(typical sum > 1 + delta) vs the typical-term lemma
};

struct ConcentrationRequest {
  ThresholdPolicy policy = ThresholdPolicy::FirstOrderTv;
  TypicalSet set = TypicalSet::T1;        // LemmaAtypical: which atypical mass
  std::optional<double> delta;            // unset: 1/sqrt(n) for the lemmas
  // LemmaTypical: fixed (y^n, z^n); drawn from the joint when empty.
  std::vector<int> condition;
  std::vector<int> output;
};

struct ConcentrationSummary {
  std::string policy;
  int n = 0;
  std::int64_t trials = 0;
  std::int64_t exceedances = 0;
  double frequency = 0.0;
  double threshold = 0.0;
  double bound = 0.0;
  double sigma = 0.0;  // sqrt(b(1-b)/trials) at the clamped bound b
  double delta = 0.0;
  double mu = 0.0;     // LemmaAtypical: exact atypicality probability
  bool vacuous = false;
  bool consistent = false;  // vacuous, or frequency <= bound + 3 sigma
  std::vector<int> condition;
  std::vector<int> output;
};

std::vector<ConcentrationSummary> run_concentration_check(const ExperimentConfig& cfg,
                                                          const ConcentrationRequest& req);

// CSV with the fixed column order; header only for an empty list. Re-checks
// the decomposition inequality of every record before writing.
void write_results(const std::vector<TrialRecord>& records, std::ostream& os);
void write_results(const std::vector<TrialRecord>& records, const std::string& path);
std::vector<TrialRecord> read_results(std::istream& is);
std::vector<TrialRecord> read_results(const std::string& path);

extern const char* const kCsvHeader;

double median(std::vector<double> values);
// Median TV per n, in ascending n.
std::vector<std::pair<int, double>> median_tv_by_n(const std::vector<TrialRecord>& records);

}  // namespace macres
