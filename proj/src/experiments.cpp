#include "macres/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "macres/errors.hpp"
#include "macres/rng.hpp"

namespace macres {

const char* const kCsvHeader =
    "seed,n,R1_nominal,R2_nominal,R1_eff,R2_eff,M1,M2,tv,p_atyp1,p_atyp2,typ_excess,eps1,eps2,"
    "bound_total,bound_vacuous_flag,runtime_ms";

void ExperimentConfig::validate() const {
  if (trials < 1) throw ValidationError("trials must be >= 1");
  if (ns.empty()) throw ValidationError("at least one block length is required");
  for (int n : ns) {
    if (n < 1) throw ValidationError("block lengths must be >= 1");
    if (std::pow(static_cast<double>(channel.size_z()), n) > static_cast<double>(budget.max_outputs)) {
      throw BudgetError("|Z|^n for n = " + std::to_string(n) + " exceeds the output budget");
    }
  }
  if (schedule == RateSchedule::SecondOrder || typ_policy == TypPolicy::SecondOrder) {
    if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("eps must lie in (0,1)");
    if (!(c > 1.0)) throw ValidationError("c must be > 1");
    if (!(d > 0.0 && d < c - 1.0)) throw ValidationError("d must lie in (0, c-1)");
  }
  if (typ_policy == TypPolicy::Fixed && (!(eps1 > 0.0) || !(eps2 > 0.0))) {
    throw ValidationError("eps1 and eps2 must be positive");
  }
  if (!(beta > 0.0)) throw ValidationError("beta must be positive");
}

std::uint64_t trial_seed(std::uint64_t master, int n, std::int64_t trial) {
  return derive_seed(master, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trial)});
}

TrialPlan plan_for(const ExperimentConfig& cfg, int n) {
  const JointDist joint(cfg.channel);
  TrialPlan plan;
  plan.rates.n = n;
  switch (cfg.schedule) {
    case RateSchedule::Fixed:
      plan.rates.r1 = cfg.r1;
      plan.rates.r2 = cfg.r2;
      break;
    case RateSchedule::CornerOffset: {
      const auto iq = mutual_informations(joint);
      const auto [i1, i2] = corner_point(iq, cfg.corner);
      plan.rates.r1 = i1 + cfg.r1;
      plan.rates.r2 = i2 + cfg.r2;
      break;
    }
    case RateSchedule::SecondOrder:
      plan.rates = second_order_plan(joint, cfg.eps, cfg.c, cfg.d, n, cfg.corner).rates;
      break;
  }
  if (cfg.typ_policy == TypPolicy::Fixed) {
    plan.typ = TypParams{cfg.eps1, cfg.eps2, n, cfg.corner};
  } else {
    plan.typ = second_order_plan(joint, cfg.eps, cfg.c, cfg.d, n, cfg.corner).typ;
  }
  return plan;
}

namespace {

double trial_bound(const ExperimentConfig& cfg, const JointDist& joint, const InfoQuantities& iq,
                   const CodebookPair& cb, const TypParams& typ, bool& vacuous) {
  BoundReport r;
  if (cfg.schedule == RateSchedule::SecondOrder) {
    r = second_order_plan(joint, cfg.eps, cfg.c, cfg.d, cb.n(), cfg.corner).report;
  } else {
    r = first_order_rhs(iq, cb.effective_r1(), cb.effective_r2(), cb.n(), typ.eps1, cfg.beta,
                        joint.size_x(), joint.size_y(), joint.size_z(), cfg.corner);
  }
  vacuous = r.vacuous;
  return r.total;
}

// Runs `job(i)` for i in [0, count) on up to `workers` threads; results are
// written by index so the output never depends on scheduling.
template <typename Job>
void parallel_for(std::size_t count, unsigned workers, Job job) {
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<TrialRecord> run_tv_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const JointDist joint(cfg.channel);
  const auto iq = mutual_informations(joint);

  std::vector<int> ns = cfg.ns;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::vector<TrialPlan> plans;
  for (int n : ns) plans.push_back(plan_for(cfg, n));

  const std::size_t per_n = static_cast<std::size_t>(cfg.trials);
  std::vector<TrialRecord> records(ns.size() * per_n);
  EnumerationBudget inner = cfg.budget;
  inner.threads = 1;

  parallel_for(records.size(), resolve_threads(cfg.workers), [&](std::size_t job) {
    const std::size_t ni = job / per_n;
    const auto trial = static_cast<std::int64_t>(job % per_n);
    const auto& plan = plans[ni];
    const auto start = std::chrono::steady_clock::now();

    TrialRecord rec;
    rec.n = ns[ni];
    rec.trial = trial;
    rec.seed = trial_seed(cfg.seed, rec.n, trial);
    const auto cb = sample_codebooks(cfg.channel, plan.rates, rec.seed, inner);
    const auto dec = decompose_tv(cfg.channel, cb, plan.typ, inner);
    rec.r1_nominal = plan.rates.r1;
    rec.r2_nominal = plan.rates.r2;
    rec.r1_eff = cb.effective_r1();
    rec.r2_eff = cb.effective_r2();
    rec.m1 = cb.m1();
    rec.m2 = cb.m2();
    rec.tv = dec.tv;
    rec.p_atyp1 = dec.p_atyp1;
    rec.p_atyp2 = dec.p_atyp2;
    rec.typ_excess = dec.typ_excess;
    rec.eps1 = plan.typ.eps1;
    rec.eps2 = plan.typ.eps2;
    rec.bound_total = trial_bound(cfg, joint, iq, cb, plan.typ, rec.bound_vacuous);
    if (cfg.record_runtime) {
      rec.runtime_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    }
    records[job] = rec;
  });
  return records;
}

namespace {

std::string policy_name(ThresholdPolicy p) {
  switch (p) {
    case ThresholdPolicy::FirstOrderTv: return "first-order-tv";
    case ThresholdPolicy::SecondOrderTv: return "second-order-tv";
    case ThresholdPolicy::LemmaAtypical: return "lemma-atypical";
    case ThresholdPolicy::LemmaTypical: return "lemma-typical";
  }
  return "?";
}

void finish_summary(ConcentrationSummary& s) {
  const double t = static_cast<double>(s.trials);
  s.frequency = static_cast<double>(s.exceedances) / t;
  s.vacuous = !(s.bound <= 1.0);
  const double b = std::clamp(s.bound, 0.0, 1.0);
  s.sigma = std::sqrt(b * (1.0 - b) / t);
  s.consistent = s.vacuous || s.frequency <= s.bound + 3.0 * s.sigma;
}

// Draws (y^n, z^n) letter by letter from q(y) q(z|y) (roles swapped for corner B).
std::pair<std::vector<int>, std::vector<int>> draw_condition(const JointDist& joint, Corner corner,
                                                             int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> cond(n), out(n);
  const bool a = corner == Corner::A;
  const int cond_size = a ? joint.size_y() : joint.size_x();
  std::vector<double> cond_law(cond_size), z_law(joint.size_z());
  for (int v = 0; v < cond_size; ++v) cond_law[v] = a ? joint.q_y(v) : joint.q_x(v);
  for (int k = 0; k < n; ++k) {
    cond[k] = rng.categorical(cond_law);
    for (int z = 0; z < joint.size_z(); ++z) {
      z_law[z] = a ? joint.q_z_given_y(z, cond[k]) : joint.q_z_given_x(z, cond[k]);
    }
    out[k] = rng.categorical(z_law);
  }
  return {cond, out};
}

}  // namespace

std::vector<ConcentrationSummary> run_concentration_check(const ExperimentConfig& cfg,
                                                          const ConcentrationRequest& req) {
  cfg.validate();
  const JointDist joint(cfg.channel);
  const auto iq = mutual_informations(joint);
  std::vector<ConcentrationSummary> out;

  for (int n : cfg.ns) {
    const TrialPlan plan = plan_for(cfg, n);
    ConcentrationSummary s;
    s.policy = policy_name(req.policy);
    s.n = n;
    s.trials = cfg.trials;
    const double delta = req.delta.value_or(1.0 / std::sqrt(static_cast<double>(n)));
    s.delta = delta;
    EnumerationBudget inner = cfg.budget;
    inner.threads = 1;
    std::vector<char> hit(static_cast<std::size_t>(cfg.trials), 0);

    switch (req.policy) {
      case ThresholdPolicy::FirstOrderTv:
      case ThresholdPolicy::SecondOrderTv: {
        // Bound and threshold are evaluated at the effective rates of one
        // draw; every draw at this n has the same codebook sizes.
        const auto probe = sample_codebooks(cfg.channel, plan.rates, trial_seed(cfg.seed, n, 0), inner);
        BoundReport r;
        if (req.policy == ThresholdPolicy::FirstOrderTv) {
          r = first_order_rhs(iq, probe.effective_r1(), probe.effective_r2(), n, plan.typ.eps1,
                              cfg.beta, joint.size_x(), joint.size_y(), joint.size_z(), cfg.corner);
        } else {
          r = second_order_plan(joint, cfg.eps, cfg.c, cfg.d, n, cfg.corner).report;
        }
        s.threshold = r.tv_threshold;
        s.bound = r.total;
        parallel_for(hit.size(), resolve_threads(cfg.workers), [&](std::size_t t) {
          const auto cb = sample_codebooks(cfg.channel, plan.rates, trial_seed(cfg.seed, n, t), inner);
          hit[t] = decompose_tv(cfg.channel, cb, plan.typ, inner).tv > s.threshold;
        });
        break;
      }
      case ThresholdPolicy::LemmaAtypical: {
        const auto variant = typical_set_variant(req.set, cfg.corner);
        const double eps = req.set == TypicalSet::T1 ? plan.typ.eps1 : plan.typ.eps2;
        s.mu = atypicality_probability(joint, variant, eps, n);
        s.threshold = s.mu * (1.0 + delta);
        const auto probe = sample_codebooks(cfg.channel, plan.rates, trial_seed(cfg.seed, n, 0), inner);
        // With mu = 0 no triple on the support is atypical and the mass is 0.
        s.bound = s.mu > 0.0 ? lemma_atypical_bound(s.mu, delta, probe.effective_r1(),
                                                    probe.effective_r2(), n)
                             : 0.0;
        parallel_for(hit.size(), resolve_threads(cfg.workers), [&](std::size_t t) {
          const auto cb = sample_codebooks(cfg.channel, plan.rates, trial_seed(cfg.seed, n, t), inner);
          const auto dec = decompose_tv(cfg.channel, cb, plan.typ, inner);
          const double mass = req.set == TypicalSet::T1 ? dec.p_atyp1 : dec.p_atyp2;
          hit[t] = mass > s.threshold;
        });
        break;
      }
      case ThresholdPolicy::LemmaTypical: {
        const bool a = cfg.corner == Corner::A;
        if (req.condition.empty() != req.output.empty()) {
          throw ValidationError("lemma-typical: give both the conditioning and output words or neither");
        }
        if (req.condition.empty()) {
          std::tie(s.condition, s.output) =
              draw_condition(joint, cfg.corner, n, derive_seed(cfg.seed, {0x7970ULL, static_cast<std::uint64_t>(n)}));
        } else {
          s.condition = req.condition;
          s.output = req.output;
          if (static_cast<int>(s.condition.size()) != n || static_cast<int>(s.output.size()) != n) {
            throw ValidationError("lemma-typical: words must have length n");
          }
        }
        const auto variant = typical_set_variant(TypicalSet::T1, cfg.corner);
        const double info = mutual_information(iq, variant);
        const double threshold = n * (info + plan.typ.eps1);
        // Conditional output law must be positive for the ratio to exist.
        for (int k = 0; k < n; ++k) {
          const double p = a ? joint.q_z_given_y(s.output[k], s.condition[k])
                             : joint.q_z_given_x(s.output[k], s.condition[k]);
          if (!(p > 0.0)) throw DomainError("lemma-typical: output word has zero conditional probability");
        }
        s.threshold = 1.0 + delta;
        const auto probe = sample_codebooks(cfg.channel, plan.rates, trial_seed(cfg.seed, n, 0), inner);
        const double rate = a ? probe.effective_r1() : probe.effective_r2();
        s.bound = lemma_typical_bound(info, plan.typ.eps1, rate, n, delta);
        parallel_for(hit.size(), resolve_threads(cfg.workers), [&](std::size_t t) {
          const auto cb = sample_codebooks(cfg.channel, plan.rates, trial_seed(cfg.seed, n, t), inner);
          const std::uint64_t m = a ? cb.m1() : cb.m2();
          CompensatedSum sum;
          for (std::uint64_t i = 0; i < m; ++i) {
            const auto word = a ? cb.x(i) : cb.y(i);
            const double dens = a ? sequence_info_density(joint, variant, word, s.condition, s.output)
                                  : sequence_info_density(joint, variant, s.condition, word, s.output);
            if (dens <= threshold) sum += std::exp(dens);
          }
          hit[t] = sum.value() / static_cast<double>(m) > s.threshold;
        });
        break;
      }
    }
    s.exceedances = std::count(hit.begin(), hit.end(), 1);
    finish_summary(s);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

void put_double(std::ostream& os, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  os.write(buf, res.ptr - buf);
}

}  // namespace

void write_results(const std::vector<TrialRecord>& records, std::ostream& os) {
  for (const auto& r : records) {
    if (!(r.tv <= r.p_atyp1 + r.p_atyp2 + r.typ_excess + 1e-12)) {
      throw Error("record (n=" + std::to_string(r.n) + ", seed=" + std::to_string(r.seed) +
                  ") violates the decomposition inequality");
    }
  }
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.seed << ',' << r.n << ',';
    for (double v : {r.r1_nominal, r.r2_nominal, r.r1_eff, r.r2_eff}) {
      put_double(os, v);
      os << ',';
    }
    os << r.m1 << ',' << r.m2 << ',';
    for (double v : {r.tv, r.p_atyp1, r.p_atyp2, r.typ_excess, r.eps1, r.eps2, r.bound_total}) {
      put_double(os, v);
      os << ',';
    }
    os << (r.bound_vacuous ? 1 : 0) << ',';
    put_double(os, r.runtime_ms);
    os << '\n';
  }
}

void write_results(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ostringstream buf;
  write_results(records, buf);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << buf.str();
  if (!out) throw Error("failed writing " + path);
}

namespace {

template <typename T>
T parse_field(std::string_view s, const char* name) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError(std::string("bad CSV value for ") + name + ": \"" + std::string(s) + "\"");
  }
  return v;
}

}  // namespace

std::vector<TrialRecord> read_results(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw ValidationError("CSV header mismatch");
  std::vector<TrialRecord> out;
  std::vector<std::string_view> f;
  int last_n = -1;
  std::int64_t trial = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    f.clear();
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      f.emplace_back(line.data() + start, (comma == std::string::npos ? line.size() : comma) - start);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 17) throw ValidationError("CSV row has " + std::to_string(f.size()) + " fields");
    TrialRecord r;
    r.seed = parse_field<std::uint64_t>(f[0], "seed");
    r.n = parse_field<int>(f[1], "n");
    r.r1_nominal = parse_field<double>(f[2], "R1_nominal");
    r.r2_nominal = parse_field<double>(f[3], "R2_nominal");
    r.r1_eff = parse_field<double>(f[4], "R1_eff");
    r.r2_eff = parse_field<double>(f[5], "R2_eff");
    r.m1 = parse_field<std::uint64_t>(f[6], "M1");
    r.m2 = parse_field<std::uint64_t>(f[7], "M2");
    r.tv = parse_field<double>(f[8], "tv");
    r.p_atyp1 = parse_field<double>(f[9], "p_atyp1");
    r.p_atyp2 = parse_field<double>(f[10], "p_atyp2");
    r.typ_excess = parse_field<double>(f[11], "typ_excess");
    r.eps1 = parse_field<double>(f[12], "eps1");
    r.eps2 = parse_field<double>(f[13], "eps2");
    r.bound_total = parse_field<double>(f[14], "bound_total");
    r.bound_vacuous = parse_field<int>(f[15], "bound_vacuous_flag") != 0;
    r.runtime_ms = parse_field<double>(f[16], "runtime_ms");
    trial = r.n == last_n ? trial + 1 : 0;
    last_n = r.n;
    r.trial = trial;
    out.push_back(r);
  }
  return out;
}

std::vector<TrialRecord> read_results(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_results(in);
}

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<std::pair<int, double>> median_tv_by_n(const std::vector<TrialRecord>& records) {
  std::vector<int> ns;
  for (const auto& r : records) ns.push_back(r.n);
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::vector<std::pair<int, double>> out;
  for (int n : ns) {
    std::vector<double> tvs;
    for (const auto& r : records) {
      if (r.n == n) tvs.push_back(r.tv);
    }
    out.emplace_back(n, median(std::move(tvs)));
  }
  return out;
}

}  // namespace macres
