#include "macres/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "enumerate.hpp"
#include "macres/errors.hpp"
#include "macres/rng.hpp"

namespace macres {

void RatePair::validate() const {
  if (!(r1 >= 0.0) || !(r2 >= 0.0) || !std::isfinite(r1) || !std::isfinite(r2)) {
    throw DomainError("rates must be finite and nonnegative");
  }
  if (n < 1) throw DomainError("block length must be >= 1");
}

std::uint64_t codebook_size(double rate, int n, std::uint64_t cap) {
  const double log_m = rate * n;
  if (log_m > std::log(static_cast<double>(cap)) + 1.0) {
    throw BudgetError("codebook of size exp(" + std::to_string(log_m) + ") exceeds budget");
  }
  const double m = std::exp(log_m);
  // Round down values that are an integer up to floating-point noise.
  const double nearest = std::round(m);
  if (std::abs(m - nearest) <= 1e-9 * nearest) return static_cast<std::uint64_t>(nearest);
  return static_cast<std::uint64_t>(std::ceil(m));
}

CodebookPair::CodebookPair(int n, std::vector<int> c1, std::vector<int> c2, std::uint64_t m1,
                           std::uint64_t m2, RatePair nominal, std::uint64_t seed)
    : n_(n), c1_(std::move(c1)), c2_(std::move(c2)), m1_(m1), m2_(m2), nominal_(nominal), seed_(seed) {
  if (n_ < 1) throw DomainError("block length must be >= 1");
  if (m1_ < 1 || m2_ < 1) throw DomainError("codebooks must be nonempty");
  if (c1_.size() != m1_ * n_ || c2_.size() != m2_ * n_) {
    throw ValidationError("codeword array size does not match M x n");
  }
}

double CodebookPair::effective_r1() const { return std::log(static_cast<double>(m1_)) / n_; }
double CodebookPair::effective_r2() const { return std::log(static_cast<double>(m2_)) / n_; }

CodebookPair sample_codebooks(const ChannelSpec& ch, const RatePair& rates, std::uint64_t seed,
                              const EnumerationBudget& budget) {
  rates.validate();
  const std::uint64_t m1 = codebook_size(rates.r1, rates.n, budget.max_pairs);
  const std::uint64_t m2 = codebook_size(rates.r2, rates.n, budget.max_pairs);
  if (static_cast<double>(m1) * static_cast<double>(m2) > static_cast<double>(budget.max_pairs)) {
    throw BudgetError("M1*M2 = " + std::to_string(m1) + "*" + std::to_string(m2) +
                      " exceeds pair budget " + std::to_string(budget.max_pairs));
  }
  const int n = rates.n;
  const Rng root(seed);
  auto draw = [&](std::uint64_t m, std::uint64_t stream, std::span<const double> law) {
    std::vector<int> c(m * n);
    const Rng book = root.split(stream);
    for (std::uint64_t row = 0; row < m; ++row) {
      Rng r = book.split(row);
      for (int k = 0; k < n; ++k) c[row * n + k] = r.categorical(law);
    }
    return c;
  };
  return CodebookPair(n, draw(m1, 1, ch.q_x()), draw(m2, 2, ch.q_y()), m1, m2, rates, seed);
}

CodebookPair make_codebooks(const ChannelSpec& ch, int n, std::vector<std::vector<int>> c1,
                            std::vector<std::vector<int>> c2) {
  auto flatten = [n](const std::vector<std::vector<int>>& rows, int alphabet) {
    std::vector<int> out;
    for (const auto& r : rows) {
      if (static_cast<int>(r.size()) != n) throw ValidationError("codeword length != n");
      for (int s : r) {
        if (s < 0 || s >= alphabet) throw ValidationError("codeword symbol out of range");
      }
      out.insert(out.end(), r.begin(), r.end());
    }
    return out;
  };
  const auto m1 = c1.size(), m2 = c2.size();
  RatePair nominal{std::log(static_cast<double>(std::max<std::size_t>(m1, 1))) / n,
                   std::log(static_cast<double>(std::max<std::size_t>(m2, 1))) / n, n};
  return CodebookPair(n, flatten(c1, ch.size_x()), flatten(c2, ch.size_y()), m1, m2, nominal, 0);
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void check_enumeration_budget(const ChannelSpec& ch, const CodebookPair& cb,
                              const EnumerationBudget& budget) {
  const double outputs = std::pow(static_cast<double>(ch.size_z()), cb.n());
  if (outputs > static_cast<double>(budget.max_outputs)) {
    throw BudgetError("|Z|^n = " + std::to_string(outputs) + " exceeds output budget " +
                      std::to_string(budget.max_outputs));
  }
  const double pairs = static_cast<double>(cb.m1()) * static_cast<double>(cb.m2());
  if (pairs > static_cast<double>(budget.max_pairs)) {
    throw BudgetError("M1*M2 exceeds pair budget");
  }
  const double work = pairs * outputs * cb.n();
  if (work > budget.max_work) {
    throw BudgetError("M1*M2*|Z|^n*n = " + std::to_string(work) + " exceeds work budget");
  }
}

namespace detail {

namespace {

struct Accumulator {
  std::vector<double> sum, comp;
  explicit Accumulator(std::size_t size) : sum(size, 0.0), comp(size, 0.0) {}
  void add(std::size_t i, double v) {
    const double s = sum[i];
    const double t = s + v;
    if (std::abs(s) >= std::abs(v)) {
      comp[i] += (s - t) + v;
    } else {
      comp[i] += (v - t) + s;
    }
    sum[i] = t;
  }
  std::vector<double> finish(double scale) const {
    std::vector<double> out(sum.size());
    for (std::size_t i = 0; i < sum.size(); ++i) out[i] = (sum[i] + comp[i]) * scale;
    return out;
  }
};

struct Walker {
  const ChannelSpec& ch;
  const TypicalityTables* typ;
  std::span<const int> x;
  std::span<const int> y;
  int n;
  int size_y;
  int size_z;
  std::span<const double> log_w;  // [x][y][z]
  Accumulator* total;
  Accumulator* atyp1;
  Accumulator* atyp2;
  Accumulator* typical;

  void leaf(std::uint64_t idx, double logp, double s1, double s2) const {
    const double p = std::exp(logp);
    total->add(idx, p);
    if (!typ) return;
    const bool a1 = s1 > typ->first_threshold;
    const bool a2 = s2 > typ->second_threshold;
    if (a1) atyp1->add(idx, p);
    if (a2) atyp2->add(idx, p);
    if (!a1 && !a2) typical->add(idx, p);
  }

  void descend(int k, std::uint64_t idx, double logp, double s1, double s2) const {
    if (k == n) {
      leaf(idx, logp, s1, s2);
      return;
    }
    const std::size_t base = (static_cast<std::size_t>(x[k]) * size_y + y[k]) * size_z;
    for (int z = 0; z < size_z; ++z) {
      const double lw = log_w[base + z];
      if (lw == kNegInf) continue;
      const double t1 = typ ? s1 + typ->first[base + z] : 0.0;
      const double t2 = typ ? s2 + typ->second[base + z] : 0.0;
      descend(k + 1, idx * size_z + z, logp + lw, t1, t2);
    }
  }

  // Walks all words whose first `prefix_len` symbols equal `prefix`.
  void from_prefix(std::span<const int> prefix) const {
    double logp = 0.0, s1 = 0.0, s2 = 0.0;
    std::uint64_t idx = 0;
    for (std::size_t k = 0; k < prefix.size(); ++k) {
      const std::size_t i = (static_cast<std::size_t>(x[k]) * size_y + y[k]) * size_z + prefix[k];
      if (log_w[i] == kNegInf) return;
      logp += log_w[i];
      if (typ) {
        s1 += typ->first[i];
        s2 += typ->second[i];
      }
      idx = idx * size_z + prefix[k];
    }
    descend(static_cast<int>(prefix.size()), idx, logp, s1, s2);
  }
};

}  // namespace

OutputMasses accumulate_outputs(const ChannelSpec& ch, const CodebookPair& cb,
                                const TypicalityTables* typ, unsigned threads) {
  const int n = cb.n();
  const int sz = ch.size_z();
  const std::uint64_t outputs = checked_pow(sz, n);
  std::vector<double> log_w(ch.transition().size());
  for (std::size_t i = 0; i < log_w.size(); ++i) log_w[i] = safe_log(ch.transition()[i]);

  Accumulator total(outputs), atyp1(typ ? outputs : 0), atyp2(typ ? outputs : 0),
      typical(typ ? outputs : 0);

  // The z^n index range is split by prefix so that workers write disjoint
  // entries and every entry sums its pairs in the same order.
  int prefix_len = 0;
  std::uint64_t prefixes = 1;
  if (threads > 1) {
    while (prefix_len < n && prefixes < 8ULL * threads) {
      ++prefix_len;
      prefixes *= sz;
    }
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(threads, prefixes));

  auto run = [&](std::uint64_t first, std::uint64_t last) {
    std::vector<int> prefix(prefix_len);
    for (std::uint64_t m1 = 0; m1 < cb.m1(); ++m1) {
      for (std::uint64_t m2 = 0; m2 < cb.m2(); ++m2) {
        Walker w{ch, typ, cb.x(m1), cb.y(m2), n, ch.size_y(), sz, log_w,
                 &total, &atyp1, &atyp2, &typical};
        for (std::uint64_t p = first; p < last; ++p) {
          decode_index(p, sz, prefix);
          w.from_prefix(prefix);
        }
      }
    }
  };
  if (workers <= 1) {
    run(0, prefixes);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      const std::uint64_t first = prefixes * t / workers;
      const std::uint64_t last = prefixes * (t + 1) / workers;
      pool.emplace_back(run, first, last);
    }
    for (auto& th : pool) th.join();
  }

  const double scale = 1.0 / (static_cast<double>(cb.m1()) * static_cast<double>(cb.m2()));
  OutputMasses out;
  out.total = total.finish(scale);
  if (typ) {
    out.atyp1 = atyp1.finish(scale);
    out.atyp2 = atyp2.finish(scale);
    out.typical = typical.finish(scale);
  }
  return out;
}

}  // namespace detail

DistVector induced_output_distribution(const ChannelSpec& ch, const CodebookPair& cb,
                                       const EnumerationBudget& budget) {
  check_enumeration_budget(ch, cb, budget);
  auto masses = detail::accumulate_outputs(ch, cb, nullptr, resolve_threads(budget.threads));
  return DistVector{std::move(masses.total), cb.n(), ch.size_z()};
}

double induced_point_prob(const ChannelSpec& ch, const CodebookPair& cb, std::span<const int> z) {
  if (static_cast<int>(z.size()) != cb.n()) throw DomainError("output word length != n");
  CompensatedSum acc;
  for (std::uint64_t m1 = 0; m1 < cb.m1(); ++m1) {
    for (std::uint64_t m2 = 0; m2 < cb.m2(); ++m2) {
      const double lp = sequence_log_prob(ch, cb.x(m1), cb.y(m2), z);
      if (lp != kNegInf) acc += std::exp(lp);
    }
  }
  return acc.value() / (static_cast<double>(cb.m1()) * static_cast<double>(cb.m2()));
}

DistVector product_output_distribution(const JointDist& joint, int n,
                                       const EnumerationBudget& budget) {
  const int sz = joint.size_z();
  if (std::pow(static_cast<double>(sz), n) > static_cast<double>(budget.max_outputs)) {
    throw BudgetError("|Z|^n exceeds output budget");
  }
  const std::uint64_t outputs = checked_pow(sz, n);
  std::vector<double> log_qz(sz);
  for (int z = 0; z < sz; ++z) log_qz[z] = safe_log(joint.q_z(z));
  std::vector<double> probs(outputs);
  std::vector<int> word(n);
  for (std::uint64_t i = 0; i < outputs; ++i) {
    decode_index(i, sz, word);
    double lp = 0.0;
    for (int s : word) lp += log_qz[s];
    probs[i] = lp == kNegInf ? 0.0 : std::exp(lp);
  }
  return DistVector{std::move(probs), n, sz};
}

void write_codebooks(std::ostream& os, const CodebookPair& cb) {
  os.precision(17);
  os << "# macres codebook v1\n";
  os << "n " << cb.n() << "\n";
  os << "M1 " << cb.m1() << "\n";
  os << "M2 " << cb.m2() << "\n";
  os << "seed " << cb.seed() << "\n";
  os << "R1 " << cb.nominal().r1 << "\n";
  os << "R2 " << cb.nominal().r2 << "\n";
  os << "R1_eff " << cb.effective_r1() << "\n";
  os << "R2_eff " << cb.effective_r2() << "\n";
  auto rows = [&](const char* tag, std::uint64_t m, auto get) {
    os << tag << "\n";
    for (std::uint64_t i = 0; i < m; ++i) {
      const auto w = get(i);
      for (int k = 0; k < cb.n(); ++k) os << (k ? " " : "") << w[k];
      os << "\n";
    }
  };
  rows("C1", cb.m1(), [&](std::uint64_t i) { return cb.x(i); });
  rows("C2", cb.m2(), [&](std::uint64_t i) { return cb.y(i); });
}

CodebookPair read_codebooks(std::istream& is, const ChannelSpec& ch) {
  std::string line;
  int n = 0;
  std::uint64_t m1 = 0, m2 = 0, seed = 0;
  RatePair nominal;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      if (!line.empty() && line[0] != '#') return true;
    }
    return false;
  };
  while (next_line()) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "C1") break;
    if (key == "n") ls >> n;
    else if (key == "M1") ls >> m1;
    else if (key == "M2") ls >> m2;
    else if (key == "seed") ls >> seed;
    else if (key == "R1") ls >> nominal.r1;
    else if (key == "R2") ls >> nominal.r2;
    else if (key == "R1_eff" || key == "R2_eff") continue;
    else throw ValidationError("unknown codebook header key \"" + key + "\"");
    if (ls.fail()) throw ValidationError("malformed codebook header line: " + line);
  }
  if (n < 1 || m1 < 1 || m2 < 1) throw ValidationError("codebook header incomplete");
  nominal.n = n;
  auto read_rows = [&](std::uint64_t m, int alphabet) {
    std::vector<int> c;
    c.reserve(m * n);
    for (std::uint64_t i = 0; i < m; ++i) {
      if (!next_line()) throw ValidationError("codebook truncated");
      std::istringstream ls(line);
      for (int k = 0; k < n; ++k) {
        int s = -1;
        ls >> s;
        if (ls.fail() || s < 0 || s >= alphabet) throw ValidationError("bad codeword row: " + line);
        c.push_back(s);
      }
    }
    return c;
  };
  auto c1 = read_rows(m1, ch.size_x());
  if (!next_line() || line != "C2") throw ValidationError("missing C2 section");
  auto c2 = read_rows(m2, ch.size_y());
  return CodebookPair(n, std::move(c1), std::move(c2), m1, m2, nominal, seed);
}

}  // namespace macres
