#include "macres/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "macres/bounds.hpp"
#include "macres/channel.hpp"
#include "macres/codebook.hpp"
#include "macres/errors.hpp"
#include "macres/experiments.hpp"
#include "macres/info_measures.hpp"
#include "macres/resolvability.hpp"

namespace macres {
namespace {

using ojson = nlohmann::ordered_json;

struct Options {
  std::string channel;
  std::string out;
  std::uint64_t seed = 1;
  std::string n = "4";
  double r1 = 0.0;
  double r2 = 0.0;
  double eps = 0.1;
  double c = 1.5;
  double d = 0.25;
  std::string corner = "A";
  int trials = 10;
  double eps1 = 0.1;
  double eps2 = 0.1;
  double beta = 0.01;
  std::string alpha_grid;
  double budget = 1e10;
  std::string schedule = "fixed";
  std::string typ = "fixed";
  std::string kind = "first-order";
  std::string set = "T1";
  std::string check;
  double delta = -1.0;
  bool strict = false;
  unsigned threads = 0;
};

ChannelSpec resolve_channel(const std::string& ref) {
  if (ref.empty()) throw ValidationError("--channel is required");
  if (ref == "builtin:adder") return adder_mac();
  if (ref == "builtin:noisy-adder") return noisy_adder_mac();
  return load_channel(ref);
}

std::vector<int> parse_int_list(const std::string& text, const char* flag) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoi(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(std::string(flag) + ": not an integer list: " + text);
    }
  }
  if (out.empty()) throw ValidationError(std::string(flag) + ": empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(std::string(flag) + ": not a number list: " + text);
    }
  }
  if (out.empty()) throw ValidationError(std::string(flag) + ": empty list");
  return out;
}

int single_n(const Options& o) {
  const auto ns = parse_int_list(o.n, "--n");
  if (ns.size() != 1) throw ValidationError("--n: exactly one block length expected");
  if (ns[0] < 1) throw ValidationError("--n must be >= 1");
  return ns[0];
}

EnumerationBudget make_budget(const Options& o) {
  if (!(o.budget > 0.0)) throw ValidationError("--budget must be positive");
  EnumerationBudget b;
  b.max_work = o.budget;
  b.threads = o.threads;
  return b;
}

ojson number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

// Machine output: stdout, or the --out file (replaced).
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}
  std::ostream& stream() { return path_.empty() ? fallback_ : buf_; }
  void line(const ojson& j) { stream() << j.dump() << '\n'; }
  void commit() {
    if (path_.empty()) return;
    std::ofstream f(path_, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + path_);
    f << buf_.str();
    if (!f) throw Error("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ostream& fallback_;
  std::ostringstream buf_;
};

void cmd_validate(const Options& o, Sink& sink, std::ostream& err) {
  const ChannelSpec ch = resolve_channel(o.channel);
  ojson j;
  j["valid"] = true;
  j["name"] = ch.name();
  j["sizeX"] = ch.size_x();
  j["sizeY"] = ch.size_y();
  j["sizeZ"] = ch.size_z();
  sink.line(j);
  err << "channel ok: |X|=" << ch.size_x() << " |Y|=" << ch.size_y() << " |Z|=" << ch.size_z() << '\n';
}

void cmd_info(const Options& o, Sink& sink, std::ostream& err) {
  const ChannelSpec ch = resolve_channel(o.channel);
  const JointDist joint(ch);
  const auto iq = mutual_informations(joint);
  const Corner corner = parse_corner(o.corner);
  const auto [m1, m2] = second_order_moments(joint, corner);
  ojson j;
  j["iXZgY"] = iq.i_xz_given_y;
  j["iYZ"] = iq.i_yz;
  j["iXZ"] = iq.i_xz;
  j["iYZgX"] = iq.i_yz_given_x;
  j["sumRate"] = iq.sum_rate;
  j["corner"] = std::string(to_string(corner));
  j["V1"] = m1.variance;
  j["rho1"] = m1.third_abs;
  j["V2"] = m2.variance;
  j["rho2"] = m2.third_abs;
  const auto a = corner_point(iq, Corner::A);
  const auto b = corner_point(iq, Corner::B);
  j["cornerA"] = {a.first, a.second};
  j["cornerB"] = {b.first, b.second};
  sink.line(j);
  err << "I(X;Z|Y)=" << iq.i_xz_given_y << " I(Y;Z)=" << iq.i_yz << " I(X;Z)=" << iq.i_xz
      << " I(Y;Z|X)=" << iq.i_yz_given_x << " I(XY;Z)=" << iq.sum_rate << '\n';
}

void cmd_region(const Options& o, Sink& sink, std::ostream& err) {
  const ChannelSpec ch = resolve_channel(o.channel);
  const auto iq = mutual_informations(JointDist(ch));
  const auto closed = region_check(iq, o.r1, o.r2, false);
  const auto open = region_check(iq, o.r1, o.r2, true);
  std::string status = !closed.member ? "outside" : (open.member ? "inside" : "boundary");
  const bool member = o.strict ? open.member : closed.member;
  ojson j;
  j["r1"] = o.r1;
  j["r2"] = o.r2;
  j["status"] = status;
  j["member"] = member;
  j["strict"] = o.strict;
  j["binding"] = closed.binding;
  j["violated"] = closed.violated;
  j["margin"] = closed.margin;
  sink.line(j);
  err << "(" << o.r1 << ", " << o.r2 << ") is " << status << ", binding " << closed.binding << '\n';
}

void cmd_rates(const Options& o, Sink& sink, std::ostream& err) {
  const ChannelSpec ch = resolve_channel(o.channel);
  const JointDist joint(ch);
  const Corner corner = parse_corner(o.corner);
  for (int n : parse_int_list(o.n, "--n")) {
    const auto plan = second_order_plan(joint, o.eps, o.c, o.d, n, corner);
    ojson j;
    j["n"] = n;
    j["corner"] = std::string(to_string(corner));
    j["eps"] = o.eps;
    j["c"] = o.c;
    j["d"] = o.d;
    j["R1"] = plan.rates.r1;
    j["R2"] = plan.rates.r2;
    j["eps1"] = plan.typ.eps1;
    j["eps2"] = plan.typ.eps2;
    j["epsPrime1"] = plan.eps_prime1;
    j["epsPrime2"] = plan.eps_prime2;
    j["degenerate1"] = plan.degenerate1;
    j["degenerate2"] = plan.degenerate2;
    // Codebook sizes only while they fit comfortably in 64 bits.
    if (n * std::max(plan.rates.r1, plan.rates.r2) < 40.0) {
      j["M1"] = codebook_size(plan.rates.r1, n, ~0ULL);
      j["M2"] = codebook_size(plan.rates.r2, n, ~0ULL);
    }
    sink.line(j);
    err << "n=" << n << ": R1=" << plan.rates.r1 << " R2=" << plan.rates.r2 << '\n';
  }
}

void emit_report(Sink& sink, const BoundReport& r, const char* rates, std::ostream& err) {
  ojson j;
  if (rates) j["rates"] = rates;
  const ojson body = r.to_json();
  for (const auto& [k, v] : body.items()) j[k] = v;
  sink.line(j);
  err << r.kind << (rates ? std::string(" (") + rates + ")" : std::string()) << ": total "
      << r.total << (r.vacuous ? " [vacuous]" : "") << '\n';
}

void cmd_bounds(const Options& o, Sink& sink, std::ostream& err) {
  const ChannelSpec ch = resolve_channel(o.channel);
  const JointDist joint(ch);
  const auto iq = mutual_informations(joint);
  const Corner corner = parse_corner(o.corner);
  const int n = single_n(o);
  const RatePair nominal{o.r1, o.r2, n};

  if (o.kind == "first-order" || o.kind == "certificate") {
    nominal.validate();
    const RatePair eff{std::log(static_cast<double>(codebook_size(o.r1, n, ~0ULL))) / n,
                       std::log(static_cast<double>(codebook_size(o.r2, n, ~0ULL))) / n, n};
    for (const auto& [rp, label] : {std::pair{nominal, "nominal"}, std::pair{eff, "effective"}}) {
      const BoundReport r =
          o.kind == "first-order"
              ? first_order_rhs(iq, rp.r1, rp.r2, n, o.eps, o.beta, ch.size_x(), ch.size_y(),
                                ch.size_z(), corner)
              : first_order_certificate(iq, rp.r1, rp.r2, n, EpsBetaGrid::defaults(), ch.size_x(),
                                        ch.size_y(), ch.size_z(), corner);
      emit_report(sink, r, label, err);
    }
  } else if (o.kind == "second-order") {
    emit_report(sink, second_order_plan(joint, o.eps, o.c, o.d, n, corner).report, nullptr, err);
  } else if (o.kind == "renyi") {
    const TypicalSet set = o.set == "T1" ? TypicalSet::T1
                           : o.set == "T2" ? TypicalSet::T2
                                           : throw ValidationError("--set must be T1 or T2");
    const auto grid = o.alpha_grid.empty() ? default_alpha_grid()
                                           : parse_double_list(o.alpha_grid, "--alpha-grid");
    const auto variant = typical_set_variant(set, corner);
    const auto res = renyi_atypicality_bound(joint, variant, o.eps, n, grid);
    ojson j;
    j["kind"] = "renyi-atypicality";
    j["set"] = o.set;
    j["density"] = std::string(to_string(variant));
    j["n"] = n;
    j["eps"] = o.eps;
    j["bestAlpha"] = res.best_alpha;
    j["betaSup"] = res.beta_sup;
    j["beta"] = res.beta;
    j["bound"] = res.bound;
    j["chernoff"] = res.chernoff;
    ojson rows = ojson::array();
    for (const auto& e : res.grid) {
      rows.push_back({{"alpha", e.alpha}, {"divergence", number(e.divergence)},
                      {"exponent", number(e.exponent)}});
    }
    j["grid"] = rows;
    sink.line(j);
    err << "renyi " << o.set << ": alpha*=" << res.best_alpha << " bound " << res.bound << '\n';
  } else if (o.kind == "lemma-typical" || o.kind == "lemma-atypical") {
    if (!(o.delta > 0.0)) throw ValidationError("--delta is required and must be positive");
    nominal.validate();
    BoundReport r;
    r.kind = o.kind;
    r.params = {{"n", n}, {"delta", o.delta}, {"r1", o.r1}, {"r2", o.r2}, {"eps", o.eps}};
    if (o.kind == "lemma-typical") {
      const auto variant = typical_set_variant(TypicalSet::T1, corner);
      const double rate = corner == Corner::A ? o.r1 : o.r2;
      r.total = lemma_typical_bound(mutual_information(iq, variant), o.eps, rate, n, o.delta);
    } else {
      const TypicalSet set = o.set == "T2" ? TypicalSet::T2 : TypicalSet::T1;
      const double mu = atypicality_probability(joint, typical_set_variant(set, corner), o.eps, n);
      r.params.emplace_back("mu", mu);
      r.total = mu > 0.0 ? lemma_atypical_bound(mu, o.delta, o.r1, o.r2, n) : 0.0;
    }
    r.vacuous = r.total > 1.0;
    emit_report(sink, r, nullptr, err);
  } else {
    throw ValidationError("--kind must be one of first-order, certificate, second-order, renyi, "
                          "lemma-typical, lemma-atypical");
  }
}

void cmd_sample(const Options& o, Sink& sink, std::ostream& err) {
  const ChannelSpec ch = resolve_channel(o.channel);
  const RatePair rates{o.r1, o.r2, single_n(o)};
  const auto cb = sample_codebooks(ch, rates, o.seed, make_budget(o));
  write_codebooks(sink.stream(), cb);
  err << "sampled M1=" << cb.m1() << " M2=" << cb.m2() << " n=" << cb.n() << '\n';
}

void cmd_tv(const Options& o, Sink& sink, std::ostream& err) {
  const ChannelSpec ch = resolve_channel(o.channel);
  const int n = single_n(o);
  const auto budget = make_budget(o);
  const auto cb = sample_codebooks(ch, {o.r1, o.r2, n}, o.seed, budget);
  const TypParams typ{o.eps1, o.eps2, n, parse_corner(o.corner)};
  const auto dec = decompose_tv(ch, cb, typ, budget);
  ojson j;
  j["seed"] = o.seed;
  j["n"] = n;
  j["R1_nominal"] = o.r1;
  j["R2_nominal"] = o.r2;
  j["R1_eff"] = cb.effective_r1();
  j["R2_eff"] = cb.effective_r2();
  j["M1"] = cb.m1();
  j["M2"] = cb.m2();
  j["tv"] = dec.tv;
  j["p_atyp1"] = dec.p_atyp1;
  j["p_atyp2"] = dec.p_atyp2;
  j["typ_excess"] = dec.typ_excess;
  j["eps1"] = o.eps1;
  j["eps2"] = o.eps2;
  j["inducedMass"] = dec.induced_mass;
  sink.line(j);
  err << "tv=" << dec.tv << " <= " << dec.rhs() << " (atyp1 " << dec.p_atyp1 << ", atyp2 "
      << dec.p_atyp2 << ", typical excess " << dec.typ_excess << ")\n";
}

void cmd_experiment(const Options& o, Sink& sink, std::ostream& err) {
  ExperimentConfig cfg;
  cfg.channel = resolve_channel(o.channel);
  if (o.schedule == "fixed") cfg.schedule = RateSchedule::Fixed;
  else if (o.schedule == "corner-offset") cfg.schedule = RateSchedule::CornerOffset;
  else if (o.schedule == "second-order") cfg.schedule = RateSchedule::SecondOrder;
  else throw ValidationError("--schedule must be fixed, corner-offset or second-order");
  if (o.typ == "fixed") cfg.typ_policy = TypPolicy::Fixed;
  else if (o.typ == "second-order") cfg.typ_policy = TypPolicy::SecondOrder;
  else throw ValidationError("--typ must be fixed or second-order");
  cfg.r1 = o.r1;
  cfg.r2 = o.r2;
  cfg.eps = o.eps;
  cfg.c = o.c;
  cfg.d = o.d;
  cfg.corner = parse_corner(o.corner);
  cfg.ns = parse_int_list(o.n, "--n");
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  cfg.eps1 = o.eps1;
  cfg.eps2 = o.eps2;
  cfg.beta = o.beta;
  cfg.workers = o.threads;
  cfg.budget = make_budget(o);

  if (o.check.empty()) {
    const auto records = run_tv_sweep(cfg);
    write_results(records, sink.stream());
    for (const auto& [n, med] : median_tv_by_n(records)) err << "n=" << n << " median tv " << med << '\n';
    return;
  }
  ConcentrationRequest req;
  if (o.check == "first-order-tv") req.policy = ThresholdPolicy::FirstOrderTv;
  else if (o.check == "second-order-tv") req.policy = ThresholdPolicy::SecondOrderTv;
  else if (o.check == "lemma-atypical") req.policy = ThresholdPolicy::LemmaAtypical;
  else if (o.check == "lemma-typical") req.policy = ThresholdPolicy::LemmaTypical;
  else throw ValidationError("--check must be first-order-tv, second-order-tv, lemma-atypical or lemma-typical");
  if (o.set == "T2") req.set = TypicalSet::T2;
  else if (o.set != "T1") throw ValidationError("--set must be T1 or T2");
  if (o.delta > 0.0) req.delta = o.delta;
  for (const auto& s : run_concentration_check(cfg, req)) {
    ojson j;
    j["policy"] = s.policy;
    j["n"] = s.n;
    j["trials"] = s.trials;
    j["exceedances"] = s.exceedances;
    j["frequency"] = s.frequency;
    j["threshold"] = number(s.threshold);
    j["bound"] = number(s.bound);
    j["sigma"] = s.sigma;
    j["delta"] = s.delta;
    j["mu"] = s.mu;
    j["vacuous"] = s.vacuous;
    j["consistent"] = s.consistent;
    sink.line(j);
    err << s.policy << " n=" << s.n << ": " << s.exceedances << "/" << s.trials << " vs bound "
        << s.bound << (s.vacuous ? " [vacuous]" : "") << (s.consistent ? "" : " INCONSISTENT") << '\n';
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiple-access channel resolvability toolkit", "macres"};
  app.require_subcommand(1, 1);
  Options o;

  auto add_channel = [&](CLI::App* s) {
    s->add_option("--channel", o.channel,
                  "channel JSON file, or builtin:adder / builtin:noisy-adder")
        ->required();
    s->add_option("--out", o.out, "write machine output here instead of stdout");
  };
  auto add_rates = [&](CLI::App* s) {
    s->add_option("--r1", o.r1, "rate of transmitter 1 (nats)")->capture_default_str();
    s->add_option("--r2", o.r2, "rate of transmitter 2 (nats)")->capture_default_str();
  };
  auto add_n = [&](CLI::App* s, const char* help) {
    s->add_option("--n", o.n, help)->capture_default_str();
  };
  auto add_corner = [&](CLI::App* s) {
    s->add_option("--corner", o.corner, "corner point A or B")->capture_default_str();
  };
  auto add_second = [&](CLI::App* s) {
    s->add_option("--eps", o.eps, "target epsilon / typical-set slack")->capture_default_str();
    s->add_option("--c", o.c, "second-order rate constant, > 1")->capture_default_str();
    s->add_option("--d", o.d, "second-order slack constant, in (0, c-1)")->capture_default_str();
  };
  auto add_exec = [&](CLI::App* s) {
    s->add_option("--seed", o.seed, "master seed")->capture_default_str();
    s->add_option("--budget", o.budget, "enumeration work limit M1*M2*|Z|^n*n")->capture_default_str();
    s->add_option("--threads", o.threads, "worker threads, 0 = all cores")->capture_default_str();
  };
  auto add_typ = [&](CLI::App* s) {
    s->add_option("--eps1", o.eps1, "slack of typical set T1")->capture_default_str();
    s->add_option("--eps2", o.eps2, "slack of typical set T2")->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "check a channel file");
  add_channel(validate);

  auto* info = app.add_subcommand("info", "mutual informations and density moments");
  add_channel(info);
  add_corner(info);

  auto* region = app.add_subcommand("region", "rate-region membership of (r1, r2)");
  add_channel(region);
  add_rates(region);
  region->add_flag("--strict", o.strict, "require strict inequalities for membership");

  auto* rates = app.add_subcommand("rates", "second-order rates at given block lengths");
  add_channel(rates);
  add_n(rates, "block lengths, comma separated");
  add_corner(rates);
  add_second(rates);

  auto* bounds = app.add_subcommand("bounds", "evaluate a closed-form bound");
  add_channel(bounds);
  add_rates(bounds);
  add_n(bounds, "block length");
  add_corner(bounds);
  add_second(bounds);
  bounds->add_option("--kind", o.kind,
                     "first-order, certificate, second-order, renyi, lemma-typical, lemma-atypical")
      ->capture_default_str();
  bounds->add_option("--beta", o.beta, "first-order exponent parameter")->capture_default_str();
  bounds->add_option("--alpha-grid", o.alpha_grid, "Renyi orders, comma separated");
  bounds->add_option("--set", o.set, "typical set T1 or T2")->capture_default_str();
  bounds->add_option("--delta", o.delta, "lemma deviation parameter");

  auto* sample = app.add_subcommand("sample", "sample and dump a codebook pair");
  add_channel(sample);
  add_rates(sample);
  add_n(sample, "block length");
  add_exec(sample);

  auto* tv = app.add_subcommand("tv", "exact TV decomposition of one codebook draw");
  add_channel(tv);
  add_rates(tv);
  add_n(tv, "block length");
  add_corner(tv);
  add_typ(tv);
  add_exec(tv);

  auto* experiment = app.add_subcommand("experiment", "Monte Carlo TV sweep (CSV) or concentration check");
  add_channel(experiment);
  add_rates(experiment);
  add_n(experiment, "block lengths, comma separated");
  add_corner(experiment);
  add_second(experiment);
  add_typ(experiment);
  add_exec(experiment);
  experiment->add_option("--trials", o.trials, "codebook draws per block length")->capture_default_str();
  experiment->add_option("--schedule", o.schedule, "fixed, corner-offset or second-order")
      ->capture_default_str();
  experiment->add_option("--typ", o.typ, "typical-set slacks: fixed or second-order")
      ->capture_default_str();
  experiment->add_option("--beta", o.beta, "first-order exponent parameter")->capture_default_str();
  experiment->add_option("--check", o.check,
                         "first-order-tv, second-order-tv, lemma-atypical or lemma-typical");
  experiment->add_option("--set", o.set, "typical set for lemma-atypical")->capture_default_str();
  experiment->add_option("--delta", o.delta, "lemma deviation parameter (default 1/sqrt(n))");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  Sink sink(o.out, out);
  try {
    if (*validate) cmd_validate(o, sink, err);
    else if (*info) cmd_info(o, sink, err);
    else if (*region) cmd_region(o, sink, err);
    else if (*rates) cmd_rates(o, sink, err);
    else if (*bounds) cmd_bounds(o, sink, err);
    else if (*sample) cmd_sample(o, sink, err);
    else if (*tv) cmd_tv(o, sink, err);
    else if (*experiment) cmd_experiment(o, sink, err);
    sink.commit();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace macres
