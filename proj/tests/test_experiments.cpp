#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "macres/errors.hpp"
#include "macres/experiments.hpp"

using namespace macres;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.channel = noisy_adder_mac();
  cfg.r1 = 0.8;
  cfg.r2 = 0.45;
  cfg.ns = {2, 3};
  cfg.trials = 6;
  cfg.seed = 2024;
  return cfg;
}

}  // namespace

TEST_CASE("sweep records are ordered and consistent") {
  const auto recs = run_tv_sweep(small_config());
  REQUIRE(recs.size() == 12);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    CHECK(r.n == (i < 6 ? 2 : 3));
    CHECK(r.trial == static_cast<std::int64_t>(i % 6));
    CHECK(r.seed == trial_seed(2024, r.n, r.trial));
    CHECK(r.tv >= 0.0);
    CHECK(r.tv <= 1.0);
    CHECK(r.tv <= r.p_atyp1 + r.p_atyp2 + r.typ_excess + 1e-12);
    CHECK(r.runtime_ms == 0.0);
  }
}

TEST_CASE("sweep is independent of worker count and repeatable") {
  auto cfg = small_config();
  cfg.workers = 1;
  const auto a = run_tv_sweep(cfg);
  cfg.workers = 3;
  const auto b = run_tv_sweep(cfg);
  REQUIRE(a.size() == b.size());
  std::ostringstream sa, sb;
  write_results(a, sa);
  write_results(b, sb);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("input-independent channel gives zero tv") {
  std::vector<double> w;
  for (int i = 0; i < 4; ++i) w.insert(w.end(), {0.1, 0.2, 0.7});
  auto cfg = small_config();
  cfg.channel = ChannelSpec(2, 2, 3, w, {0.5, 0.5}, {0.5, 0.5});
  for (const auto& r : run_tv_sweep(cfg)) CHECK(r.tv < 1e-12);
}

TEST_CASE("rate schedules") {
  auto cfg = small_config();
  cfg.channel = adder_mac();
  cfg.schedule = RateSchedule::CornerOffset;
  cfg.r1 = 0.1;
  cfg.r2 = 0.05;
  const auto p = plan_for(cfg, 4);
  CHECK(p.rates.r1 == doctest::Approx(std::log(2.0) + 0.1));
  CHECK(p.rates.r2 == doctest::Approx(0.5 * std::log(2.0) + 0.05));
  cfg.schedule = RateSchedule::SecondOrder;
  cfg.typ_policy = TypPolicy::SecondOrder;
  const auto s = plan_for(cfg, 4);
  const auto plan = second_order_plan(JointDist(adder_mac()), 0.1, 1.5, 0.25, 4, Corner::A);
  CHECK(s.rates.r2 == plan.rates.r2);
  CHECK(s.typ.eps2 == plan.typ.eps2);
}

TEST_CASE("config validation") {
  auto cfg = small_config();
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = small_config();
  cfg.ns = {40};
  CHECK_THROWS_AS(cfg.validate(), BudgetError);
  cfg = small_config();
  cfg.schedule = RateSchedule::SecondOrder;
  cfg.d = 0.6;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("csv round trip") {
  const auto recs = run_tv_sweep(small_config());
  std::stringstream ss;
  write_results(recs, ss);
  const auto back = read_results(ss);
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].seed == recs[i].seed);
    CHECK(back[i].trial == recs[i].trial);
    CHECK(back[i].m1 == recs[i].m1);
    CHECK(back[i].tv == recs[i].tv);
    CHECK(back[i].p_atyp1 == recs[i].p_atyp1);
    CHECK(back[i].bound_total == recs[i].bound_total);
    CHECK(back[i].bound_vacuous == recs[i].bound_vacuous);
  }
}

TEST_CASE("csv header only and overwrite") {
  const std::string path = "macres_test_results.csv";
  write_results(std::vector<TrialRecord>{}, path);
  CHECK(read_file(path) == std::string(kCsvHeader) + "\n");
  std::vector<TrialRecord> many(10000);
  for (std::size_t i = 0; i < many.size(); ++i) {
    many[i].n = 1;
    many[i].seed = i;
    many[i].tv = 0.5;
    many[i].p_atyp1 = 0.5;
  }
  write_results(many, path);
  const auto back = read_results(path);
  CHECK(back.size() == 10000);
  CHECK(back.back().trial == 9999);
  write_results(std::vector<TrialRecord>{}, path);
  CHECK(read_results(path).empty());
  std::remove(path.c_str());
}

TEST_CASE("persisting a broken record fails") {
  TrialRecord r;
  r.n = 1;
  r.tv = 0.5;
  std::ostringstream os;
  CHECK_THROWS_AS(write_results({r}, os), Error);
}

TEST_CASE("bad csv is rejected") {
  std::stringstream wrong_header("a,b\n");
  CHECK_THROWS_AS(read_results(wrong_header), ValidationError);
  std::stringstream short_row(std::string(kCsvHeader) + "\n1,2,3\n");
  CHECK_THROWS_AS(read_results(short_row), ValidationError);
}

TEST_CASE("median helpers") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK_THROWS_AS(median({}), DomainError);
}

TEST_CASE("concentration checks are consistent") {
  auto cfg = small_config();
  cfg.ns = {2, 4};
  cfg.trials = 200;
  cfg.r1 = 0.9;
  cfg.r2 = 0.6;
  for (auto policy : {ThresholdPolicy::FirstOrderTv, ThresholdPolicy::LemmaAtypical,
                      ThresholdPolicy::LemmaTypical}) {
    ConcentrationRequest req;
    req.policy = policy;
    for (const auto& s : run_concentration_check(cfg, req)) {
      CHECK(s.trials == 200);
      CHECK(s.frequency >= 0.0);
      CHECK(s.consistent);
      if (s.vacuous) CHECK(s.bound > 1.0);
    }
  }
  ConcentrationRequest second;
  second.policy = ThresholdPolicy::SecondOrderTv;
  cfg.schedule = RateSchedule::SecondOrder;
  cfg.typ_policy = TypPolicy::SecondOrder;
  for (const auto& s : run_concentration_check(cfg, second)) CHECK(s.consistent);
}

TEST_CASE("lemma typical uses delta = 1/sqrt(n) by default") {
  auto cfg = small_config();
  cfg.ns = {4};
  cfg.trials = 20;
  ConcentrationRequest req;
  req.policy = ThresholdPolicy::LemmaTypical;
  const auto s = run_concentration_check(cfg, req).at(0);
  CHECK(s.delta == doctest::Approx(0.5));
  CHECK(s.condition.size() == 4);
  CHECK(s.output.size() == 4);
  req.condition = {0, 1};
  req.output = {0, 1};
  CHECK_THROWS_AS(run_concentration_check(cfg, req), ValidationError);
}
