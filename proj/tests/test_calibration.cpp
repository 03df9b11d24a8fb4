#include <doctest.h>

#include <algorithm>
#include <random>

#include "swapjudge/calibration.hpp"
#include "swapjudge/errors.hpp"
#include "swapjudge/strategies.hpp"
#include "test_support.hpp"

using namespace swapjudge;
using swapjudge::testing::make_instance;

namespace {

JudgmentCall call(Verdict v, std::optional<double> conf) {
  JudgmentCall c;
  c.verdict = v;
  c.confidence = conf;
  return c;
}

std::vector<JudgmentInstance> instances(int n) {
  std::vector<JudgmentInstance> out;
  for (int i = 0; i < n; ++i) out.push_back(make_instance("inst-" + std::to_string(i)));
  return out;
}

}  // namespace

TEST_CASE("confidence_gap") {
  CHECK(*confidence_gap(call(Verdict::A, 0.9), call(Verdict::B, 0.6)) == doctest::Approx(0.3));
  CHECK(*confidence_gap(call(Verdict::A, 0.9), call(Verdict::A, 0.7)) == doctest::Approx(0.8));
  CHECK(*confidence_gap(call(Verdict::A, 0.5), call(Verdict::B, 0.5)) == doctest::Approx(0.0));
  CHECK(*confidence_gap(call(Verdict::B, 0.4), call(Verdict::B, 0.6)) == doctest::Approx(0.5));
  CHECK_FALSE(confidence_gap(call(Verdict::A, 0.9), call(Verdict::B, std::nullopt)).has_value());
  CHECK_FALSE(confidence_gap(call(Verdict::A, 0.9), call(Verdict::Indeterminate, 0.4)).has_value());

  const auto t = swapjudge::testing::make_transcript("ab", "ba", 0.7);
  CHECK(*first_pair_confidence_gap(t) == doctest::Approx(0.0));
}

TEST_CASE("select_calibration_set") {
  const auto ds = instances(1000);
  const auto s = select_calibration_set(ds, 0.10, 42);
  CHECK(s.indices.size() == 100);
  CHECK(std::count(s.flags.begin(), s.flags.end(), true) == 100);
  CHECK(std::is_sorted(s.indices.begin(), s.indices.end()));
  for (auto i : s.indices) CHECK(s.flags[i]);

  CHECK(select_calibration_set(instances(5), 0.10, 1).indices.size() == 1);
  CHECK(select_calibration_set(ds, 0.10, 42).indices == s.indices);
  CHECK(select_calibration_set(ds, 0.10, 43).indices != s.indices);
  CHECK(select_calibration_set(ds, 1.0, 7).indices.size() == 1000);

  SUBCASE("selection follows ids, not file order") {
    auto reversed = ds;
    std::reverse(reversed.begin(), reversed.end());
    const auto r = select_calibration_set(reversed, 0.10, 42);
    std::vector<std::string> a, b;
    for (auto i : s.indices) a.push_back(ds[i].id);
    for (auto i : r.indices) b.push_back(reversed[i].id);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
  CHECK_THROWS_AS(select_calibration_set(std::vector<JudgmentInstance>{}, 0.1, 0), UsageError);
  CHECK_THROWS_AS(select_calibration_set(ds, 0.0, 0), UsageError);
  CHECK_THROWS_AS(select_calibration_set(ds, 1.5, 0), UsageError);
}

TEST_CASE("fit_gap_model") {
  SUBCASE("noiseless affine samples invert exactly") {
    std::vector<GapSample> samples;
    for (int i = 0; i <= 20; ++i) {
      const double g = i / 20.0;
      samples.push_back({0.5 + 0.5 * g, g});
    }
    const GapModel m = fit_gap_model(samples, 12);
    CHECK_FALSE(m.fallback);
    CHECK(std::abs(m.intercept - (-1.0)) < 1e-6);
    CHECK(std::abs(m.slope - 2.0) < 1e-6);
    CHECK(m.training_size == 21);
    CHECK(m.training_call_cost == 21 * 24);
  }
  SUBCASE("training cost for 100 instances at n_max 12") {
    std::vector<GapSample> samples;
    for (int i = 0; i < 100; ++i) samples.push_back({i / 100.0, i / 100.0});
    CHECK(fit_gap_model(samples, 12).training_call_cost == 2400);
    // Instances without a usable first pair still cost their full transcripts.
    CHECK(fit_gap_model(std::span(samples).first(90), 12, 100).training_call_cost == 2400);
  }
  SUBCASE("degenerate inputs fall back to the full budget") {
    const std::vector<GapSample> constant = {{0.4, 0.1}, {0.4, 0.9}, {0.4, 0.5}};
    const GapModel m = fit_gap_model(constant, 12);
    CHECK(m.fallback);
    CHECK(m.predict(0.4) == 0.0);
    CHECK(confidence_budget(m.predict(0.4), 12) == 12);
    CHECK(fit_gap_model(std::span(constant).first(1), 12).fallback);
  }
}

TEST_CASE("predict is clamped and monotone for non-negative slope") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    GapModel m;
    m.intercept = 4.0 * unit(gen) - 2.0;
    m.slope = 4.0 * unit(gen);
    const double c1 = unit(gen), c2 = unit(gen);
    const double p1 = m.predict(c1), p2 = m.predict(c2);
    CHECK(p1 >= 0.0);
    CHECK(p1 <= 1.0);
    if (c1 <= c2) CHECK(p1 <= p2);
  }
}

TEST_CASE("noise-free simulated confidences reproduce true gaps on held-out instances") {
  // Deterministic orderings make the empirical gap equal the true gap, so the
  // fitted line has to pass exactly through every instance.
  const std::vector<BernoulliParams> kinds = {{1, 1}, {0, 0}, {1, 0}, {0, 1}};
  std::unordered_map<std::string, BernoulliParams> params;
  std::vector<JudgmentInstance> ds;
  for (int i = 0; i < 40; ++i) {
    ds.push_back(make_instance("d" + std::to_string(i)));
    params[ds.back().id] = kinds[i % 4];
  }
  const SimulatedJudge judge({9, {0.5, 0.5, 0.0}}, params);
  const auto calib = select_calibration_set(ds, 0.25, 5);
  std::vector<GapSample> samples;
  for (auto i : calib.indices) {
    const auto full = run_static_consensus(judge, ds[i], 12).transcript;
    samples.push_back({*first_pair_confidence_gap(full), *empirical_gap(full).gap});
  }
  const GapModel m = fit_gap_model(samples, 12);
  REQUIRE_FALSE(m.fallback);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (calib.flags[i]) continue;
    const auto full = run_static_consensus(judge, ds[i], 12).transcript;
    CHECK(m.predict(*first_pair_confidence_gap(full)) ==
          doctest::Approx(params[ds[i].id].true_gap()).epsilon(1e-9));
  }
}
