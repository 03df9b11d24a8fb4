// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "reference_oracle.hpp"
#include "swapjudge/errors.hpp"
#include "swapjudge/harness.hpp"
#include "swapjudge/oracle.hpp"

using namespace swapjudge;
namespace fs = std::filesystem;

namespace {

int failures = 0;
std::vector<ExperimentReport> reports;  // every report built here, for the partition check

void verdict(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const fs::path work = fs::temp_directory_path() / "swapjudge-acceptance";

// 60% near-deterministic, 40% contradictory or noisy.
const std::vector<MixtureComponent> kMixture = {
    {0.98, 0.98, 0.3}, {0.02, 0.02, 0.3}, {0.98, 0.02, 0.1}, {0.02, 0.98, 0.1}, {0.98, 0.5, 0.1}, {0.5, 0.02, 0.1}};

RunConfig sim_config(const fs::path& dataset, const std::string& out, std::uint64_t seed) {
  RunConfig c;
  c.dataset = dataset;
  c.out_dir = work / out;
  c.seed = seed;
  c.confidence = {0.5, 0.5, 0.0};
  c.resume = ResumeMode::Restart;
  return c;
}

ExperimentResult run(const RunConfig& c) {
  auto r = run_experiment(c);
  reports.push_back(r.report);
  return r;
}

void oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  constexpr int kN = 20000;
  const std::pair<double, double> cases[] = {{1, 1}, {1, 0}, {0.95, 0.30}, {0.8, 0.6}, {0.5, 0.5}};
  bool ok = true;
  std::string detail;
  std::uint64_t seed = 1000;
  for (auto [q1, q2] : cases) {
    std::unordered_map<std::string, BernoulliParams> params;
    std::vector<JudgmentInstance> insts(kN);
    for (int i = 0; i < kN; ++i) {
      insts[i].id = "mc-" + std::to_string(i);
      insts[i].candidate_a = "a";
      insts[i].candidate_b = "b";
      params[insts[i].id] = {q1, q2};
    }
    const SimulatedJudge judge({seed++, {}}, params);
    double wins_a = 0, ties = 0, pairs = 0;
    for (const auto& inst : insts) {
      const auto r = run_early_stopping(judge, inst, 12);
      wins_a += r.outcome.winner == Winner::A;
      ties += r.outcome.winner == Winner::Tie;
      pairs += r.outcome.pairs_used;
    }
    const auto o = oracle::exact_early_stopping_stats(q1, q2, 12);
    const auto within = [&](double mc, double exact, double se) {
      return std::abs(mc - exact) <= (se > 0 ? 3 * se : 1e-12);
    };
    const double se_a = std::sqrt(o.p_win_a * (1 - o.p_win_a) / kN);
    const double se_t = std::sqrt(o.p_tie * (1 - o.p_tie) / kN);
    const double se_p = std::sqrt(o.variance_pairs / kN);
    const bool here = within(wins_a / kN, o.p_win_a, se_a) && within(ties / kN, o.p_tie, se_t) &&
                      within(pairs / kN, o.expected_pairs, se_p);
    ok &= here;
    detail += fmt("(%.2f,%.2f) p_a %.4f/%.4f tie %.4f/%.4f pairs %.3f/%.3f%s; ", q1, q2, wins_a / kN, o.p_win_a,
                  ties / kN, o.p_tie, pairs / kN, o.expected_pairs, here ? "" : " OUT");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  verdict(ok && secs < 30.0, "oracle-equivalence", detail + fmt("runtime %.2fs (< 30s)", secs));
}

void oracle_self_consistency() {
  double worst = 0.0;
  const double qs[] = {0.0, 0.05, 0.2, 0.35, 0.5, 0.64, 0.8, 0.93, 1.0};
  for (int n = 1; n <= 4; ++n) {
    for (double q1 : qs) {
      for (double q2 : qs) {
        const auto a = oracle::exact_early_stopping_stats(q1, q2, n);
        const auto b = testing::brute_force_early_stopping(q1, q2, n);
        for (double d : {a.p_win_a - b.p_win_a, a.p_win_b - b.p_win_b, a.p_tie - b.p_tie,
                         a.expected_pairs - b.expected_pairs, a.expected_calls - b.expected_calls,
                         a.variance_pairs - b.variance_pairs}) {
          worst = std::max(worst, std::abs(d));
        }
      }
    }
  }
  verdict(worst <= 1e-10, "oracle-self-consistency", fmt("max |DP - enumeration| = %.3g over n_max 1..4", worst));
}

void stability_agreement() {
  std::mt19937_64 gen(4242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int eligible = 0, violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const double q1 = unit(gen), q2 = unit(gen);
    PairedTranscript t;
    t.instance_id = "t" + std::to_string(i);
    for (int k = 0; k < 12; ++k) {
      t.vec_ab.push_back(unit(gen) < q1 ? Verdict::A : Verdict::B);
      t.vec_ba.push_back(unit(gen) < q2 ? Verdict::A : Verdict::B);
    }
    const auto es = replay_policy({PolicyKind::EarlyStopping, 12, std::nullopt}, t);
    const auto st = replay_policy({PolicyKind::StaticConsensus, 12, std::nullopt}, t);
    if (observation_violated(t) || es.outcome.winner == Winner::Tie) continue;
    ++eligible;
    violations += es.outcome.winner != st.outcome.winner;
  }
  verdict(violations == 0 && eligible > 0, "stability-agreement",
          fmt("%d violations over %d eligible of 10000 transcripts", violations, eligible));
}

void call_reduction() {
  const fs::path data = work / "mixture.jsonl";
  simulate_dataset(kMixture, 2000, 2024, data);
  const Dataset d = load_dataset(data);
  const auto r = run(sim_config(data, "mixture", 2024));
  const auto* es = r.report.find(PolicyKind::EarlyStopping);
  const auto* cb = r.report.find(PolicyKind::ConfidenceBased);
  const auto* st = r.report.find(PolicyKind::StaticConsensus);

  double conditioned = 0.0;
  int n = 0;
  for (const auto& e : r.evaluations) {
    if (e.calibration) continue;
    const auto& q = d.simulation.at(e.instance_id);
    conditioned += oracle::exact_early_stopping_stats(q.q_ab, q.q_ba, 12).expected_calls;
    ++n;
  }
  conditioned /= n;
  double weighted = 0.0;
  for (const auto& c : kMixture) weighted += c.weight * oracle::exact_early_stopping_stats(c.q_ab, c.q_ba, 12).expected_calls;

  const double es_calls = *es->avg_calls;
  verdict(es_calls <= 8.0, "call-reduction/early-stopping-budget",
          fmt("early stopping %.3f calls (<= 8), static consensus %.1f, reduction %.1f%%", es_calls, *st->avg_calls,
              100.0 * (1 - es_calls / *st->avg_calls)));
  verdict(std::abs(es_calls / conditioned - 1) <= 0.05, "call-reduction/oracle-expectation",
          fmt("%.3f vs oracle %.3f for the drawn instances (%+.2f%%, tolerance 5%%)", es_calls, conditioned,
              100 * (es_calls / conditioned - 1)));
  verdict(std::abs(es_calls / weighted - 1) <= 0.05, "call-reduction/mixture-expectation",
          fmt("%.3f vs oracle %.3f for the mixture weights (%+.2f%%, tolerance 5%%)", es_calls, weighted,
              100 * (es_calls / weighted - 1)));
  verdict(*cb->avg_calls_unamortized <= es_calls, "call-reduction/confidence-vs-early",
          fmt("confidence-based %.3f <= early stopping %.3f per instance; with %lld calibration calls amortised: %.3f",
              *cb->avg_calls_unamortized, es_calls, static_cast<long long>(r.calibration.model.training_call_cost),
              *cb->avg_calls));
}

void calibration_exactness() {
  // Samples straight from the simulated confidence model: q1 = q2 = (1+g)/2,
  // so each call reports 0.5 + 0.5 g.
  std::unordered_map<std::string, BernoulliParams> params;
  std::vector<double> gaps;
  for (int i = 0; i <= 50; ++i) {
    const double g = i / 50.0;
    gaps.push_back(g);
    params["g" + std::to_string(i)] = {(1 + g) / 2, (1 + g) / 2};
  }
  const SimulatedJudge judge({3, {0.5, 0.5, 0.0}}, params);
  std::vector<GapSample> samples;
  for (int i = 0; i <= 50; ++i) {
    JudgmentInstance inst;
    inst.id = "g" + std::to_string(i);
    samples.push_back({*judge.judge(inst, Ordering::AB, 1).confidence, gaps[i]});
  }
  const GapModel m = fit_gap_model(samples, 12);
  const bool fit_ok = !m.fallback && std::abs(m.intercept + 1) <= 1e-6 && std::abs(m.slope - 2) <= 1e-6;
  verdict(fit_ok, "calibration-exactness/fit",
          fmt("alpha %.9f (target -1), beta %.9f (target 2), tolerance 1e-6", m.intercept, m.slope));

  const fs::path data = work / "calibration.jsonl";
  simulate_dataset(kMixture, 1000, 77, data);
  const auto r = run(sim_config(data, "calibration", 77));
  const auto* cb = r.report.find(PolicyKind::ConfidenceBased);
  const bool ok = cb->normalized_accuracy && *cb->normalized_accuracy >= 0.98;
  verdict(ok, "calibration-exactness/normalized-accuracy",
          fmt("confidence-based normalized accuracy %.4f (>= 0.98), accuracy %.4f vs consensus %.4f",
              cb->normalized_accuracy.value_or(NAN), cb->accuracy.value_or(NAN),
              r.report.consensus_accuracy.value_or(NAN)));
}

void budget_table() {
  const double g[] = {0, 0.25, 0.5, 0.75, 1};
  const int want[] = {12, 10, 7, 4, 1};
  bool ok = true;
  std::string detail;
  for (int i = 0; i < 5; ++i) {
    const int b = confidence_budget(g[i], 12);
    ok &= b == want[i];
    detail += fmt("%.2f->%d ", g[i], b);
  }
  verdict(ok, "budget-table", detail + "(expected 12 10 7 4 1)");
}

void violation_rate() {
  const std::vector<MixtureComponent> mix = {
      {0.8, 0.7, 0.25}, {0.6, 0.5, 0.25}, {0.98, 0.9, 0.25}, {0.98, 0.02, 0.25}};
  bool ok = true;
  std::string detail;
  for (int n_max : {12, 4}) {
    const fs::path data = work / ("violation" + std::to_string(n_max) + ".jsonl");
    simulate_dataset(mix, 2000, 99 + n_max, data);
    const Dataset d = load_dataset(data);
    RunConfig c = sim_config(data, "violation" + std::to_string(n_max), 5);
    c.n_max_pairs = n_max;
    const auto r = run(c);
    double mean = 0.0, var = 0.0;
    for (const auto& inst : d.instances) {
      const auto& q = d.simulation.at(inst.id);
      const double p = oracle::exact_violation_probability(q.q_ab, q.q_ba, n_max);
      mean += p;
      var += p * (1 - p);
    }
    const double N = static_cast<double>(d.instances.size());
    mean /= N;
    const double sigma = std::sqrt(var) / N;
    const double measured = r.report.dataset.violation_rate;
    const bool here = std::abs(measured - mean) <= 3 * sigma;
    ok &= here;
    detail += fmt("n_max %d: measured %.4f vs exact %.4f (3 sigma %.4f); ", n_max, measured, mean, 3 * sigma);
  }
  verdict(ok, "violation-rate", detail);
}

void determinism_and_resume() {
  const fs::path data = work / "resume.jsonl";
  simulate_dataset(kMixture, 300, 8, data);
  const Dataset d = load_dataset(data);

  const auto clean = run(sim_config(data, "resume-clean", 8));
  const auto again = run(sim_config(data, "resume-again", 8));

  class Crashing final : public Judge {
   public:
    Crashing(const Judge& inner, int limit) : inner_(inner), limit_(limit) {}
    JudgmentCall judge(const JudgmentInstance& i, Ordering o, int rep) const override {
      if (made_.fetch_add(1) >= limit_) throw JudgeError("killed");
      return inner_.judge(i, o, rep);
    }

   private:
    const Judge& inner_;
    int limit_;
    mutable std::atomic<int> made_{0};
  };

  RunConfig c = sim_config(data, "resume-crash", 8);
  c.concurrency = 4;
  const auto judge = make_judge(c, d);
  Crashing crashing(*judge, 3000);
  bool crashed = false;
  try {
    run_experiment(c, crashing);
  } catch (const JudgeError&) {
    crashed = true;
  }
  c.resume = ResumeMode::Resume;
  const auto resumed = run_experiment(c, *judge);
  reports.push_back(resumed.report);
  const bool ok = crashed && clean.digest == again.digest && resumed.digest == clean.digest &&
                  resumed.collection.reused_calls >= 3000 && resumed.collection.new_calls > 0;
  verdict(ok, "determinism-resume",
          fmt("clean %s, repeat %s, killed after %zu logged calls and resumed %s (%zu reused, %zu new)",
              clean.digest.c_str(), again.digest.c_str(), resumed.collection.reused_calls, resumed.digest.c_str(),
              resumed.collection.reused_calls, resumed.collection.new_calls));
}

void swap_once_cost() {
  bool ok = !reports.empty();
  std::string detail;
  for (const auto& r : reports) {
    const auto* so = r.find(PolicyKind::SwapOnce);
    ok &= so && so->avg_calls && *so->avg_calls == 2.0;
    detail += so && so->avg_calls ? fmt("%.1f ", *so->avg_calls) : std::string("missing ");
  }
  verdict(ok, "swap-once-cost", fmt("%zu reports: ", reports.size()) + detail);
}

void metric_partition() {
  double worst = 0.0;
  for (const auto& r : reports) {
    const auto& d = r.dataset;
    worst = std::max(worst, std::abs(d.pc_ratio + d.primacy_ratio + d.recency_ratio + d.ambiguous_ratio - 1.0));
  }
  verdict(!reports.empty() && worst <= 1e-9, "metric-partition",
          fmt("max |sum of bias ratios - 1| = %.3g over %zu reports", worst, reports.size()));
}

}  // namespace

int main() {
  fs::remove_all(work);
  fs::create_directories(work);
  try {
    oracle_equivalence();
    oracle_self_consistency();
    stability_agreement();
    call_reduction();
    calibration_exactness();
    budget_table();
    violation_rate();
    determinism_and_resume();
    swap_once_cost();
    metric_partition();
  } catch (const std::exception& e) {
    std::printf("FAIL aborted: %s\n", e.what());
    ++failures;
  }
  fs::remove_all(work);
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
