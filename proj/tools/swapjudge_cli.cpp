// swapjudge: position-bias-aware pairwise judging from the command line.
//
//   swapjudge simulate-dataset --mixture "0.98,0.98,0.5;0.98,0.02,0.5" --size 500 --out data.jsonl
//   swapjudge run --dataset data.jsonl --out runs/a
//   swapjudge oracle --q1 0.95 --q2 0.3

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "swapjudge/errors.hpp"
#include "swapjudge/harness.hpp"
#include "swapjudge/oracle.hpp"

namespace sj = swapjudge;
using json = nlohmann::json;

namespace {

// Options shared by run / calibrate / report. Values apply on top of --config
// only when given on the command line.
struct RunFlags {
  std::string config_path;
  std::string dataset;
  std::string judge;
  std::string policies;
  int max_pairs = 0;
  double temperature = 0.0;
  double calibration_fraction = 0.0;
  std::uint64_t seed = 0;
  std::string tie_policy;
  int concurrency = 0;
  std::string out;
  bool resume = false;
  bool restart = false;
  bool calibration_in_accuracy = false;
  std::string url;
  std::string model;
  std::string api_key_env;
  int retries = 0;
  int max_in_flight = 0;
  std::string template_path;
  double confidence_intercept = 0.0;
  double confidence_slope = 0.0;
  double confidence_noise = 0.0;
  bool quiet = false;

  std::map<std::string, CLI::Option*> opts;

  void add_to(CLI::App* app) {
    opts["config"] = app->add_option("--config", config_path, "JSON config file; flags override it");
    opts["dataset"] = app->add_option("--dataset", dataset, "Line-delimited dataset");
    opts["judge"] = app->add_option("--judge", judge, "Judge backend")->check(CLI::IsMember({"sim", "http"}));
    opts["policies"] = app->add_option("--policies", policies,
                                       "Comma list of swap_once,static_consensus,early_stopping,confidence_based");
    opts["max-pairs"] = app->add_option("--max-pairs", max_pairs, "Maximum paired repetitions (default 12)");
    opts["temperature"] = app->add_option("--temperature", temperature, "Sampling temperature (default 0.1)");
    opts["calibration-fraction"] =
        app->add_option("--calibration-fraction", calibration_fraction, "Calibration sample fraction (default 0.10)");
    opts["seed"] = app->add_option("--seed", seed, "Master seed");
    opts["tie-policy"] =
        app->add_option("--tie-policy", tie_policy, "Tie scoring")->check(CLI::IsMember({"zero", "half"}));
    opts["concurrency"] = app->add_option("--concurrency", concurrency, "Instances judged in parallel");
    opts["out"] = app->add_option("--out", out, "Output directory");
    auto* resume_flag = app->add_flag("--resume", resume, "Resume from an existing transcript log (default)");
    auto* restart_flag = app->add_flag("--restart", restart, "Discard any existing transcript log");
    resume_flag->excludes(restart_flag);
    opts["calibration-in-accuracy"] = app->add_flag("--calibration-in-accuracy", calibration_in_accuracy,
                                                    "Score calibration instances too");
    opts["url"] = app->add_option("--url", url, "Chat-completions endpoint (http judge)");
    opts["model"] = app->add_option("--model", model, "Model name (http judge)");
    opts["api-key-env"] = app->add_option("--api-key-env", api_key_env,
                                          "Environment variable holding the bearer token (default SWAPJUDGE_API_KEY)");
    opts["retries"] = app->add_option("--retries", retries, "Retry limit per call (default 2)");
    opts["max-in-flight"] = app->add_option("--max-in-flight", max_in_flight, "Concurrent HTTP requests");
    opts["template"] = app->add_option("--template", template_path, "Prompt template file");
    opts["confidence-intercept"] =
        app->add_option("--confidence-intercept", confidence_intercept, "Simulated confidence intercept");
    opts["confidence-slope"] = app->add_option("--confidence-slope", confidence_slope, "Simulated confidence slope");
    opts["confidence-noise"] = app->add_option("--confidence-noise", confidence_noise, "Simulated confidence noise");
    app->add_flag("--quiet", quiet, "No progress on stderr");
  }

  bool given(const std::string& name) const { return opts.at(name)->count() > 0; }

  sj::RunConfig build() const {
    sj::RunConfig c;
    if (given("config")) c = sj::load_config(config_path);
    if (given("dataset")) c.dataset = dataset;
    if (given("judge")) c.judge = judge == "http" ? sj::JudgeKind::Http : sj::JudgeKind::Simulated;
    if (given("policies")) {
      c.policies.clear();
      std::stringstream ss(policies);
      for (std::string item; std::getline(ss, item, ',');) {
        const auto kind = sj::parse_policy_kind(item);
        if (!kind) throw sj::ConfigError("unknown policy '" + item + "'");
        c.policies.push_back(*kind);
      }
    }
    if (given("max-pairs")) c.n_max_pairs = max_pairs;
    if (given("temperature")) c.temperature = temperature;
    if (given("calibration-fraction")) c.calibration_fraction = calibration_fraction;
    if (given("seed")) c.seed = seed;
    if (given("tie-policy")) c.tie_policy = *sj::parse_tie_policy(tie_policy);
    if (given("concurrency")) c.concurrency = concurrency;
    if (given("out")) c.out_dir = out;
    if (given("calibration-in-accuracy")) c.calibration_in_accuracy = true;
    if (given("url")) c.http.url = url;
    if (given("model")) c.http.model = model;
    if (given("api-key-env")) c.http.api_key_env = api_key_env;
    if (given("retries")) c.http.retry_limit = retries;
    if (given("max-in-flight")) c.http.max_in_flight = max_in_flight;
    if (given("template")) c.template_path = template_path;
    if (given("confidence-intercept")) c.confidence.intercept = confidence_intercept;
    if (given("confidence-slope")) c.confidence.slope = confidence_slope;
    if (given("confidence-noise")) c.confidence.noise = confidence_noise;
    c.resume = restart ? sj::ResumeMode::Restart : sj::ResumeMode::Resume;
    c.verbose = !quiet;
    if (c.dataset.empty()) throw sj::ConfigError("--dataset (or \"dataset\" in --config) is required");
    return c;
  }
};

// Used by `report`: everything must already be in the transcript log.
class LogOnlyJudge final : public sj::Judge {
 public:
  sj::JudgmentCall judge(const sj::JudgmentInstance& instance, sj::Ordering ordering,
                         int repetition_index) const override {
    throw sj::DataError("transcript log has no entry for " + instance.id + "/" +
                        std::string(sj::to_string(ordering)) + "/" + std::to_string(repetition_index) +
                        "; use `run` to collect it");
  }
};

json summary(const sj::ExperimentResult& r) {
  json j = sj::to_json(r.report);
  j["digest"] = r.digest;
  j["collection"] = {{"reused_calls", r.collection.reused_calls}, {"new_calls", r.collection.new_calls}};
  return j;
}

json oracle_json(const sj::oracle::OracleResult& r) {
  return {{"p_win_a", r.p_win_a},       {"p_win_b", r.p_win_b},
          {"p_tie", r.p_tie},           {"expected_pairs", r.expected_pairs},
          {"expected_calls", r.expected_calls}, {"variance_pairs", r.variance_pairs}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive paired-ordering LLM judging with early stopping"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Collect transcripts, calibrate, replay every policy, write the report");
  run_flags.add_to(run);

  RunFlags cal_flags;
  auto* calibrate = app.add_subcommand("calibrate", "Collect transcripts and fit the confidence-gap model");
  cal_flags.add_to(calibrate);

  RunFlags report_flags;
  auto* report = app.add_subcommand("report", "Rebuild the report from an existing transcript log, no judge calls");
  report_flags.add_to(report);

  std::string replay_dataset, replay_log, replay_policy = "early_stopping", replay_gap_model;
  int replay_pairs = sj::kDefaultMaxPairs;
  auto* replay = app.add_subcommand("replay", "Replay one policy over a recorded transcript log (JSONL to stdout)");
  replay->add_option("--dataset", replay_dataset, "Dataset the log was collected for")->required();
  replay->add_option("--transcripts", replay_log, "transcript.jsonl (or a run directory)")->required();
  replay->add_option("--policy", replay_policy, "Policy to replay");
  replay->add_option("--max-pairs", replay_pairs, "Maximum paired repetitions");
  replay->add_option("--gap-model", replay_gap_model, "gap_model.json (confidence_based only)");

  double q1 = 0.5, q2 = 0.5;
  int oracle_pairs = sj::kDefaultMaxPairs;
  std::string oracle_mode = "both";
  auto* oracle = app.add_subcommand("oracle", "Exact outcome distribution for a Bernoulli judge");
  oracle->add_option("--q1", q1, "P(verdict A | ordering AB)")->required()->check(CLI::Range(0.0, 1.0));
  oracle->add_option("--q2", q2, "P(verdict A | ordering BA)")->required()->check(CLI::Range(0.0, 1.0));
  oracle->add_option("--max-pairs", oracle_pairs, "Maximum paired repetitions")->check(CLI::PositiveNumber);
  oracle->add_option("--mode", oracle_mode, "early_stopping, consensus or both")
      ->check(CLI::IsMember({"early_stopping", "consensus", "both"}));

  std::string mixture, sim_out;
  int sim_size = 100;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate-dataset", "Write a synthetic dataset drawn from a (q1,q2) mixture");
  simulate->add_option("--mixture", mixture, "Components 'q1,q2,weight;...' with weights summing to 1")->required();
  simulate->add_option("--size", sim_size, "Number of records")->check(CLI::NonNegativeNumber);
  simulate->add_option("--seed", sim_seed, "Seed");
  simulate->add_option("--out", sim_out, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto result = sj::run_experiment(run_flags.build());
      std::cout << summary(result).dump(2) << '\n';
    } else if (calibrate->parsed()) {
      const sj::RunConfig config = cal_flags.build();
      config.validate();
      const sj::Dataset dataset = sj::load_dataset(config.dataset);
      const auto judge = sj::make_judge(config, dataset);
      std::filesystem::create_directories(config.out_dir);
      sj::TranscriptLog log(config.out_dir / "transcript.jsonl", config.resume);
      const auto transcripts =
          sj::collect_transcripts(dataset, *judge, config.n_max_pairs, log, config.concurrency);
      const auto cal = sj::calibrate(dataset, transcripts, config.calibration_fraction, config.seed,
                                     config.n_max_pairs);
      const json model = sj::to_json(cal.model);
      std::ofstream(config.out_dir / "gap_model.json", std::ios::trunc) << model.dump(2) << '\n';
      std::cout << model.dump(2) << '\n';
    } else if (report->parsed()) {
      sj::RunConfig config = report_flags.build();
      if (config.resume == sj::ResumeMode::Restart) throw sj::ConfigError("report never discards the log");
      const auto result = sj::run_experiment(config, LogOnlyJudge{});
      std::cout << summary(result).dump(2) << '\n';
    } else if (replay->parsed()) {
      const auto kind = sj::parse_policy_kind(replay_policy);
      if (!kind) throw sj::ConfigError("unknown policy '" + replay_policy + "'");
      std::filesystem::path log_path = replay_log;
      if (std::filesystem::is_directory(log_path)) log_path /= "transcript.jsonl";
      const sj::Dataset dataset = sj::load_dataset(replay_dataset);
      const auto transcripts =
          sj::transcripts_from_log(dataset, sj::read_transcript_log(log_path), replay_pairs);
      sj::PolicySpec spec{*kind, replay_pairs, std::nullopt};
      if (*kind == sj::PolicyKind::ConfidenceBased) {
        if (replay_gap_model.empty()) throw sj::ConfigError("confidence_based replay needs --gap-model");
        std::ifstream in(replay_gap_model);
        if (!in) throw sj::DataError("cannot read '" + replay_gap_model + "'");
        spec.gap_model = sj::gap_model_from_json(json::parse(in));
      }
      for (const auto& t : transcripts) {
        const auto r = sj::replay_policy(spec, t);
        json line = {{"instance_id", t.instance_id},
                     {"policy", sj::to_string(*kind)},
                     {"winner", sj::to_string(r.outcome.winner)},
                     {"pairs_used", r.outcome.pairs_used},
                     {"total_calls", r.outcome.total_calls},
                     {"stop_reason", sj::to_string(r.outcome.stop_reason)}};
        if (r.budget_pairs) line["budget_pairs"] = *r.budget_pairs;
        if (r.estimated_gap) line["estimated_gap"] = *r.estimated_gap;
        std::cout << line.dump() << '\n';
      }
    } else if (oracle->parsed()) {
      json out = {{"q1", q1}, {"q2", q2}, {"max_pairs", oracle_pairs}};
      if (oracle_mode != "consensus") {
        out["early_stopping"] = oracle_json(sj::oracle::exact_early_stopping_stats(q1, q2, oracle_pairs));
      }
      if (oracle_mode != "early_stopping") {
        out["consensus"] = oracle_json(sj::oracle::exact_consensus_distribution(q1, q2, oracle_pairs));
      }
      out["violation_probability"] = sj::oracle::exact_violation_probability(q1, q2, oracle_pairs);
      std::cout << out.dump(2) << '\n';
    } else if (simulate->parsed()) {
      sj::simulate_dataset(sj::parse_mixture(mixture), sim_size, sim_seed, sim_out);
      std::cerr << "wrote " << sim_size << " records to " << sim_out << '\n';
    }
  } catch (const sj::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const sj::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
