#include <atomic>
#include <exception>
#include <fstream>
#include <set>
#include <iostream>
#include <sstream>
#include <thread>

#include "swapjudge/counter_rng.hpp"
#include "swapjudge/errors.hpp"
#include "swapjudge/harness.hpp"

namespace swapjudge {

using json = nlohmann::json;

namespace {

void log_info(const RunConfig& config, const std::string& msg) {
  if (config.verbose) std::cerr << "[swapjudge] " << msg << '\n';
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class T>
void assign_if(const json& j, const char* key, T& field) {
  if (const auto it = j.find(key); it != j.end() && !it->is_null()) field = it->get<T>();
}

}  // namespace

void RunConfig::validate() const {
  if (n_max_pairs < 1) throw ConfigError("max-pairs must be >= 1");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (!(calibration_fraction > 0.0 && calibration_fraction <= 1.0)) {
    throw ConfigError("calibration fraction must be in (0, 1]");
  }
  if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
  if (policies.empty()) throw ConfigError("at least one policy is required");
  if (confidence.noise < 0.0) throw ConfigError("confidence noise must be >= 0");
  if (http.retry_limit < 0) throw ConfigError("retry limit must be >= 0");
}

RunConfig config_from_json(const json& j, RunConfig base) {
  static const std::set<std::string> known = {
      "dataset", "judge", "simulated", "http", "template_path", "policies", "max_pairs", "temperature",
      "calibration_fraction", "seed", "tie_policy", "calibration_in_accuracy", "concurrency", "out"};
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("config: unknown key '" + key + "'");
  }
  try {
    if (const auto it = j.find("dataset"); it != j.end()) base.dataset = it->get<std::string>();
    if (const auto it = j.find("judge"); it != j.end()) {
      const auto kind = it->get<std::string>();
      if (kind == "sim" || kind == "simulated") base.judge = JudgeKind::Simulated;
      else if (kind == "http") base.judge = JudgeKind::Http;
      else throw ConfigError("config: unknown judge '" + kind + "'");
    }
    if (const auto it = j.find("simulated"); it != j.end()) {
      assign_if(*it, "confidence_intercept", base.confidence.intercept);
      assign_if(*it, "confidence_slope", base.confidence.slope);
      assign_if(*it, "confidence_noise", base.confidence.noise);
    }
    if (const auto it = j.find("http"); it != j.end()) {
      assign_if(*it, "url", base.http.url);
      assign_if(*it, "model", base.http.model);
      assign_if(*it, "api_key_env", base.http.api_key_env);
      assign_if(*it, "retry_limit", base.http.retry_limit);
      assign_if(*it, "max_in_flight", base.http.max_in_flight);
      if (const auto t = it->find("timeout_ms"); t != it->end()) base.http.timeout = std::chrono::milliseconds(t->get<long>());
      if (const auto b = it->find("backoff_ms"); b != it->end()) base.http.backoff = std::chrono::milliseconds(b->get<long>());
    }
    if (const auto it = j.find("template_path"); it != j.end() && !it->is_null()) {
      base.template_path = it->get<std::string>();
    }
    if (const auto it = j.find("policies"); it != j.end()) {
      base.policies.clear();
      for (const auto& p : *it) {
        const auto kind = parse_policy_kind(p.get<std::string>());
        if (!kind) throw ConfigError("config: unknown policy '" + p.get<std::string>() + "'");
        base.policies.push_back(*kind);
      }
    }
    assign_if(j, "max_pairs", base.n_max_pairs);
    assign_if(j, "temperature", base.temperature);
    assign_if(j, "calibration_fraction", base.calibration_fraction);
    assign_if(j, "seed", base.seed);
    if (const auto it = j.find("tie_policy"); it != j.end()) {
      const auto t = parse_tie_policy(it->get<std::string>());
      if (!t) throw ConfigError("config: tie_policy must be 'zero' or 'half'");
      base.tie_policy = *t;
    }
    assign_if(j, "calibration_in_accuracy", base.calibration_in_accuracy);
    assign_if(j, "concurrency", base.concurrency);
    if (const auto it = j.find("out"); it != j.end()) base.out_dir = it->get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  const json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("config '" + path.string() + "' is not a JSON object");
  return config_from_json(j, std::move(base));
}

json to_json(const RunConfig& c) {
  json policies = json::array();
  for (auto p : c.policies) policies.push_back(to_string(p));
  json j = {
      {"judge", c.judge == JudgeKind::Simulated ? "sim" : "http"},
      {"policies", policies},
      {"max_pairs", c.n_max_pairs},
      {"temperature", c.temperature},
      {"calibration_fraction", c.calibration_fraction},
      {"seed", c.seed},
      {"tie_policy", to_string(c.tie_policy)},
      {"calibration_in_accuracy", c.calibration_in_accuracy},
  };
  if (c.judge == JudgeKind::Simulated) {
    j["simulated"] = {{"confidence_intercept", c.confidence.intercept},
                      {"confidence_slope", c.confidence.slope},
                      {"confidence_noise", c.confidence.noise}};
  } else {
    j["http"] = {{"url", c.http.url}, {"model", c.http.model}, {"retry_limit", c.http.retry_limit}};
    j["template_path"] = c.template_path ? json(c.template_path->string()) : json(nullptr);
  }
  return j;
}

std::string config_digest(const RunConfig& config, const std::filesystem::path& dataset_file) {
  std::uint64_t h = rng::fnv1a64(to_json(config).dump());
  h = rng::fnv1a64(read_file(dataset_file), h);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::unique_ptr<Judge> make_judge(const RunConfig& config, const Dataset& dataset) {
  if (config.judge == JudgeKind::Simulated) {
    for (const auto& inst : dataset.instances) {
      if (!dataset.simulation.contains(inst.id)) {
        throw ConfigError("simulated judge needs q1/q2 on every record; '" + inst.id + "' has none");
      }
    }
    return std::make_unique<SimulatedJudge>(SimulatedJudgeConfig{config.seed, config.confidence},
                                            dataset.simulation);
  }
  HttpJudgeConfig http = config.http;
  http.temperature = config.temperature;
  http.max_in_flight = std::max(http.max_in_flight, 1);
  PromptTemplate tmpl = config.template_path ? PromptTemplate::from_file(config.template_path->string())
                                             : PromptTemplate::default_template();
  return std::make_unique<HttpJudge>(std::move(http), std::move(tmpl));
}

std::vector<PairedTranscript> collect_transcripts(const Dataset& dataset, const Judge& judge,
                                                  int n_max_pairs, TranscriptLog& log,
                                                  int concurrency, CollectionStats* stats) {
  if (n_max_pairs < 1) throw UsageError("collect_transcripts: n_max_pairs must be >= 1");
  const std::size_t n = dataset.instances.size();
  std::vector<PairedTranscript> out(n);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> reused{0}, fresh{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&] {
    try {
      for (std::size_t i = next++; i < n && !stop; i = next++) {
        const JudgmentInstance& inst = dataset.instances[i];
        PairedTranscript& t = out[i];
        t.instance_id = inst.id;
        for (int rep = 1; rep <= n_max_pairs && !stop; ++rep) {
          for (Ordering o : {Ordering::AB, Ordering::BA}) {
            if (auto logged = log.find(inst.id, o, rep)) {
              t.append(*logged);
              ++reused;
              continue;
            }
            JudgmentCall call = judge.judge(inst, o, rep);
            if (call.instance_id != inst.id || call.ordering != o || call.repetition_index != rep) {
              throw ContractViolation("judge returned a call for a different (instance, ordering, repetition)");
            }
            log.append(call);
            t.append(call);
            ++fresh;
          }
        }
      }
    } catch (...) {
      stop = true;
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  const auto threads = static_cast<std::size_t>(std::max(1, concurrency));
  if (threads == 1 || n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < std::min(threads, n); ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  if (stats) {
    stats->reused_calls = reused;
    stats->new_calls = fresh;
  }
  return out;
}

std::vector<PairedTranscript> transcripts_from_log(const Dataset& dataset,
                                                   const std::map<CallKey, JudgmentCall>& calls,
                                                   int n_max_pairs) {
  std::vector<PairedTranscript> out;
  out.reserve(dataset.instances.size());
  for (const auto& inst : dataset.instances) {
    PairedTranscript t;
    t.instance_id = inst.id;
    for (int rep = 1; rep <= n_max_pairs; ++rep) {
      for (Ordering o : {Ordering::AB, Ordering::BA}) {
        const auto it = calls.find(CallKey{inst.id, o, rep});
        if (it == calls.end()) {
          throw DataError("transcript log is missing " + inst.id + "/" + std::string(to_string(o)) +
                          "/" + std::to_string(rep) + "; run collection first");
        }
        t.append(it->second);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

Calibration calibrate(const Dataset& dataset, std::span<const PairedTranscript> transcripts,
                      double fraction, std::uint64_t seed, int n_max_pairs) {
  if (transcripts.size() != dataset.instances.size()) {
    throw ContractViolation("calibrate: one transcript per instance required");
  }
  Calibration cal;
  cal.set = select_calibration_set(dataset.instances, fraction, seed);
  std::vector<std::string> ids;
  for (std::size_t i : cal.set.indices) {
    const PairedTranscript& t = transcripts[i];
    ids.push_back(t.instance_id);
    const auto c = first_pair_confidence_gap(t);
    const auto g = empirical_gap(t).gap;
    if (c && g) cal.samples.push_back({*c, *g});
  }
  cal.model = fit_gap_model(cal.samples, n_max_pairs, static_cast<int>(cal.set.indices.size()));
  cal.model.training_ids = std::move(ids);
  return cal;
}

std::vector<InstanceEvaluation> evaluate_policies(const Dataset& dataset,
                                                  std::span<const PairedTranscript> transcripts,
                                                  const CalibrationSet& calibration,
                                                  std::span<const PolicyKind> policies,
                                                  int n_max_pairs, const GapModel& gap_model) {
  if (transcripts.size() != dataset.instances.size() || calibration.flags.size() != transcripts.size()) {
    throw ContractViolation("evaluate_policies: dataset, transcripts and calibration flags differ in size");
  }
  std::vector<InstanceEvaluation> out;
  out.reserve(transcripts.size());
  for (std::size_t i = 0; i < transcripts.size(); ++i) {
    InstanceEvaluation e;
    e.instance_id = dataset.instances[i].id;
    e.gold = dataset.instances[i].gold;
    e.calibration = calibration.flags[i];
    e.full = transcripts[i];
    for (PolicyKind kind : policies) {
      PolicySpec spec{kind, n_max_pairs, std::nullopt};
      if (kind == PolicyKind::ConfidenceBased) spec.gap_model = gap_model;
      e.results.emplace(kind, replay_policy(spec, e.full));
    }
    out.push_back(std::move(e));
  }
  return out;
}

ExperimentResult run_experiment(const RunConfig& config, const Judge& judge) {
  config.validate();
  const Dataset dataset = load_dataset(config.dataset);
  if (dataset.instances.empty()) throw DataError("dataset '" + config.dataset.string() + "' is empty");

  std::filesystem::create_directories(config.out_dir);
  ExperimentResult result;

  TranscriptLog log(config.out_dir / "transcript.jsonl", config.resume);
  if (log.discarded_bytes() > 0) {
    log_info(config, "dropped " + std::to_string(log.discarded_bytes()) +
                         " bytes of an interrupted final log line");
  }
  log_info(config, "collecting " + std::to_string(dataset.instances.size()) + " instances x " +
                       std::to_string(2 * config.n_max_pairs) + " calls (" + std::to_string(log.size()) +
                       " already logged)");
  const auto transcripts =
      collect_transcripts(dataset, judge, config.n_max_pairs, log, config.concurrency, &result.collection);

  result.calibration =
      calibrate(dataset, transcripts, config.calibration_fraction, config.seed, config.n_max_pairs);
  {
    std::ofstream f(config.out_dir / "gap_model.json", std::ios::trunc);
    f << to_json(result.calibration.model).dump(2) << '\n';
  }
  if (result.calibration.model.fallback) {
    log_info(config, "gap model fit was degenerate; confidence-based budgets fall back to max-pairs");
  }

  result.evaluations = evaluate_policies(dataset, transcripts, result.calibration.set, config.policies,
                                         config.n_max_pairs, result.calibration.model);

  ReportOptions options;
  options.tie_policy = config.tie_policy;
  options.calibration_in_accuracy = config.calibration_in_accuracy;
  options.provenance.seed = config.seed;
  options.provenance.n_max_pairs = config.n_max_pairs;
  options.provenance.config_digest = config_digest(config, config.dataset);
  result.report = build_report(result.evaluations, result.calibration.model, options);
  result.digest = report_digest(result.report);

  if (const auto* cb = result.report.find(PolicyKind::ConfidenceBased); cb && cb->budget_fallbacks > 0) {
    log_info(config, std::to_string(cb->budget_fallbacks) +
                         " instances lacked first-round confidences; used the full budget");
  }

  write_report(result.report, config.out_dir);
  std::ofstream results(config.out_dir / "results.jsonl", std::ios::trunc);
  for (const auto& e : result.evaluations) {
    for (const auto& [kind, r] : e.results) {
      json line = {{"instance_id", e.instance_id},
                   {"policy", to_string(kind)},
                   {"winner", to_string(r.outcome.winner)},
                   {"pairs_used", r.outcome.pairs_used},
                   {"total_calls", r.outcome.total_calls},
                   {"stop_reason", to_string(r.outcome.stop_reason)},
                   {"calibration", e.calibration}};
      if (r.budget_pairs) line["budget_pairs"] = *r.budget_pairs;
      if (r.estimated_gap) line["estimated_gap"] = *r.estimated_gap;
      results << line.dump() << '\n';
    }
  }
  log_info(config, "report digest " + result.digest + " written to " + config.out_dir.string());
  return result;
}

ExperimentResult run_experiment(const RunConfig& config) {
  config.validate();
  const Dataset dataset = load_dataset(config.dataset);
  const auto judge = make_judge(config, dataset);
  return run_experiment(config, *judge);
}

}  // namespace swapjudge
