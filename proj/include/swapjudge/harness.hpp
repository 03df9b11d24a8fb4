#pragma once

// Experiment plumbing: line-delimited datasets, the append-only transcript log,
// run configuration and the transcript-first pipeline
//   collect full transcripts -> fit gap model -> replay policies -> report.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "swapjudge/calibration.hpp"
#include "swapjudge/core.hpp"
#include "swapjudge/http_judge.hpp"
#include "swapjudge/judge.hpp"
#include "swapjudge/report.hpp"
#include "swapjudge/strategies.hpp"

namespace swapjudge {

struct Dataset {
  std::vector<JudgmentInstance> instances;
  // Present for synthetic records carrying q1/q2.
  std::unordered_map<std::string, BernoulliParams> simulation;
};

// One JSON object per line: id, context, candidate_a, candidate_b, optional gold
// ("a"/"b"), optional q1/q2. Errors name the offending line and field.
Dataset load_dataset(const std::filesystem::path& path);
Dataset parse_dataset(std::istream& in, const std::string& source_name = "<stream>");
nlohmann::json to_json(const JudgmentInstance& instance, const BernoulliParams* simulation = nullptr);

struct MixtureComponent {
  double q_ab = 0.5;
  double q_ba = 0.5;
  double weight = 1.0;
};

// "q1,q2,w;q1,q2,w;..."
std::vector<MixtureComponent> parse_mixture(std::string_view text);

// Synthetic dataset with (q1, q2) drawn per instance from the mixture. gold is
// a when (q1 + q2) / 2 > 1/2, b when below, absent when equal.
Dataset generate_dataset(std::span<const MixtureComponent> mixture, int size, std::uint64_t seed);
void simulate_dataset(std::span<const MixtureComponent> mixture, int size, std::uint64_t seed,
                      const std::filesystem::path& out);
void write_dataset(const Dataset& dataset, const std::filesystem::path& out);

using CallKey = std::tuple<std::string, Ordering, int>;

nlohmann::json to_json(const JudgmentCall& call);
JudgmentCall call_from_json(const nlohmann::json& j);

enum class ResumeMode { Resume, Restart };

// Append-only JSONL log of judge calls. A trailing line without a newline (an
// interrupted write) is discarded on open; any other unreadable line refuses
// the resume.
class TranscriptLog {
 public:
  TranscriptLog(const std::filesystem::path& path, ResumeMode mode);

  const std::filesystem::path& path() const { return path_; }
  std::optional<JudgmentCall> find(const std::string& id, Ordering ordering, int repetition) const;
  std::size_t size() const;
  // Recovered bytes dropped from an interrupted final line.
  std::size_t discarded_bytes() const { return discarded_bytes_; }

  // Thread safe; the line is flushed before returning.
  void append(const JudgmentCall& call);

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<CallKey, JudgmentCall> calls_;
  std::ofstream out_;
  std::size_t discarded_bytes_ = 0;
};

// Reads a finished log without opening it for writing.
std::map<CallKey, JudgmentCall> read_transcript_log(const std::filesystem::path& path);

enum class JudgeKind { Simulated, Http };

struct RunConfig {
  std::filesystem::path dataset;
  JudgeKind judge = JudgeKind::Simulated;
  ConfidenceModel confidence;  // simulated judge
  HttpJudgeConfig http;
  std::optional<std::filesystem::path> template_path;
  std::vector<PolicyKind> policies = {PolicyKind::SwapOnce, PolicyKind::StaticConsensus,
                                      PolicyKind::EarlyStopping, PolicyKind::ConfidenceBased};
  int n_max_pairs = kDefaultMaxPairs;
  double temperature = 0.1;
  double calibration_fraction = 0.10;
  std::uint64_t seed = 0;
  TiePolicy tie_policy = TiePolicy::Zero;
  bool calibration_in_accuracy = false;
  int concurrency = 1;
  std::filesystem::path out_dir = "swapjudge-out";
  ResumeMode resume = ResumeMode::Resume;
  bool verbose = false;

  void validate() const;
};

// Applies keys present in `j` on top of `base`.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
// Result-relevant fields only (no output paths, concurrency or resume mode).
nlohmann::json to_json(const RunConfig& config);

std::unique_ptr<Judge> make_judge(const RunConfig& config, const Dataset& dataset);

struct CollectionStats {
  std::size_t reused_calls = 0;
  std::size_t new_calls = 0;
};

// Full n_max-round transcripts for every instance; calls already in the log are
// reused, every new call is logged before it is used.
std::vector<PairedTranscript> collect_transcripts(const Dataset& dataset, const Judge& judge,
                                                  int n_max_pairs, TranscriptLog& log,
                                                  int concurrency, CollectionStats* stats = nullptr);

// Transcripts from log entries only; throws DataError if any call is missing.
std::vector<PairedTranscript> transcripts_from_log(const Dataset& dataset,
                                                   const std::map<CallKey, JudgmentCall>& calls,
                                                   int n_max_pairs);

struct Calibration {
  CalibrationSet set;
  GapModel model;
  std::vector<GapSample> samples;
};

Calibration calibrate(const Dataset& dataset, std::span<const PairedTranscript> transcripts,
                      double fraction, std::uint64_t seed, int n_max_pairs);

std::vector<InstanceEvaluation> evaluate_policies(const Dataset& dataset,
                                                  std::span<const PairedTranscript> transcripts,
                                                  const CalibrationSet& calibration,
                                                  std::span<const PolicyKind> policies,
                                                  int n_max_pairs, const GapModel& gap_model);

struct ExperimentResult {
  ExperimentReport report;
  std::string digest;
  CollectionStats collection;
  Calibration calibration;
  std::vector<InstanceEvaluation> evaluations;
};

// Full pipeline; writes transcript.jsonl, gap_model.json, results.jsonl and the
// report files into config.out_dir.
ExperimentResult run_experiment(const RunConfig& config, const Judge& judge);
ExperimentResult run_experiment(const RunConfig& config);

std::string config_digest(const RunConfig& config, const std::filesystem::path& dataset_file);

}  // namespace swapjudge
