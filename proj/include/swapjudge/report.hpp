#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "swapjudge/calibration.hpp"
#include "swapjudge/core.hpp"
#include "swapjudge/strategies.hpp"

namespace swapjudge {

enum class TiePolicy { Zero, Half };

// 1 for a correct winner, 0 for a wrong one, 0 or 0.5 for a tie. Absent without gold.
std::optional<double> score_outcome(const ConsensusOutcome& outcome, std::optional<Side> gold,
                                    TiePolicy tie_policy = TiePolicy::Zero);

// Everything known about one instance after collection and replay.
struct InstanceEvaluation {
  std::string instance_id;
  std::optional<Side> gold;
  bool calibration = false;
  PairedTranscript full;
  std::map<PolicyKind, PolicyResult> results;
};

struct PolicyMetrics {
  PolicyKind kind = PolicyKind::EarlyStopping;
  std::optional<double> accuracy;
  std::optional<double> normalized_accuracy;
  std::optional<double> avg_calls;              // includes amortised calibration cost
  std::optional<double> avg_calls_unamortized;  // instance-wise mean over the evaluation set
  std::optional<double> tie_rate;
  int evaluated = 0;
  int scored = 0;
  int budget_fallbacks = 0;
};

inline constexpr std::size_t kGapBins = 5;

struct GapHistogram {
  // Brackets [0,.2) [.2,.4) [.4,.6) [.6,.8) [.8,1]
  std::map<BiasLabel, std::array<int, kGapBins>> counts;
  int excluded = 0;  // instances without any decided verdict

  static std::size_t bin_of(double gap);
  int total() const;
};

struct DatasetMetrics {
  int instances = 0;
  int evaluation_instances = 0;
  int calibration_instances = 0;
  double pc_ratio = 0.0;
  double primacy_ratio = 0.0;
  double recency_ratio = 0.0;
  double ambiguous_ratio = 0.0;
  double violation_rate = 0.0;
  int violations = 0;
  GapHistogram gap_histogram;
};

struct Provenance {
  std::uint64_t seed = 0;
  std::string config_digest;
  int n_max_pairs = kDefaultMaxPairs;
  TiePolicy tie_policy = TiePolicy::Zero;
  bool calibration_in_accuracy = false;
};

struct ExperimentReport {
  std::vector<PolicyMetrics> policies;
  std::optional<double> consensus_accuracy;
  DatasetMetrics dataset;
  std::optional<GapModel> gap_model;
  Provenance provenance;

  const PolicyMetrics* find(PolicyKind kind) const;
};

struct ReportOptions {
  TiePolicy tie_policy = TiePolicy::Zero;
  bool calibration_in_accuracy = false;
  Provenance provenance;
};

// Aggregates replayed policy results. All instances must carry results for the
// same policy set.
ExperimentReport build_report(std::span<const InstanceEvaluation> evaluations,
                              const std::optional<GapModel>& gap_model, const ReportOptions& options);

nlohmann::json to_json(const GapModel& m);
GapModel gap_model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentReport& r);

// Hex digest of the canonical JSON rendering.
std::string report_digest(const ExperimentReport& r);

// report.json plus one CSV per table into `dir`.
void write_report(const ExperimentReport& r, const std::filesystem::path& dir);

std::string_view to_string(TiePolicy t);
std::optional<TiePolicy> parse_tie_policy(std::string_view s);

}  // namespace swapjudge
