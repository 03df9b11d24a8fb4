#pragma once

// Repetition policies over paired orderings.
//
// Every policy is written once against a RoundSource that yields the two calls
// of a repetition round. Live execution pulls rounds from a Judge; replay pulls
// them from a recorded transcript, so a replay is identical to a live run that
// produced the same verdicts.

#include <functional>
#include <optional>
#include <string_view>
#include <utility>

#include "swapjudge/calibration.hpp"
#include "swapjudge/core.hpp"
#include "swapjudge/judge.hpp"

namespace swapjudge {

enum class PolicyKind { SwapOnce, StaticConsensus, EarlyStopping, ConfidenceBased };

inline constexpr int kDefaultMaxPairs = 12;

struct PolicySpec {
  PolicyKind kind = PolicyKind::EarlyStopping;
  int n_max_pairs = kDefaultMaxPairs;
  std::optional<GapModel> gap_model;  // required for ConfidenceBased

  void validate() const;
};

struct PolicyResult {
  ConsensusOutcome outcome;
  PairedTranscript transcript;  // the rounds this policy consumed
  std::optional<int> budget_pairs;
  std::optional<double> estimated_gap;
  std::optional<double> confidence_gap;
  // ConfidenceBased only: the first round had no usable confidences, budget = n_max.
  bool budget_fallback = false;
};

// Produces the (AB, BA) calls of repetition round `repetition` (1-based).
using RoundSource = std::function<std::pair<JudgmentCall, JudgmentCall>(int repetition)>;

PolicyResult run_policy(const PolicySpec& policy, const std::string& instance_id,
                        const RoundSource& source);

struct LiveOptions {
  // Issue the two calls of a round concurrently; the round is still a barrier.
  bool parallel_pair = false;
};

RoundSource live_source(const Judge& judge, const JudgmentInstance& instance, LiveOptions options = {});

// Rounds beyond the recorded length raise ContractViolation when requested.
RoundSource replay_source(const PairedTranscript& full);

PolicyResult run_policy(const Judge& judge, const JudgmentInstance& instance,
                        const PolicySpec& policy, LiveOptions options = {});

PolicyResult run_swap_once(const Judge& judge, const JudgmentInstance& instance);
PolicyResult run_static_consensus(const Judge& judge, const JudgmentInstance& instance,
                                  int n_max_pairs = kDefaultMaxPairs);
PolicyResult run_early_stopping(const Judge& judge, const JudgmentInstance& instance,
                                int n_max_pairs = kDefaultMaxPairs);
PolicyResult run_confidence_based(const Judge& judge, const JudgmentInstance& instance,
                                  int n_max_pairs, const GapModel& gap_model);

PolicyResult replay_policy(const PolicySpec& policy, const PairedTranscript& full);

std::string_view to_string(PolicyKind k);
std::optional<PolicyKind> parse_policy_kind(std::string_view s);

}  // namespace swapjudge
