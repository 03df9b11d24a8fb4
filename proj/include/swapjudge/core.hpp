#pragma once

// Domain types for paired, order-swapped LLM judgments and the pure decision
// functions over them: majority vote, consensus, repetition / permutation
// consistency, bias direction and the empirical probability gap.
//
// Verdicts are always stored in candidate space (A/B). Which prompt position a
// verdict corresponds to is derived from the ordering it was produced under.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace swapjudge {

enum class Side { A, B };

// AB: candidate_a occupies prompt position 1.
enum class Ordering { AB, BA };

enum class Verdict { A, B, Indeterminate };

enum class Winner { A, B, Tie };

enum class StopReason { ConclusiveMajority, BudgetExhausted, SingleShot };

enum class BiasLabel { PC, Primacy, Recency, Ambiguous };

struct JudgmentInstance {
  std::string id;
  std::string context;
  std::string candidate_a;
  std::string candidate_b;
  std::optional<Side> gold;
};

struct JudgmentCall {
  std::string instance_id;
  Ordering ordering = Ordering::AB;
  int repetition_index = 1;
  Verdict verdict = Verdict::Indeterminate;
  std::optional<double> confidence;
  std::optional<std::string> raw_response;
};

// Verdicts of one ordering in repetition order. `confidences` runs parallel to
// `verdicts` (entry absent when the judge reported none).
struct OutcomeVector {
  Ordering ordering = Ordering::AB;
  std::vector<Verdict> verdicts;
  std::vector<std::optional<double>> confidences;

  std::size_t size() const { return verdicts.size(); }
  bool empty() const { return verdicts.empty(); }
  void push_back(Verdict v, std::optional<double> confidence = std::nullopt) {
    verdicts.push_back(v);
    confidences.push_back(confidence);
  }
};

struct PairedTranscript {
  std::string instance_id;
  OutcomeVector vec_ab{Ordering::AB, {}, {}};
  OutcomeVector vec_ba{Ordering::BA, {}, {}};

  // Number of complete rounds; throws ContractViolation when the vectors differ in length.
  std::size_t pairs() const;
  void append(const JudgmentCall& call);
};

struct ConsensusOutcome {
  Winner winner = Winner::Tie;
  int pairs_used = 0;
  int total_calls = 0;
  StopReason stop_reason = StopReason::BudgetExhausted;
};

struct BiasProfile {
  std::optional<double> p_a_given_ab;  // q1
  std::optional<double> p_a_given_ba;  // q2
  std::optional<double> p_a;
  std::optional<double> gap;
  // False when either ordering had only Indeterminate verdicts.
  bool complete = false;
};

// Strict majority of A over B; Indeterminate entries do not count.
Winner majority_vote(std::span<const Verdict> verdicts);

// Majority over the concatenation of both orderings.
ConsensusOutcome consensus_outcome(const PairedTranscript& t);

// Consensus over the first `pairs` rounds only.
ConsensusOutcome consensus_outcome(const PairedTranscript& t, std::size_t pairs);

// The stable decision when every entry is the same non-Indeterminate verdict.
std::optional<Side> repetition_consistency(const OutcomeVector& v);

bool permutation_consistency(const PairedTranscript& t);

// Neither ordering is repetition consistent.
bool observation_violated(const PairedTranscript& t);

BiasLabel classify_bias(const PairedTranscript& t);

BiasProfile empirical_gap(const PairedTranscript& t);

// First `pairs` rounds of `t` as a new transcript.
PairedTranscript prefix(const PairedTranscript& t, std::size_t pairs);

constexpr Ordering swapped(Ordering o) { return o == Ordering::AB ? Ordering::BA : Ordering::AB; }
constexpr Verdict to_verdict(Side s) { return s == Side::A ? Verdict::A : Verdict::B; }
constexpr Winner to_winner(Side s) { return s == Side::A ? Winner::A : Winner::B; }

// Candidate shown at prompt position `position` (1 or 2) under `ordering`.
constexpr Side candidate_at(Ordering ordering, int position) {
  return (ordering == Ordering::AB) == (position == 1) ? Side::A : Side::B;
}

std::string_view to_string(Side s);
std::string_view to_string(Ordering o);
std::string_view to_string(Verdict v);
std::string_view to_string(Winner w);
std::string_view to_string(StopReason r);
std::string_view to_string(BiasLabel b);

std::optional<Side> parse_side(std::string_view s);
std::optional<Ordering> parse_ordering(std::string_view s);
std::optional<Verdict> parse_verdict(std::string_view s);

}  // namespace swapjudge
