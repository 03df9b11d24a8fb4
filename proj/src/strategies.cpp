#include "swapjudge/strategies.hpp"

#include <future>

#include "swapjudge/errors.hpp"

namespace swapjudge {

namespace {

void record(PairedTranscript& t, const std::pair<JudgmentCall, JudgmentCall>& round, int repetition) {
  const auto& [ab, ba] = round;
  if (ab.ordering != Ordering::AB || ba.ordering != Ordering::BA) {
    throw ContractViolation("round source returned calls in the wrong orderings");
  }
  if (ab.repetition_index != repetition || ba.repetition_index != repetition) {
    throw ContractViolation("round source returned repetition " + std::to_string(ab.repetition_index) +
                            "/" + std::to_string(ba.repetition_index) + " for round " +
                            std::to_string(repetition));
  }
  t.append(ab);
  t.append(ba);
}

// Paired rounds until the first conclusive majority or `cap` rounds. Rounds
// already present in `t` are counted.
ConsensusOutcome stop_early(PairedTranscript& t, const RoundSource& source, int cap) {
  for (int n = static_cast<int>(t.pairs()) + 1; n <= cap; ++n) {
    if (n > 1) {
      const ConsensusOutcome so_far = consensus_outcome(t);
      if (so_far.winner != Winner::Tie) return so_far;
    }
    record(t, source(n), n);
  }
  ConsensusOutcome last = consensus_outcome(t);
  last.stop_reason =
      last.winner == Winner::Tie ? StopReason::BudgetExhausted : StopReason::ConclusiveMajority;
  return last;
}

}  // namespace

void PolicySpec::validate() const {
  if (n_max_pairs < 1) throw UsageError("policy: n_max_pairs must be >= 1");
  if (kind == PolicyKind::ConfidenceBased && !gap_model) {
    throw UsageError("policy: confidence-based stopping requires a fitted gap model");
  }
}

PolicyResult run_policy(const PolicySpec& policy, const std::string& instance_id,
                        const RoundSource& source) {
  policy.validate();
  PolicyResult r;
  r.transcript.instance_id = instance_id;

  switch (policy.kind) {
    case PolicyKind::SwapOnce: {
      record(r.transcript, source(1), 1);
      r.outcome = consensus_outcome(r.transcript);
      r.outcome.stop_reason = StopReason::SingleShot;
      break;
    }
    case PolicyKind::StaticConsensus: {
      for (int n = 1; n <= policy.n_max_pairs; ++n) record(r.transcript, source(n), n);
      r.outcome = consensus_outcome(r.transcript);
      r.outcome.stop_reason = StopReason::BudgetExhausted;
      break;
    }
    case PolicyKind::EarlyStopping: {
      r.outcome = stop_early(r.transcript, source, policy.n_max_pairs);
      break;
    }
    case PolicyKind::ConfidenceBased: {
      record(r.transcript, source(1), 1);
      r.confidence_gap = first_pair_confidence_gap(r.transcript);
      int budget = policy.n_max_pairs;
      if (r.confidence_gap) {
        r.estimated_gap = policy.gap_model->predict(*r.confidence_gap);
        budget = confidence_budget(*r.estimated_gap, policy.n_max_pairs);
      } else {
        r.budget_fallback = true;
      }
      r.budget_pairs = budget;
      r.outcome = stop_early(r.transcript, source, budget);
      break;
    }
  }
  return r;
}

RoundSource live_source(const Judge& judge, const JudgmentInstance& instance, LiveOptions options) {
  return [&judge, &instance, options](int repetition) {
    if (options.parallel_pair) {
      auto ba = std::async(std::launch::async,
                           [&] { return judge.judge(instance, Ordering::BA, repetition); });
      JudgmentCall ab = judge.judge(instance, Ordering::AB, repetition);
      return std::make_pair(std::move(ab), ba.get());
    }
    JudgmentCall ab = judge.judge(instance, Ordering::AB, repetition);
    JudgmentCall ba = judge.judge(instance, Ordering::BA, repetition);
    return std::make_pair(std::move(ab), std::move(ba));
  };
}

RoundSource replay_source(const PairedTranscript& full) {
  return [&full](int repetition) {
    const auto available = full.pairs();
    if (repetition < 1 || static_cast<std::size_t>(repetition) > available) {
      throw ContractViolation("replay: policy requested round " + std::to_string(repetition) +
                              " but transcript '" + full.instance_id + "' has " +
                              std::to_string(available));
    }
    const auto i = static_cast<std::size_t>(repetition - 1);
    const auto make = [&](const OutcomeVector& v) {
      JudgmentCall c;
      c.instance_id = full.instance_id;
      c.ordering = v.ordering;
      c.repetition_index = repetition;
      c.verdict = v.verdicts[i];
      c.confidence = v.confidences[i];
      return c;
    };
    return std::make_pair(make(full.vec_ab), make(full.vec_ba));
  };
}

PolicyResult run_policy(const Judge& judge, const JudgmentInstance& instance,
                        const PolicySpec& policy, LiveOptions options) {
  return run_policy(policy, instance.id, live_source(judge, instance, options));
}

PolicyResult run_swap_once(const Judge& judge, const JudgmentInstance& instance) {
  return run_policy(judge, instance, PolicySpec{PolicyKind::SwapOnce, 1, std::nullopt});
}

PolicyResult run_static_consensus(const Judge& judge, const JudgmentInstance& instance, int n_max_pairs) {
  return run_policy(judge, instance, PolicySpec{PolicyKind::StaticConsensus, n_max_pairs, std::nullopt});
}

PolicyResult run_early_stopping(const Judge& judge, const JudgmentInstance& instance, int n_max_pairs) {
  return run_policy(judge, instance, PolicySpec{PolicyKind::EarlyStopping, n_max_pairs, std::nullopt});
}

PolicyResult run_confidence_based(const Judge& judge, const JudgmentInstance& instance,
                                  int n_max_pairs, const GapModel& gap_model) {
  return run_policy(judge, instance, PolicySpec{PolicyKind::ConfidenceBased, n_max_pairs, gap_model});
}

PolicyResult replay_policy(const PolicySpec& policy, const PairedTranscript& full) {
  return run_policy(policy, full.instance_id, replay_source(full));
}

std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::SwapOnce: return "swap_once";
    case PolicyKind::StaticConsensus: return "static_consensus";
    case PolicyKind::EarlyStopping: return "early_stopping";
    case PolicyKind::ConfidenceBased: return "confidence_based";
  }
  return "early_stopping";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view s) {
  if (s == "swap_once" || s == "swap-once") return PolicyKind::SwapOnce;
  if (s == "static_consensus" || s == "static-consensus" || s == "consensus") return PolicyKind::StaticConsensus;
  if (s == "early_stopping" || s == "early-stopping") return PolicyKind::EarlyStopping;
  if (s == "confidence_based" || s == "confidence-based") return PolicyKind::ConfidenceBased;
  return std::nullopt;
}

}  // namespace swapjudge
