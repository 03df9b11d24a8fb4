#include "swapjudge/core.hpp"

#include <algorithm>
#include <cmath>

#include "swapjudge/errors.hpp"

namespace swapjudge {

namespace {

struct Counts {
  std::size_t a = 0;
  std::size_t b = 0;
};

Counts count(std::span<const Verdict> verdicts) {
  Counts c;
  for (Verdict v : verdicts) {
    if (v == Verdict::A) ++c.a;
    else if (v == Verdict::B) ++c.b;
  }
  return c;
}

Winner compare(const Counts& c) {
  if (c.a > c.b) return Winner::A;
  if (c.b > c.a) return Winner::B;
  return Winner::Tie;
}

std::optional<double> fraction_a(const OutcomeVector& v) {
  const Counts c = count(v.verdicts);
  if (c.a + c.b == 0) return std::nullopt;
  return static_cast<double>(c.a) / static_cast<double>(c.a + c.b);
}

}  // namespace

std::size_t PairedTranscript::pairs() const {
  if (vec_ab.size() != vec_ba.size()) {
    throw ContractViolation("transcript '" + instance_id + "' has unequal ordering lengths (" +
                            std::to_string(vec_ab.size()) + " vs " +
                            std::to_string(vec_ba.size()) + ")");
  }
  return vec_ab.size();
}

void PairedTranscript::append(const JudgmentCall& call) {
  auto& v = call.ordering == Ordering::AB ? vec_ab : vec_ba;
  v.push_back(call.verdict, call.confidence);
}

Winner majority_vote(std::span<const Verdict> verdicts) {
  if (verdicts.empty()) throw UsageError("majority_vote: empty verdict sequence");
  return compare(count(verdicts));
}

ConsensusOutcome consensus_outcome(const PairedTranscript& t) {
  return consensus_outcome(t, t.pairs());
}

ConsensusOutcome consensus_outcome(const PairedTranscript& t, std::size_t pairs) {
  const std::size_t available = t.pairs();
  if (pairs == 0) throw ContractViolation("consensus_outcome: need at least one pair");
  if (pairs > available) {
    throw ContractViolation("consensus_outcome: requested " + std::to_string(pairs) +
                            " pairs but transcript '" + t.instance_id + "' has " +
                            std::to_string(available));
  }
  const auto n = static_cast<std::ptrdiff_t>(pairs);
  Counts c = count(std::span(t.vec_ab.verdicts.data(), pairs));
  const Counts d = count(std::span(t.vec_ba.verdicts.data(), pairs));
  c.a += d.a;
  c.b += d.b;

  ConsensusOutcome out;
  out.winner = compare(c);
  out.pairs_used = static_cast<int>(n);
  out.total_calls = static_cast<int>(2 * n);
  out.stop_reason =
      out.winner == Winner::Tie ? StopReason::BudgetExhausted : StopReason::ConclusiveMajority;
  return out;
}

std::optional<Side> repetition_consistency(const OutcomeVector& v) {
  if (v.empty()) throw UsageError("repetition_consistency: empty outcome vector");
  const Verdict first = v.verdicts.front();
  if (first == Verdict::Indeterminate) return std::nullopt;
  const bool unique = std::all_of(v.verdicts.begin(), v.verdicts.end(),
                                  [first](Verdict x) { return x == first; });
  if (!unique) return std::nullopt;
  return first == Verdict::A ? Side::A : Side::B;
}

bool permutation_consistency(const PairedTranscript& t) {
  t.pairs();
  const auto ab = repetition_consistency(t.vec_ab);
  const auto ba = repetition_consistency(t.vec_ba);
  return ab && ba && *ab == *ba;
}

bool observation_violated(const PairedTranscript& t) {
  t.pairs();
  return !repetition_consistency(t.vec_ab) && !repetition_consistency(t.vec_ba);
}

BiasLabel classify_bias(const PairedTranscript& t) {
  if (permutation_consistency(t)) return BiasLabel::PC;

  // Position 1 holds candidate_a under AB and candidate_b under BA.
  const Counts ab = count(t.vec_ab.verdicts);
  const Counts ba = count(t.vec_ba.verdicts);
  const std::size_t first_position = ab.a + ba.b;
  const std::size_t decided = ab.a + ab.b + ba.a + ba.b;
  if (decided == 0) return BiasLabel::Ambiguous;

  // rho > 1/2  <=>  2 * first_position > decided, kept in integers.
  if (2 * first_position > decided) return BiasLabel::Primacy;
  if (2 * first_position < decided) return BiasLabel::Recency;
  return BiasLabel::Ambiguous;
}

BiasProfile empirical_gap(const PairedTranscript& t) {
  t.pairs();
  BiasProfile p;
  p.p_a_given_ab = fraction_a(t.vec_ab);
  p.p_a_given_ba = fraction_a(t.vec_ba);
  p.complete = p.p_a_given_ab.has_value() && p.p_a_given_ba.has_value();

  if (p.complete) {
    p.p_a = (*p.p_a_given_ab + *p.p_a_given_ba) / 2.0;
  } else if (p.p_a_given_ab) {
    p.p_a = *p.p_a_given_ab;
  } else if (p.p_a_given_ba) {
    p.p_a = *p.p_a_given_ba;
  }
  if (p.p_a) p.gap = std::abs(2.0 * *p.p_a - 1.0);
  return p;
}

PairedTranscript prefix(const PairedTranscript& t, std::size_t pairs) {
  if (pairs > t.pairs()) throw ContractViolation("prefix: transcript too short");
  PairedTranscript out;
  out.instance_id = t.instance_id;
  const auto cut = [pairs](const OutcomeVector& v) {
    OutcomeVector o;
    o.ordering = v.ordering;
    o.verdicts.assign(v.verdicts.begin(), v.verdicts.begin() + static_cast<std::ptrdiff_t>(pairs));
    o.confidences.assign(v.confidences.begin(),
                         v.confidences.begin() + static_cast<std::ptrdiff_t>(pairs));
    return o;
  };
  out.vec_ab = cut(t.vec_ab);
  out.vec_ba = cut(t.vec_ba);
  return out;
}

std::string_view to_string(Side s) { return s == Side::A ? "a" : "b"; }

std::string_view to_string(Ordering o) { return o == Ordering::AB ? "ab" : "ba"; }

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::A: return "a";
    case Verdict::B: return "b";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

std::string_view to_string(Winner w) {
  switch (w) {
    case Winner::A: return "a";
    case Winner::B: return "b";
    case Winner::Tie: return "tie";
  }
  return "tie";
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::ConclusiveMajority: return "conclusive_majority";
    case StopReason::BudgetExhausted: return "budget_exhausted";
    case StopReason::SingleShot: return "single_shot";
  }
  return "budget_exhausted";
}

std::string_view to_string(BiasLabel b) {
  switch (b) {
    case BiasLabel::PC: return "pc";
    case BiasLabel::Primacy: return "primacy";
    case BiasLabel::Recency: return "recency";
    case BiasLabel::Ambiguous: return "ambiguous";
  }
  return "ambiguous";
}

std::optional<Side> parse_side(std::string_view s) {
  if (s == "a" || s == "A") return Side::A;
  if (s == "b" || s == "B") return Side::B;
  return std::nullopt;
}

std::optional<Ordering> parse_ordering(std::string_view s) {
  if (s == "ab" || s == "AB") return Ordering::AB;
  if (s == "ba" || s == "BA") return Ordering::BA;
  return std::nullopt;
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  if (s == "a" || s == "A") return Verdict::A;
  if (s == "b" || s == "B") return Verdict::B;
  if (s == "indeterminate") return Verdict::Indeterminate;
  return std::nullopt;
}

}  // namespace swapjudge
