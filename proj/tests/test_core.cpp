#include <doctest.h>

#include <algorithm>
#include <random>

#include "swapjudge/core.hpp"
#include "swapjudge/errors.hpp"
#include "test_support.hpp"

using namespace swapjudge;
using swapjudge::testing::make_transcript;
using swapjudge::testing::random_transcript;

TEST_CASE("majority_vote") {
  using V = Verdict;
  CHECK(majority_vote(std::vector{V::A, V::A, V::B, V::A}) == Winner::A);
  CHECK(majority_vote(std::vector{V::A, V::B}) == Winner::Tie);
  CHECK(majority_vote(std::vector{V::A, V::Indeterminate}) == Winner::A);
  CHECK(majority_vote(std::vector{V::B, V::B, V::A}) == Winner::B);
  CHECK(majority_vote(std::vector{V::Indeterminate, V::Indeterminate}) == Winner::Tie);
  CHECK_THROWS_AS(majority_vote(std::vector<V>{}), UsageError);
}

TEST_CASE("majority_vote is invariant under permutation of its input") {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> len(1, 15), pick(0, 2);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Verdict> v(static_cast<std::size_t>(len(gen)));
    for (auto& x : v) x = static_cast<Verdict>(pick(gen));
    const Winner w = majority_vote(v);
    std::shuffle(v.begin(), v.end(), gen);
    CHECK(majority_vote(v) == w);
  }
}

TEST_CASE("consensus_outcome over the concatenated orderings") {
  SUBCASE("worked example: (a,a,a) and (b,b,a) -> a after 3 pairs") {
    const auto c = consensus_outcome(make_transcript("aaa", "bba"));
    CHECK(c.winner == Winner::A);
    CHECK(c.pairs_used == 3);
    CHECK(c.total_calls == 6);
    CHECK(c.stop_reason == StopReason::ConclusiveMajority);
  }
  SUBCASE("contradictory orderings tie") {
    const auto c = consensus_outcome(make_transcript("aa", "bb"));
    CHECK(c.winner == Winner::Tie);
    CHECK(c.stop_reason != StopReason::ConclusiveMajority);
  }
  SUBCASE("unanimous pair") {
    const auto c = consensus_outcome(make_transcript("a", "a"));
    CHECK(c.winner == Winner::A);
    CHECK(c.total_calls == 2);
  }
  SUBCASE("prefix consensus") {
    const auto t = make_transcript("aaa", "bba");
    CHECK(consensus_outcome(t, 1).winner == Winner::Tie);
    CHECK(consensus_outcome(t, 2).winner == Winner::Tie);
    CHECK(consensus_outcome(t, 3).winner == Winner::A);
    CHECK_THROWS_AS(consensus_outcome(t, 4), ContractViolation);
  }
  SUBCASE("unequal vectors are a contract violation") {
    CHECK_THROWS_AS(consensus_outcome(make_transcript("aa", "b")), ContractViolation);
  }
}

TEST_CASE("repetition_consistency") {
  CHECK(repetition_consistency(make_transcript("aaa", "aaa").vec_ab) == Side::A);
  CHECK_FALSE(repetition_consistency(make_transcript("aaa", "bba").vec_ba).has_value());
  CHECK_FALSE(repetition_consistency(make_transcript("aa", "??").vec_ba).has_value());
  CHECK(repetition_consistency(make_transcript("b", "b").vec_ba) == Side::B);
  CHECK_THROWS_AS(repetition_consistency(OutcomeVector{}), UsageError);
}

TEST_CASE("permutation_consistency") {
  CHECK(permutation_consistency(make_transcript("aa", "aa")));
  CHECK_FALSE(permutation_consistency(make_transcript("aaa", "bbb")));
  CHECK_FALSE(permutation_consistency(make_transcript("aa", "ab")));
}

TEST_CASE("observation_violated") {
  CHECK(observation_violated(make_transcript("abab", "baab")));
  CHECK_FALSE(observation_violated(make_transcript("aaaa", "abba")));
  CHECK_FALSE(observation_violated(make_transcript("aaaa", "bbbb")));
}

TEST_CASE("classify_bias") {
  CHECK(classify_bias(make_transcript("aaaa", "bbbb")) == BiasLabel::Primacy);
  CHECK(classify_bias(make_transcript("bbbb", "aaaa")) == BiasLabel::Recency);
  CHECK(classify_bias(make_transcript("aa", "aa")) == BiasLabel::PC);
  // Position-1 picks: ab 'a' x1, ba 'b' x1 -> 2 of 4 decided.
  CHECK(classify_bias(make_transcript("ab", "ab")) == BiasLabel::Ambiguous);
  CHECK(classify_bias(make_transcript("aab", "bba")) == BiasLabel::Primacy);
  CHECK(classify_bias(make_transcript("??", "??")) == BiasLabel::Ambiguous);
}

TEST_CASE("empirical_gap") {
  SUBCASE("worked example vectors") {
    const auto p = empirical_gap(make_transcript("aaa", "bba"));
    REQUIRE(p.complete);
    CHECK(*p.p_a_given_ab == doctest::Approx(1.0));
    CHECK(*p.p_a_given_ba == doctest::Approx(1.0 / 3.0));
    CHECK(*p.p_a == doctest::Approx(2.0 / 3.0));
    CHECK(*p.gap == doctest::Approx(1.0 / 3.0));
  }
  CHECK(*empirical_gap(make_transcript("aaaa", "aaaa")).gap == doctest::Approx(1.0));
  CHECK(*empirical_gap(make_transcript("aaaa", "bbbb")).gap == doctest::Approx(0.0));
  SUBCASE("all-indeterminate ordering flags the profile incomplete") {
    const auto p = empirical_gap(make_transcript("aa", "??"));
    CHECK_FALSE(p.complete);
    CHECK_FALSE(p.p_a_given_ba.has_value());
    CHECK(*p.gap == doctest::Approx(1.0));
  }
}

TEST_CASE("core invariants over random transcripts") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 12);
  for (int trial = 0; trial < 3000; ++trial) {
    const double q1 = unit(gen), q2 = unit(gen);
    const double indeterminate = trial % 3 == 0 ? 0.1 : 0.0;
    const PairedTranscript t = random_transcript(gen, q1, q2, len(gen), indeterminate);
    const auto c = consensus_outcome(t);
    const bool pc = permutation_consistency(t);
    const BiasLabel label = classify_bias(t);

    // PC implies a conclusive consensus equal to the shared decision.
    if (pc) {
      CHECK(c.winner != Winner::Tie);
      CHECK(c.winner == to_winner(*repetition_consistency(t.vec_ab)));
    }
    CHECK((label == BiasLabel::PC) == pc);
    if (observation_violated(t)) CHECK(label != BiasLabel::PC);

    // Exactly one RC ordering, other vector holds something besides the opposite verdict.
    const auto ab = repetition_consistency(t.vec_ab);
    const auto ba = repetition_consistency(t.vec_ba);
    if (ab.has_value() != ba.has_value()) {
      const Side x = ab ? *ab : *ba;
      const auto& other = ab ? t.vec_ba : t.vec_ab;
      const Verdict opposite = x == Side::A ? Verdict::B : Verdict::A;
      const bool has_non_opposite = std::any_of(other.verdicts.begin(), other.verdicts.end(),
                                                [&](Verdict v) { return v != opposite; });
      if (has_non_opposite) CHECK(c.winner == to_winner(x));
    }

    const BiasProfile p = empirical_gap(t);
    if (p.gap) {
      CHECK(*p.gap >= 0.0);
      CHECK(*p.gap <= 1.0);
      // Swapping A and B in every verdict leaves the gap unchanged.
      PairedTranscript flipped = t;
      for (auto* v : {&flipped.vec_ab, &flipped.vec_ba}) {
        for (auto& x : v->verdicts) {
          if (x == Verdict::A) x = Verdict::B;
          else if (x == Verdict::B) x = Verdict::A;
        }
      }
      CHECK(*empirical_gap(flipped).gap == doctest::Approx(*p.gap).epsilon(1e-12));
      if (indeterminate == 0.0) {
        const bool all_agree = (std::count(t.vec_ab.verdicts.begin(), t.vec_ab.verdicts.end(), Verdict::A) +
                                std::count(t.vec_ba.verdicts.begin(), t.vec_ba.verdicts.end(), Verdict::A)) %
                                   static_cast<long>(2 * t.pairs()) == 0;
        CHECK((*p.gap == doctest::Approx(1.0)) == all_agree);
      }
    }
  }
}

TEST_CASE("position mapping") {
  CHECK(candidate_at(Ordering::AB, 1) == Side::A);
  CHECK(candidate_at(Ordering::AB, 2) == Side::B);
  CHECK(candidate_at(Ordering::BA, 1) == Side::B);
  CHECK(candidate_at(Ordering::BA, 2) == Side::A);
}
