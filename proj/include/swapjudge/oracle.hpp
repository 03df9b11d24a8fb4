#pragma once

// Exact outcome distributions for a Bernoulli judge with per-ordering
// probabilities (q_ab, q_ba). Ground truth for the Monte Carlo policies.

namespace swapjudge::oracle {

struct OracleResult {
  double p_win_a = 0.0;
  double p_win_b = 0.0;
  double p_tie = 0.0;
  double expected_pairs = 0.0;
  double expected_calls = 0.0;  // 2 * expected_pairs
  double variance_pairs = 0.0;
};

// Early stopping with at most n_max_pairs rounds, by dynamic programming over
// (round, #A in the AB vector, #A in the BA vector).
OracleResult exact_early_stopping_stats(double q_ab, double q_ba, int n_max_pairs);

// Static consensus after exactly n_max_pairs rounds: Bin(n, q_ab) + Bin(n, q_ba) against n.
OracleResult exact_consensus_distribution(double q_ab, double q_ba, int n_max_pairs);

// Probability that neither ordering is unanimous after n rounds:
// (1 - q1^n - (1-q1)^n) * (1 - q2^n - (1-q2)^n).
double exact_violation_probability(double q_ab, double q_ba, int n_max_pairs);

}  // namespace swapjudge::oracle
