#include "swapjudge/oracle.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "swapjudge/errors.hpp"

namespace swapjudge::oracle {

namespace {

void check_args(double q_ab, double q_ba, int n_max_pairs) {
  if (!(q_ab >= 0.0 && q_ab <= 1.0) || !(q_ba >= 0.0 && q_ba <= 1.0)) {
    throw UsageError("oracle: q values must lie in [0, 1]");
  }
  if (n_max_pairs < 1) throw UsageError("oracle: n_max_pairs must be >= 1");
}

void check_sum(const OracleResult& r) {
  const double total = r.p_win_a + r.p_win_b + r.p_tie;
  if (std::abs(total - 1.0) > 1e-12) {
    throw ContractViolation("oracle: outcome probabilities sum to " + std::to_string(total));
  }
}

std::vector<long double> binomial_pmf(int n, long double q) {
  std::vector<long double> pmf(static_cast<std::size_t>(n) + 1, 0.0L);
  pmf[0] = 1.0L;
  // Repeated convolution with Bernoulli(q) keeps every entry exact-ish in extended precision.
  for (int i = 1; i <= n; ++i) {
    for (int k = i; k >= 0; --k) {
      const long double stay = pmf[static_cast<std::size_t>(k)] * (1.0L - q);
      const long double step = k > 0 ? pmf[static_cast<std::size_t>(k - 1)] * q : 0.0L;
      pmf[static_cast<std::size_t>(k)] = stay + step;
    }
  }
  return pmf;
}

}  // namespace

OracleResult exact_early_stopping_stats(double q_ab, double q_ba, int n_max_pairs) {
  check_args(q_ab, q_ba, n_max_pairs);
  const long double q1 = q_ab, q2 = q_ba;
  const auto side = static_cast<std::size_t>(n_max_pairs) + 1;

  // live[a1 * side + a2]: probability of still running with these A-counts.
  std::vector<long double> live(side * side, 0.0L), next(side * side, 0.0L);
  live[0] = 1.0L;

  long double win_a = 0.0L, win_b = 0.0L, tie = 0.0L, e_pairs = 0.0L, e_pairs2 = 0.0L;
  for (int n = 1; n <= n_max_pairs; ++n) {
    std::fill(next.begin(), next.end(), 0.0L);
    for (int a1 = 0; a1 < n; ++a1) {
      for (int a2 = 0; a2 < n; ++a2) {
        const long double p = live[static_cast<std::size_t>(a1) * side + static_cast<std::size_t>(a2)];
        if (p == 0.0L) continue;
        for (int x1 = 0; x1 <= 1; ++x1) {
          for (int x2 = 0; x2 <= 1; ++x2) {
            const long double w = (x1 ? q1 : 1.0L - q1) * (x2 ? q2 : 1.0L - q2);
            next[static_cast<std::size_t>(a1 + x1) * side + static_cast<std::size_t>(a2 + x2)] += p * w;
          }
        }
      }
    }
    std::fill(live.begin(), live.end(), 0.0L);
    for (int a1 = 0; a1 <= n; ++a1) {
      for (int a2 = 0; a2 <= n; ++a2) {
        const long double p = next[static_cast<std::size_t>(a1) * side + static_cast<std::size_t>(a2)];
        if (p == 0.0L) continue;
        const int total_a = a1 + a2;  // out of 2n verdicts
        long double absorbed = 0.0L;
        if (total_a > n) {
          win_a += p;
          absorbed = p;
        } else if (total_a < n) {
          win_b += p;
          absorbed = p;
        } else if (n == n_max_pairs) {
          tie += p;
          absorbed = p;
        } else {
          live[static_cast<std::size_t>(a1) * side + static_cast<std::size_t>(a2)] = p;
        }
        e_pairs += absorbed * n;
        e_pairs2 += absorbed * n * n;
      }
    }
  }

  OracleResult r;
  r.p_win_a = static_cast<double>(win_a);
  r.p_win_b = static_cast<double>(win_b);
  r.p_tie = static_cast<double>(tie);
  r.expected_pairs = static_cast<double>(e_pairs);
  r.expected_calls = 2.0 * r.expected_pairs;
  r.variance_pairs = static_cast<double>(std::max(0.0L, e_pairs2 - e_pairs * e_pairs));
  check_sum(r);
  return r;
}

OracleResult exact_consensus_distribution(double q_ab, double q_ba, int n_max_pairs) {
  check_args(q_ab, q_ba, n_max_pairs);
  const auto pmf1 = binomial_pmf(n_max_pairs, q_ab);
  const auto pmf2 = binomial_pmf(n_max_pairs, q_ba);

  long double win_a = 0.0L, win_b = 0.0L, tie = 0.0L;
  for (int k1 = 0; k1 <= n_max_pairs; ++k1) {
    for (int k2 = 0; k2 <= n_max_pairs; ++k2) {
      const long double p = pmf1[static_cast<std::size_t>(k1)] * pmf2[static_cast<std::size_t>(k2)];
      const int total_a = k1 + k2;
      if (total_a > n_max_pairs) win_a += p;
      else if (total_a < n_max_pairs) win_b += p;
      else tie += p;
    }
  }

  OracleResult r;
  r.p_win_a = static_cast<double>(win_a);
  r.p_win_b = static_cast<double>(win_b);
  r.p_tie = static_cast<double>(tie);
  r.expected_pairs = n_max_pairs;
  r.expected_calls = 2.0 * n_max_pairs;
  r.variance_pairs = 0.0;
  check_sum(r);
  return r;
}

double exact_violation_probability(double q_ab, double q_ba, int n_max_pairs) {
  check_args(q_ab, q_ba, n_max_pairs);
  const auto not_unanimous = [n_max_pairs](long double q) {
    return 1.0L - std::pow(q, n_max_pairs) - std::pow(1.0L - q, n_max_pairs);
  };
  return static_cast<double>(not_unanimous(q_ab) * not_unanimous(q_ba));
}

}  // namespace swapjudge::oracle
