#include "swapjudge/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "swapjudge/counter_rng.hpp"
#include "swapjudge/errors.hpp"

namespace swapjudge {

double GapModel::predict(double confidence_gap) const {
  if (fallback) return 0.0;
  return std::clamp(intercept + slope * confidence_gap, 0.0, 1.0);
}

std::optional<double> confidence_gap(std::span<const ScoredVerdict> calls) {
  double sum_a = 0.0, sum_b = 0.0;
  int n_a = 0, n_b = 0;
  for (const auto& c : calls) {
    if (!c.confidence || c.verdict == Verdict::Indeterminate) return std::nullopt;
    if (c.verdict == Verdict::A) {
      sum_a += *c.confidence;
      ++n_a;
    } else {
      sum_b += *c.confidence;
      ++n_b;
    }
  }
  if (n_a + n_b == 0) return std::nullopt;
  const double mean_a = n_a > 0 ? sum_a / n_a : 0.0;
  const double mean_b = n_b > 0 ? sum_b / n_b : 0.0;
  return std::abs(mean_a - mean_b);
}

std::optional<double> confidence_gap(const JudgmentCall& first, const JudgmentCall& second) {
  const ScoredVerdict calls[] = {{first.verdict, first.confidence}, {second.verdict, second.confidence}};
  return confidence_gap(calls);
}

std::optional<double> first_pair_confidence_gap(const PairedTranscript& t) {
  if (t.pairs() == 0) return std::nullopt;
  const ScoredVerdict calls[] = {{t.vec_ab.verdicts[0], t.vec_ab.confidences[0]},
                                 {t.vec_ba.verdicts[0], t.vec_ba.confidences[0]}};
  return confidence_gap(calls);
}

CalibrationSet select_calibration_set(std::span<const JudgmentInstance> dataset, double fraction,
                                      std::uint64_t seed) {
  if (dataset.empty()) throw UsageError("select_calibration_set: empty dataset");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw UsageError("select_calibration_set: fraction must be in (0, 1]");
  }
  const std::size_t n = dataset.size();
  // The epsilon keeps exact products such as 0.1 * 1000 from rounding up.
  auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  k = std::clamp<std::size_t>(k, 1, n);

  // Rank by a keyed hash of the id: a uniformly random subset independent of file order.
  std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
  keyed.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const rng::CounterKey key{seed, dataset[i].id, 0xCA11B, 0};
    keyed.emplace_back(key.hash(0), i);
  }
  std::sort(keyed.begin(), keyed.end());

  CalibrationSet out;
  out.flags.assign(n, false);
  for (std::size_t j = 0; j < k; ++j) out.flags[keyed[j].second] = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.flags[i]) out.indices.push_back(i);
  }
  return out;
}

GapModel fit_gap_model(std::span<const GapSample> samples, int n_max_pairs,
                       std::optional<int> training_size) {
  if (n_max_pairs < 1) throw UsageError("fit_gap_model: n_max_pairs must be >= 1");
  GapModel m;
  m.n_max_pairs = n_max_pairs;
  m.training_size = training_size.value_or(static_cast<int>(samples.size()));
  m.training_call_cost = static_cast<std::int64_t>(m.training_size) * 2 * n_max_pairs;

  const auto n = static_cast<double>(samples.size());
  if (samples.size() < 2) {
    m.fallback = true;
    return m;
  }

  // Centred sums for numerical stability.
  double mean_c = 0.0, mean_g = 0.0;
  for (const auto& s : samples) {
    mean_c += s.confidence_gap;
    mean_g += s.probability_gap;
  }
  mean_c /= n;
  mean_g /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& s : samples) {
    const double dc = s.confidence_gap - mean_c;
    sxx += dc * dc;
    sxy += dc * (s.probability_gap - mean_g);
  }
  const double scale = std::max(1.0, std::abs(mean_c));
  if (sxx <= 1e-24 * scale * scale * n) {
    m.fallback = true;
    return m;
  }
  m.slope = sxy / sxx;
  m.intercept = mean_g - m.slope * mean_c;
  return m;
}

int confidence_budget(double estimated_gap, int n_max_pairs) {
  if (n_max_pairs < 1) throw UsageError("confidence_budget: n_max_pairs must be >= 1");
  const double g = std::clamp(estimated_gap, 0.0, 1.0);
  // Small epsilon so (1 - 0.75) * 12 = 3 does not floor to 2 on rounding noise.
  const auto raw = static_cast<int>(std::floor((1.0 - g) * n_max_pairs + 1e-9)) + 1;
  return std::min(n_max_pairs, raw);
}

}  // namespace swapjudge
