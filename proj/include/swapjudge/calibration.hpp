#pragma once

// Confidence-gap estimation of the probability gap: the judge's self-reported
// confidence on the first paired round is mapped to an estimated |P_a - P_b|
// through a least-squares line fitted on a small fully-judged sample.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swapjudge/core.hpp"

namespace swapjudge {

struct GapModel {
  double intercept = 0.0;
  double slope = 0.0;
  int n_max_pairs = 12;
  int training_size = 0;
  std::int64_t training_call_cost = 0;  // training_size * 2 * n_max_pairs
  std::vector<std::string> training_ids;
  // Set when the fit was degenerate; the model then predicts 0 (full budget).
  bool fallback = false;

  // clamp(intercept + slope * c, 0, 1)
  double predict(double confidence_gap) const;
};

struct GapSample {
  double confidence_gap = 0.0;
  double probability_gap = 0.0;
};

struct ScoredVerdict {
  Verdict verdict = Verdict::Indeterminate;
  std::optional<double> confidence;
};

// |mean confidence when choosing A - mean confidence when choosing B| over the
// given calls; a candidate that was never chosen contributes 0. Absent when any
// call lacks a confidence or has an Indeterminate verdict.
std::optional<double> confidence_gap(std::span<const ScoredVerdict> calls);
std::optional<double> confidence_gap(const JudgmentCall& first, const JudgmentCall& second);

// Confidence gap of the first round of a transcript.
std::optional<double> first_pair_confidence_gap(const PairedTranscript& t);

struct CalibrationSet {
  std::vector<std::size_t> indices;  // ascending dataset positions
  std::vector<bool> flags;           // flags[i] == true iff instance i is in the set
};

// Seeded uniform sample of ceil(fraction * N) instances. Selection depends only on
// (seed, instance ids), not on dataset order.
CalibrationSet select_calibration_set(std::span<const JudgmentInstance> dataset, double fraction,
                                      std::uint64_t seed);

// OLS of probability_gap on confidence_gap. Fewer than two samples or no spread
// in confidence_gap gives a fallback model. training_size defaults to the
// sample count.
GapModel fit_gap_model(std::span<const GapSample> samples, int n_max_pairs,
                       std::optional<int> training_size = std::nullopt);

// Budget in paired rounds for an estimated gap: min(n_max, floor((1 - g) n_max) + 1).
int confidence_budget(double estimated_gap, int n_max_pairs);

}  // namespace swapjudge
