#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>

#include "swapjudge/core.hpp"

namespace swapjudge {

// A pairwise judge. Implementations must be callable concurrently from many threads.
class Judge {
 public:
  virtual ~Judge() = default;

  virtual JudgmentCall judge(const JudgmentInstance& instance, Ordering ordering,
                             int repetition_index) const = 0;
};

// Bernoulli parameters of one instance: probability of verdict A per ordering.
struct BernoulliParams {
  double q_ab = 0.5;
  double q_ba = 0.5;

  // |P_a - P_b| with P_a the mean of both orderings.
  double true_gap() const;
};

struct ConfidenceModel {
  double intercept = 0.5;  // kappa_0
  double slope = 0.5;      // kappa_1, on the queried ordering's |2q - 1|
  double noise = 0.05;     // sigma of additive Gaussian noise
};

struct SimulatedJudgeConfig {
  std::uint64_t seed = 0;
  ConfidenceModel confidence;
};

// Stochastic judge with per-instance Bernoulli verdicts. Every call is a pure
// function of (seed, instance id, ordering, repetition index).
class SimulatedJudge final : public Judge {
 public:
  SimulatedJudge(SimulatedJudgeConfig config,
                 std::unordered_map<std::string, BernoulliParams> params);

  JudgmentCall judge(const JudgmentInstance& instance, Ordering ordering,
                     int repetition_index) const override;

  const SimulatedJudgeConfig& config() const { return config_; }
  const BernoulliParams& params_for(const std::string& id) const;

 private:
  SimulatedJudgeConfig config_;
  std::unordered_map<std::string, BernoulliParams> params_;
};

// Prompt text with {context}, {candidate_1} and {candidate_2} placeholders.
// Both candidate placeholders must appear exactly once.
class PromptTemplate {
 public:
  explicit PromptTemplate(std::string text);

  static PromptTemplate default_template();
  static PromptTemplate from_file(const std::string& path);

  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

std::string render_prompt(const PromptTemplate& tmpl, const JudgmentInstance& instance,
                          Ordering ordering);

struct ParsedResponse {
  Verdict verdict = Verdict::Indeterminate;
  std::optional<double> confidence;
};

// Total: anything without a recognisable position index maps to Indeterminate.
ParsedResponse parse_response(std::string_view raw, Ordering ordering);

}  // namespace swapjudge
