#include <algorithm>
#include <cmath>

#include "swapjudge/counter_rng.hpp"
#include "swapjudge/errors.hpp"
#include "swapjudge/judge.hpp"

namespace swapjudge {

namespace {

constexpr std::uint64_t kVerdictStream = 1;
constexpr std::uint64_t kNoiseStream = 5;

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

double BernoulliParams::true_gap() const { return std::abs(q_ab + q_ba - 1.0); }

SimulatedJudge::SimulatedJudge(SimulatedJudgeConfig config,
                               std::unordered_map<std::string, BernoulliParams> params)
    : config_(config), params_(std::move(params)) {
  if (config_.confidence.noise < 0.0) throw ConfigError("simulated judge: noise scale must be >= 0");
  for (const auto& [id, p] : params_) {
    if (!in_unit(p.q_ab) || !in_unit(p.q_ba)) {
      throw ConfigError("simulated judge: q1/q2 outside [0,1] for instance '" + id + "'");
    }
  }
}

const BernoulliParams& SimulatedJudge::params_for(const std::string& id) const {
  const auto it = params_.find(id);
  if (it == params_.end()) throw JudgeError("simulated judge: no parameters for instance '" + id + "'");
  return it->second;
}

JudgmentCall SimulatedJudge::judge(const JudgmentInstance& instance, Ordering ordering,
                                   int repetition_index) const {
  if (repetition_index < 1) throw UsageError("judge: repetition_index must be >= 1");
  const BernoulliParams& p = params_for(instance.id);
  const double q = ordering == Ordering::AB ? p.q_ab : p.q_ba;

  const rng::CounterKey key{config_.seed, instance.id, static_cast<std::uint64_t>(ordering),
                            static_cast<std::uint64_t>(repetition_index)};

  JudgmentCall call;
  call.instance_id = instance.id;
  call.ordering = ordering;
  call.repetition_index = repetition_index;
  call.verdict = key.uniform(kVerdictStream) < q ? Verdict::A : Verdict::B;

  const ConfidenceModel& m = config_.confidence;
  double c = m.intercept + m.slope * std::abs(2.0 * q - 1.0);
  if (m.noise > 0.0) c += m.noise * key.normal(kNoiseStream);
  call.confidence = std::clamp(c, 0.0, 1.0);
  return call;
}

}  // namespace swapjudge
