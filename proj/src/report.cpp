#include "swapjudge/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "swapjudge/counter_rng.hpp"
#include "swapjudge/errors.hpp"

namespace swapjudge {

using json = nlohmann::json;

namespace {

constexpr std::array<BiasLabel, 4> kLabels = {BiasLabel::PC, BiasLabel::Primacy, BiasLabel::Recency,
                                              BiasLabel::Ambiguous};
constexpr std::array<const char*, kGapBins> kBinNames = {"[0.0,0.2)", "[0.2,0.4)", "[0.4,0.6)",
                                                         "[0.6,0.8)", "[0.8,1.0]"};

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_number(const std::optional<double>& v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", *v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

std::optional<double> score_outcome(const ConsensusOutcome& outcome, std::optional<Side> gold,
                                    TiePolicy tie_policy) {
  if (!gold) return std::nullopt;
  if (outcome.winner == Winner::Tie) return tie_policy == TiePolicy::Half ? 0.5 : 0.0;
  return outcome.winner == to_winner(*gold) ? 1.0 : 0.0;
}

std::size_t GapHistogram::bin_of(double gap) {
  // Gaps are ratios of small integers; the epsilon keeps 0.4 from landing in [0.2,0.4).
  const auto bin = static_cast<long>(std::floor(gap * 5.0 + 1e-9));
  return static_cast<std::size_t>(std::clamp<long>(bin, 0, kGapBins - 1));
}

int GapHistogram::total() const {
  int n = 0;
  for (const auto& [label, bins] : counts) {
    for (int c : bins) n += c;
  }
  return n;
}

const PolicyMetrics* ExperimentReport::find(PolicyKind kind) const {
  for (const auto& p : policies) {
    if (p.kind == kind) return &p;
  }
  return nullptr;
}

ExperimentReport build_report(std::span<const InstanceEvaluation> evaluations,
                              const std::optional<GapModel>& gap_model, const ReportOptions& options) {
  ExperimentReport report;
  report.gap_model = gap_model;
  report.provenance = options.provenance;
  report.provenance.tie_policy = options.tie_policy;
  report.provenance.calibration_in_accuracy = options.calibration_in_accuracy;

  std::set<PolicyKind> kinds;
  if (!evaluations.empty()) {
    for (const auto& [k, r] : evaluations.front().results) kinds.insert(k);
  }
  std::set<std::string> seen;
  for (const auto& e : evaluations) {
    std::set<PolicyKind> mine;
    for (const auto& [k, r] : e.results) mine.insert(k);
    if (mine != kinds) {
      throw ContractViolation("build_report: instance '" + e.instance_id +
                              "' was evaluated under a different policy set");
    }
    if (!seen.insert(e.instance_id).second) {
      throw ContractViolation("build_report: duplicate instance '" + e.instance_id + "'");
    }
  }

  DatasetMetrics& d = report.dataset;
  d.instances = static_cast<int>(evaluations.size());
  for (auto label : kLabels) d.gap_histogram.counts[label] = {};

  std::map<BiasLabel, int> label_counts;
  for (const auto& e : evaluations) {
    if (e.calibration) ++d.calibration_instances;
    const BiasLabel label = classify_bias(e.full);
    ++label_counts[label];
    if (observation_violated(e.full)) ++d.violations;
    const BiasProfile profile = empirical_gap(e.full);
    if (profile.gap) {
      ++d.gap_histogram.counts[label][GapHistogram::bin_of(*profile.gap)];
    } else {
      ++d.gap_histogram.excluded;
    }
  }
  if (d.instances > 0) {
    const double n = d.instances;
    d.pc_ratio = label_counts[BiasLabel::PC] / n;
    d.primacy_ratio = label_counts[BiasLabel::Primacy] / n;
    d.recency_ratio = label_counts[BiasLabel::Recency] / n;
    d.ambiguous_ratio = label_counts[BiasLabel::Ambiguous] / n;
    d.violation_rate = d.violations / n;
  }

  const auto in_eval = [&](const InstanceEvaluation& e) {
    return !e.calibration || options.calibration_in_accuracy;
  };

  // Consensus over the full transcript is the normalisation reference whether or
  // not StaticConsensus was among the requested policies.
  double consensus_sum = 0.0;
  int consensus_scored = 0;
  for (const auto& e : evaluations) {
    if (!in_eval(e)) continue;
    ++d.evaluation_instances;
    if (const auto s = score_outcome(consensus_outcome(e.full), e.gold, options.tie_policy)) {
      consensus_sum += *s;
      ++consensus_scored;
    }
  }
  if (consensus_scored > 0) report.consensus_accuracy = consensus_sum / consensus_scored;

  for (PolicyKind kind : kinds) {
    PolicyMetrics m;
    m.kind = kind;
    double score_sum = 0.0, calls = 0.0, calls_outside_calibration = 0.0;
    int ties = 0;
    for (const auto& e : evaluations) {
      if (!in_eval(e)) continue;
      const PolicyResult& r = e.results.at(kind);
      ++m.evaluated;
      calls += r.outcome.total_calls;
      if (!e.calibration) calls_outside_calibration += r.outcome.total_calls;
      if (r.outcome.winner == Winner::Tie) ++ties;
      if (r.budget_fallback) ++m.budget_fallbacks;
      if (const auto s = score_outcome(r.outcome, e.gold, options.tie_policy)) {
        score_sum += *s;
        ++m.scored;
      }
    }
    if (m.evaluated > 0) {
      m.avg_calls_unamortized = calls / m.evaluated;
      m.tie_rate = static_cast<double>(ties) / m.evaluated;
      m.avg_calls = m.avg_calls_unamortized;
      // Calibration instances are paid at 2 * n_max each, replacing whatever the
      // policy would have spent on them.
      if (kind == PolicyKind::ConfidenceBased && gap_model) {
        m.avg_calls = (calls_outside_calibration + static_cast<double>(gap_model->training_call_cost)) /
                      m.evaluated;
      }
    }
    if (m.scored > 0) {
      m.accuracy = score_sum / m.scored;
      if (report.consensus_accuracy && *report.consensus_accuracy > 0.0) {
        m.normalized_accuracy = *m.accuracy / *report.consensus_accuracy;
      }
    }
    report.policies.push_back(m);
  }
  return report;
}

json to_json(const GapModel& m) {
  return json{{"intercept", m.intercept},
              {"slope", m.slope},
              {"n_max_pairs", m.n_max_pairs},
              {"training_size", m.training_size},
              {"training_call_cost", m.training_call_cost},
              {"training_ids", m.training_ids},
              {"fallback", m.fallback}};
}

GapModel gap_model_from_json(const json& j) {
  try {
    GapModel m;
    m.intercept = j.at("intercept").get<double>();
    m.slope = j.at("slope").get<double>();
    m.n_max_pairs = j.at("n_max_pairs").get<int>();
    m.training_size = j.value("training_size", 0);
    m.training_call_cost = j.value("training_call_cost", std::int64_t{0});
    m.training_ids = j.value("training_ids", std::vector<std::string>{});
    m.fallback = j.value("fallback", false);
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid gap model document: ") + e.what());
  }
}

json to_json(const ExperimentReport& r) {
  json policies = json::object();
  for (const auto& p : r.policies) {
    policies[std::string(to_string(p.kind))] = {
        {"accuracy", optional_number(p.accuracy)},
        {"normalized_accuracy", optional_number(p.normalized_accuracy)},
        {"avg_calls", optional_number(p.avg_calls)},
        {"avg_calls_unamortized", optional_number(p.avg_calls_unamortized)},
        {"tie_rate", optional_number(p.tie_rate)},
        {"evaluated", p.evaluated},
        {"scored", p.scored},
        {"budget_fallbacks", p.budget_fallbacks},
    };
  }

  const DatasetMetrics& d = r.dataset;
  json hist = {{"brackets", kBinNames}, {"excluded", d.gap_histogram.excluded}};
  for (const auto& [label, bins] : d.gap_histogram.counts) hist[std::string(to_string(label))] = bins;

  json out = {
      {"policies", policies},
      {"consensus_accuracy", optional_number(r.consensus_accuracy)},
      {"dataset",
       {{"instances", d.instances},
        {"evaluation_instances", d.evaluation_instances},
        {"calibration_instances", d.calibration_instances},
        {"pc_ratio", d.pc_ratio},
        {"primacy_ratio", d.primacy_ratio},
        {"recency_ratio", d.recency_ratio},
        {"ambiguous_ratio", d.ambiguous_ratio},
        {"violation_rate", d.violation_rate},
        {"violations", d.violations},
        {"gap_histogram", hist}}},
      {"gap_model", r.gap_model ? to_json(*r.gap_model) : json(nullptr)},
      {"provenance",
       {{"seed", r.provenance.seed},
        {"config_digest", r.provenance.config_digest},
        {"n_max_pairs", r.provenance.n_max_pairs},
        {"tie_policy", to_string(r.provenance.tie_policy)},
        {"calibration_in_accuracy", r.provenance.calibration_in_accuracy}}},
  };
  return out;
}

std::string report_digest(const ExperimentReport& r) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(rng::fnv1a64(to_json(r).dump())));
  return buf;
}

void write_report(const ExperimentReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", to_json(r).dump(2) + "\n");

  std::string accuracy = "policy,accuracy,normalized_accuracy,tie_rate,scored,evaluated\n";
  std::string calls = "policy,avg_calls,avg_calls_unamortized,budget_fallbacks\n";
  for (const auto& p : r.policies) {
    const std::string name(to_string(p.kind));
    accuracy += name + "," + csv_number(p.accuracy) + "," + csv_number(p.normalized_accuracy) + "," +
                csv_number(p.tie_rate) + "," + std::to_string(p.scored) + "," +
                std::to_string(p.evaluated) + "\n";
    calls += name + "," + csv_number(p.avg_calls) + "," + csv_number(p.avg_calls_unamortized) + "," +
             std::to_string(p.budget_fallbacks) + "\n";
  }
  write_text(dir / "accuracy.csv", accuracy);
  write_text(dir / "avg_calls.csv", calls);

  const DatasetMetrics& d = r.dataset;
  write_text(dir / "bias_ratios.csv",
             "pc,primacy,recency,ambiguous,instances\n" + csv_number(d.pc_ratio) + "," +
                 csv_number(d.primacy_ratio) + "," + csv_number(d.recency_ratio) + "," +
                 csv_number(d.ambiguous_ratio) + "," + std::to_string(d.instances) + "\n");
  write_text(dir / "violation_rate.csv", "violation_rate,violations,instances,n_max_pairs\n" +
                                             csv_number(d.violation_rate) + "," +
                                             std::to_string(d.violations) + "," +
                                             std::to_string(d.instances) + "," +
                                             std::to_string(r.provenance.n_max_pairs) + "\n");

  std::string hist = "bias,bracket_low,bracket_high,count\n";
  for (const auto& [label, bins] : d.gap_histogram.counts) {
    for (std::size_t i = 0; i < kGapBins; ++i) {
      char row[96];
      std::snprintf(row, sizeof row, "%s,%.1f,%.1f,%d\n", std::string(to_string(label)).c_str(),
                    0.2 * static_cast<double>(i), 0.2 * static_cast<double>(i + 1), bins[i]);
      hist += row;
    }
  }
  write_text(dir / "gap_histogram.csv", hist);
}

std::string_view to_string(TiePolicy t) { return t == TiePolicy::Half ? "half" : "zero"; }

std::optional<TiePolicy> parse_tie_policy(std::string_view s) {
  if (s == "zero") return TiePolicy::Zero;
  if (s == "half") return TiePolicy::Half;
  return std::nullopt;
}

}  // namespace swapjudge
