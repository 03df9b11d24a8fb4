#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "swapjudge/counter_rng.hpp"
#include "swapjudge/errors.hpp"
#include "swapjudge/harness.hpp"

namespace swapjudge {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& field,
                       const std::string& what) {
  throw DataError(source + ":" + std::to_string(line) + ": field '" + field + "': " + what);
}

std::string required_string(const json& rec, const char* field, const std::string& source,
                            std::size_t line) {
  const auto it = rec.find(field);
  if (it == rec.end() || it->is_null()) fail(source, line, field, "missing");
  if (!it->is_string()) fail(source, line, field, "expected a string");
  return it->get<std::string>();
}

std::optional<double> optional_probability(const json& rec, const char* field, const std::string& source,
                                           std::size_t line) {
  const auto it = rec.find(field);
  if (it == rec.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) fail(source, line, field, "expected a number");
  const double q = it->get<double>();
  if (!(q >= 0.0 && q <= 1.0)) fail(source, line, field, "must lie in [0, 1]");
  return q;
}

}  // namespace

Dataset parse_dataset(std::istream& in, const std::string& source_name) {
  Dataset ds;
  std::unordered_set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;

    const json rec = json::parse(text, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) fail(source_name, line, "<record>", "not a JSON object");

    JudgmentInstance inst;
    inst.id = required_string(rec, "id", source_name, line);
    if (inst.id.empty()) fail(source_name, line, "id", "empty");
    if (!ids.insert(inst.id).second) fail(source_name, line, "id", "duplicate id '" + inst.id + "'");
    inst.context = rec.contains("context") && rec["context"].is_string() ? rec["context"].get<std::string>() : "";
    inst.candidate_a = required_string(rec, "candidate_a", source_name, line);
    inst.candidate_b = required_string(rec, "candidate_b", source_name, line);
    if (inst.candidate_a == inst.candidate_b) fail(source_name, line, "candidate_b", "identical to candidate_a");

    if (const auto g = rec.find("gold"); g != rec.end() && !g->is_null()) {
      const auto side = g->is_string() ? parse_side(g->get<std::string>()) : std::nullopt;
      if (!side) fail(source_name, line, "gold", "expected \"a\" or \"b\"");
      inst.gold = side;
    }

    const auto q1 = optional_probability(rec, "q1", source_name, line);
    const auto q2 = optional_probability(rec, "q2", source_name, line);
    if (q1.has_value() != q2.has_value()) fail(source_name, line, q1 ? "q2" : "q1", "q1 and q2 must be given together");
    if (q1) ds.simulation.emplace(inst.id, BernoulliParams{*q1, *q2});

    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  return parse_dataset(in, path.string());
}

json to_json(const JudgmentInstance& instance, const BernoulliParams* simulation) {
  json j = {{"id", instance.id},
            {"context", instance.context},
            {"candidate_a", instance.candidate_a},
            {"candidate_b", instance.candidate_b},
            {"gold", instance.gold ? json(to_string(*instance.gold)) : json(nullptr)}};
  if (simulation) {
    j["q1"] = simulation->q_ab;
    j["q2"] = simulation->q_ba;
  }
  return j;
}

std::vector<MixtureComponent> parse_mixture(std::string_view text) {
  std::vector<MixtureComponent> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(';', start), text.size());
    const std::string_view part = text.substr(start, end - start);
    if (!part.empty()) {
      double values[3];
      std::size_t pos = 0;
      for (int i = 0; i < 3; ++i) {
        while (pos < part.size() && part[pos] == ' ') ++pos;
        const auto [ptr, ec] = std::from_chars(part.data() + pos, part.data() + part.size(), values[i]);
        if (ec != std::errc()) throw UsageError("mixture: cannot parse component '" + std::string(part) + "'");
        pos = static_cast<std::size_t>(ptr - part.data());
        while (pos < part.size() && part[pos] == ' ') ++pos;
        if (i < 2) {
          if (pos >= part.size() || part[pos] != ',') {
            throw UsageError("mixture: expected q1,q2,weight in '" + std::string(part) + "'");
          }
          ++pos;
        }
      }
      if (pos != part.size()) throw UsageError("mixture: trailing text in '" + std::string(part) + "'");
      out.push_back({values[0], values[1], values[2]});
    }
    start = end + 1;
  }
  return out;
}

Dataset generate_dataset(std::span<const MixtureComponent> mixture, int size, std::uint64_t seed) {
  if (mixture.empty()) throw UsageError("mixture: no components");
  if (size < 0) throw UsageError("mixture: size must be >= 0");
  double total = 0.0;
  for (const auto& c : mixture) {
    if (!(c.weight >= 0.0)) throw UsageError("mixture: weights must be non-negative");
    if (!(c.q_ab >= 0.0 && c.q_ab <= 1.0 && c.q_ba >= 0.0 && c.q_ba <= 1.0)) {
      throw UsageError("mixture: q values must lie in [0, 1]");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw UsageError("mixture: weights sum to " + std::to_string(total) + ", not 1");

  Dataset ds;
  for (int i = 0; i < size; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "sim-%06d", i);
    const rng::CounterKey key{seed, id, 0xDA7A, 0};
    const double u = key.uniform(0);

    std::size_t k = 0;
    double acc = mixture[0].weight;
    while (u >= acc && k + 1 < mixture.size()) acc += mixture[++k].weight;
    const MixtureComponent& c = mixture[k];

    JudgmentInstance inst;
    inst.id = id;
    inst.context = std::string("synthetic comparison ") + id;
    inst.candidate_a = std::string("candidate a of ") + id;
    inst.candidate_b = std::string("candidate b of ") + id;
    const double diff = c.q_ab + c.q_ba - 1.0;  // 2 * P_a - 1
    if (diff > 1e-12) inst.gold = Side::A;
    else if (diff < -1e-12) inst.gold = Side::B;

    ds.simulation.emplace(inst.id, BernoulliParams{c.q_ab, c.q_ba});
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& out) {
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write dataset '" + out.string() + "'");
  for (const auto& inst : dataset.instances) {
    const auto it = dataset.simulation.find(inst.id);
    f << to_json(inst, it == dataset.simulation.end() ? nullptr : &it->second).dump() << '\n';
  }
}

void simulate_dataset(std::span<const MixtureComponent> mixture, int size, std::uint64_t seed,
                      const std::filesystem::path& out) {
  write_dataset(generate_dataset(mixture, size, seed), out);
}

}  // namespace swapjudge
