#include <fstream>
#include <iostream>
#include <sstream>

#include "swapjudge/errors.hpp"
#include "swapjudge/harness.hpp"

namespace swapjudge {

using json = nlohmann::json;

namespace {

struct LoadedLog {
  std::map<CallKey, JudgmentCall> calls;
  std::size_t valid_bytes = 0;  // prefix ending at the last complete line
  std::size_t total_bytes = 0;
};

LoadedLog load_log(const std::filesystem::path& path) {
  LoadedLog out;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read transcript log '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  out.total_bytes = bytes.size();

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < bytes.size()) {
    const auto nl = bytes.find('\n', start);
    if (nl == std::string::npos) break;  // interrupted final write
    ++line_no;
    const std::string_view line(bytes.data() + start, nl - start);
    start = nl + 1;
    out.valid_bytes = start;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    JudgmentCall call;
    try {
      call = call_from_json(json::parse(line));
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": unreadable transcript entry (" + e.what() +
                      "); refusing to resume, use --restart to discard the log");
    }
    CallKey key{call.instance_id, call.ordering, call.repetition_index};
    if (!out.calls.emplace(std::move(key), std::move(call)).second) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": duplicate transcript entry; refusing to resume");
    }
  }
  return out;
}

}  // namespace

json to_json(const JudgmentCall& call) {
  json j = {{"instance_id", call.instance_id},
            {"ordering", to_string(call.ordering)},
            {"repetition", call.repetition_index},
            {"verdict", to_string(call.verdict)},
            {"confidence", call.confidence ? json(*call.confidence) : json(nullptr)}};
  if (call.raw_response) j["raw_response"] = *call.raw_response;
  return j;
}

JudgmentCall call_from_json(const json& j) {
  JudgmentCall c;
  c.instance_id = j.at("instance_id").get<std::string>();
  const auto ordering = parse_ordering(j.at("ordering").get<std::string>());
  if (!ordering) throw DataError("bad ordering");
  c.ordering = *ordering;
  c.repetition_index = j.at("repetition").get<int>();
  if (c.repetition_index < 1) throw DataError("repetition must be >= 1");
  const auto verdict = parse_verdict(j.at("verdict").get<std::string>());
  if (!verdict) throw DataError("bad verdict");
  c.verdict = *verdict;
  if (const auto it = j.find("confidence"); it != j.end() && !it->is_null()) {
    const double v = it->get<double>();
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("confidence outside [0,1]");
    c.confidence = v;
  }
  if (const auto it = j.find("raw_response"); it != j.end() && !it->is_null()) {
    c.raw_response = it->get<std::string>();
  }
  return c;
}

TranscriptLog::TranscriptLog(const std::filesystem::path& path, ResumeMode mode) : path_(path) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  if (mode == ResumeMode::Resume && std::filesystem::exists(path_)) {
    LoadedLog loaded = load_log(path_);
    calls_ = std::move(loaded.calls);
    if (loaded.valid_bytes < loaded.total_bytes) {
      discarded_bytes_ = loaded.total_bytes - loaded.valid_bytes;
      std::filesystem::resize_file(path_, loaded.valid_bytes);
    }
    out_.open(path_, std::ios::binary | std::ios::app);
  } else {
    out_.open(path_, std::ios::binary | std::ios::trunc);
  }
  if (!out_) throw DataError("cannot open transcript log '" + path_.string() + "' for writing");
}

std::optional<JudgmentCall> TranscriptLog::find(const std::string& id, Ordering ordering, int repetition) const {
  std::lock_guard lock(mutex_);
  const auto it = calls_.find(CallKey{id, ordering, repetition});
  if (it == calls_.end()) return std::nullopt;
  return it->second;
}

std::size_t TranscriptLog::size() const {
  std::lock_guard lock(mutex_);
  return calls_.size();
}

void TranscriptLog::append(const JudgmentCall& call) {
  const std::string line = to_json(call).dump() + "\n";
  std::lock_guard lock(mutex_);
  CallKey key{call.instance_id, call.ordering, call.repetition_index};
  if (calls_.contains(key)) {
    throw ContractViolation("transcript log: call " + call.instance_id + "/" +
                            std::string(to_string(call.ordering)) + "/" +
                            std::to_string(call.repetition_index) + " already recorded");
  }
  out_ << line;
  out_.flush();
  if (!out_) throw DataError("write to transcript log '" + path_.string() + "' failed");
  calls_.emplace(std::move(key), call);
}

std::map<CallKey, JudgmentCall> read_transcript_log(const std::filesystem::path& path) {
  return load_log(path).calls;
}

}  // namespace swapjudge
