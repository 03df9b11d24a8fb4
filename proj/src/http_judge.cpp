#include "swapjudge/http_judge.hpp"

#include <httplib.h>

#include <cstdlib>
#include <json.hpp>
#include <semaphore>
#include <thread>

#include "swapjudge/errors.hpp"

namespace swapjudge {

using json = nlohmann::json;

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("http judge: URL needs a scheme: '" + url + "'");
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("http judge: unsupported scheme '" + scheme + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

struct HttpJudge::State {
  explicit State(int max_in_flight) : slots(max_in_flight) {}
  std::counting_semaphore<1024> slots;
};

HttpJudge::HttpJudge(HttpJudgeConfig config, PromptTemplate tmpl)
    : config_(std::move(config)), template_(std::move(tmpl)) {
  if (config_.url.empty()) throw ConfigError("http judge: url is required");
  if (config_.model.empty()) throw ConfigError("http judge: model is required");
  if (config_.temperature < 0.0) throw ConfigError("http judge: temperature must be >= 0");
  if (config_.retry_limit < 0) throw ConfigError("http judge: retry limit must be >= 0");
  if (config_.max_in_flight < 1 || config_.max_in_flight > 1024) {
    throw ConfigError("http judge: max in-flight requests must be in [1, 1024]");
  }
  split_url(config_.url);
  state_ = std::make_unique<State>(config_.max_in_flight);
}

HttpJudge::~HttpJudge() = default;

std::string HttpJudge::request_body(const std::string& prompt) const {
  json body = {
      {"model", config_.model},
      {"temperature", config_.temperature},
      {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
  };
  return body.dump();
}

std::optional<std::string> extract_message_content(const std::string& body) {
  const json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) return std::nullopt;
  const auto& first = (*choices)[0];
  if (!first.contains("message") || !first["message"].contains("content")) return std::nullopt;
  const auto& content = first["message"]["content"];
  if (!content.is_string()) return std::nullopt;
  return content.get<std::string>();
}

JudgmentCall HttpJudge::judge(const JudgmentInstance& instance, Ordering ordering,
                              int repetition_index) const {
  if (repetition_index < 1) throw UsageError("judge: repetition_index must be >= 1");

  const SplitUrl url = split_url(config_.url);
  const std::string body = request_body(render_prompt(template_, instance, ordering));

  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  JudgmentCall call;
  call.instance_id = instance.id;
  call.ordering = ordering;
  call.repetition_index = repetition_index;

  std::string last_error;
  std::optional<std::string> last_raw;
  auto backoff = config_.backoff;

  for (int attempt = 0; attempt <= config_.retry_limit; ++attempt) {
    if (attempt > 0 && backoff.count() > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }

    httplib::Result res{nullptr, httplib::Error::Unknown};
    {
      state_->slots.acquire();
      httplib::Client client(url.origin);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
      client.set_connection_timeout(secs.count(), usecs.count());
      client.set_read_timeout(secs.count(), usecs.count());
      client.set_write_timeout(secs.count(), usecs.count());
      res = client.Post(url.path, headers, body, "application/json");
      state_->slots.release();
    }

    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP status " + std::to_string(res->status);
      continue;
    }

    const auto content = extract_message_content(res->body);
    last_raw = content ? *content : res->body;
    if (!content) {
      last_error.clear();
      continue;
    }
    const ParsedResponse parsed = parse_response(*content, ordering);
    if (parsed.verdict == Verdict::Indeterminate) {
      last_error.clear();
      continue;
    }
    call.verdict = parsed.verdict;
    call.confidence = parsed.confidence;
    call.raw_response = *content;
    return call;
  }

  // A reply arrived at least once but never parsed.
  if (last_raw && last_error.empty()) {
    call.verdict = Verdict::Indeterminate;
    call.raw_response = last_raw;
    return call;
  }
  throw JudgeError("http judge: " + instance.id + "/" + std::string(to_string(ordering)) + "/" +
                   std::to_string(repetition_index) + " failed after " +
                   std::to_string(config_.retry_limit + 1) + " attempts: " + last_error);
}

}  // namespace swapjudge
