#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "swapjudge/judge.hpp"

namespace swapjudge {

struct HttpJudgeConfig {
  // Full chat-completions URL, e.g. https://api.example.com/v1/chat/completions
  std::string url;
  std::string model;
  double temperature = 0.1;
  // Name of the environment variable holding the bearer token; empty disables auth.
  std::string api_key_env = "SWAPJUDGE_API_KEY";
  int retry_limit = 2;
  std::chrono::milliseconds timeout{60000};
  std::chrono::milliseconds backoff{500};  // doubled per retry
  int max_in_flight = 4;
};

// Judge backed by an OpenAI-style chat-completions endpoint.
//
// Transport failures (connection errors, non-2xx statuses) and unparseable
// replies both consume a retry. Exhausting retries on transport raises
// JudgeError; exhausting them on parsing yields an Indeterminate verdict with
// the last raw reply attached.
class HttpJudge final : public Judge {
 public:
  HttpJudge(HttpJudgeConfig config, PromptTemplate tmpl);
  ~HttpJudge() override;

  JudgmentCall judge(const JudgmentInstance& instance, Ordering ordering,
                     int repetition_index) const override;

  const HttpJudgeConfig& config() const { return config_; }

  // Request body for one prompt; exposed for tests and dry runs.
  std::string request_body(const std::string& prompt) const;

 private:
  struct State;

  HttpJudgeConfig config_;
  PromptTemplate template_;
  std::unique_ptr<State> state_;
};

// Extracts choices[0].message.content from a chat-completions reply body.
std::optional<std::string> extract_message_content(const std::string& body);

}  // namespace swapjudge
