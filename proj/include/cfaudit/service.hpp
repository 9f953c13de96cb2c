#pragma once

#include <memory>
#include <string>

#include "cfaudit/errors.hpp"

namespace cfaudit {

// Chat-completion-style HTTP endpoint (vLLM, llama.cpp server, etc.).
struct GenServiceConfig {
  std::string endpoint = "http://127.0.0.1:8000/v1/chat/completions";
  std::string model = "default";
  int max_concurrent = 4;
  double timeout_s = 60.0;
  int retries = 2;
  double temperature = 0.0;  // deterministic by default
  bool log_bodies = false;   // opt-in request/response logging

  void validate() const {
    if (max_concurrent < 1) throw ConfigError("max_concurrent must be >= 1");
    if (timeout_s <= 0) throw ConfigError("timeout must be > 0");
    if (retries < 0) throw ConfigError("retries must be >= 0");
  }
};

// Blocking chat call; callers run their own worker pools. Throws
// ServiceError once retries are exhausted.
class ChatClient {
 public:
  explicit ChatClient(GenServiceConfig cfg);
  ~ChatClient();

  // Returns choices[0].message.content.
  std::string complete(const std::string& system_msg, const std::string& user_msg) const;

  const GenServiceConfig& config() const { return cfg_; }

 private:
  GenServiceConfig cfg_;
  std::string host_;  // scheme://host:port
  std::string path_;
};

}  // namespace cfaudit
