#include "cfaudit/service.hpp"

#include <chrono>
#include <cstdio>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace cfaudit {

using nlohmann::json;

ChatClient::ChatClient(GenServiceConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const auto& url = cfg_.endpoint;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("endpoint must be an http(s) URL: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    host_ = url;
    path_ = "/v1/chat/completions";
  } else {
    host_ = url.substr(0, path_start);
    path_ = url.substr(path_start);
  }
}

ChatClient::~ChatClient() = default;

std::string ChatClient::complete(const std::string& system_msg,
                                 const std::string& user_msg) const {
  json body{
      {"model", cfg_.model},
      {"temperature", cfg_.temperature},
      {"messages",
       json::array({json{{"role", "system"}, {"content", system_msg}},
                    json{{"role", "user"}, {"content", user_msg}}})},
  };
  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(200 * attempt));
    httplib::Client client(host_);
    client.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_s));
    client.set_write_timeout(std::chrono::duration<double>(cfg_.timeout_s));
    if (cfg_.log_bodies)
      std::fprintf(stderr, "[service] POST %s%s %s\n", host_.c_str(),
                   path_.c_str(), payload.c_str());
    auto res = client.Post(path_, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (cfg_.log_bodies)
      std::fprintf(stderr, "[service] <- %s\n", res->body.c_str());
    try {
      const json reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content")
          .get<std::string>();
    } catch (const json::exception& e) {
      last_error = std::string("malformed service reply: ") + e.what();
    }
  }
  throw ServiceError("chat completion failed after " +
                     std::to_string(cfg_.retries + 1) + " attempts (" +
                     last_error + ")");
}

}  // namespace cfaudit
