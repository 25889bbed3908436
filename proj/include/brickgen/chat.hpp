#pragma once

#include <functional>
#include <string>

#include <json.hpp>

namespace brickgen {

/// OpenAI-compatible chat-completions endpoint.
struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8000";  // scheme://host[:port][/prefix]
  std::string model = "brickgen";
  std::string api_key_env = "BRICKGEN_API_KEY";    // name of the variable, never the key
  double connect_timeout_s = 10.0;
  double read_timeout_s = 120.0;
  int max_retries = 5;
  double backoff_initial_s = 0.5;
  double backoff_max_s = 8.0;
  int max_tokens = 32;
  bool assistant_prefix = true;  // send partial output as a trailing assistant message
};

/// Blocking client. Retries 429, 5xx and connection errors with exponential
/// backoff; 401/403 throw Error(auth) at once.
class ChatClient {
 public:
  explicit ChatClient(EndpointConfig cfg);

  /// POSTs `body` (model filled in if absent) and returns choices[0].message.content.
  std::string complete(nlohmann::json body);

  const EndpointConfig& config() const { return cfg_; }
  int retries() const { return retries_; }
  int requests() const { return requests_; }

  /// Replaces the sleep between retries (tests).
  void set_sleeper(std::function<void(double)> sleeper) { sleep_ = std::move(sleeper); }

 private:
  EndpointConfig cfg_;
  std::string host_;  // scheme://host:port
  std::string path_;
  std::function<void(double)> sleep_;
  int retries_ = 0;
  int requests_ = 0;
};

std::string base64_encode(const std::string& bytes);

}  // namespace brickgen
