#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "brickgen/chat.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <openssl/evp.h>

#include "brickgen/error.hpp"

namespace brickgen {

namespace {

void split_url(const std::string& url, std::string& host, std::string& prefix) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::transport, "endpoint url needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  host = url.substr(0, path_start);
  prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
}

}  // namespace

std::string base64_encode(const std::string& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

ChatClient::ChatClient(EndpointConfig cfg) : cfg_(std::move(cfg)) {
  std::string prefix;
  split_url(cfg_.base_url, host_, prefix);
  if (prefix.size() >= 3 && prefix.compare(prefix.size() - 3, 3, "/v1") == 0) {
    path_ = prefix + "/chat/completions";
  } else {
    path_ = prefix + "/v1/chat/completions";
  }
  sleep_ = [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
}

std::string ChatClient::complete(nlohmann::json body) {
  if (!body.contains("model")) body["model"] = cfg_.model;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  httplib::Client client(host_);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(cfg_.connect_timeout_s)));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(cfg_.read_timeout_s)));

  double backoff = cfg_.backoff_initial_s;
  std::string last_error;
  ErrorCode last_code = ErrorCode::transport;
  for (int attempt = 0;; ++attempt) {
    ++requests_;
    auto res = client.Post(path_, headers, payload, "application/json");
    double wait = backoff;
    if (!res) {
      last_error = "request to " + host_ + path_ + " failed: " + httplib::to_string(res.error());
      last_code = ErrorCode::transport;
    } else if (res->status == 401 || res->status == 403) {
      throw Error(ErrorCode::auth, "endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
    } else if (res->status == 429 || res->status >= 500) {
      last_error = "endpoint returned HTTP " + std::to_string(res->status);
      last_code = res->status == 429 ? ErrorCode::rate_limited : ErrorCode::transport;
      if (res->has_header("Retry-After")) {
        double after = std::atof(res->get_header_value("Retry-After").c_str());
        if (after > 0) wait = std::min(after, cfg_.backoff_max_s);
      }
    } else if (res->status != 200) {
      throw Error(ErrorCode::transport, "endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body);
    } else {
      nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
      if (j.is_discarded()) throw Error(ErrorCode::transport, "endpoint returned malformed JSON");
      try {
        const auto& content = j.at("choices").at(0).at("message").at("content");
        return content.is_null() ? std::string() : content.get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::transport, std::string("unexpected completion shape: ") + e.what());
      }
    }
    if (attempt >= cfg_.max_retries) break;
    ++retries_;
    sleep_(wait);
    backoff = std::min(backoff * 2.0, cfg_.backoff_max_s);
  }
  throw Error(last_code, last_error + " (after " + std::to_string(cfg_.max_retries) + " retries)");
}

}  // namespace brickgen
