#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "agentic/backends.hpp"
#include "agentic/errors.hpp"

namespace agentic::backends {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

SplitUrl split_url(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path_start), prefix};
}

void set_timeout(httplib::Client& client, double seconds) {
  const auto sec = static_cast<time_t>(std::floor(seconds));
  const auto usec = static_cast<time_t>((seconds - std::floor(seconds)) * 1e6);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
}

}  // namespace

struct HttpBackend::Impl {
  BackendConfig config;
  std::string api_key;
  SplitUrl url;
};

HttpBackend::HttpBackend(BackendConfig config) : impl_(std::make_unique<Impl>()) {
  config.validate();
  const char* key = std::getenv(config.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ConfigError(fmt::format("environment variable {} holding the API key is not set",
                                  config.api_key_env));
  }
  impl_->api_key = key;
  impl_->url = split_url(config.base_url);
  impl_->config = std::move(config);
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::describe() const {
  return fmt::format("http:{}@{}", impl_->config.model, impl_->config.base_url);
}

Exchange HttpBackend::complete(const DecisionRequest& request) {
  const BackendConfig& cfg = impl_->config;
  const nlohmann::json body = {
      {"model", cfg.model},
      {"temperature", cfg.temperature},
      {"max_tokens", cfg.max_tokens},
      {"messages",
       nlohmann::json::array({
           {{"role", "system"}, {"content", request.prompt.system_text}},
           {{"role", "user"}, {"content", request.prompt.user_text}},
       })},
  };
  const std::string payload = body.dump();
  const std::string path = impl_->url.prefix + "/v1/chat/completions";
  const httplib::Headers headers = {{"Authorization", "Bearer " + impl_->api_key}};

  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  int retries = 0;
  for (;;) {
    httplib::Client client(impl_->url.origin);
    set_timeout(client, cfg.timeout);
    const httplib::Result res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      if (retries == 0) {
        ++retries;
        continue;
      }
      throw BackendError(BackendError::Kind::Transport, 0,
                         fmt::format("transport failure after retry: {}", httplib::to_string(res.error())),
                         elapsed());
    }
    if (res->status < 200 || res->status >= 300) {
      throw BackendError(BackendError::Kind::Status, res->status,
                         fmt::format("chat completion failed with HTTP {}", res->status), elapsed());
    }

    std::string content;
    try {
      const auto reply = nlohmann::json::parse(res->body);
      content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(BackendError::Kind::Malformed, 0,
                         fmt::format("malformed chat completion body: {}", e.what()), elapsed());
    }

    Exchange ex;
    ex.system_text = request.prompt.system_text;
    ex.user_text = request.prompt.user_text;
    ex.response_text = std::move(content);
    ex.latency = elapsed();
    ex.model = cfg.model;
    ex.timestamp = request.timestamp;
    ex.retries = retries;
    return ex;
  }
}

}  // namespace agentic::backends
