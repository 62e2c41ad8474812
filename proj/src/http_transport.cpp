#include "xtalbench/gateway.hpp"
#include "xtalbench/render.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include <cstdlib>

namespace xtalbench {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError(fmt::format("endpoint url '{}' has no scheme", url));
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpTransport : public Transport {
 public:
  HttpTransport(const ModelEndpoint& endpoint, std::string api_key)
      : endpoint_(endpoint), url_(split_url(endpoint.url)), api_key_(std::move(api_key)) {}

  TransportReply send(const Prompt& prompt) override {
    nlohmann::json content = nlohmann::json::array();
    for (const auto& part : prompt.parts) {
      if (part.kind == PromptPart::Kind::Text) {
        content.push_back({{"type", "text"}, {"text", part.text}});
      } else {
        const auto bytes = read_bytes(part.image_path);
        const std::string raw(bytes.begin(), bytes.end());
        content.push_back({{"type", "image_url"},
                           {"image_url", {{"url", "data:image/png;base64," + httplib::detail::base64_encode(raw)}}}});
      }
    }
    const nlohmann::json body{{"model", endpoint_.model},
                              {"messages", nlohmann::json::array({{{"role", "user"}, {"content", content}}})}};

    // One client per request keeps send() thread-safe.
    httplib::Client client(url_.origin);
    const auto timeout = std::chrono::duration<double>(endpoint_.timeout_s);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_bearer_token_auth(api_key_);

    TransportReply reply;
    const auto res = client.Post(url_.path, body.dump(), "application/json");
    if (!res) {
      reply.status = TransportReply::Status::Retryable;
      reply.error = fmt::format("transport error: {}", httplib::to_string(res.error()));
      return reply;
    }
    if (res->status == 429 || res->status >= 500) {
      reply.status = TransportReply::Status::Retryable;
      reply.error = fmt::format("HTTP {}", res->status);
      return reply;
    }
    if (res->status != 200) {
      reply.status = TransportReply::Status::Fatal;
      reply.error = fmt::format("HTTP {}: {}", res->status, res->body.substr(0, 200));
      return reply;
    }
    const auto j = nlohmann::json::parse(res->body, nullptr, false);
    try {
      reply.body = j.at("choices").at(0).at("message").at("content").get<std::string>();
      reply.status = TransportReply::Status::Ok;
    } catch (const nlohmann::json::exception&) {
      reply.status = TransportReply::Status::Fatal;
      reply.error = "response has no choices[0].message.content";
    }
    return reply;
  }

 private:
  ModelEndpoint endpoint_;
  SplitUrl url_;
  std::string api_key_;
};

}  // namespace

std::unique_ptr<Transport> make_http_transport(const ModelEndpoint& endpoint) {
  endpoint.validate();
  const char* key = std::getenv(endpoint.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ConfigError(fmt::format("endpoint '{}': environment variable {} is not set", endpoint.name,
                                  endpoint.api_key_env));
  }
  return std::make_unique<HttpTransport>(endpoint, key);
}

}  // namespace xtalbench
