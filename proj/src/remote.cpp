#include <cmath>
#include <cstdlib>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "vigil/perception.hpp"

namespace vigil::perception {

namespace {

// cpp-httplib wants the timeout split into seconds and microseconds.
void apply_timeout(httplib::Client& client, double timeout_s) {
  const auto secs = static_cast<time_t>(timeout_s);
  const auto usecs =
      static_cast<time_t>((timeout_s - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
}

bool is_timeout_error(httplib::Error err) {
  switch (err) {
    case httplib::Error::ConnectionTimeout:
    case httplib::Error::Read:
    case httplib::Error::Write:
    case httplib::Error::Connection:
      return true;
    default:
      return false;
  }
}

httplib::Headers auth_headers(const RemoteEndpointConfig& cfg) {
  httplib::Headers headers;
  if (!cfg.api_key_env_var.empty()) {
    if (const char* key = std::getenv(cfg.api_key_env_var.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  return headers;
}

struct PostResult {
  nlohmann::json body;
  double elapsed_s = 0.0;
};

PostResult post_json(const std::string& path, const nlohmann::json& request,
                     const RemoteEndpointConfig& cfg, const Clock& clock) {
  if (!(cfg.timeout_s > 0.0)) {
    throw DomainError("remote endpoint timeout must be positive");
  }
  httplib::Client client(cfg.base_url);
  apply_timeout(client, cfg.timeout_s);
  const std::string payload = request.dump();
  const httplib::Headers headers = auth_headers(cfg);

  const int attempts = 1 + std::max(0, cfg.retries);
  httplib::Error last_error = httplib::Error::Success;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    const double t0 = clock.now_s();
    httplib::Result res = client.Post(path, headers, payload, "application/json");
    const double t1 = clock.now_s();
    if (!res) {
      last_error = res.error();
      if (is_timeout_error(last_error)) continue;  // retry budget
      throw RemoteProtocolError("transport error on " + path + ": " +
                                httplib::to_string(last_error));
    }
    if (res->status != 200) {
      throw RemoteProtocolError("unexpected status " +
                                std::to_string(res->status) + " on " + path);
    }
    nlohmann::json body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      throw RemoteProtocolError("malformed JSON body on " + path);
    }
    return {std::move(body), t1 - t0};
  }
  throw RemoteTimeout("remote endpoint timed out after " +
                      std::to_string(attempts) + " attempt(s): " + path);
}

}  // namespace

RemoteReply remote_classify(const PromptContext& ctx,
                            const RemoteEndpointConfig& cfg, const Clock& clock,
                            const std::optional<std::string>& image_b64) {
  nlohmann::json request;
  request["prompt"] = ctx.rendered;
  if (image_b64) request["image_b64"] = *image_b64;

  PostResult post = post_json("/classify", request, cfg, clock);
  if (!post.body.contains("text") || !post.body["text"].is_string()) {
    throw RemoteProtocolError("classify response missing text field");
  }

  RemoteReply reply;
  reply.raw = post.body["text"].get<std::string>();
  if (post.body.contains("processing_ms") &&
      post.body["processing_ms"].is_number()) {
    reply.t_processing_s = post.body["processing_ms"].get<double>() / 1000.0;
  }
  reply.t_network_s = std::max(0.0, post.elapsed_s - reply.t_processing_s);
  return reply;
}

std::string remote_caption(const std::string& image_b64,
                           const RemoteEndpointConfig& cfg) {
  nlohmann::json request;
  request["image_b64"] = image_b64;
  SteadyClock clock;
  PostResult post = post_json("/caption", request, cfg, clock);
  if (!post.body.contains("text") || !post.body["text"].is_string()) {
    throw RemoteProtocolError("caption response missing text field");
  }
  return post.body["text"].get<std::string>();
}

}  // namespace vigil::perception
