#pragma once

// Loopback stub speaking the remote classify/caption schema:
//   POST /classify {"prompt": ..., "image_b64"?: ...} ->
//        {"text": ..., "processing_ms"?: ...}
//   POST /caption  {"image_b64": ...} -> {"text": ...}

#include <atomic>
#include <chrono>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace vigil::testing {

class StubLlmServer {
 public:
  StubLlmServer() {
    server_.Post("/classify", [this](const httplib::Request& req,
                                     httplib::Response& res) {
      handle(req, res);
    });
    server_.Post("/caption", [this](const httplib::Request& req,
                                    httplib::Response& res) {
      maybe_stall();
      nlohmann::json body;
      body["text"] = caption_text_;
      res.set_content(body.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubLlmServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string base_url() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }

  void set_response_text(std::string text) {
    std::lock_guard lock(mu_);
    response_text_ = std::move(text);
  }
  void set_caption_text(std::string text) {
    std::lock_guard lock(mu_);
    caption_text_ = std::move(text);
  }
  void set_processing_ms(double ms) {
    std::lock_guard lock(mu_);
    processing_ms_ = ms;
  }
  // The next `n` requests stall long enough to trip the client timeout.
  void set_stall_requests(int n, double stall_s) {
    stall_remaining_ = n;
    stall_s_ = stall_s;
  }
  void set_malformed_body(bool on) { malformed_ = on; }
  void set_status(int status) { status_ = status; }

  int request_count() const { return request_count_; }
  std::string last_prompt() const {
    std::lock_guard lock(mu_);
    return last_prompt_;
  }
  std::string last_auth_header() const {
    std::lock_guard lock(mu_);
    return last_auth_;
  }

 private:
  void maybe_stall() {
    if (stall_remaining_ > 0) {
      --stall_remaining_;
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<int>(stall_s_ * 1000)));
    }
  }

  void handle(const httplib::Request& req, httplib::Response& res) {
    ++request_count_;
    {
      std::lock_guard lock(mu_);
      last_auth_ = req.get_header_value("Authorization");
      auto body = nlohmann::json::parse(req.body, nullptr, false);
      if (body.is_object() && body.contains("prompt")) {
        last_prompt_ = body["prompt"].get<std::string>();
      }
    }
    maybe_stall();
    if (status_ != 200) {
      res.status = status_;
      res.set_content("error", "text/plain");
      return;
    }
    if (malformed_) {
      res.set_content("{not json", "application/json");
      return;
    }
    nlohmann::json body;
    {
      std::lock_guard lock(mu_);
      body["text"] = response_text_;
      if (processing_ms_ >= 0.0) body["processing_ms"] = processing_ms_;
    }
    res.set_content(body.dump(), "application/json");
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;

  mutable std::mutex mu_;
  std::string response_text_ = "CLEAR: loopback stub RESUME";
  std::string caption_text_ = "a stub caption";
  double processing_ms_ = -1.0;
  std::string last_prompt_;
  std::string last_auth_;

  std::atomic<int> stall_remaining_{0};
  std::atomic<int> request_count_{0};
  std::atomic<bool> malformed_{false};
  std::atomic<int> status_{200};
  double stall_s_ = 0.5;
};

}  // namespace vigil::testing
