#pragma once

#include <chrono>

namespace vigil {

// Time source abstraction. Simulation runs on VirtualClock so every latency
// figure is reproducible; only the remote adapter measures wall time.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now_s() const = 0;
};

class VirtualClock final : public Clock {
 public:
  double now_s() const override { return t_; }

  void advance(double dt_s) {
    if (dt_s > 0.0) t_ += dt_s;
  }

  // Moves forward to t_s if t_s is ahead; never goes backward.
  void advance_to(double t_s) {
    if (t_s > t_) t_ = t_s;
  }

  void reset(double t_s = 0.0) { t_ = t_s; }

 private:
  double t_ = 0.0;
};

class SteadyClock final : public Clock {
 public:
  double now_s() const override {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
  }
};

}  // namespace vigil
