#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vigil/clock.hpp"
#include "vigil/core.hpp"
#include "vigil/latency.hpp"
#include "vigil/mitigation.hpp"
#include "vigil/perception.hpp"
#include "vigil/saliency.hpp"

namespace vigil::bus {

inline constexpr const char* kTopicCameraImage = "camera/image";
inline constexpr const char* kTopicBlipCaption = "blip/caption";
inline constexpr const char* kTopicHeatmapSummary = "heatmap/summary";
inline constexpr const char* kTopicLlmClassification = "llm/classification";

using Payload = std::variant<std::monostate, WorldFrame, perception::Caption,
                             saliency::HeatmapSummary, ParsedClassification,
                             AnomalyRecord>;

struct Message {
  std::string topic;
  Payload payload;
  double published_at_s = 0.0;
  std::uint64_t seq = 0;  // strictly increasing per topic, assigned on publish
};

// Bounded FIFO owned by one subscriber. push() blocks while full, so a slow
// consumer backpressures the producer instead of dropping messages.
class Subscription {
 public:
  explicit Subscription(std::size_t capacity) : capacity_(capacity) {}

  std::optional<Message> poll();
  Message recv();
  std::size_t pending() const;

 private:
  friend class MessageBus;
  void push(Message msg);

  mutable std::mutex mu_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<Message> queue_;
  std::size_t capacity_;
};

// In-process topic router. Thread-safe: concurrent publishers to one topic
// serialize on the topic, so per-topic sequence numbers are gapless and every
// subscriber sees messages in sequence order exactly once.
class MessageBus {
 public:
  void declare_topic(const std::string& name);
  bool has_topic(const std::string& name) const;
  std::vector<std::string> topic_names() const;

  std::shared_ptr<Subscription> subscribe(const std::string& topic,
                                          std::size_t capacity = 64);

  // Returns the assigned sequence number. UnknownTopic when undeclared.
  std::uint64_t publish(const std::string& topic, Payload payload,
                        double published_at_s);

 private:
  struct TopicState {
    std::mutex mu;
    std::uint64_t next_seq = 1;
    std::vector<std::weak_ptr<Subscription>> subscribers;
  };

  TopicState& topic_state(const std::string& name) const;

  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<TopicState>> topics_;
};

// ---------------------------------------------------------------------------
// Pipeline: the four-node detection loop on a virtual clock.
// ---------------------------------------------------------------------------

struct CaptureMode {
  enum class Kind { OnRequest, Periodic };
  Kind kind = Kind::Periodic;
  double interval_s = 5.0;
};

struct BackendConfig {
  perception::BackendKind kind = perception::BackendKind::Scripted;
  perception::RemoteEndpointConfig remote;
};

struct PipelineConfig {
  CaptureMode capture;
  bool ad_enabled = true;
  double t_max_s = 26.0;
  BackendConfig backend;

  enum class Scheduler { Deterministic, Concurrent };
  // Concurrent runs the caption and heatmap stages on separate tasks within a
  // tick; virtual time still charges both stages, so traces are identical.
  Scheduler scheduler = Scheduler::Deterministic;

  double summary_threshold = 0.5;
  int summary_max_regions = 3;
  std::size_t queue_capacity = 64;
};

struct PipelineContext {
  perception::Lexicon lexicon;
  std::vector<mitigation::KeywordRule> rulebook;
  mitigation::RiskTable risk_table;
};

struct TickResult {
  AnomalyRecord record;
  StageLatencyTrace trace;
  std::vector<mitigation::ActionLogEntry> actions;
  std::string caption_text;
  std::string summary_text;
  saliency::Heatmap heatmap;
  bool correct = false;
  double confidence = 1.0;
  double epsilon_after = 0.0;
};

class Pipeline {
 public:
  enum class Node { Classifier, Heatmap, Captioner, Camera };

  Pipeline(PipelineConfig cfg, PipelineContext ctx);

  // The classifier must be running before any producer node starts; starting
  // out of order throws InitOrderViolation.
  void start_node(Node node);
  void start_all();  // classifier -> heatmap -> captioner -> camera
  bool node_started(Node node) const;
  bool classifier_ready() const;

  MessageBus& message_bus() { return bus_; }
  VirtualClock& clock() { return clock_; }
  mitigation::EpsilonTracker& epsilon_tracker() { return epsilon_; }
  mitigation::MitigationSinks& sinks() { return sinks_; }
  const PipelineConfig& config() const { return cfg_; }
  const PipelineContext& context() const { return ctx_; }

  // Called for every anomalous (non-Clear) record, before the tick returns.
  std::function<void(const TickResult&, const WorldFrame&)> on_anomaly;

  // One detection iteration: caption + heatmap + classification + mitigation,
  // with stage delays charged to the virtual clock. Unparsed model output
  // becomes a SafeStop record, never an exception.
  TickResult run_tick(const WorldFrame& frame, const StageDelays& delays,
                      std::span<const double> weights, const RobotState& state);

 private:
  int node_index(Node node) const { return static_cast<int>(node); }

  PipelineConfig cfg_;
  PipelineContext ctx_;
  MessageBus bus_;
  VirtualClock clock_;
  mitigation::EpsilonTracker epsilon_;
  mitigation::MitigationSinks sinks_;

  bool started_[4] = {false, false, false, false};
  std::shared_ptr<Subscription> captioner_in_;
  std::shared_ptr<Subscription> heatmap_in_;
  std::shared_ptr<Subscription> classifier_caption_in_;
  std::shared_ptr<Subscription> classifier_summary_in_;
};

std::unique_ptr<Pipeline> init_pipeline(PipelineConfig cfg, PipelineContext ctx);

}  // namespace vigil::bus
