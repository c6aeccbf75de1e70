#include "vigil/bus.hpp"

#include <future>

namespace vigil::bus {

std::optional<Message> Subscription::poll() {
  std::lock_guard lock(mu_);
  if (queue_.empty()) return std::nullopt;
  Message msg = std::move(queue_.front());
  queue_.pop_front();
  not_full_.notify_one();
  return msg;
}

Message Subscription::recv() {
  std::unique_lock lock(mu_);
  not_empty_.wait(lock, [this] { return !queue_.empty(); });
  Message msg = std::move(queue_.front());
  queue_.pop_front();
  not_full_.notify_one();
  return msg;
}

std::size_t Subscription::pending() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

void Subscription::push(Message msg) {
  std::unique_lock lock(mu_);
  not_full_.wait(lock, [this] { return queue_.size() < capacity_; });
  queue_.push_back(std::move(msg));
  not_empty_.notify_one();
}

void MessageBus::declare_topic(const std::string& name) {
  std::lock_guard lock(mu_);
  topics_.try_emplace(name, std::make_unique<TopicState>());
}

bool MessageBus::has_topic(const std::string& name) const {
  std::lock_guard lock(mu_);
  return topics_.count(name) != 0;
}

std::vector<std::string> MessageBus::topic_names() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> names;
  names.reserve(topics_.size());
  for (const auto& [name, _] : topics_) names.push_back(name);
  return names;
}

MessageBus::TopicState& MessageBus::topic_state(const std::string& name) const {
  std::lock_guard lock(mu_);
  auto it = topics_.find(name);
  if (it == topics_.end()) throw UnknownTopic("no such topic: " + name);
  return *it->second;
}

std::shared_ptr<Subscription> MessageBus::subscribe(const std::string& topic,
                                                    std::size_t capacity) {
  TopicState& state = topic_state(topic);
  auto sub = std::make_shared<Subscription>(capacity);
  std::lock_guard lock(state.mu);
  state.subscribers.emplace_back(sub);
  return sub;
}

std::uint64_t MessageBus::publish(const std::string& topic, Payload payload,
                                  double published_at_s) {
  TopicState& state = topic_state(topic);
  // Holding the topic lock across delivery keeps per-topic order identical
  // for every subscriber even with concurrent publishers.
  std::lock_guard lock(state.mu);
  Message msg{topic, std::move(payload), published_at_s, state.next_seq++};

  auto& subs = state.subscribers;
  std::size_t alive = 0;
  for (auto& weak : subs) {
    if (auto sub = weak.lock()) {
      sub->push(msg);
      subs[alive++] = std::move(weak);
    }
  }
  subs.resize(alive);
  return msg.seq;
}

// ---------------------------------------------------------------------------

Pipeline::Pipeline(PipelineConfig cfg, PipelineContext ctx)
    : cfg_(std::move(cfg)), ctx_(std::move(ctx)) {
  if (cfg_.capture.kind == CaptureMode::Kind::Periodic &&
      !(cfg_.capture.interval_s > 0.0)) {
    throw DomainError("capture interval must be positive");
  }
  if (!(cfg_.t_max_s > 0.0)) throw DomainError("t_max must be positive");
  mitigation::validate_rulebook(ctx_.rulebook);
  mitigation::validate_risk_table(ctx_.risk_table);

  bus_.declare_topic(kTopicCameraImage);
  bus_.declare_topic(kTopicBlipCaption);
  bus_.declare_topic(kTopicHeatmapSummary);
  bus_.declare_topic(kTopicLlmClassification);

  epsilon_.enabled = cfg_.ad_enabled;
  epsilon_.latency_target_s = cfg_.t_max_s;
}

void Pipeline::start_node(Node node) {
  if (node != Node::Classifier && !classifier_ready()) {
    throw InitOrderViolation(
        "producer node started before the classifier was ready");
  }
  if (started_[node_index(node)]) return;
  switch (node) {
    case Node::Classifier:
      classifier_caption_in_ = bus_.subscribe(kTopicBlipCaption,
                                              cfg_.queue_capacity);
      classifier_summary_in_ = bus_.subscribe(kTopicHeatmapSummary,
                                              cfg_.queue_capacity);
      break;
    case Node::Heatmap:
      heatmap_in_ = bus_.subscribe(kTopicCameraImage, cfg_.queue_capacity);
      break;
    case Node::Captioner:
      captioner_in_ = bus_.subscribe(kTopicCameraImage, cfg_.queue_capacity);
      break;
    case Node::Camera:
      break;
  }
  started_[node_index(node)] = true;
}

void Pipeline::start_all() {
  start_node(Node::Classifier);
  start_node(Node::Heatmap);
  start_node(Node::Captioner);
  start_node(Node::Camera);
}

bool Pipeline::node_started(Node node) const {
  return started_[node_index(node)];
}

bool Pipeline::classifier_ready() const {
  return started_[node_index(Node::Classifier)];
}

TickResult Pipeline::run_tick(const WorldFrame& frame, const StageDelays& delays,
                              std::span<const double> weights,
                              const RobotState& state) {
  if (!classifier_ready() || !node_started(Node::Camera) ||
      !node_started(Node::Captioner) || !node_started(Node::Heatmap)) {
    throw InitOrderViolation("capture requested before pipeline init complete");
  }

  clock_.advance_to(frame.captured_at_s());

  // camera stage
  clock_.advance(delays.camera_s);
  bus_.publish(kTopicCameraImage, frame, clock_.now_s());

  // caption + heatmap stages; both consume the camera message, both stage
  // delays charge the virtual clock (the latency total is additive)
  Message cap_msg = *captioner_in_->poll();
  Message heat_msg = *heatmap_in_->poll();
  const WorldFrame& cap_frame = std::get<WorldFrame>(cap_msg.payload);
  const WorldFrame& heat_frame = std::get<WorldFrame>(heat_msg.payload);

  perception::Caption caption;
  saliency::Heatmap heatmap;
  saliency::HeatmapSummary summary;
  auto caption_job = [&] {
    return perception::scripted_caption(cap_frame, ctx_.lexicon);
  };
  auto heatmap_job = [&] {
    saliency::Heatmap h = saliency::combine_feature_maps(
        weights, heat_frame.feature_maps(), heat_frame.frame_id());
    saliency::HeatmapSummary s = saliency::summarize_heatmap(
        h, cfg_.summary_threshold, cfg_.summary_max_regions);
    return std::make_pair(std::move(h), std::move(s));
  };
  if (cfg_.scheduler == PipelineConfig::Scheduler::Concurrent) {
    auto caption_future = std::async(std::launch::async, caption_job);
    auto heatmap_future = std::async(std::launch::async, heatmap_job);
    caption = caption_future.get();
    std::tie(heatmap, summary) = heatmap_future.get();
  } else {
    caption = caption_job();
    std::tie(heatmap, summary) = heatmap_job();
  }

  clock_.advance(delays.blip_s);
  bus_.publish(kTopicBlipCaption, caption, clock_.now_s());
  clock_.advance(delays.heatmap_s);
  bus_.publish(kTopicHeatmapSummary, summary, clock_.now_s());

  const auto& caption_in = std::get<perception::Caption>(
      classifier_caption_in_->recv().payload);
  const auto& summary_in = std::get<saliency::HeatmapSummary>(
      classifier_summary_in_->recv().payload);
  perception::PromptContext prompt =
      perception::render_prompt(caption_in, summary_in);

  // classification stage
  ParseResult parsed;
  double llm_s = 0.0, network_s = 0.0, processing_s = 0.0;
  if (!cfg_.ad_enabled) {
    // pass-through classifier: everything reads as normal conditions
    parsed = ParsedClassification{AnomalyClass::Clear, caption_in.text,
                                  Directive::Resume};
  } else if (cfg_.backend.kind == perception::BackendKind::Scripted) {
    parsed = perception::parse_response(
        perception::scripted_classify(prompt, ctx_.rulebook));
    llm_s = delays.llm_s;
  } else {
    SteadyClock wall;
    perception::RemoteReply reply =
        perception::remote_classify(prompt, cfg_.backend.remote, wall);
    parsed = perception::parse_response(reply.raw);
    network_s = reply.t_network_s;
    processing_s = reply.t_processing_s;
    llm_s = network_s + processing_s;
  }
  clock_.advance(llm_s);

  TickResult result;
  result.trace = StageLatencyTrace::make(delays.camera_s, delays.blip_s,
                                         delays.heatmap_s, llm_s, network_s,
                                         processing_s);
  result.caption_text = caption_in.text;
  result.summary_text = summary_in.text;
  result.heatmap = std::move(heatmap);

  mitigation::ActionSelection selection =
      mitigation::select_actions(parsed, ctx_.rulebook);

  AnomalyRecord& record = result.record;
  record.severity = selection.severity;
  record.frame_id = frame.frame_id();
  record.captured_at_s = frame.captured_at_s();
  record.state = StateSnapshot::capture(state, frame);
  if (const auto* ok = std::get_if<ParsedClassification>(&parsed)) {
    record.anomaly_class = ok->anomaly_class;
    record.description = ok->description;
    record.directive = ok->directive;
    result.confidence = selection.rule != nullptr ? 0.9 : 0.6;
  } else {
    record.anomaly_class = AnomalyClass::Unparsed;
    record.description = std::get<UnparsedResponse>(parsed).raw;
    result.confidence = 0.0;
  }
  if (selection.rule != nullptr &&
      ctx_.risk_table.entries.count(selection.rule->keyword) != 0) {
    record.risk_of_loss =
        mitigation::risk_of_loss(selection.rule->keyword, ctx_.risk_table);
  }

  bus_.publish(kTopicLlmClassification, record, clock_.now_s());

  for (MitigationAction action : selection.actions) {
    result.actions.push_back(
        mitigation::execute_action(action, sinks_, record, clock_.now_s()));
  }

  result.correct = record.is_anomalous() == frame.truth().anomaly;
  if (cfg_.ad_enabled && record.is_anomalous()) {
    DetectionOutcome outcome(record, result.confidence, result.correct,
                             result.trace.t_total_s);
    result.epsilon_after = mitigation::update_epsilon(epsilon_, outcome);
  } else {
    result.epsilon_after = epsilon_.epsilon;
  }

  if (record.is_anomalous() && on_anomaly) {
    on_anomaly(result, frame);
  }
  return result;
}

std::unique_ptr<Pipeline> init_pipeline(PipelineConfig cfg, PipelineContext ctx) {
  auto pipeline = std::make_unique<Pipeline>(std::move(cfg), std::move(ctx));
  pipeline->start_all();
  return pipeline;
}

}  // namespace vigil::bus
