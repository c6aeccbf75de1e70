#include "vigil/runner.hpp"

#include <cmath>
#include <random>

#include "vigil/json_io.hpp"

namespace vigil::bus {

namespace {

StageLatencyTrace quantize_trace(const StageLatencyTrace& t) {
  StageLatencyTrace q;
  q.t_camera_s = quantize3(t.t_camera_s);
  q.t_blip_s = quantize3(t.t_blip_s);
  q.t_heatmap_s = quantize3(t.t_heatmap_s);
  q.t_llm_s = quantize3(t.t_llm_s);
  q.t_network_s = quantize3(t.t_network_s);
  q.t_processing_s = quantize3(t.t_processing_s);
  q.t_total_s = quantize3(t.t_total_s);
  return q;
}

// Delays resolve at millisecond resolution so logs replay bit-exactly.
StageDelays resolve_delays(const cli::FrameSpec& frame,
                           const cli::DelayModel& model, std::mt19937_64& rng) {
  if (frame.delays) return *frame.delays;
  std::uniform_real_distribution<double> dist(model.low_s, model.high_s);
  StageDelays d;
  d.camera_s = quantize3(dist(rng));
  d.blip_s = quantize3(dist(rng));
  d.heatmap_s = quantize3(dist(rng));
  d.llm_s = quantize3(dist(rng));
  return d;
}

}  // namespace

RunLog run_scenario(Pipeline& pipeline, const cli::Scenario& scenario,
                    const ArchiveSink& archive) {
  RunLog log;
  log.scenario_name = scenario.name;
  log.seed = scenario.seed;
  log.ad_enabled = pipeline.config().ad_enabled;
  log.t_max_s = pipeline.config().t_max_s;
  log.survey = scenario.survey;

  std::mt19937_64 rng(scenario.seed);
  nav::NavStepper stepper(scenario.world, scenario.start, scenario.goal);
  for (const auto& frame : scenario.frames) {
    stepper.add_physical_zone(frame.zone);
  }

  const double cell = scenario.world.cell_size_m();
  int heading_dx = 0, heading_dy = 0;
  const auto& capture = pipeline.config().capture;

  std::vector<bool> fired(scenario.frames.size(), false);
  std::size_t periodic_cursor = 0;
  double next_capture_s = 0.0;
  int anomalies = 0;

  auto fire_frame = [&](const cli::FrameSpec& spec) {
    const StageDelays delays = resolve_delays(spec, scenario.delay_model, rng);
    pipeline.clock().advance_to(stepper.time_s());
    const double captured_at = pipeline.clock().now_s();

    WorldFrame frame(spec.id, captured_at, spec.tags, spec.feature_maps,
                     spec.truth);
    const nav::Cell pos = stepper.position();
    const double heading = (heading_dx == 0 && heading_dy == 0)
                               ? 0.0
                               : std::atan2(heading_dy, heading_dx);
    RobotState state({pos.x * cell, pos.y * cell, heading},
                     {heading_dx * cell, heading_dy * cell, 0.0});

    TickResult result = pipeline.run_tick(frame, delays, spec.weights, state);

    TickRecord rec;
    rec.frame_id = spec.id;
    rec.captured_at_s = captured_at;
    rec.truth = spec.truth;
    rec.record = result.record;
    rec.trace = quantize_trace(result.trace);
    rec.actions = result.actions;
    rec.caption = result.caption_text;
    rec.summary = result.summary_text;
    rec.correct = result.correct;
    rec.epsilon_after = result.epsilon_after;

    if (result.record.is_anomalous()) {
      ++anomalies;
      if (archive) rec.archive = archive(result, frame);
      if (!spec.zone.cells.empty()) {
        stepper.discover_zone(spec.zone);  // safe-stops when blocked
      }
    }
    log.ticks.push_back(std::move(rec));
  };

  constexpr int kMaxTicks = 1000000;
  for (int tick = 0;; ++tick) {
    if (tick > kMaxTicks) {
      throw std::runtime_error("scenario run did not terminate");
    }

    if (capture.kind == CaptureMode::Kind::Periodic) {
      while (periodic_cursor < scenario.frames.size() &&
             stepper.time_s() >= next_capture_s) {
        fire_frame(scenario.frames[periodic_cursor]);
        fired[periodic_cursor] = true;
        ++periodic_cursor;
        next_capture_s += capture.interval_s;
        if (stepper.safe_stopped()) break;
      }
    } else {
      for (std::size_t i = 0; i < scenario.frames.size(); ++i) {
        if (fired[i] || !scenario.frames[i].trigger_cell) continue;
        if (stepper.position() == *scenario.frames[i].trigger_cell) {
          fired[i] = true;
          fire_frame(scenario.frames[i]);
          if (stepper.safe_stopped()) break;
        }
      }
    }

    if (stepper.at_goal() || stepper.safe_stopped()) break;

    const nav::Cell before = stepper.position();
    stepper.step();
    const nav::Cell after = stepper.position();
    if (after != before) {
      heading_dx = after.x - before.x;
      heading_dy = after.y - before.y;
    }
  }

  log.final_epsilon = pipeline.epsilon_tracker().epsilon;
  log.nav.trajectory_m = stepper.trajectory_m();
  log.nav.time_s = stepper.time_s();
  log.nav.anomalies_detected = anomalies;
  log.nav.sudden_stops = stepper.sudden_stops();
  log.nav.reached_goal = stepper.at_goal();
  log.nav.safe_stopped = stepper.safe_stopped();
  return log;
}

}  // namespace vigil::bus
