#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vigil/bus.hpp"
#include "vigil/navsim.hpp"
#include "vigil/scenario.hpp"

namespace vigil::bus {

struct ArchivePaths {
  std::string frame_json;
  std::string heatmap_pgm;
  std::string report_json;
};

// Persists one anomaly's artifacts; returns the written file names.
using ArchiveSink =
    std::function<ArchivePaths(const TickResult&, const WorldFrame&)>;

struct TickRecord {
  int frame_id = 0;
  double captured_at_s = 0.0;
  TruthLabel truth;
  AnomalyRecord record;
  StageLatencyTrace trace;  // stored at millisecond resolution
  std::vector<mitigation::ActionLogEntry> actions;
  std::string caption;
  std::string summary;
  bool correct = false;
  double epsilon_after = 0.0;
  std::optional<ArchivePaths> archive;
};

struct RunLog {
  int version = 1;
  std::string scenario_name;
  std::uint64_t seed = 0;
  bool ad_enabled = true;
  double t_max_s = 26.0;
  std::vector<TickRecord> ticks;
  double final_epsilon = 0.0;
  nav::NavMetrics nav;
  std::optional<cli::SurveyCounts> survey;
};

// Drives one navigation run: the robot steps one cell per second, frames fire
// per the capture mode, every fired frame goes through run_tick, anomalous
// records trigger mitigation, archiving, an epsilon update, and replanning
// around the frame's zone. Deterministic given scenario + seed.
RunLog run_scenario(Pipeline& pipeline, const cli::Scenario& scenario,
                    const ArchiveSink& archive = {});

}  // namespace vigil::bus
