#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "vigil/json_io.hpp"
#include "vigil/metrics.hpp"
#include "vigil/runner.hpp"
#include "vigil/saliency.hpp"

namespace vigil::cli {

struct EvalReport {
  metrics::ConfusionCounts confusion;
  double accuracy_pct = 0.0;
  double detection_rate_pct = 0.0;  // correct predictions, neutral = unparsed
  std::optional<double> preference_score_pct;  // when survey counts supplied
  metrics::LatencyHistogram latency;
  nav::NavMetrics nav;
  double final_epsilon = 0.0;
};

// Recomputes every metric from a run log alone. LogSchemaError on empty logs.
EvalReport evaluate(const bus::RunLog& log);

// --- serialization (deterministic: sorted keys, numbers at 3 decimals) -----

json runlog_to_json(const bus::RunLog& log);
bus::RunLog runlog_from_json(const json& j);  // LogSchemaError on bad shape

bus::RunLog load_runlog(const std::filesystem::path& path);

json report_to_json(const EvalReport& report, const bus::RunLog& log);

// Table-style one-line CSV with a header: condition, trajectory, time,
// anomalies, sudden stops.
std::string report_to_csv(const EvalReport& report, const bus::RunLog& log);

std::string dump_canonical(const json& j);

// --- per-anomaly archive ----------------------------------------------------

// Writes <out_dir>/<virtual_ts>-<frame_id>.frame.json, .heatmap.pgm (plain
// PGM, max-normalized to 0..255, original peak kept in a comment), and
// .report.json. Returns the bare file names.
bus::ArchivePaths write_archive(const AnomalyRecord& record,
                                const saliency::Heatmap& heatmap,
                                const WorldFrame& frame,
                                const std::filesystem::path& out_dir);

struct PgmImage {
  int rows = 0;
  int cols = 0;
  int maxval = 255;
  std::vector<int> values;      // row-major
  double original_max = 0.0;    // from the "# max" comment, 0 when absent

  double denormalized(int r, int c) const {
    return original_max * values[static_cast<std::size_t>(r) * cols + c] /
           maxval;
  }
};

PgmImage read_pgm(const std::filesystem::path& path);

}  // namespace vigil::cli
