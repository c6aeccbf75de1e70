#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace vigil::cli {

// Exit codes: 0 success, 2 scenario/log validation error, 3 runtime failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

struct RunFlags {
  std::optional<bool> ad_enabled;       // --ad on|off
  std::optional<std::string> backend;   // --backend scripted|remote
  std::optional<double> t_max_s;        // --t-max
  std::optional<std::uint64_t> seed;    // --seed, overrides the file seed
  std::filesystem::path out_dir = "out";
};

// Runs a scenario and writes report.json, report.csv, runlog.json, and the
// per-anomaly archive under <out>/archive/.
int cmd_run(const std::filesystem::path& scenario_path, const RunFlags& flags,
            std::ostream& out, std::ostream& err);

// Recomputes all metrics from a run log without re-running the pipeline;
// writes report.json under out_dir when given.
int cmd_replay(const std::filesystem::path& runlog_path,
               const std::optional<std::filesystem::path>& out_dir,
               std::ostream& out, std::ostream& err);

// Extracts per-stage latency profiles (min/mean) from a run log; with t_max
// also prints the resulting timeout allocation. Stage floors clamp to 1 ms so
// zero-latency scripted logs still profile.
int cmd_profile(const std::filesystem::path& runlog_path,
                std::optional<double> t_max_s, std::ostream& out,
                std::ostream& err);

}  // namespace vigil::cli
