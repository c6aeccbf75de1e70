#include "vigil/commands.hpp"

#include <algorithm>
#include <iomanip>

#include "vigil/budget.hpp"
#include "vigil/report.hpp"

namespace vigil::cli {

namespace {

void print_summary(const EvalReport& report, const bus::RunLog& log,
                   std::ostream& out) {
  out << "scenario: " << log.scenario_name
      << "  (ad " << (log.ad_enabled ? "on" : "off") << ", seed " << log.seed
      << ")\n";
  out << "  ticks: " << log.ticks.size()
      << "  anomalies: " << report.nav.anomalies_detected
      << "  accuracy: " << report.accuracy_pct << "%"
      << "  detection rate: " << report.detection_rate_pct << "%\n";
  if (report.preference_score_pct) {
    out << "  preference score: " << *report.preference_score_pct << "%\n";
  }
  out << "  latency: min " << report.latency.min_s << " s, mean "
      << report.latency.mean_s << " s, max " << report.latency.max_s
      << " s; within 14 s: " << report.latency.pct_within(14.0) << "%\n";
  out << "  nav: " << report.nav.trajectory_m << " m in " << report.nav.time_s
      << " s, sudden stops " << report.nav.sudden_stops
      << (report.nav.safe_stopped ? " [safe stop]" : "")
      << (report.nav.reached_goal ? " [goal]" : "") << "\n";
  out << "  final epsilon: " << report.final_epsilon << "\n";
}

}  // namespace

int cmd_run(const std::filesystem::path& scenario_path, const RunFlags& flags,
            std::ostream& out, std::ostream& err) {
  Scenario scenario;
  try {
    scenario = load_scenario(scenario_path);
  } catch (const ScenarioInvalid& e) {
    err << "scenario error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }

  if (flags.ad_enabled) scenario.pipeline.ad_enabled = *flags.ad_enabled;
  if (flags.t_max_s) scenario.pipeline.t_max_s = *flags.t_max_s;
  if (flags.seed) scenario.seed = *flags.seed;
  if (flags.backend) {
    if (*flags.backend == "scripted") {
      scenario.pipeline.backend.kind = perception::BackendKind::Scripted;
    } else if (*flags.backend == "remote") {
      if (scenario.pipeline.backend.remote.base_url.empty()) {
        err << "scenario error: --backend remote needs a remote config in the "
               "scenario file\n";
        return kExitValidation;
      }
      scenario.pipeline.backend.kind = perception::BackendKind::Remote;
    } else {
      err << "error: unknown backend '" << *flags.backend << "'\n";
      return kExitValidation;
    }
  }

  try {
    std::filesystem::create_directories(flags.out_dir);
    const std::filesystem::path archive_dir = flags.out_dir / "archive";

    bus::PipelineContext ctx{scenario.lexicon, scenario.rulebook,
                             scenario.risk_table};
    auto pipeline = bus::init_pipeline(scenario.pipeline, ctx);

    bus::ArchiveSink sink = [&archive_dir](const bus::TickResult& tick,
                                           const WorldFrame& frame) {
      return write_archive(tick.record, tick.heatmap, frame, archive_dir);
    };
    bus::RunLog log = bus::run_scenario(*pipeline, scenario, sink);
    EvalReport report = evaluate(log);

    write_text_file(flags.out_dir / "runlog.json",
                    dump_canonical(runlog_to_json(log)));
    write_text_file(flags.out_dir / "report.json",
                    dump_canonical(report_to_json(report, log)));
    write_text_file(flags.out_dir / "report.csv", report_to_csv(report, log));

    print_summary(report, log, out);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_replay(const std::filesystem::path& runlog_path,
               const std::optional<std::filesystem::path>& out_dir,
               std::ostream& out, std::ostream& err) {
  try {
    bus::RunLog log = load_runlog(runlog_path);
    EvalReport report = evaluate(log);
    if (out_dir) {
      std::filesystem::create_directories(*out_dir);
      write_text_file(*out_dir / "report.json",
                      dump_canonical(report_to_json(report, log)));
    }
    print_summary(report, log, out);
    return kExitOk;
  } catch (const LogSchemaError& e) {
    err << "log error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "replay failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_profile(const std::filesystem::path& runlog_path,
                std::optional<double> t_max_s, std::ostream& out,
                std::ostream& err) {
  try {
    bus::RunLog log = load_runlog(runlog_path);

    constexpr double kFloor = 0.001;
    struct Acc {
      double min = 0.0;
      double sum = 0.0;
      bool any = false;
    } acc[4];
    for (const auto& tick : log.ticks) {
      const double stage_times[4] = {tick.trace.t_camera_s, tick.trace.t_blip_s,
                                     tick.trace.t_heatmap_s, tick.trace.t_llm_s};
      for (int s = 0; s < 4; ++s) {
        if (!acc[s].any || stage_times[s] < acc[s].min) {
          acc[s].min = stage_times[s];
        }
        acc[s].sum += stage_times[s];
        acc[s].any = true;
      }
    }

    std::vector<budget::StageProfile> profiles;
    for (int s = 0; s < 4; ++s) {
      budget::StageProfile p;
      p.stage = static_cast<budget::Stage>(s);
      p.min_s = std::max(kFloor, acc[s].min);
      p.mean_s = std::max(p.min_s, acc[s].sum / log.ticks.size());
      profiles.push_back(p);
    }

    json j;
    json stages = json::array();
    for (const auto& p : profiles) {
      json e;
      e["stage"] = std::string(budget::to_string(p.stage));
      e["min_s"] = quantize3(p.min_s);
      e["mean_s"] = quantize3(p.mean_s);
      stages.push_back(std::move(e));
    }
    j["profiles"] = std::move(stages);

    if (t_max_s) {
      budget::BudgetAllocation alloc = budget::allocate(profiles, *t_max_s);
      json timeouts;
      for (const auto& [stage, timeout] : alloc.timeout_per_stage) {
        timeouts[std::string(budget::to_string(stage))] = quantize3(timeout);
      }
      json a;
      a["t_max_s"] = quantize3(*t_max_s);
      a["timeout_per_stage"] = std::move(timeouts);
      a["worst_stage_overrun_probability"] =
          budget::expected_overrun_score(profiles, alloc.timeout_per_stage);
      j["allocation"] = std::move(a);
    }

    out << dump_canonical(j);
    return kExitOk;
  } catch (const LogSchemaError& e) {
    err << "log error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "profile failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace vigil::cli
