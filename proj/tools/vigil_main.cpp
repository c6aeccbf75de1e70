#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vigil/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"vigil: anomaly detection and mitigation pipeline simulator"};
  app.require_subcommand(1);

  // run
  std::string run_scenario_path;
  std::string run_ad;
  std::string run_backend;
  double run_t_max = 0.0;
  std::string run_out = "out";
  std::uint64_t run_seed = 0;
  auto* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("scenario", run_scenario_path, "scenario JSON file")
      ->required();
  run->add_option("--ad", run_ad, "anomaly detection on|off")
      ->check(CLI::IsMember({"on", "off"}));
  run->add_option("--backend", run_backend, "scripted|remote")
      ->check(CLI::IsMember({"scripted", "remote"}));
  auto* t_max_opt = run->add_option("--t-max", run_t_max,
                                    "latency budget override, seconds");
  run->add_option("--out", run_out, "output directory (default: out)");
  auto* seed_opt = run->add_option("--seed", run_seed, "seed override");

  // replay
  std::string replay_log_path;
  std::string replay_out;
  auto* replay = app.add_subcommand("replay", "recompute metrics from a run log");
  replay->add_option("runlog", replay_log_path, "runlog JSON file")->required();
  auto* replay_out_opt =
      replay->add_option("--out", replay_out, "write report.json here");

  // profile
  std::string profile_log_path;
  double profile_t_max = 0.0;
  auto* profile = app.add_subcommand(
      "profile", "derive stage latency profiles from a run log");
  profile->add_option("runlog", profile_log_path, "runlog JSON file")
      ->required();
  auto* profile_t_max_opt = profile->add_option(
      "--t-max", profile_t_max, "also compute a timeout allocation");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    vigil::cli::RunFlags flags;
    if (!run_ad.empty()) flags.ad_enabled = (run_ad == "on");
    if (!run_backend.empty()) flags.backend = run_backend;
    if (t_max_opt->count() > 0) flags.t_max_s = run_t_max;
    if (seed_opt->count() > 0) flags.seed = run_seed;
    flags.out_dir = run_out;
    return vigil::cli::cmd_run(run_scenario_path, flags, std::cout, std::cerr);
  }
  if (replay->parsed()) {
    std::optional<std::filesystem::path> out_dir;
    if (replay_out_opt->count() > 0) out_dir = replay_out;
    return vigil::cli::cmd_replay(replay_log_path, out_dir, std::cout,
                                  std::cerr);
  }
  if (profile->parsed()) {
    std::optional<double> t_max;
    if (profile_t_max_opt->count() > 0) t_max = profile_t_max;
    return vigil::cli::cmd_profile(profile_log_path, t_max, std::cout,
                                   std::cerr);
  }
  return 0;
}
