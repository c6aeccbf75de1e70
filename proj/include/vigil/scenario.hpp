#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vigil/bus.hpp"
#include "vigil/core.hpp"
#include "vigil/mitigation.hpp"
#include "vigil/navsim.hpp"
#include "vigil/perception.hpp"

namespace vigil::cli {

// One scripted perception sample plus its navigation side effects.
struct FrameSpec {
  int id = 0;
  std::vector<std::string> tags;
  TruthLabel truth;
  std::vector<double> weights;
  std::vector<Grid> feature_maps;
  std::optional<StageDelays> delays;       // else drawn from the delay model
  std::optional<nav::Cell> trigger_cell;   // on_request capture
  nav::AnomalyZone zone;                   // empty cells = no physical zone
};

// Uniform per-stage delay draw used when a frame declares no delays.
struct DelayModel {
  bool enabled = false;
  double low_s = 0.0;
  double high_s = 0.0;
};

struct SurveyCounts {
  long long preferred = 0;
  long long neutral = 0;
  long long total = 0;
};

struct Scenario {
  int version = 1;
  std::string name;
  std::uint64_t seed = 0;

  nav::GridWorld world{1, 1};
  nav::Cell start;
  nav::Cell goal;

  bus::PipelineConfig pipeline;
  perception::Lexicon lexicon;
  std::vector<mitigation::KeywordRule> rulebook;
  mitigation::RiskTable risk_table;
  std::optional<SurveyCounts> survey;
  DelayModel delay_model;
  std::vector<FrameSpec> frames;
};

// Loads and validates a scenario file. All failures throw ScenarioInvalid;
// JSON syntax errors carry file:line positions.
Scenario load_scenario(const std::filesystem::path& path);

// Parses scenario JSON text. base_dir resolves rulebook/risk-table refs;
// origin names the source in diagnostics.
Scenario parse_scenario(const std::string& text,
                        const std::filesystem::path& base_dir,
                        const std::string& origin);

// Rulebook config: [{"keyword": ..., "class": ..., "severity": ...,
// "actions": [...]}, ...]. Validated with mitigation::validate_rulebook.
std::vector<mitigation::KeywordRule> load_rulebook(
    const std::filesystem::path& path);
std::vector<mitigation::KeywordRule> parse_rulebook(const std::string& text,
                                                    const std::string& origin);

// Risk table config: {"<hazard class>": probability, ...}.
mitigation::RiskTable load_risk_table(const std::filesystem::path& path);
mitigation::RiskTable parse_risk_table(const std::string& text,
                                       const std::string& origin);

}  // namespace vigil::cli
