#include "vigil/scenario.hpp"

#include <set>
#include <sstream>

#include "vigil/json_io.hpp"

namespace vigil::cli {

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& where,
                       const std::string& what) {
  throw ScenarioInvalid(origin + ": " + where + ": " + what);
}

const json& need(const json& obj, const char* key, const std::string& origin,
                 const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    fail(origin, where, std::string("missing required field '") + key + "'");
  }
  return obj.at(key);
}

double need_number(const json& obj, const char* key, const std::string& origin,
                   const std::string& where) {
  const json& v = need(obj, key, origin, where);
  if (!v.is_number()) {
    fail(origin, where, std::string("field '") + key + "' must be a number");
  }
  return v.get<double>();
}

int need_int(const json& obj, const char* key, const std::string& origin,
             const std::string& where) {
  const json& v = need(obj, key, origin, where);
  if (!v.is_number_integer()) {
    fail(origin, where, std::string("field '") + key + "' must be an integer");
  }
  return v.get<int>();
}

std::string need_string(const json& obj, const char* key,
                        const std::string& origin, const std::string& where) {
  const json& v = need(obj, key, origin, where);
  if (!v.is_string()) {
    fail(origin, where, std::string("field '") + key + "' must be a string");
  }
  return v.get<std::string>();
}

nav::Cell parse_cell(const json& v, const std::string& origin,
                     const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
      !v[1].is_number_integer()) {
    fail(origin, where, "cell must be an [x, y] integer pair");
  }
  return nav::Cell{v[0].get<int>(), v[1].get<int>()};
}

Grid parse_grid(const json& v, const std::string& origin,
                const std::string& where) {
  if (!v.is_array() || v.empty()) {
    fail(origin, where, "feature map must be a non-empty 2D array");
  }
  std::vector<std::vector<double>> rows;
  for (const auto& row : v) {
    if (!row.is_array() || row.empty()) {
      fail(origin, where, "feature map rows must be non-empty arrays");
    }
    std::vector<double> cells;
    for (const auto& cell : row) {
      if (!cell.is_number()) {
        fail(origin, where, "feature map cells must be numbers");
      }
      cells.push_back(cell.get<double>());
    }
    rows.push_back(std::move(cells));
  }
  try {
    return Grid::from_rows(rows);
  } catch (const std::exception& e) {
    fail(origin, where, e.what());
  }
}

StageDelays parse_delays(const json& v, const std::string& origin,
                         const std::string& where) {
  StageDelays d;
  d.camera_s = quantize3(need_number(v, "camera", origin, where));
  d.blip_s = quantize3(need_number(v, "blip", origin, where));
  d.heatmap_s = quantize3(need_number(v, "heatmap", origin, where));
  d.llm_s = quantize3(need_number(v, "llm", origin, where));
  if (d.camera_s < 0 || d.blip_s < 0 || d.heatmap_s < 0 || d.llm_s < 0) {
    fail(origin, where, "stage delays must be non-negative");
  }
  return d;
}

TruthLabel parse_truth(const json& v, const std::string& origin,
                       const std::string& where) {
  if (v.is_string() && v.get<std::string>() == "clear") {
    return TruthLabel::clear();
  }
  if (v.is_object() && v.contains("anomaly") && v["anomaly"].is_string()) {
    return TruthLabel::present(v["anomaly"].get<std::string>());
  }
  fail(origin, where, "truth must be \"clear\" or {\"anomaly\": \"<kind>\"}");
}

bus::CaptureMode parse_capture(const json& v, const std::string& origin,
                               const std::string& where) {
  bus::CaptureMode capture;
  const std::string mode = need_string(v, "mode", origin, where);
  if (mode == "periodic") {
    capture.kind = bus::CaptureMode::Kind::Periodic;
    capture.interval_s = v.contains("interval_s")
                             ? need_number(v, "interval_s", origin, where)
                             : 5.0;
    if (!(capture.interval_s > 0.0)) {
      fail(origin, where, "capture interval must be positive");
    }
  } else if (mode == "on_request") {
    capture.kind = bus::CaptureMode::Kind::OnRequest;
  } else {
    fail(origin, where, "capture mode must be 'periodic' or 'on_request'");
  }
  return capture;
}

bus::BackendConfig parse_backend(const json& v, const std::string& origin,
                                 const std::string& where) {
  bus::BackendConfig backend;
  const std::string kind = need_string(v, "kind", origin, where);
  if (kind == "scripted") {
    backend.kind = perception::BackendKind::Scripted;
  } else if (kind == "remote") {
    backend.kind = perception::BackendKind::Remote;
    backend.remote.base_url = need_string(v, "base_url", origin, where);
    backend.remote.api_key_env_var =
        v.contains("api_key_env_var")
            ? need_string(v, "api_key_env_var", origin, where)
            : "";
    backend.remote.timeout_s =
        v.contains("timeout_s") ? need_number(v, "timeout_s", origin, where)
                                : 5.0;
    backend.remote.retries =
        v.contains("retries") ? need_int(v, "retries", origin, where) : 0;
    if (!(backend.remote.timeout_s > 0.0)) {
      fail(origin, where, "remote timeout must be positive");
    }
    if (backend.remote.retries < 0) {
      fail(origin, where, "remote retries must be >= 0");
    }
  } else {
    fail(origin, where, "backend kind must be 'scripted' or 'remote'");
  }
  return backend;
}

}  // namespace

std::vector<mitigation::KeywordRule> parse_rulebook(const std::string& text,
                                                    const std::string& origin) {
  const json root = parse_json_lined(text, origin);
  if (!root.is_array() || root.empty()) {
    fail(origin, "rulebook", "must be a non-empty array of rules");
  }
  std::vector<mitigation::KeywordRule> rules;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const std::string where = "rulebook[" + std::to_string(i) + "]";
    const json& entry = root[i];
    mitigation::KeywordRule rule;
    rule.keyword = need_string(entry, "keyword", origin, where);
    const std::string cls = need_string(entry, "class", origin, where);
    auto parsed_cls = anomaly_class_from_string(cls);
    if (!parsed_cls) fail(origin, where, "unknown class '" + cls + "'");
    rule.anomaly_class = *parsed_cls;
    const std::string sev = need_string(entry, "severity", origin, where);
    auto parsed_sev = severity_from_string(sev);
    if (!parsed_sev) fail(origin, where, "unknown severity '" + sev + "'");
    rule.severity = *parsed_sev;
    const json& actions = need(entry, "actions", origin, where);
    if (!actions.is_array()) fail(origin, where, "actions must be an array");
    for (const auto& a : actions) {
      if (!a.is_string()) fail(origin, where, "actions must be strings");
      auto act = mitigation_action_from_string(a.get<std::string>());
      if (!act) {
        fail(origin, where, "unknown action '" + a.get<std::string>() + "'");
      }
      rule.actions.push_back(*act);
    }
    rules.push_back(std::move(rule));
  }
  try {
    mitigation::validate_rulebook(rules);
  } catch (const std::exception& e) {
    fail(origin, "rulebook", e.what());
  }
  return rules;
}

std::vector<mitigation::KeywordRule> load_rulebook(
    const std::filesystem::path& path) {
  return parse_rulebook(read_text_file(path), path.string());
}

mitigation::RiskTable parse_risk_table(const std::string& text,
                                       const std::string& origin) {
  const json root = parse_json_lined(text, origin);
  if (!root.is_object()) {
    fail(origin, "risk_table", "must be an object of class -> probability");
  }
  mitigation::RiskTable table;
  for (const auto& [key, value] : root.items()) {
    if (!value.is_number()) {
      fail(origin, "risk_table", "probability for '" + key +
                                     "' must be a number");
    }
    table.entries[key] = value.get<double>();
  }
  try {
    mitigation::validate_risk_table(table);
  } catch (const std::exception& e) {
    fail(origin, "risk_table", e.what());
  }
  return table;
}

mitigation::RiskTable load_risk_table(const std::filesystem::path& path) {
  return parse_risk_table(read_text_file(path), path.string());
}

Scenario parse_scenario(const std::string& text,
                        const std::filesystem::path& base_dir,
                        const std::string& origin) {
  const json root = parse_json_lined(text, origin);
  if (!root.is_object()) fail(origin, "scenario", "must be a JSON object");

  Scenario sc;
  sc.version = need_int(root, "version", origin, "scenario");
  if (sc.version != 1) fail(origin, "scenario", "unsupported version");
  sc.name = need_string(root, "name", origin, "scenario");
  const json& seed = need(root, "seed", origin, "scenario");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    fail(origin, "scenario", "seed must be an integer");
  }
  sc.seed = seed.get<std::uint64_t>();

  // world
  const json& world = need(root, "world", origin, "scenario");
  const int width = need_int(world, "width", origin, "world");
  const int height = need_int(world, "height", origin, "world");
  const double cell_size = world.contains("cell_size_m")
                               ? need_number(world, "cell_size_m", origin, "world")
                               : 0.25;
  try {
    sc.world = nav::GridWorld(width, height, cell_size);
  } catch (const std::exception& e) {
    fail(origin, "world", e.what());
  }
  if (world.contains("occupied")) {
    const json& occ = world.at("occupied");
    if (!occ.is_array()) fail(origin, "world", "occupied must be an array");
    for (const auto& c : occ) {
      nav::Cell cell = parse_cell(c, origin, "world.occupied");
      if (!sc.world.in_bounds(cell)) {
        fail(origin, "world.occupied", "cell outside the grid");
      }
      sc.world.set_occupied(cell);
    }
  }
  sc.start = parse_cell(need(world, "start", origin, "world"), origin, "world.start");
  sc.goal = parse_cell(need(world, "goal", origin, "world"), origin, "world.goal");
  if (!sc.world.in_bounds(sc.start) || !sc.world.in_bounds(sc.goal)) {
    fail(origin, "world", "start and goal must be in bounds");
  }
  if (sc.world.occupied(sc.start) || sc.world.occupied(sc.goal)) {
    fail(origin, "world", "start and goal must be unoccupied");
  }

  // pipeline
  const json& pipeline = need(root, "pipeline", origin, "scenario");
  sc.pipeline.capture =
      parse_capture(need(pipeline, "capture", origin, "pipeline"), origin,
                    "pipeline.capture");
  const json& ad = need(pipeline, "ad_enabled", origin, "pipeline");
  if (!ad.is_boolean()) fail(origin, "pipeline", "ad_enabled must be a boolean");
  sc.pipeline.ad_enabled = ad.get<bool>();
  sc.pipeline.t_max_s = need_number(pipeline, "t_max_s", origin, "pipeline");
  if (!(sc.pipeline.t_max_s > 0.0)) {
    fail(origin, "pipeline", "t_max_s must be positive");
  }
  sc.pipeline.backend =
      parse_backend(need(pipeline, "backend", origin, "pipeline"), origin,
                    "pipeline.backend");
  if (pipeline.contains("scheduler")) {
    const std::string sched = need_string(pipeline, "scheduler", origin, "pipeline");
    if (sched == "deterministic") {
      sc.pipeline.scheduler = bus::PipelineConfig::Scheduler::Deterministic;
    } else if (sched == "concurrent") {
      sc.pipeline.scheduler = bus::PipelineConfig::Scheduler::Concurrent;
    } else {
      fail(origin, "pipeline", "scheduler must be 'deterministic' or 'concurrent'");
    }
  }
  if (pipeline.contains("summary_threshold")) {
    sc.pipeline.summary_threshold =
        need_number(pipeline, "summary_threshold", origin, "pipeline");
    if (!(sc.pipeline.summary_threshold > 0.0) ||
        sc.pipeline.summary_threshold > 1.0) {
      fail(origin, "pipeline", "summary_threshold must lie in (0,1]");
    }
  }
  if (pipeline.contains("summary_max_regions")) {
    sc.pipeline.summary_max_regions =
        need_int(pipeline, "summary_max_regions", origin, "pipeline");
    if (sc.pipeline.summary_max_regions < 1) {
      fail(origin, "pipeline", "summary_max_regions must be >= 1");
    }
  }

  // lexicon
  const json& lexicon = need(root, "lexicon", origin, "scenario");
  if (!lexicon.is_object()) fail(origin, "lexicon", "must be an object");
  for (const auto& [tag, phrase] : lexicon.items()) {
    if (!phrase.is_string() || phrase.get<std::string>().empty()) {
      fail(origin, "lexicon", "phrase for '" + tag + "' must be a non-empty string");
    }
    sc.lexicon[tag] = phrase.get<std::string>();
  }

  // rulebook / risk table refs
  const std::string rulebook_ref =
      root.contains("rulebook") ? need_string(root, "rulebook", origin, "scenario")
                                : "default";
  sc.rulebook = rulebook_ref == "default"
                    ? mitigation::default_rulebook()
                    : load_rulebook(base_dir / rulebook_ref);
  const std::string risk_ref =
      root.contains("risk_table")
          ? need_string(root, "risk_table", origin, "scenario")
          : "default";
  sc.risk_table = risk_ref == "default" ? mitigation::RiskTable::defaults()
                                        : load_risk_table(base_dir / risk_ref);

  // survey (optional)
  if (root.contains("survey")) {
    const json& survey = root.at("survey");
    SurveyCounts counts;
    counts.preferred = need_int(survey, "preferred", origin, "survey");
    counts.neutral = need_int(survey, "neutral", origin, "survey");
    counts.total = need_int(survey, "total", origin, "survey");
    if (counts.total <= 0 || counts.preferred < 0 || counts.neutral < 0 ||
        counts.preferred + counts.neutral > counts.total) {
      fail(origin, "survey", "counts must satisfy 0 <= preferred+neutral <= total");
    }
    sc.survey = counts;
  }

  // delay model (optional)
  if (root.contains("delay_model")) {
    const json& dm = root.at("delay_model");
    const json& uniform = need(dm, "uniform", origin, "delay_model");
    sc.delay_model.enabled = true;
    sc.delay_model.low_s = need_number(uniform, "low", origin, "delay_model");
    sc.delay_model.high_s = need_number(uniform, "high", origin, "delay_model");
    if (sc.delay_model.low_s < 0.0 ||
        sc.delay_model.high_s < sc.delay_model.low_s) {
      fail(origin, "delay_model", "need 0 <= low <= high");
    }
  }

  // frames
  const json& frames = need(root, "frames", origin, "scenario");
  if (!frames.is_array()) fail(origin, "frames", "must be an array");
  std::set<int> seen_ids;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string where = "frames[" + std::to_string(i) + "]";
    const json& f = frames[i];
    FrameSpec spec;
    spec.id = need_int(f, "id", origin, where);
    if (!seen_ids.insert(spec.id).second) {
      fail(origin, where, "duplicate frame id");
    }
    const json& tags = need(f, "tags", origin, where);
    if (!tags.is_array()) fail(origin, where, "tags must be an array");
    for (const auto& t : tags) {
      if (!t.is_string()) fail(origin, where, "tags must be strings");
      const std::string tag = t.get<std::string>();
      if (sc.lexicon.find(tag) == sc.lexicon.end()) {
        fail(origin, where, "tag '" + tag + "' missing from lexicon");
      }
      spec.tags.push_back(tag);
    }
    spec.truth = parse_truth(need(f, "truth", origin, where), origin, where);

    const json& weights = need(f, "weights", origin, where);
    if (!weights.is_array() || weights.empty()) {
      fail(origin, where, "weights must be a non-empty array");
    }
    for (const auto& w : weights) {
      if (!w.is_number()) fail(origin, where, "weights must be numbers");
      spec.weights.push_back(w.get<double>());
    }
    const json& maps = need(f, "feature_maps", origin, where);
    if (!maps.is_array() || maps.size() != spec.weights.size()) {
      fail(origin, where, "feature_maps must pair with weights");
    }
    for (const auto& m : maps) {
      spec.feature_maps.push_back(parse_grid(m, origin, where));
    }
    for (std::size_t k = 1; k < spec.feature_maps.size(); ++k) {
      if (!spec.feature_maps[k].same_shape(spec.feature_maps[0])) {
        fail(origin, where, "feature maps must share dimensions");
      }
    }

    if (f.contains("delays")) {
      spec.delays = parse_delays(f.at("delays"), origin, where);
    } else if (!sc.delay_model.enabled) {
      fail(origin, where, "frame needs delays or a scenario delay_model");
    }
    if (f.contains("trigger_cell")) {
      spec.trigger_cell = parse_cell(f.at("trigger_cell"), origin, where);
      if (!sc.world.in_bounds(*spec.trigger_cell)) {
        fail(origin, where, "trigger_cell outside the grid");
      }
    }
    if (sc.pipeline.capture.kind == bus::CaptureMode::Kind::OnRequest &&
        !spec.trigger_cell) {
      fail(origin, where, "on_request capture requires trigger_cell");
    }
    if (f.contains("zone")) {
      const json& zone = f.at("zone");
      if (!zone.is_array()) fail(origin, where, "zone must be an array of cells");
      for (const auto& c : zone) {
        nav::Cell cell = parse_cell(c, origin, where);
        if (!sc.world.in_bounds(cell)) {
          fail(origin, where, "zone cell outside the grid");
        }
        spec.zone.cells.push_back(cell);
      }
      spec.zone.hazard_class = f.contains("zone_class")
                                   ? need_string(f, "zone_class", origin, where)
                                   : spec.truth.kind;
    }
    sc.frames.push_back(std::move(spec));
  }

  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text_file(path), path.parent_path(), path.string());
}

}  // namespace vigil::cli
