#include "vigil/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace vigil::cli {

namespace {

std::string format3(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", x);
  return buf;
}

json truth_to_json(const TruthLabel& truth) {
  if (!truth.anomaly) return "clear";
  json j;
  j["anomaly"] = truth.kind;
  return j;
}

TruthLabel truth_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "clear") {
    return TruthLabel::clear();
  }
  if (j.is_object() && j.contains("anomaly") && j["anomaly"].is_string()) {
    return TruthLabel::present(j["anomaly"].get<std::string>());
  }
  throw LogSchemaError("bad truth label in run log");
}

json trace_to_json(const StageLatencyTrace& t) {
  json j;
  j["camera"] = quantize3(t.t_camera_s);
  j["blip"] = quantize3(t.t_blip_s);
  j["heatmap"] = quantize3(t.t_heatmap_s);
  j["llm"] = quantize3(t.t_llm_s);
  j["network"] = quantize3(t.t_network_s);
  j["processing"] = quantize3(t.t_processing_s);
  j["total"] = quantize3(t.t_total_s);
  return j;
}

StageLatencyTrace trace_from_json(const json& j) {
  StageLatencyTrace t;
  t.t_camera_s = j.value("camera", 0.0);
  t.t_blip_s = j.value("blip", 0.0);
  t.t_heatmap_s = j.value("heatmap", 0.0);
  t.t_llm_s = j.value("llm", 0.0);
  t.t_network_s = j.value("network", 0.0);
  t.t_processing_s = j.value("processing", 0.0);
  if (!j.contains("total") || !j["total"].is_number()) {
    throw LogSchemaError("trace missing total");
  }
  t.t_total_s = j["total"].get<double>();
  if (t.t_total_s < 0.0) throw LogSchemaError("trace total must be >= 0");
  return t;
}

json record_to_json(const AnomalyRecord& r) {
  json j;
  j["class"] = std::string(to_string(r.anomaly_class));
  j["description"] = r.description;
  j["directive"] =
      r.directive ? json(std::string(to_string(*r.directive))) : json(nullptr);
  j["severity"] = std::string(to_string(r.severity));
  j["risk_of_loss"] = r.risk_of_loss ? json(quantize3(*r.risk_of_loss))
                                     : json(nullptr);
  j["frame_id"] = r.frame_id;
  j["captured_at"] = quantize3(r.captured_at_s);
  if (r.state) {
    j["state"] = json::parse(r.state->serialize());
  } else {
    j["state"] = nullptr;
  }
  return j;
}

AnomalyRecord record_from_json(const json& j) {
  AnomalyRecord r;
  if (!j.contains("class") || !j["class"].is_string()) {
    throw LogSchemaError("record missing class");
  }
  auto cls = anomaly_class_from_string(j["class"].get<std::string>());
  if (!cls) throw LogSchemaError("unknown record class");
  r.anomaly_class = *cls;
  r.description = j.value("description", std::string());
  if (j.contains("directive") && j["directive"].is_string()) {
    r.directive = directive_from_string(j["directive"].get<std::string>());
  }
  if (auto sev = severity_from_string(j.value("severity", "low"))) {
    r.severity = *sev;
  }
  if (j.contains("risk_of_loss") && j["risk_of_loss"].is_number()) {
    r.risk_of_loss = j["risk_of_loss"].get<double>();
  }
  r.frame_id = j.value("frame_id", 0);
  r.captured_at_s = j.value("captured_at", 0.0);
  return r;
}

json actions_to_json(const std::vector<mitigation::ActionLogEntry>& actions) {
  json arr = json::array();
  for (const auto& a : actions) {
    json e;
    e["action"] = std::string(to_string(a.action));
    e["frame_id"] = a.triggered_by_frame;
    e["at"] = quantize3(a.at_s);
    json deliveries = json::array();
    for (auto d : a.deliveries) {
      deliveries.push_back(std::string(mitigation::to_string(d)));
    }
    e["deliveries"] = std::move(deliveries);
    e["note"] = a.note;
    arr.push_back(std::move(e));
  }
  return arr;
}

std::vector<mitigation::ActionLogEntry> actions_from_json(const json& arr) {
  std::vector<mitigation::ActionLogEntry> actions;
  if (!arr.is_array()) return actions;
  for (const auto& e : arr) {
    mitigation::ActionLogEntry entry;
    auto act = mitigation_action_from_string(e.value("action", ""));
    if (!act) throw LogSchemaError("unknown action in run log");
    entry.action = *act;
    entry.triggered_by_frame = e.value("frame_id", 0);
    entry.at_s = e.value("at", 0.0);
    if (e.contains("deliveries") && e["deliveries"].is_array()) {
      for (const auto& d : e["deliveries"]) {
        if (auto kind = mitigation::delivery_kind_from_string(
                d.get<std::string>())) {
          entry.deliveries.push_back(*kind);
        }
      }
    }
    entry.note = e.value("note", std::string());
    actions.push_back(std::move(entry));
  }
  return actions;
}

}  // namespace

EvalReport evaluate(const bus::RunLog& log) {
  if (log.ticks.empty()) {
    throw LogSchemaError("run log has no ticks to evaluate");
  }

  EvalReport report;
  std::vector<std::pair<bool, bool>> pairs;
  std::vector<double> latencies;
  long long correct_non_neutral = 0;
  long long neutral = 0;
  pairs.reserve(log.ticks.size());
  latencies.reserve(log.ticks.size());
  for (const auto& tick : log.ticks) {
    pairs.emplace_back(tick.truth.anomaly, tick.record.is_anomalous());
    latencies.push_back(tick.trace.t_total_s);
    if (tick.record.anomaly_class == AnomalyClass::Unparsed) {
      ++neutral;
    } else if (tick.correct) {
      ++correct_non_neutral;
    }
  }
  report.confusion = metrics::confusion(pairs);
  report.accuracy_pct = metrics::accuracy(report.confusion);
  report.detection_rate_pct = metrics::detection_rate(
      correct_non_neutral, neutral, static_cast<long long>(log.ticks.size()));
  report.latency = metrics::latency_histogram(latencies);
  if (log.survey) {
    report.preference_score_pct = metrics::preference_score(
        log.survey->preferred, log.survey->neutral, log.survey->total);
  }
  report.nav = log.nav;
  report.final_epsilon = log.final_epsilon;
  return report;
}

json runlog_to_json(const bus::RunLog& log) {
  json j;
  j["version"] = log.version;
  j["scenario"] = log.scenario_name;
  j["seed"] = log.seed;
  j["ad_enabled"] = log.ad_enabled;
  j["t_max_s"] = quantize3(log.t_max_s);

  json ticks = json::array();
  for (const auto& tick : log.ticks) {
    json t;
    t["frame_id"] = tick.frame_id;
    t["captured_at"] = quantize3(tick.captured_at_s);
    t["truth"] = truth_to_json(tick.truth);
    t["record"] = record_to_json(tick.record);
    t["trace"] = trace_to_json(tick.trace);
    t["actions"] = actions_to_json(tick.actions);
    t["caption"] = tick.caption;
    t["summary"] = tick.summary;
    t["correct"] = tick.correct;
    t["epsilon_after"] = quantize3(tick.epsilon_after);
    if (tick.archive) {
      json a;
      a["frame"] = tick.archive->frame_json;
      a["heatmap"] = tick.archive->heatmap_pgm;
      a["report"] = tick.archive->report_json;
      t["archive"] = std::move(a);
    } else {
      t["archive"] = nullptr;
    }
    ticks.push_back(std::move(t));
  }
  j["ticks"] = std::move(ticks);
  j["final_epsilon"] = quantize3(log.final_epsilon);

  json nav;
  nav["trajectory_m"] = quantize3(log.nav.trajectory_m);
  nav["time_s"] = quantize3(log.nav.time_s);
  nav["anomalies_detected"] = log.nav.anomalies_detected;
  nav["sudden_stops"] = log.nav.sudden_stops;
  nav["reached_goal"] = log.nav.reached_goal;
  nav["safe_stopped"] = log.nav.safe_stopped;
  j["nav"] = std::move(nav);

  if (log.survey) {
    json s;
    s["preferred"] = log.survey->preferred;
    s["neutral"] = log.survey->neutral;
    s["total"] = log.survey->total;
    j["survey"] = std::move(s);
  } else {
    j["survey"] = nullptr;
  }
  return j;
}

bus::RunLog runlog_from_json(const json& j) {
  if (!j.is_object()) throw LogSchemaError("run log must be a JSON object");
  if (j.value("version", 0) != 1) {
    throw LogSchemaError("unsupported run log version");
  }
  if (!j.contains("ticks") || !j["ticks"].is_array() || j["ticks"].empty()) {
    throw LogSchemaError("run log must list at least one tick");
  }

  bus::RunLog log;
  log.scenario_name = j.value("scenario", std::string());
  log.seed = j.value("seed", std::uint64_t{0});
  log.ad_enabled = j.value("ad_enabled", true);
  log.t_max_s = j.value("t_max_s", 26.0);

  for (const auto& t : j["ticks"]) {
    bus::TickRecord tick;
    if (!t.contains("frame_id") || !t["frame_id"].is_number_integer()) {
      throw LogSchemaError("tick missing frame_id");
    }
    tick.frame_id = t["frame_id"].get<int>();
    tick.captured_at_s = t.value("captured_at", 0.0);
    tick.truth = truth_from_json(
        t.contains("truth") ? t["truth"] : json("clear"));
    if (!t.contains("record")) throw LogSchemaError("tick missing record");
    tick.record = record_from_json(t["record"]);
    if (!t.contains("trace")) throw LogSchemaError("tick missing trace");
    tick.trace = trace_from_json(t["trace"]);
    tick.actions = actions_from_json(t.value("actions", json::array()));
    tick.caption = t.value("caption", std::string());
    tick.summary = t.value("summary", std::string());
    if (t.contains("correct") && t["correct"].is_boolean()) {
      tick.correct = t["correct"].get<bool>();
    } else {
      tick.correct = tick.truth.anomaly == tick.record.is_anomalous();
    }
    tick.epsilon_after = t.value("epsilon_after", 0.0);
    if (t.contains("archive") && t["archive"].is_object()) {
      bus::ArchivePaths paths;
      paths.frame_json = t["archive"].value("frame", std::string());
      paths.heatmap_pgm = t["archive"].value("heatmap", std::string());
      paths.report_json = t["archive"].value("report", std::string());
      tick.archive = paths;
    }
    log.ticks.push_back(std::move(tick));
  }

  log.final_epsilon = j.value("final_epsilon", 0.0);
  if (j.contains("nav") && j["nav"].is_object()) {
    const json& nav = j["nav"];
    log.nav.trajectory_m = nav.value("trajectory_m", 0.0);
    log.nav.time_s = nav.value("time_s", 0.0);
    log.nav.anomalies_detected = nav.value("anomalies_detected", 0);
    log.nav.sudden_stops = nav.value("sudden_stops", 0);
    log.nav.reached_goal = nav.value("reached_goal", false);
    log.nav.safe_stopped = nav.value("safe_stopped", false);
  }
  if (j.contains("survey") && j["survey"].is_object()) {
    SurveyCounts counts;
    counts.preferred = j["survey"].value("preferred", 0LL);
    counts.neutral = j["survey"].value("neutral", 0LL);
    counts.total = j["survey"].value("total", 0LL);
    log.survey = counts;
  }
  return log;
}

bus::RunLog load_runlog(const std::filesystem::path& path) {
  json j;
  try {
    j = load_json_file(path);
  } catch (const ScenarioInvalid& e) {
    throw LogSchemaError(e.what());
  }
  return runlog_from_json(j);
}

json report_to_json(const EvalReport& report, const bus::RunLog& log) {
  json j;
  j["version"] = 1;
  j["scenario"] = log.scenario_name;
  j["seed"] = log.seed;
  j["ad_enabled"] = log.ad_enabled;

  json confusion;
  confusion["tp"] = report.confusion.tp;
  confusion["fp"] = report.confusion.fp;
  confusion["fn"] = report.confusion.fn;
  confusion["tn"] = report.confusion.tn;
  j["confusion"] = std::move(confusion);
  j["accuracy_pct"] = report.accuracy_pct;
  j["detection_rate_pct"] = report.detection_rate_pct;
  j["preference_score_pct"] = report.preference_score_pct
                                  ? json(*report.preference_score_pct)
                                  : json(nullptr);

  json latency;
  json edges = json::array();
  for (double e : report.latency.kBinEdges) edges.push_back(e);
  latency["bin_edges_s"] = std::move(edges);
  json counts = json::array();
  for (std::size_t c : report.latency.counts) counts.push_back(c);
  latency["counts"] = std::move(counts);
  latency["min_s"] = quantize3(report.latency.min_s);
  latency["max_s"] = quantize3(report.latency.max_s);
  latency["mean_s"] = quantize3(report.latency.mean_s);
  latency["samples"] = report.latency.sample_count;
  latency["pct_within_8s"] = report.latency.pct_within(8.0);
  latency["pct_within_14s"] = report.latency.pct_within(14.0);
  j["latency"] = std::move(latency);

  json nav;
  nav["trajectory_m"] = quantize3(report.nav.trajectory_m);
  nav["time_s"] = quantize3(report.nav.time_s);
  nav["anomalies_detected"] = report.nav.anomalies_detected;
  nav["sudden_stops"] = report.nav.sudden_stops;
  nav["reached_goal"] = report.nav.reached_goal;
  nav["safe_stopped"] = report.nav.safe_stopped;
  j["nav"] = std::move(nav);

  j["final_epsilon"] = quantize3(report.final_epsilon);

  json actions = json::array();
  for (const auto& tick : log.ticks) {
    for (const auto& entry : actions_to_json(tick.actions)) {
      actions.push_back(entry);
    }
  }
  j["action_log"] = std::move(actions);
  return j;
}

std::string report_to_csv(const EvalReport& report, const bus::RunLog& log) {
  std::ostringstream out;
  out << "condition,trajectory_m,time_s,anomalies_detected,sudden_stops\n";
  out << (log.ad_enabled ? "WAD" : "WoAD") << ","
      << format3(report.nav.trajectory_m) << "," << format3(report.nav.time_s)
      << "," << report.nav.anomalies_detected << ","
      << report.nav.sudden_stops << "\n";
  return out.str();
}

std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

bus::ArchivePaths write_archive(const AnomalyRecord& record,
                                const saliency::Heatmap& heatmap,
                                const WorldFrame& frame,
                                const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create archive dir: " + out_dir.string());

  char prefix[64];
  std::snprintf(prefix, sizeof(prefix), "%.3f-%d", record.captured_at_s,
                frame.frame_id());

  bus::ArchivePaths paths;
  paths.frame_json = std::string(prefix) + ".frame.json";
  paths.heatmap_pgm = std::string(prefix) + ".heatmap.pgm";
  paths.report_json = std::string(prefix) + ".report.json";

  // frame
  json fj;
  fj["frame_id"] = frame.frame_id();
  fj["captured_at"] = quantize3(frame.captured_at_s());
  fj["tags"] = frame.scene_tags();
  fj["truth"] = truth_to_json(frame.truth());
  json maps = json::array();
  for (const auto& map : frame.feature_maps()) {
    json rows = json::array();
    for (int r = 0; r < map.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < map.cols(); ++c) row.push_back(map.at(r, c));
      rows.push_back(std::move(row));
    }
    maps.push_back(std::move(rows));
  }
  fj["feature_maps"] = std::move(maps);
  write_text_file(out_dir / paths.frame_json, dump_canonical(fj));

  // heatmap as plain PGM, normalized to the peak
  const Grid& g = heatmap.grid;
  const double peak = g.max_value();
  std::ostringstream pgm;
  pgm << "P2\n";
  char maxline[48];
  std::snprintf(maxline, sizeof(maxline), "# max %.17g\n", peak);
  pgm << maxline;
  pgm << g.cols() << " " << g.rows() << "\n255\n";
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      const long v =
          peak > 0.0 ? std::lround(g.at(r, c) * 255.0 / peak) : 0L;
      pgm << v << (c + 1 == g.cols() ? "" : " ");
    }
    pgm << "\n";
  }
  write_text_file(out_dir / paths.heatmap_pgm, pgm.str());

  // anomaly report
  json rj;
  rj["record"] = record_to_json(record);
  rj["heatmap_max"] = peak;
  write_text_file(out_dir / paths.report_json, dump_canonical(rj));

  return paths;
}

PgmImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open PGM: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P2") throw IoError("not a plain PGM: " + path.string());

  PgmImage img;
  std::string token;
  int header[3];
  int filled = 0;
  while (filled < 3 && in >> token) {
    if (token[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      std::istringstream comment(token.substr(1) + " " + rest);
      std::string label;
      comment >> label;
      if (label == "max") comment >> img.original_max;
      continue;
    }
    header[filled++] = std::stoi(token);
  }
  img.cols = header[0];
  img.rows = header[1];
  img.maxval = header[2];
  img.values.reserve(static_cast<std::size_t>(img.rows) * img.cols);
  int v;
  while (in >> v) img.values.push_back(v);
  if (img.values.size() != static_cast<std::size_t>(img.rows) * img.cols) {
    throw IoError("PGM cell count mismatch: " + path.string());
  }
  return img;
}

}  // namespace vigil::cli
