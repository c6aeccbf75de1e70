#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "vigil/budget.hpp"
#include "vigil/commands.hpp"
#include "vigil/metrics.hpp"
#include "vigil/mitigation.hpp"
#include "vigil/navsim.hpp"
#include "vigil/perception.hpp"
#include "vigil/report.hpp"
#include "vigil/saliency.hpp"

namespace py = pybind11;

namespace {

using Rows = std::vector<std::vector<double>>;

vigil::Grid grid_from_rows(const Rows& rows) { return vigil::Grid::from_rows(rows); }

Rows grid_to_rows(const vigil::Grid& g) {
  Rows rows(static_cast<std::size_t>(g.rows()));
  for (int r = 0; r < g.rows(); ++r) {
    rows[static_cast<std::size_t>(r)].resize(static_cast<std::size_t>(g.cols()));
    for (int c = 0; c < g.cols(); ++c) {
      rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = g.at(r, c);
    }
  }
  return rows;
}

py::dict summary_to_dict(const vigil::saliency::HeatmapSummary& s) {
  py::dict d;
  d["text"] = s.text;
  d["total_regions"] = s.total_regions;
  py::list regions;
  for (const auto& r : s.regions) {
    py::dict e;
    e["centroid_row"] = r.centroid_row;
    e["centroid_col"] = r.centroid_col;
    e["cell_count"] = r.cell_count;
    e["area_fraction"] = r.area_fraction;
    e["mean_activation"] = r.mean_activation;
    regions.append(e);
  }
  d["regions"] = regions;
  return d;
}

std::vector<vigil::mitigation::KeywordRule> rulebook_from_arg(
    const py::object& rulebook) {
  if (rulebook.is_none()) return vigil::mitigation::default_rulebook();
  std::vector<vigil::mitigation::KeywordRule> rules;
  for (const auto& item : rulebook.cast<py::list>()) {
    py::dict d = item.cast<py::dict>();
    vigil::mitigation::KeywordRule rule;
    rule.keyword = d["keyword"].cast<std::string>();
    auto cls = vigil::anomaly_class_from_string(d["class"].cast<std::string>());
    auto sev = vigil::severity_from_string(d["severity"].cast<std::string>());
    if (!cls || !sev) throw py::value_error("bad rulebook entry");
    rule.anomaly_class = *cls;
    rule.severity = *sev;
    for (const auto& a : d["actions"].cast<py::list>()) {
      auto act = vigil::mitigation_action_from_string(a.cast<std::string>());
      if (!act) throw py::value_error("unknown action");
      rule.actions.push_back(*act);
    }
    rules.push_back(std::move(rule));
  }
  vigil::mitigation::validate_rulebook(rules);
  return rules;
}

}  // namespace

PYBIND11_MODULE(_vigil, m) {
  m.doc() = "anomaly detection and mitigation pipeline simulator";
  m.attr("__version__") = "0.1.0";

  // saliency
  m.def(
      "combine_feature_maps",
      [](const std::vector<double>& weights, const std::vector<Rows>& maps) {
        std::vector<vigil::Grid> grids;
        grids.reserve(maps.size());
        for (const auto& rows : maps) grids.push_back(grid_from_rows(rows));
        return grid_to_rows(
            vigil::saliency::combine_feature_maps(weights, grids).grid);
      },
      py::arg("weights"), py::arg("maps"),
      "Weighted, rectified combination of feature maps.");
  m.def(
      "summarize_heatmap",
      [](const Rows& grid, double threshold, int max_regions) {
        vigil::saliency::Heatmap h{grid_from_rows(grid), -1};
        return summary_to_dict(
            vigil::saliency::summarize_heatmap(h, threshold, max_regions));
      },
      py::arg("grid"), py::arg("threshold") = 0.5, py::arg("max_regions") = 3);

  // perception
  m.def(
      "scripted_caption",
      [](const std::vector<std::string>& tags,
         const std::map<std::string, std::string>& lexicon) {
        vigil::WorldFrame frame(0, 0.0, tags, {vigil::Grid(1, 1)},
                                vigil::TruthLabel::clear());
        return vigil::perception::scripted_caption(frame, lexicon).text;
      },
      py::arg("tags"), py::arg("lexicon"));
  m.def(
      "render_prompt",
      [](const std::string& caption, const std::string& summary) {
        vigil::perception::Caption cap{caption, 0,
                                       vigil::perception::BackendKind::Scripted};
        vigil::saliency::HeatmapSummary sum;
        sum.text = summary;
        return vigil::perception::render_prompt(cap, sum).rendered;
      },
      py::arg("caption"), py::arg("heatmap_summary"));
  m.def(
      "parse_response",
      [](const std::string& raw) {
        py::dict d;
        auto result = vigil::perception::parse_response(raw);
        if (const auto* ok = std::get_if<vigil::ParsedClassification>(&result)) {
          d["ok"] = true;
          d["class"] = std::string(vigil::to_string(ok->anomaly_class));
          d["description"] = ok->description;
          d["directive"] = std::string(vigil::to_string(ok->directive));
        } else {
          d["ok"] = false;
          d["raw"] = std::get<vigil::UnparsedResponse>(result).raw;
        }
        return d;
      },
      py::arg("raw"));
  m.def(
      "scripted_classify",
      [](const std::string& caption, const py::object& rulebook) {
        auto rules = rulebook_from_arg(rulebook);
        vigil::perception::PromptContext ctx;
        ctx.caption = caption;
        return vigil::perception::scripted_classify(ctx, rules);
      },
      py::arg("caption"), py::arg("rulebook") = py::none());

  // mitigation
  m.def("default_rulebook", [] {
    py::list rules;
    for (const auto& rule : vigil::mitigation::default_rulebook()) {
      py::dict d;
      d["keyword"] = rule.keyword;
      d["class"] = std::string(vigil::to_string(rule.anomaly_class));
      d["severity"] = std::string(vigil::to_string(rule.severity));
      py::list actions;
      for (auto a : rule.actions) {
        actions.append(std::string(vigil::to_string(a)));
      }
      d["actions"] = actions;
      rules.append(d);
    }
    return rules;
  });
  m.def(
      "select_actions",
      [](const std::string& cls, const std::string& description,
         const py::object& rulebook) {
        auto rules = rulebook_from_arg(rulebook);
        vigil::ParseResult parsed;
        if (cls == "unparsed") {
          parsed = vigil::UnparsedResponse{description};
        } else {
          auto c = vigil::anomaly_class_from_string(cls);
          if (!c) throw py::value_error("unknown class");
          parsed = vigil::ParsedClassification{
              *c, description, vigil::directive_for_class(*c)};
        }
        auto selection = vigil::mitigation::select_actions(parsed, rules);
        py::list actions;
        for (auto a : selection.actions) {
          actions.append(std::string(vigil::to_string(a)));
        }
        return py::make_tuple(std::string(vigil::to_string(selection.severity)),
                              actions);
      },
      py::arg("anomaly_class"), py::arg("description"),
      py::arg("rulebook") = py::none());

  py::class_<vigil::mitigation::EpsilonTracker>(m, "EpsilonTracker")
      .def(py::init([](bool enabled, double latency_target_s) {
             vigil::mitigation::EpsilonTracker t;
             t.enabled = enabled;
             t.latency_target_s = latency_target_s;
             return t;
           }),
           py::arg("enabled") = true, py::arg("latency_target_s") = 26.0)
      .def_readonly("epsilon", &vigil::mitigation::EpsilonTracker::epsilon)
      .def(
          "update",
          [](vigil::mitigation::EpsilonTracker& t, bool correct,
             double latency_s) {
            vigil::AnomalyRecord record;
            vigil::DetectionOutcome outcome(record, 1.0, correct, latency_s);
            return vigil::mitigation::update_epsilon(t, outcome);
          },
          py::arg("correct"), py::arg("latency_s") = 0.0);

  // metrics
  m.def(
      "accuracy",
      [](long long tp, long long fp, long long fn, long long tn) {
        return vigil::metrics::accuracy({tp, fp, fn, tn});
      },
      py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));
  m.def("preference_score", &vigil::metrics::preference_score, py::arg("u"),
        py::arg("n"), py::arg("t"));
  m.def("detection_rate", &vigil::metrics::detection_rate, py::arg("u"),
        py::arg("n"), py::arg("t"));
  m.def(
      "latency_histogram",
      [](const std::vector<double>& samples) {
        auto h = vigil::metrics::latency_histogram(samples);
        py::dict d;
        d["bin_edges_s"] =
            std::vector<double>(h.kBinEdges.begin(), h.kBinEdges.end());
        d["counts"] =
            std::vector<std::size_t>(h.counts.begin(), h.counts.end());
        d["min_s"] = h.min_s;
        d["max_s"] = h.max_s;
        d["mean_s"] = h.mean_s;
        d["pct_within_8s"] = h.pct_within(8.0);
        d["pct_within_14s"] = h.pct_within(14.0);
        return d;
      },
      py::arg("samples_s"));

  // budget
  m.def(
      "allocate_budget",
      [](const std::vector<std::tuple<std::string, double, double>>& profiles,
         double t_max_s) {
        std::vector<vigil::budget::StageProfile> parsed;
        for (const auto& [name, min_s, mean_s] : profiles) {
          auto stage = vigil::budget::stage_from_string(name);
          if (!stage) throw py::value_error("unknown stage: " + name);
          parsed.push_back({*stage, min_s, mean_s});
        }
        auto alloc = vigil::budget::allocate(parsed, t_max_s);
        py::dict d;
        for (const auto& [stage, timeout] : alloc.timeout_per_stage) {
          d[std::string(vigil::budget::to_string(stage)).c_str()] = timeout;
        }
        return d;
      },
      py::arg("profiles"), py::arg("t_max_s"),
      "profiles: [(stage, min_s, mean_s)]");
  m.def(
      "fit_compute_model",
      [](const std::vector<std::pair<double, double>>& samples) {
        auto fit = vigil::budget::fit_compute_model(samples);
        return py::make_tuple(fit.k, fit.residual_norm);
      },
      py::arg("samples"), "samples: [(compute, latency_s)]");

  // navigation
  m.def(
      "plan_path",
      [](int width, int height, const std::vector<std::pair<int, int>>& occupied,
         std::pair<int, int> start, std::pair<int, int> goal) {
        vigil::nav::GridWorld world(width, height);
        for (const auto& [x, y] : occupied) world.set_occupied({x, y});
        auto path = vigil::nav::plan_path(world, {start.first, start.second},
                                          {goal.first, goal.second});
        std::vector<std::pair<int, int>> out;
        out.reserve(path.size());
        for (const auto& c : path) out.emplace_back(c.x, c.y);
        return out;
      },
      py::arg("width"), py::arg("height"), py::arg("occupied"),
      py::arg("start"), py::arg("goal"));

  // end-to-end
  m.def(
      "run_scenario_file",
      [](const std::string& path, const py::object& ad,
         const py::object& seed, const std::string& out_dir) {
        vigil::cli::RunFlags flags;
        if (!ad.is_none()) flags.ad_enabled = ad.cast<bool>();
        if (!seed.is_none()) flags.seed = seed.cast<std::uint64_t>();
        flags.out_dir = out_dir;
        std::ostringstream out, err;
        const int code = vigil::cli::cmd_run(path, flags, out, err);
        if (code != 0) {
          throw std::runtime_error("cmd_run exited " + std::to_string(code) +
                                   ": " + err.str());
        }
        return vigil::read_text_file(std::filesystem::path(out_dir) /
                                     "report.json");
      },
      py::arg("path"), py::arg("ad") = py::none(), py::arg("seed") = py::none(),
      py::arg("out_dir") = "out",
      "Runs a scenario and returns report.json as text.");
}
