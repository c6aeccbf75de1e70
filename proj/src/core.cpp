#include "vigil/core.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <sstream>

#include "vigil/json_io.hpp"

namespace vigil {

std::string_view to_string(AnomalyClass c) {
  switch (c) {
    case AnomalyClass::Hazardous: return "hazardous";
    case AnomalyClass::Conflict: return "conflict";
    case AnomalyClass::Clear: return "clear";
    case AnomalyClass::Unparsed: return "unparsed";
  }
  return "clear";
}

std::string_view to_string(Directive d) {
  switch (d) {
    case Directive::Report: return "report";
    case Directive::Avoid: return "avoid";
    case Directive::Resume: return "resume";
  }
  return "resume";
}

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::High: return "high";
    case Severity::Medium: return "medium";
    case Severity::Low: return "low";
  }
  return "low";
}

std::string_view to_string(MitigationAction a) {
  switch (a) {
    case MitigationAction::Siren: return "siren";
    case MitigationAction::Notify: return "notify";
    case MitigationAction::Warn: return "warn";
    case MitigationAction::Alert: return "alert";
    case MitigationAction::Replan: return "replan";
    case MitigationAction::Report: return "report";
    case MitigationAction::Avoid: return "avoid";
    case MitigationAction::Resume: return "resume";
    case MitigationAction::SafeStop: return "safe_stop";
  }
  return "resume";
}

std::optional<AnomalyClass> anomaly_class_from_string(std::string_view s) {
  if (s == "hazardous") return AnomalyClass::Hazardous;
  if (s == "conflict") return AnomalyClass::Conflict;
  if (s == "clear") return AnomalyClass::Clear;
  if (s == "unparsed") return AnomalyClass::Unparsed;
  return std::nullopt;
}

std::optional<Directive> directive_from_string(std::string_view s) {
  if (s == "report") return Directive::Report;
  if (s == "avoid") return Directive::Avoid;
  if (s == "resume") return Directive::Resume;
  return std::nullopt;
}

std::optional<Severity> severity_from_string(std::string_view s) {
  if (s == "high") return Severity::High;
  if (s == "medium") return Severity::Medium;
  if (s == "low") return Severity::Low;
  return std::nullopt;
}

std::optional<MitigationAction> mitigation_action_from_string(std::string_view s) {
  if (s == "siren") return MitigationAction::Siren;
  if (s == "notify") return MitigationAction::Notify;
  if (s == "warn") return MitigationAction::Warn;
  if (s == "alert") return MitigationAction::Alert;
  if (s == "replan") return MitigationAction::Replan;
  if (s == "report") return MitigationAction::Report;
  if (s == "avoid") return MitigationAction::Avoid;
  if (s == "resume") return MitigationAction::Resume;
  if (s == "safe_stop") return MitigationAction::SafeStop;
  return std::nullopt;
}

Directive directive_for_class(AnomalyClass c) {
  switch (c) {
    case AnomalyClass::Hazardous: return Directive::Report;
    case AnomalyClass::Conflict: return Directive::Avoid;
    default: return Directive::Resume;
  }
}

// ---------------------------------------------------------------------------

Grid::Grid(int rows, int cols, double fill)
    : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0) {
    throw ShapeMismatch("grid dimensions must be positive");
  }
  cells_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
                fill);
}

Grid Grid::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw ShapeMismatch("grid rows must be non-empty");
  }
  Grid g(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int r = 0; r < g.rows(); ++r) {
    if (rows[static_cast<std::size_t>(r)].size() !=
        static_cast<std::size_t>(g.cols())) {
      throw ShapeMismatch("ragged grid rows");
    }
    for (int c = 0; c < g.cols(); ++c) {
      g.at(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  return g;
}

double Grid::max_value() const {
  double m = 0.0;
  bool first = true;
  for (double v : cells_) {
    if (first || v > m) m = v;
    first = false;
  }
  return m;
}

// ---------------------------------------------------------------------------

RobotState::RobotState(std::vector<double> q, std::vector<double> v,
                       std::vector<EnvObject> env_objects)
    : q_(std::move(q)), v_(std::move(v)), env_objects_(std::move(env_objects)) {
  if (q_.size() != v_.size()) {
    throw std::invalid_argument("robot state q and v must have equal dimension");
  }
  if (q_.size() < 2) {
    throw std::invalid_argument("robot state dimension must be >= 2");
  }
}

double RobotState::speed() const {
  double sq = 0.0;
  for (double x : v_) sq += x * x;
  return std::sqrt(sq);
}

Trajectory::Trajectory(std::vector<Sample> samples)
    : samples_(std::move(samples)) {
  if (samples_.empty()) {
    throw std::invalid_argument("trajectory must have at least one sample");
  }
  if (samples_.front().t_s != 0.0) {
    throw std::invalid_argument("trajectory must start at t=0");
  }
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (!(samples_[i].t_s > samples_[i - 1].t_s)) {
      throw std::invalid_argument("trajectory times must be strictly increasing");
    }
  }
}

WorldFrame::WorldFrame(int frame_id, double captured_at_s,
                       std::vector<std::string> scene_tags,
                       std::vector<Grid> feature_maps, TruthLabel truth)
    : frame_id_(frame_id),
      captured_at_s_(captured_at_s),
      scene_tags_(std::move(scene_tags)),
      feature_maps_(std::move(feature_maps)),
      truth_(std::move(truth)) {
  for (std::size_t i = 1; i < feature_maps_.size(); ++i) {
    if (!feature_maps_[i].same_shape(feature_maps_.front())) {
      throw ShapeMismatch("feature maps of one frame must share dimensions");
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

// Returns the value of a named state field, throwing on unknown names.
double state_field(const RobotState& s, const std::string& field) {
  if (field == "speed") return s.speed();
  if (field.size() >= 2 && (field[0] == 'q' || field[0] == 'v')) {
    std::size_t idx = 0;
    auto [ptr, ec] = std::from_chars(field.data() + 1,
                                     field.data() + field.size(), idx);
    if (ec == std::errc() && ptr == field.data() + field.size()) {
      const auto& vec = field[0] == 'q' ? s.q() : s.v();
      if (idx >= vec.size()) {
        throw std::out_of_range("state index out of range: " + field);
      }
      return vec[idx];
    }
  }
  throw std::invalid_argument("unknown state field: " + field);
}

bool compare(double lhs, CmpOp op, double rhs) {
  switch (op) {
    case CmpOp::Le: return lhs <= rhs;
    case CmpOp::Ge: return lhs >= rhs;
    case CmpOp::Lt: return lhs < rhs;
    case CmpOp::Gt: return lhs > rhs;
  }
  return false;
}

std::string_view op_text(CmpOp op) {
  switch (op) {
    case CmpOp::Le: return "<=";
    case CmpOp::Ge: return ">=";
    case CmpOp::Lt: return "<";
    case CmpOp::Gt: return ">";
  }
  return "<=";
}

}  // namespace

Constraint make_bound_constraint(std::string id, const std::string& field,
                                 CmpOp op, double bound) {
  std::ostringstream rule;
  rule << field << " " << op_text(op) << " " << bound;
  return Constraint{
      std::move(id), rule.str(),
      [field, op, bound](const RobotState& s) {
        return compare(state_field(s, field), op, bound);
      }};
}

ConstraintVerdict check_constraints(const RobotState& state,
                                    const ConstraintSet& omega) {
  if (omega.constraints.empty()) {
    throw std::invalid_argument("constraint set must be non-empty");
  }
  ConstraintVerdict verdict;
  for (const auto& c : omega.constraints) {
    bool ok = false;
    try {
      ok = c.eval(state);
    } catch (const std::exception& e) {
      verdict.diagnostics.push_back(c.id + ": evaluation failed: " + e.what());
      ok = false;
    }
    if (!ok) {
      verdict.satisfied = false;
      verdict.violated_ids.push_back(c.id);
    }
  }
  return verdict;
}

// ---------------------------------------------------------------------------

StateSnapshot StateSnapshot::capture(const RobotState& state,
                                     const WorldFrame& frame) {
  StateSnapshot snap;
  snap.q_ = state.q();
  snap.v_ = state.v();
  snap.env_objects_ = state.env_objects();
  snap.frame_id_ = frame.frame_id();
  snap.captured_at_s_ = frame.captured_at_s();
  return snap;
}

std::string StateSnapshot::serialize() const {
  json j;
  j["frame_id"] = frame_id_;
  j["captured_at"] = quantize3(captured_at_s_);
  json q = json::array();
  for (double x : q_) q.push_back(quantize3(x));
  json v = json::array();
  for (double x : v_) v.push_back(quantize3(x));
  j["q"] = std::move(q);
  j["v"] = std::move(v);
  json env = json::array();
  for (const auto& obj : env_objects_) {
    json o;
    o["label"] = obj.label;
    json qe = json::array();
    for (double x : obj.q_env) qe.push_back(quantize3(x));
    o["q_env"] = std::move(qe);
    env.push_back(std::move(o));
  }
  j["env_objects"] = std::move(env);
  return j.dump();
}

DetectionOutcome::DetectionOutcome(AnomalyRecord rec, double conf,
                                   std::optional<bool> corr, double latency)
    : record(std::move(rec)), confidence(conf), correct(corr),
      latency_s(latency) {
  if (confidence < 0.0 || confidence > 1.0) {
    throw DomainError("detection confidence must lie in [0,1]");
  }
  if (latency_s < 0.0) {
    throw DomainError("detection latency must be non-negative");
  }
}

}  // namespace vigil
