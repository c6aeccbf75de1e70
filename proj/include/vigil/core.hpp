#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vigil/errors.hpp"

namespace vigil {

// ---------------------------------------------------------------------------
// Shared vocabulary: anomaly classes, directives, severities, actions.
// ---------------------------------------------------------------------------

enum class AnomalyClass { Hazardous, Conflict, Clear, Unparsed };

// Action token the classifier must emit alongside the anomaly class.
enum class Directive { Report, Avoid, Resume };

enum class Severity { High, Medium, Low };

enum class MitigationAction {
  Siren,
  Notify,
  Warn,
  Alert,
  Replan,
  Report,
  Avoid,
  Resume,
  SafeStop,
};

std::string_view to_string(AnomalyClass c);
std::string_view to_string(Directive d);
std::string_view to_string(Severity s);
std::string_view to_string(MitigationAction a);

std::optional<AnomalyClass> anomaly_class_from_string(std::string_view s);
std::optional<Directive> directive_from_string(std::string_view s);
std::optional<Severity> severity_from_string(std::string_view s);
std::optional<MitigationAction> mitigation_action_from_string(std::string_view s);

// The only legal class/directive pairings.
Directive directive_for_class(AnomalyClass c);

// ---------------------------------------------------------------------------
// Grid: dense row-major 2D real matrix used for feature maps and heatmaps.
// ---------------------------------------------------------------------------

class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, double fill = 0.0);

  static Grid from_rows(const std::vector<std::vector<double>>& rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  double at(int r, int c) const { return cells_[index(r, c)]; }
  double& at(int r, int c) { return cells_[index(r, c)]; }

  bool same_shape(const Grid& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double max_value() const;

  const std::vector<double>& data() const { return cells_; }

  bool operator==(const Grid& other) const = default;

 private:
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> cells_;
};

// ---------------------------------------------------------------------------
// Robot world state.
// ---------------------------------------------------------------------------

struct EnvObject {
  std::string label;
  std::vector<double> q_env;  // relative pose, meters
};

// Position/orientation q and velocity v of equal dimension n >= 2.
class RobotState {
 public:
  RobotState(std::vector<double> q, std::vector<double> v,
             std::vector<EnvObject> env_objects = {});

  const std::vector<double>& q() const { return q_; }
  const std::vector<double>& v() const { return v_; }
  const std::vector<EnvObject>& env_objects() const { return env_objects_; }
  std::size_t dimension() const { return q_.size(); }

  double speed() const;  // euclidean norm of v

 private:
  std::vector<double> q_;
  std::vector<double> v_;
  std::vector<EnvObject> env_objects_;
};

struct Goal {
  std::vector<double> target;
};

// Sampled polyline trajectory. Times must be strictly increasing from 0;
// violations are rejected at construction.
class Trajectory {
 public:
  struct Sample {
    double t_s = 0.0;
    std::vector<double> position;
    std::vector<double> velocity;
  };

  explicit Trajectory(std::vector<Sample> samples);

  const std::vector<Sample>& samples() const { return samples_; }
  double duration_s() const { return samples_.back().t_s; }

 private:
  std::vector<Sample> samples_;
};

// ---------------------------------------------------------------------------
// Perception sample.
// ---------------------------------------------------------------------------

struct TruthLabel {
  bool anomaly = false;
  std::string kind;  // empty when clear

  static TruthLabel clear() { return {}; }
  static TruthLabel present(std::string k) { return {true, std::move(k)}; }

  bool operator==(const TruthLabel&) const = default;
};

// Scripted stand-in for a camera image: scene tags plus feature maps.
class WorldFrame {
 public:
  WorldFrame(int frame_id, double captured_at_s,
             std::vector<std::string> scene_tags, std::vector<Grid> feature_maps,
             TruthLabel truth);

  int frame_id() const { return frame_id_; }
  double captured_at_s() const { return captured_at_s_; }
  const std::vector<std::string>& scene_tags() const { return scene_tags_; }
  const std::vector<Grid>& feature_maps() const { return feature_maps_; }
  const TruthLabel& truth() const { return truth_; }

 private:
  int frame_id_ = 0;
  double captured_at_s_ = 0.0;
  std::vector<std::string> scene_tags_;
  std::vector<Grid> feature_maps_;
  TruthLabel truth_;
};

struct HazardSets {
  std::set<std::string> hazardous;
  std::set<std::string> loss;
};

// ---------------------------------------------------------------------------
// Operational constraints.
// ---------------------------------------------------------------------------

enum class CmpOp { Le, Ge, Lt, Gt };

struct Constraint {
  std::string id;
  std::string rule_text;
  std::function<bool(const RobotState&)> eval;  // may throw; counts as violated
};

// Data-driven predicate: compare a named state field against a bound.
// Fields: "speed", "q<i>", "v<i>" (e.g. "q0", "v2"). Unknown fields and
// out-of-range indices surface as evaluation failures, not construction
// errors, so scenarios fail per-state with a diagnostic.
Constraint make_bound_constraint(std::string id, const std::string& field,
                                 CmpOp op, double bound);

struct ConstraintSet {
  std::vector<Constraint> constraints;
};

struct ConstraintVerdict {
  bool satisfied = true;
  std::vector<std::string> violated_ids;  // declaration order
  std::vector<std::string> diagnostics;   // evaluation failures
};

ConstraintVerdict check_constraints(const RobotState& state,
                                    const ConstraintSet& omega);

// ---------------------------------------------------------------------------
// Immutable state snapshot embedded in anomaly records.
// ---------------------------------------------------------------------------

class StateSnapshot {
 public:
  StateSnapshot() = default;

  static StateSnapshot capture(const RobotState& state, const WorldFrame& frame);

  const std::vector<double>& q() const { return q_; }
  const std::vector<double>& v() const { return v_; }
  const std::vector<EnvObject>& env_objects() const { return env_objects_; }
  int frame_id() const { return frame_id_; }
  double captured_at_s() const { return captured_at_s_; }

  // Canonical byte representation: equal inputs produce identical bytes.
  std::string serialize() const;

 private:
  std::vector<double> q_;
  std::vector<double> v_;
  std::vector<EnvObject> env_objects_;
  int frame_id_ = 0;
  double captured_at_s_ = 0.0;
};

// ---------------------------------------------------------------------------
// Classification results.
// ---------------------------------------------------------------------------

struct ParsedClassification {
  AnomalyClass anomaly_class = AnomalyClass::Clear;
  std::string description;
  Directive directive = Directive::Resume;

  bool operator==(const ParsedClassification&) const = default;
};

struct UnparsedResponse {
  std::string raw;
};

using ParseResult = std::variant<ParsedClassification, UnparsedResponse>;

struct AnomalyRecord {
  AnomalyClass anomaly_class = AnomalyClass::Clear;
  std::string description;
  std::optional<Directive> directive;  // absent for Unparsed
  Severity severity = Severity::Low;
  std::optional<double> risk_of_loss;
  std::optional<StateSnapshot> state;
  int frame_id = 0;
  double captured_at_s = 0.0;

  bool is_anomalous() const { return anomaly_class != AnomalyClass::Clear; }
};

// One classified detection plus the bookkeeping the epsilon tracker needs.
struct DetectionOutcome {
  AnomalyRecord record;
  double confidence = 1.0;           // uncertainty proxy in [0,1]
  std::optional<bool> correct;       // set on replay against truth
  double latency_s = 0.0;

  DetectionOutcome() = default;
  DetectionOutcome(AnomalyRecord rec, double conf, std::optional<bool> corr,
                   double latency);
};

}  // namespace vigil
