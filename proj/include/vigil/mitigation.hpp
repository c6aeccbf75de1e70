#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vigil/core.hpp"

namespace vigil::mitigation {

// One row of the keyword -> response mapping layer. High severity implies a
// Hazardous class; enforced at load.
struct KeywordRule {
  std::string keyword;
  AnomalyClass anomaly_class = AnomalyClass::Conflict;
  Severity severity = Severity::Low;
  std::vector<MitigationAction> actions;
};

// The stock mapping: firearm and fight are high-severity hazards, obstruction
// and spill are medium-severity conflicts, anything else resumes operation.
std::vector<KeywordRule> default_rulebook();

// Throws DomainError when a rule violates the severity/class pairing, has an
// empty keyword, an empty action list, or a Clear/Unparsed class.
void validate_rulebook(std::span<const KeywordRule> rules);

// Case-insensitive scan for rule keywords at word starts (so "fighting"
// matches "fight"). Ties break by longest keyword, then higher severity, then
// lexicographic keyword. Returns nullptr when nothing matches.
const KeywordRule* match_rule(std::string_view text,
                              std::span<const KeywordRule> rules);

struct ActionSelection {
  Severity severity = Severity::Low;
  std::vector<MitigationAction> actions;
  const KeywordRule* rule = nullptr;  // matched rule, when any
};

// Maps a classification to its mitigation response. Unparsed input maps to
// (High, [SafeStop, Report]); Clear maps to (Low, [Resume]); anomalous input
// without a keyword match falls back to its directive's action.
ActionSelection select_actions(const ParseResult& parsed,
                               std::span<const KeywordRule> rules);

// ---------------------------------------------------------------------------
// Risk of loss.
// ---------------------------------------------------------------------------

struct RiskTable {
  std::map<std::string, double> entries;  // hazard class -> probability

  // Demonstration defaults; configuration values, not measured data.
  static RiskTable defaults();
};

void validate_risk_table(const RiskTable& table);

// Stored loss probability for a hazard class; UnknownHazardClass when absent.
double risk_of_loss(const std::string& hazard_class, const RiskTable& table);

// ---------------------------------------------------------------------------
// Anomaly detection factor.
// ---------------------------------------------------------------------------

// EWMA of a correctness/latency score. epsilon stays 0 while disabled.
struct EpsilonTracker {
  bool enabled = true;
  double epsilon = 0.0;
  double learning_rate = 0.1;
  double correctness_weight = 0.7;
  double latency_weight = 0.3;
  double latency_target_s = 26.0;  // t_max

  struct HistoryEntry {
    bool correct = false;
    double latency_s = 0.0;
    double delta = 0.0;
  };
  std::vector<HistoryEntry> history;
};

// Returns the new epsilon. Disabled trackers return 0 unconditionally.
double update_epsilon(EpsilonTracker& tracker, const DetectionOutcome& outcome);

// ---------------------------------------------------------------------------
// Simulated responders.
// ---------------------------------------------------------------------------

enum class DeliveryKind { SimulatedCall, SimulatedEmail, SirenOn, LogOnly };

std::string_view to_string(DeliveryKind k);
std::optional<DeliveryKind> delivery_kind_from_string(std::string_view s);

struct ActionLogEntry {
  MitigationAction action = MitigationAction::Resume;
  int triggered_by_frame = 0;
  double at_s = 0.0;
  std::vector<DeliveryKind> deliveries;
  std::string note;
};

// All sinks are simulated: calls and emails append log lines, the siren is a
// boolean latch, warnings are spoken-text log lines.
class MitigationSinks {
 public:
  bool siren_on() const { return siren_on_; }
  const std::vector<std::string>& call_log() const { return call_log_; }
  const std::vector<std::string>& email_log() const { return email_log_; }
  const std::vector<std::string>& spoken_log() const { return spoken_log_; }

  void set_siren(bool on) { siren_on_ = on; }
  void record_call(std::string line) { call_log_.push_back(std::move(line)); }
  void record_email(std::string line) { email_log_.push_back(std::move(line)); }
  void record_spoken(std::string line) { spoken_log_.push_back(std::move(line)); }

 private:
  bool siren_on_ = false;
  std::vector<std::string> call_log_;
  std::vector<std::string> email_log_;
  std::vector<std::string> spoken_log_;
};

// Executes one action against the sinks and returns its single log entry.
// Notify fans out to both the call and email sinks; Siren latches the siren
// on; Resume clears it.
ActionLogEntry execute_action(MitigationAction action, MitigationSinks& sinks,
                              const AnomalyRecord& trigger, double at_s);

// Rulebook/risk-table JSON config loading lives in the scenario module.

}  // namespace vigil::mitigation
