#include "vigil/mitigation.hpp"

#include <algorithm>
#include <cctype>

namespace vigil::mitigation {

std::vector<KeywordRule> default_rulebook() {
  return {
      {"firearm", AnomalyClass::Hazardous, Severity::High,
       {MitigationAction::Siren, MitigationAction::Notify}},
      {"fight", AnomalyClass::Hazardous, Severity::High,
       {MitigationAction::Warn, MitigationAction::Alert}},
      {"obstruction", AnomalyClass::Conflict, Severity::Medium,
       {MitigationAction::Replan}},
      {"spill", AnomalyClass::Conflict, Severity::Medium,
       {MitigationAction::Report, MitigationAction::Avoid}},
  };
}

void validate_rulebook(std::span<const KeywordRule> rules) {
  for (const auto& rule : rules) {
    if (rule.keyword.empty()) {
      throw DomainError("rulebook keyword must be non-empty");
    }
    if (rule.actions.empty()) {
      throw DomainError("rulebook rule '" + rule.keyword +
                        "' must list at least one action");
    }
    if (rule.anomaly_class != AnomalyClass::Hazardous &&
        rule.anomaly_class != AnomalyClass::Conflict) {
      throw DomainError("rulebook rule '" + rule.keyword +
                        "' must classify as hazardous or conflict");
    }
    if (rule.severity == Severity::High &&
        rule.anomaly_class != AnomalyClass::Hazardous) {
      throw DomainError("rulebook rule '" + rule.keyword +
                        "': high severity requires the hazardous class");
    }
  }
}

namespace {

char lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Keyword present at a word start, case-insensitive; the word may continue
// past the keyword so inflected forms still match ("fighting" -> "fight").
bool contains_keyword(std::string_view text, std::string_view keyword) {
  if (keyword.empty() || keyword.size() > text.size()) return false;
  for (std::size_t i = 0; i + keyword.size() <= text.size(); ++i) {
    if (i > 0 && is_word_char(text[i - 1])) continue;  // not a word start
    bool match = true;
    for (std::size_t k = 0; k < keyword.size(); ++k) {
      if (lower(text[i + k]) != lower(keyword[k])) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

int severity_rank(Severity s) {
  switch (s) {
    case Severity::High: return 2;
    case Severity::Medium: return 1;
    case Severity::Low: return 0;
  }
  return 0;
}

}  // namespace

const KeywordRule* match_rule(std::string_view text,
                              std::span<const KeywordRule> rules) {
  const KeywordRule* best = nullptr;
  for (const auto& rule : rules) {
    if (!contains_keyword(text, rule.keyword)) continue;
    if (best == nullptr) {
      best = &rule;
      continue;
    }
    // longest keyword, then higher severity, then lexicographic keyword
    if (rule.keyword.size() != best->keyword.size()) {
      if (rule.keyword.size() > best->keyword.size()) best = &rule;
    } else if (severity_rank(rule.severity) != severity_rank(best->severity)) {
      if (severity_rank(rule.severity) > severity_rank(best->severity)) {
        best = &rule;
      }
    } else if (rule.keyword < best->keyword) {
      best = &rule;
    }
  }
  return best;
}

ActionSelection select_actions(const ParseResult& parsed,
                               std::span<const KeywordRule> rules) {
  if (std::holds_alternative<UnparsedResponse>(parsed)) {
    return {Severity::High,
            {MitigationAction::SafeStop, MitigationAction::Report},
            nullptr};
  }
  const auto& cls = std::get<ParsedClassification>(parsed);
  if (cls.anomaly_class == AnomalyClass::Clear) {
    return {Severity::Low, {MitigationAction::Resume}, nullptr};
  }
  if (const KeywordRule* rule = match_rule(cls.description, rules)) {
    return {rule->severity, rule->actions, rule};
  }
  // Anomalous classification with no keyword match: act on the directive.
  if (cls.anomaly_class == AnomalyClass::Hazardous) {
    return {Severity::High, {MitigationAction::Report}, nullptr};
  }
  return {Severity::Medium, {MitigationAction::Avoid}, nullptr};
}

// ---------------------------------------------------------------------------

RiskTable RiskTable::defaults() {
  RiskTable t;
  t.entries = {
      {"firearm", 0.9},
      {"fight", 0.8},
      {"obstruction", 0.4},
      {"spill", 0.3},
  };
  return t;
}

void validate_risk_table(const RiskTable& table) {
  for (const auto& [cls, p] : table.entries) {
    if (cls.empty()) throw DomainError("risk table class must be non-empty");
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DomainError("risk probability for '" + cls +
                        "' must lie in [0,1]");
    }
  }
}

double risk_of_loss(const std::string& hazard_class, const RiskTable& table) {
  auto it = table.entries.find(hazard_class);
  if (it == table.entries.end()) {
    throw UnknownHazardClass("no risk entry for hazard class: " + hazard_class);
  }
  return it->second;
}

// ---------------------------------------------------------------------------

double update_epsilon(EpsilonTracker& tracker, const DetectionOutcome& outcome) {
  if (!tracker.enabled) {
    tracker.epsilon = 0.0;
    return 0.0;
  }
  const double correct01 = outcome.correct.value_or(false) ? 1.0 : 0.0;
  const double latency_score =
      tracker.latency_target_s > 0.0
          ? std::max(0.0, 1.0 - outcome.latency_s / tracker.latency_target_s)
          : 0.0;
  const double score = tracker.correctness_weight * correct01 +
                       tracker.latency_weight * latency_score;
  const double delta = tracker.learning_rate * (score - tracker.epsilon);
  tracker.epsilon = std::clamp(tracker.epsilon + delta, 0.0, 1.0);
  tracker.history.push_back(
      {outcome.correct.value_or(false), outcome.latency_s, delta});
  return tracker.epsilon;
}

// ---------------------------------------------------------------------------

std::string_view to_string(DeliveryKind k) {
  switch (k) {
    case DeliveryKind::SimulatedCall: return "simulated_call";
    case DeliveryKind::SimulatedEmail: return "simulated_email";
    case DeliveryKind::SirenOn: return "siren_on";
    case DeliveryKind::LogOnly: return "log_only";
  }
  return "log_only";
}

std::optional<DeliveryKind> delivery_kind_from_string(std::string_view s) {
  if (s == "simulated_call") return DeliveryKind::SimulatedCall;
  if (s == "simulated_email") return DeliveryKind::SimulatedEmail;
  if (s == "siren_on") return DeliveryKind::SirenOn;
  if (s == "log_only") return DeliveryKind::LogOnly;
  return std::nullopt;
}

ActionLogEntry execute_action(MitigationAction action, MitigationSinks& sinks,
                              const AnomalyRecord& trigger, double at_s) {
  ActionLogEntry entry;
  entry.action = action;
  entry.triggered_by_frame = trigger.frame_id;
  entry.at_s = at_s;
  switch (action) {
    case MitigationAction::Siren:
      sinks.set_siren(true);
      entry.deliveries = {DeliveryKind::SirenOn};
      entry.note = "siren on";
      break;
    case MitigationAction::Notify:
      sinks.record_call("call: " + trigger.description);
      sinks.record_email("email: " + trigger.description);
      entry.deliveries = {DeliveryKind::SimulatedCall,
                          DeliveryKind::SimulatedEmail};
      entry.note = "operator notified";
      break;
    case MitigationAction::Warn:
      sinks.record_spoken("warning: " + trigger.description);
      entry.deliveries = {DeliveryKind::LogOnly};
      entry.note = "verbal warning issued";
      break;
    case MitigationAction::Alert:
      sinks.record_email("alert: " + trigger.description);
      entry.deliveries = {DeliveryKind::SimulatedEmail};
      entry.note = "alert dispatched";
      break;
    case MitigationAction::Replan:
      entry.deliveries = {DeliveryKind::LogOnly};
      entry.note = "replan requested";
      break;
    case MitigationAction::Report:
      entry.deliveries = {DeliveryKind::LogOnly};
      entry.note = "anomaly report filed";
      break;
    case MitigationAction::Avoid:
      entry.deliveries = {DeliveryKind::LogOnly};
      entry.note = "avoidance requested";
      break;
    case MitigationAction::Resume:
      sinks.set_siren(false);
      entry.deliveries = {DeliveryKind::LogOnly};
      entry.note = "operations resumed";
      break;
    case MitigationAction::SafeStop:
      entry.deliveries = {DeliveryKind::LogOnly};
      entry.note = "safe stop engaged";
      break;
  }
  return entry;
}

}  // namespace vigil::mitigation
