#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "vigil/mitigation.hpp"
#include "vigil/scenario.hpp"

using namespace vigil;
using namespace vigil::mitigation;

namespace {

ParseResult parsed(AnomalyClass cls, std::string description) {
  return ParsedClassification{cls, std::move(description),
                              directive_for_class(cls)};
}

AnomalyRecord record_with(std::string description, int frame_id = 1) {
  AnomalyRecord r;
  r.anomaly_class = AnomalyClass::Hazardous;
  r.description = std::move(description);
  r.frame_id = frame_id;
  return r;
}

}  // namespace

TEST_CASE("default rulebook carries the stock mapping") {
  const auto rules = default_rulebook();
  REQUIRE(rules.size() == 4);

  CHECK(rules[0].keyword == "firearm");
  CHECK(rules[0].anomaly_class == AnomalyClass::Hazardous);
  CHECK(rules[0].severity == Severity::High);
  CHECK(rules[0].actions == std::vector<MitigationAction>{
                                MitigationAction::Siren,
                                MitigationAction::Notify});

  CHECK(rules[1].keyword == "fight");
  CHECK(rules[1].severity == Severity::High);
  CHECK(rules[1].actions == std::vector<MitigationAction>{
                                MitigationAction::Warn,
                                MitigationAction::Alert});

  CHECK(rules[2].keyword == "obstruction");
  CHECK(rules[2].anomaly_class == AnomalyClass::Conflict);
  CHECK(rules[2].severity == Severity::Medium);
  CHECK(rules[2].actions ==
        std::vector<MitigationAction>{MitigationAction::Replan});

  CHECK(rules[3].keyword == "spill");
  CHECK(rules[3].severity == Severity::Medium);
  CHECK(rules[3].actions == std::vector<MitigationAction>{
                                MitigationAction::Report,
                                MitigationAction::Avoid});

  CHECK_NOTHROW(validate_rulebook(rules));
}

TEST_CASE("select_actions: keyword routing") {
  const auto rules = default_rulebook();

  auto fight = select_actions(
      parsed(AnomalyClass::Hazardous, "people fighting near exit"), rules);
  CHECK(fight.severity == Severity::High);
  CHECK(fight.actions == std::vector<MitigationAction>{MitigationAction::Warn,
                                                       MitigationAction::Alert});

  auto clear = select_actions(parsed(AnomalyClass::Clear, "an empty hall"), rules);
  CHECK(clear.severity == Severity::Low);
  CHECK(clear.actions == std::vector<MitigationAction>{MitigationAction::Resume});

  auto unparsed = select_actions(UnparsedResponse{"???"}, rules);
  CHECK(unparsed.severity == Severity::High);
  CHECK(unparsed.actions == std::vector<MitigationAction>{
                                MitigationAction::SafeStop,
                                MitigationAction::Report});
}

TEST_CASE("select_actions: rule conflicts resolve by the documented tie rule") {
  const auto rules = default_rulebook();
  auto sev_rank = [](Severity s) {
    return s == Severity::High ? 2 : s == Severity::Medium ? 1 : 0;
  };
  // exhaustive pairwise oracle over all rule pairs
  for (const auto& a : rules) {
    for (const auto& b : rules) {
      if (a.keyword == b.keyword) continue;
      const std::string desc = a.keyword + " and " + b.keyword + " visible";
      const KeywordRule* expected = nullptr;
      if (a.keyword.size() != b.keyword.size()) {
        expected = a.keyword.size() > b.keyword.size() ? &a : &b;
      } else if (sev_rank(a.severity) != sev_rank(b.severity)) {
        expected = sev_rank(a.severity) > sev_rank(b.severity) ? &a : &b;
      } else {
        expected = a.keyword < b.keyword ? &a : &b;
      }
      auto selection = select_actions(parsed(AnomalyClass::Conflict, desc), rules);
      REQUIRE(selection.rule != nullptr);
      CHECK(selection.rule->keyword == expected->keyword);
      CHECK(selection.severity == expected->severity);
    }
  }
  // same-length pair with different severities: fight (high) beats spill
  auto s = select_actions(
      parsed(AnomalyClass::Conflict, "a spill during a fight"), rules);
  REQUIRE(s.rule != nullptr);
  CHECK(s.rule->keyword == "fight");
}

TEST_CASE("select_actions never returns an empty action list") {
  const auto rules = default_rulebook();
  std::mt19937 rng(17);
  const char* words[] = {"firearm", "spill",  "nothing", "???",
                         "fighting", "boxes", "smoke",   ""};
  std::uniform_int_distribution<int> word(0, 7);
  std::uniform_int_distribution<int> kind(0, 3);
  for (int iter = 0; iter < 2000; ++iter) {
    std::string desc = std::string(words[word(rng)]) + " " + words[word(rng)];
    ParseResult input;
    switch (kind(rng)) {
      case 0: input = parsed(AnomalyClass::Hazardous, desc); break;
      case 1: input = parsed(AnomalyClass::Conflict, desc); break;
      case 2: input = parsed(AnomalyClass::Clear, desc); break;
      default: input = UnparsedResponse{desc}; break;
    }
    CHECK_FALSE(select_actions(input, rules).actions.empty());
  }
}

TEST_CASE("rulebook validation enforces the severity/class pairing") {
  std::vector<KeywordRule> bad{{"smoke", AnomalyClass::Conflict, Severity::High,
                                {MitigationAction::Warn}}};
  CHECK_THROWS_AS(validate_rulebook(bad), DomainError);

  std::vector<KeywordRule> empty_actions{
      {"smoke", AnomalyClass::Hazardous, Severity::High, {}}};
  CHECK_THROWS_AS(validate_rulebook(empty_actions), DomainError);

  std::vector<KeywordRule> clear_rule{
      {"smoke", AnomalyClass::Clear, Severity::Low, {MitigationAction::Resume}}};
  CHECK_THROWS_AS(validate_rulebook(clear_rule), DomainError);
}

TEST_CASE("risk_of_loss lookups") {
  RiskTable table = RiskTable::defaults();
  CHECK(risk_of_loss("firearm", table) == 0.9);
  CHECK(risk_of_loss("spill", table) == 0.3);
  CHECK_THROWS_AS(risk_of_loss("meteor", table), UnknownHazardClass);
}

TEST_CASE("risk table rejects probabilities outside [0,1] at load") {
  CHECK_THROWS_AS(cli::parse_risk_table("{\"fire\": 1.5}", "inline"),
                  ScenarioInvalid);
  CHECK_THROWS_AS(cli::parse_risk_table("{\"fire\": -0.1}", "inline"),
                  ScenarioInvalid);
}

TEST_CASE("default risk values survive a config round trip") {
  const RiskTable table = RiskTable::defaults();
  std::ostringstream json_text;
  json_text << "{";
  bool first = true;
  for (const auto& [cls, p] : table.entries) {
    if (!first) json_text << ",";
    json_text << "\"" << cls << "\": " << p;
    first = false;
  }
  json_text << "}";
  RiskTable reloaded = cli::parse_risk_table(json_text.str(), "inline");
  CHECK(reloaded.entries == table.entries);
}

TEST_CASE("epsilon: disabled tracker stays at zero") {
  EpsilonTracker tracker;
  tracker.enabled = false;
  DetectionOutcome outcome(record_with("firearm detected"), 1.0, true, 0.0);
  for (int i = 0; i < 50; ++i) CHECK(update_epsilon(tracker, outcome) == 0.0);
  CHECK(tracker.epsilon == 0.0);
}

TEST_CASE("epsilon: one perfect outcome moves 0 -> 0.1") {
  EpsilonTracker tracker;
  tracker.latency_target_s = 26.0;
  DetectionOutcome outcome(record_with("firearm detected"), 1.0, true, 0.0);
  CHECK(update_epsilon(tracker, outcome) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("epsilon: perfect streak follows the closed form 1 - 0.9^n") {
  EpsilonTracker tracker;
  tracker.latency_target_s = 26.0;
  DetectionOutcome outcome(record_with("firearm detected"), 1.0, true, 0.0);
  double prev = 0.0;
  for (int n = 1; n <= 200; ++n) {
    const double eps = update_epsilon(tracker, outcome);
    const double oracle = 1.0 - std::pow(0.9, n);
    CHECK(std::abs(eps - oracle) < 1e-9);
    CHECK(eps >= prev);  // monotone climb
    prev = eps;
  }
}

TEST_CASE("property: epsilon stays in [0,1] under arbitrary outcomes") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> latency(0.0, 60.0);
  std::bernoulli_distribution coin(0.5);
  EpsilonTracker tracker;
  tracker.latency_target_s = 26.0;
  for (int i = 0; i < 10000; ++i) {
    DetectionOutcome outcome(record_with("x"), 1.0, coin(rng), latency(rng));
    const double eps = update_epsilon(tracker, outcome);
    CHECK(eps >= 0.0);
    CHECK(eps <= 1.0);
  }
}

TEST_CASE("property: a correct outcome never lands below an incorrect one") {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> latency(0.0, 40.0);
  std::uniform_real_distribution<double> start(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double eps0 = start(rng);
    const double lat = latency(rng);
    EpsilonTracker a;
    a.epsilon = eps0;
    a.latency_target_s = 26.0;
    EpsilonTracker b = a;
    DetectionOutcome good(record_with("x"), 1.0, true, lat);
    DetectionOutcome bad(record_with("x"), 1.0, false, lat);
    CHECK(update_epsilon(a, good) >= update_epsilon(b, bad));
  }
}

TEST_CASE("execute_action: notify fans out to call and email") {
  MitigationSinks sinks;
  AnomalyRecord record = record_with("firearm detected", 4);
  ActionLogEntry entry =
      execute_action(MitigationAction::Notify, sinks, record, 3.5);
  CHECK(entry.deliveries == std::vector<DeliveryKind>{
                                DeliveryKind::SimulatedCall,
                                DeliveryKind::SimulatedEmail});
  CHECK(sinks.call_log().size() == 1);
  CHECK(sinks.email_log().size() == 1);
  CHECK(entry.triggered_by_frame == 4);
  CHECK(entry.at_s == 3.5);
}

TEST_CASE("execute_action: siren latches on, resume clears it") {
  MitigationSinks sinks;
  AnomalyRecord record = record_with("firearm detected");
  execute_action(MitigationAction::Siren, sinks, record, 1.0);
  CHECK(sinks.siren_on());
  execute_action(MitigationAction::Resume, sinks, record, 2.0);
  CHECK_FALSE(sinks.siren_on());
}

TEST_CASE("execute_action: timestamps are non-decreasing across a burst") {
  MitigationSinks sinks;
  AnomalyRecord record = record_with("fight detected");
  const MitigationAction burst[5] = {
      MitigationAction::Warn, MitigationAction::Alert, MitigationAction::Report,
      MitigationAction::Siren, MitigationAction::Notify};
  double prev = -1.0;
  for (int i = 0; i < 5; ++i) {
    ActionLogEntry entry = execute_action(burst[i], sinks, record, 10.0 + i);
    CHECK(entry.at_s >= prev);
    prev = entry.at_s;
  }
}
