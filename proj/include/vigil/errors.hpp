#pragma once

#include <stdexcept>
#include <string>

namespace vigil {

// Construction-time contract violations (bad shapes, bad lookups).
struct ShapeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnknownTag : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnknownTopic : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnknownHazardClass : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InsufficientSamples : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Pipeline lifecycle: a producer node was started before the classifier
// signalled ready.
struct InitOrderViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// Runtime failures.
struct ScenarioInvalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LogSchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoPathError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RemoteTimeout : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RemoteProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleBudget : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SinkUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vigil
