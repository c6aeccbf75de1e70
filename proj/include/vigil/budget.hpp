#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vigil/errors.hpp"
#include "vigil/latency.hpp"

namespace vigil::budget {

enum class Stage { Camera = 0, Blip = 1, Heatmap = 2, Llm = 3 };

std::string_view to_string(Stage s);
std::optional<Stage> stage_from_string(std::string_view s);

struct StageProfile {
  Stage stage = Stage::Camera;
  double min_s = 0.0;   // > 0
  double mean_s = 0.0;  // >= min_s
};

struct BudgetAllocation {
  std::map<Stage, double> timeout_per_stage;
  double t_max_s = 0.0;
  std::map<Stage, double> lambda;  // slack-sharing weights actually used
};

// Per-stage timeout = min + slack * weight, slack = t_max - sum(min), weights
// proportional to lambda (default: the stage means). The timeouts sum to
// t_max exactly. Throws InfeasibleBudget when sum(min) > t_max, DomainError
// on malformed profiles (duplicate stages, min <= 0, mean < min).
BudgetAllocation allocate(std::span<const StageProfile> profiles, double t_max_s,
                          const std::map<Stage, double>* lambda = nullptr);

// Overrun model: stage latency = min + Exponential(scale = mean), so
// P(T > timeout) = exp(-(timeout - min)/mean), 1 when timeout < min.
double overrun_probability(const StageProfile& profile, double timeout_s);

// Worst-stage overrun probability of an allocation; the quantity allocate()
// minimizes (proportional slack equalizes the per-stage exponents).
double expected_overrun_score(std::span<const StageProfile> profiles,
                              const std::map<Stage, double>& timeouts);

struct ComputeFit {
  double k = 0.0;
  double residual_norm = 0.0;
};

// Least-squares k for T = k/C over (compute, latency) samples:
// k = sum(T/C) / sum(1/C^2). InsufficientSamples when fewer than 2 samples;
// DomainError when any C <= 0.
ComputeFit fit_compute_model(std::span<const std::pair<double, double>> samples);

enum class VerdictKind { WithinBudget, StageOverrun, TotalOverrun };

struct Verdict {
  VerdictKind kind = VerdictKind::WithinBudget;
  std::optional<Stage> stage;  // first overrunning stage
};

// Flags the first stage (camera, blip, heatmap, llm order) exceeding its
// timeout, then a total overrun against t_max.
Verdict enforce_budget(const StageLatencyTrace& trace,
                       const BudgetAllocation& alloc);

}  // namespace vigil::budget
