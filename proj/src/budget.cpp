#include "vigil/budget.hpp"

#include <algorithm>
#include <cmath>

namespace vigil::budget {

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Camera: return "camera";
    case Stage::Blip: return "blip";
    case Stage::Heatmap: return "heatmap";
    case Stage::Llm: return "llm";
  }
  return "camera";
}

std::optional<Stage> stage_from_string(std::string_view s) {
  if (s == "camera") return Stage::Camera;
  if (s == "blip") return Stage::Blip;
  if (s == "heatmap") return Stage::Heatmap;
  if (s == "llm") return Stage::Llm;
  return std::nullopt;
}

namespace {

std::vector<StageProfile> sorted_profiles(std::span<const StageProfile> profiles) {
  if (profiles.empty()) throw DomainError("at least one stage profile required");
  std::vector<StageProfile> sorted(profiles.begin(), profiles.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return static_cast<int>(a.stage) < static_cast<int>(b.stage);
  });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i].stage == sorted[i - 1].stage) {
      throw DomainError("duplicate stage profile");
    }
    if (!(sorted[i].min_s > 0.0)) throw DomainError("stage min must be > 0");
    if (sorted[i].mean_s < sorted[i].min_s) {
      throw DomainError("stage mean must be >= min");
    }
  }
  return sorted;
}

}  // namespace

BudgetAllocation allocate(std::span<const StageProfile> profiles, double t_max_s,
                          const std::map<Stage, double>* lambda) {
  const std::vector<StageProfile> stages = sorted_profiles(profiles);

  double sum_min = 0.0;
  for (const auto& p : stages) sum_min += p.min_s;
  if (sum_min > t_max_s) {
    throw InfeasibleBudget("stage minimums exceed the latency budget");
  }
  const double slack = t_max_s - sum_min;

  std::vector<double> weights(stages.size());
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    double w = stages[i].mean_s;
    if (lambda != nullptr) {
      auto it = lambda->find(stages[i].stage);
      if (it == lambda->end() || !(it->second >= 0.0)) {
        throw DomainError("lambda weight missing or negative for a stage");
      }
      w = it->second;
    }
    weights[i] = w;
    weight_sum += w;
  }
  if (!(weight_sum > 0.0)) throw DomainError("lambda weights sum to zero");

  std::vector<double> timeouts(stages.size());
  std::size_t heaviest = 0;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    timeouts[i] = stages[i].min_s + slack * (weights[i] / weight_sum);
    if (weights[i] > weights[heaviest]) heaviest = i;
  }

  // Pin the sum to t_max exactly by absorbing float dust into the stage with
  // the largest slack share.
  for (int pass = 0; pass < 8; ++pass) {
    double sum = 0.0;
    for (double t : timeouts) sum += t;
    const double diff = t_max_s - sum;
    if (diff == 0.0) break;
    timeouts[heaviest] += diff;
  }

  BudgetAllocation alloc;
  alloc.t_max_s = t_max_s;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    alloc.timeout_per_stage[stages[i].stage] = timeouts[i];
    alloc.lambda[stages[i].stage] = weights[i];
  }
  return alloc;
}

double overrun_probability(const StageProfile& profile, double timeout_s) {
  if (timeout_s < profile.min_s) return 1.0;
  if (!(profile.mean_s > 0.0)) return 0.0;
  return std::exp(-(timeout_s - profile.min_s) / profile.mean_s);
}

double expected_overrun_score(std::span<const StageProfile> profiles,
                              const std::map<Stage, double>& timeouts) {
  double worst = 0.0;
  for (const auto& p : profiles) {
    auto it = timeouts.find(p.stage);
    if (it == timeouts.end()) {
      throw DomainError("timeout missing for profiled stage");
    }
    worst = std::max(worst, overrun_probability(p, it->second));
  }
  return worst;
}

ComputeFit fit_compute_model(
    std::span<const std::pair<double, double>> samples) {
  if (samples.size() < 2) {
    throw InsufficientSamples("compute model fit needs at least 2 samples");
  }
  double num = 0.0;
  double den = 0.0;
  for (const auto& [compute, latency] : samples) {
    if (!(compute > 0.0)) throw DomainError("compute values must be positive");
    num += latency / compute;
    den += 1.0 / (compute * compute);
  }
  ComputeFit fit;
  fit.k = num / den;
  double sq = 0.0;
  for (const auto& [compute, latency] : samples) {
    const double r = latency - fit.k / compute;
    sq += r * r;
  }
  fit.residual_norm = std::sqrt(sq);
  return fit;
}

Verdict enforce_budget(const StageLatencyTrace& trace,
                       const BudgetAllocation& alloc) {
  const std::pair<Stage, double> stage_times[] = {
      {Stage::Camera, trace.t_camera_s},
      {Stage::Blip, trace.t_blip_s},
      {Stage::Heatmap, trace.t_heatmap_s},
      {Stage::Llm, trace.t_llm_s},
  };
  for (const auto& [stage, t] : stage_times) {
    auto it = alloc.timeout_per_stage.find(stage);
    if (it != alloc.timeout_per_stage.end() && t > it->second) {
      return {VerdictKind::StageOverrun, stage};
    }
  }
  if (trace.t_total_s > alloc.t_max_s) {
    return {VerdictKind::TotalOverrun, std::nullopt};
  }
  return {VerdictKind::WithinBudget, std::nullopt};
}

}  // namespace vigil::budget
