#include <doctest.h>

#include <cmath>
#include <random>

#include "vigil/budget.hpp"

using namespace vigil;
using namespace vigil::budget;

namespace {

std::vector<StageProfile> four_stages(double m0, double m1, double m2, double m3,
                                      double e0, double e1, double e2, double e3) {
  return {{Stage::Camera, m0, e0},
          {Stage::Blip, m1, e1},
          {Stage::Heatmap, m2, e2},
          {Stage::Llm, m3, e3}};
}

double sum_timeouts(const BudgetAllocation& alloc) {
  double sum = 0.0;
  for (const auto& [stage, t] : alloc.timeout_per_stage) sum += t;
  return sum;
}

// Exhaustive 0.1 s-grid search over feasible allocations (sum == t_max,
// timeout >= min), minimizing the same worst-stage overrun score.
double grid_search_best_score(const std::vector<StageProfile>& profiles,
                              double t_max_s) {
  const double grid = 0.1;
  std::array<long, 4> min_units{};
  long total_units = std::lround(t_max_s / grid);
  long min_sum = 0;
  for (int i = 0; i < 4; ++i) {
    min_units[static_cast<std::size_t>(i)] =
        std::lround(profiles[static_cast<std::size_t>(i)].min_s / grid);
    min_sum += min_units[static_cast<std::size_t>(i)];
  }
  const long slack = total_units - min_sum;
  REQUIRE(slack >= 0);

  double best = 2.0;
  for (long a = 0; a <= slack; ++a) {
    for (long b = 0; a + b <= slack; ++b) {
      for (long c = 0; a + b + c <= slack; ++c) {
        const long d = slack - a - b - c;
        const long units[4] = {min_units[0] + a, min_units[1] + b,
                               min_units[2] + c, min_units[3] + d};
        std::map<Stage, double> timeouts;
        for (int i = 0; i < 4; ++i) {
          timeouts[profiles[static_cast<std::size_t>(i)].stage] =
              units[i] * grid;
        }
        best = std::min(best, expected_overrun_score(profiles, timeouts));
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("allocate: a single stage absorbs the whole budget") {
  std::vector<StageProfile> profile{{Stage::Llm, 1.0, 2.0}};
  BudgetAllocation alloc = allocate(profile, 5.0);
  CHECK(alloc.timeout_per_stage.at(Stage::Llm) == 5.0);
}

TEST_CASE("allocate: infeasible when minimums exceed the budget") {
  auto profiles = four_stages(2.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0);
  CHECK_THROWS_AS(allocate(profiles, 4.0), InfeasibleBudget);
}

TEST_CASE("allocate: malformed profiles are rejected") {
  CHECK_THROWS_AS(allocate(std::vector<StageProfile>{}, 1.0), DomainError);
  CHECK_THROWS_AS(
      allocate(std::vector<StageProfile>{{Stage::Llm, 0.0, 1.0}}, 1.0),
      DomainError);
  CHECK_THROWS_AS(
      allocate(std::vector<StageProfile>{{Stage::Llm, 2.0, 1.0}}, 5.0),
      DomainError);
  CHECK_THROWS_AS(allocate(std::vector<StageProfile>{{Stage::Llm, 1.0, 1.0},
                                                     {Stage::Llm, 1.0, 1.0}},
                           5.0),
                  DomainError);
}

TEST_CASE("property: feasible allocations hit t_max exactly with stage floors") {
  std::mt19937 rng(53);
  std::uniform_real_distribution<double> min_dist(0.05, 2.0);
  std::uniform_real_distribution<double> extra(0.0, 3.0);
  std::uniform_real_distribution<double> slack_dist(0.0, 5.0);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<StageProfile> profiles;
    double sum_min = 0.0;
    for (int s = 0; s < 4; ++s) {
      const double mn = min_dist(rng);
      profiles.push_back({static_cast<Stage>(s), mn, mn + extra(rng)});
      sum_min += mn;
    }
    const double t_max = sum_min + slack_dist(rng);
    BudgetAllocation alloc = allocate(profiles, t_max);
    CHECK(sum_timeouts(alloc) == t_max);  // exact, not approximate
    for (const auto& p : profiles) {
      CHECK(alloc.timeout_per_stage.at(p.stage) >= p.min_s);
    }
  }
}

TEST_CASE("allocate: never worse than the exhaustive 0.1 s grid search") {
  std::mt19937 rng(59);
  std::uniform_int_distribution<int> min_units(1, 8);    // 0.1 .. 0.8 s
  std::uniform_int_distribution<int> mean_units(1, 20);  // above min
  std::uniform_int_distribution<int> slack_units(0, 18);
  for (int iter = 0; iter < 25; ++iter) {
    std::vector<StageProfile> profiles;
    double sum_min = 0.0;
    for (int s = 0; s < 4; ++s) {
      const double mn = 0.1 * min_units(rng);
      const double mean = mn + 0.1 * mean_units(rng);
      profiles.push_back({static_cast<Stage>(s), mn, mean});
      sum_min += mn;
    }
    const double t_max = sum_min + 0.1 * slack_units(rng);
    BudgetAllocation alloc = allocate(profiles, t_max);
    const double mine = expected_overrun_score(profiles, alloc.timeout_per_stage);
    const double oracle = grid_search_best_score(profiles, t_max);
    CHECK(mine <= oracle + 1e-12);
  }
}

TEST_CASE("fit: exact inverse data recovers k with zero residual") {
  std::vector<std::pair<double, double>> samples{{1.0, 10.0}, {2.0, 5.0}};
  ComputeFit fit = fit_compute_model(samples);
  CHECK(fit.k == 10.0);
  CHECK(fit.residual_norm == 0.0);
}

TEST_CASE("fit: duplicated sample pair") {
  std::vector<std::pair<double, double>> samples{{4.0, 2.5}, {4.0, 2.5}};
  ComputeFit fit = fit_compute_model(samples);
  CHECK(fit.k == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("fit: recovers k = 12 from seeded noisy data within 5%") {
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> compute(0.5, 8.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<std::pair<double, double>> samples;
  for (int i = 0; i < 200; ++i) {
    const double c = compute(rng);
    samples.emplace_back(c, 12.0 / c + noise(rng));
  }
  ComputeFit fit = fit_compute_model(samples);
  CHECK(std::abs(fit.k - 12.0) / 12.0 < 0.05);
}

TEST_CASE("fit: degenerate same-compute samples still yield the least-squares k") {
  // all C identical with conflicting T: no error, k averages, residual > 0
  std::vector<std::pair<double, double>> samples{{2.0, 4.0}, {2.0, 6.0}};
  ComputeFit fit = fit_compute_model(samples);
  CHECK(fit.k == doctest::Approx(10.0));  // T_hat = 5 at C=2
  CHECK(fit.residual_norm > 0.0);
}

TEST_CASE("fit: input validation") {
  CHECK_THROWS_AS(
      fit_compute_model(std::vector<std::pair<double, double>>{{1.0, 1.0}}),
      InsufficientSamples);
  CHECK_THROWS_AS(fit_compute_model(std::vector<std::pair<double, double>>{
                      {0.0, 1.0}, {1.0, 1.0}}),
                  DomainError);
}

TEST_CASE("property: the fit is sample-order invariant and scales like 1/C") {
  std::mt19937 rng(67);
  std::uniform_real_distribution<double> compute(0.5, 6.0);
  std::vector<std::pair<double, double>> samples;
  for (int i = 0; i < 50; ++i) {
    const double c = compute(rng);
    samples.emplace_back(c, 7.5 / c);
  }
  ComputeFit base = fit_compute_model(samples);
  CHECK(base.k == doctest::Approx(7.5).epsilon(1e-12));

  auto shuffled = samples;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(fit_compute_model(shuffled).k == doctest::Approx(base.k).epsilon(1e-12));

  // under the fitted model, doubling compute halves the predicted latency
  for (const auto& [c, t] : samples) {
    CHECK(base.k / (2.0 * c) == doctest::Approx(0.5 * (base.k / c)).epsilon(1e-12));
  }
}

TEST_CASE("enforce_budget: verdicts") {
  auto profiles = four_stages(0.5, 1.0, 0.5, 2.0, 1.0, 2.0, 1.0, 4.0);
  BudgetAllocation alloc = allocate(profiles, 10.0);

  StageLatencyTrace under = StageLatencyTrace::make(0.5, 1.0, 0.5, 2.0);
  CHECK(enforce_budget(under, alloc).kind == VerdictKind::WithinBudget);

  StageLatencyTrace llm_over = StageLatencyTrace::make(
      0.5, 1.0, 0.5, alloc.timeout_per_stage.at(Stage::Llm) + 0.001);
  Verdict v = enforce_budget(llm_over, alloc);
  CHECK(v.kind == VerdictKind::StageOverrun);
  CHECK(v.stage == Stage::Llm);
}

TEST_CASE("enforce_budget: random traces match a direct comparison oracle") {
  std::mt19937 rng(71);
  std::uniform_real_distribution<double> stage_time(0.0, 4.0);
  auto profiles = four_stages(0.2, 0.4, 0.2, 1.0, 0.5, 1.0, 0.5, 2.0);
  BudgetAllocation alloc = allocate(profiles, 9.0);

  for (int iter = 0; iter < 1000; ++iter) {
    StageLatencyTrace t = StageLatencyTrace::make(
        stage_time(rng), stage_time(rng), stage_time(rng), stage_time(rng));
    Verdict v = enforce_budget(t, alloc);

    const std::pair<Stage, double> stage_times[] = {
        {Stage::Camera, t.t_camera_s},
        {Stage::Blip, t.t_blip_s},
        {Stage::Heatmap, t.t_heatmap_s},
        {Stage::Llm, t.t_llm_s}};
    std::optional<Stage> first_over;
    for (const auto& [stage, time] : stage_times) {
      if (time > alloc.timeout_per_stage.at(stage)) {
        first_over = stage;
        break;
      }
    }
    if (first_over) {
      CHECK(v.kind == VerdictKind::StageOverrun);
      CHECK(v.stage == first_over);
    } else if (t.t_total_s > alloc.t_max_s) {
      CHECK(v.kind == VerdictKind::TotalOverrun);
    } else {
      CHECK(v.kind == VerdictKind::WithinBudget);
    }
  }
}

TEST_CASE("property: full budgets cannot totally overrun without a stage overrun") {
  std::mt19937 rng(73);
  std::uniform_real_distribution<double> min_dist(0.1, 1.0);
  std::uniform_real_distribution<double> extra(0.0, 2.0);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<StageProfile> profiles;
    double sum_min = 0.0;
    for (int s = 0; s < 4; ++s) {
      const double mn = min_dist(rng);
      profiles.push_back({static_cast<Stage>(s), mn, mn + extra(rng)});
      sum_min += mn;
    }
    BudgetAllocation alloc = allocate(profiles, sum_min + extra(rng));
    std::uniform_real_distribution<double> stage_time(0.0, 2.0);
    StageLatencyTrace t = StageLatencyTrace::make(
        stage_time(rng), stage_time(rng), stage_time(rng), stage_time(rng));
    Verdict v = enforce_budget(t, alloc);
    // with sum(timeouts) == t_max, a total overrun implies a stage overrun
    CHECK(v.kind != VerdictKind::TotalOverrun);
  }
}
