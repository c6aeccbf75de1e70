#include <doctest.h>

#include <deque>
#include <random>

#include "vigil/navsim.hpp"

using namespace vigil;
using namespace vigil::nav;

namespace {

// Distance-map BFS, written independently of the planner, lengths only.
int bfs_oracle_moves(const GridWorld& world, Cell start, Cell goal) {
  std::vector<int> dist(
      static_cast<std::size_t>(world.width()) * world.height(), -1);
  auto at = [&world](Cell c) {
    return static_cast<std::size_t>(c.y) * world.width() + c.x;
  };
  std::deque<Cell> frontier{start};
  dist[at(start)] = 0;
  while (!frontier.empty()) {
    Cell cur = frontier.front();
    frontier.pop_front();
    const Cell neighbors[4] = {{cur.x, cur.y + 1},
                               {cur.x, cur.y - 1},
                               {cur.x + 1, cur.y},
                               {cur.x - 1, cur.y}};
    for (Cell n : neighbors) {
      if (!world.in_bounds(n) || world.occupied(n) || dist[at(n)] != -1) continue;
      dist[at(n)] = dist[at(cur)] + 1;
      frontier.push_back(n);
    }
  }
  return dist[at(goal)];
}

GridWorld hallway_10x56() { return GridWorld(10, 56, 0.25); }

bool path_is_connected(const std::vector<Cell>& path) {
  for (std::size_t i = 1; i < path.size(); ++i) {
    const int dx = std::abs(path[i].x - path[i - 1].x);
    const int dy = std::abs(path[i].y - path[i - 1].y);
    if (dx + dy != 1) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("plan_path: straight corridor run") {
  GridWorld world(6, 12, 0.25);
  auto path = plan_path(world, {2, 0}, {2, 10});
  REQUIRE(path.size() == 11);  // 10 moves = 2.5 m at 0.25 m per cell
  CHECK(path.front() == Cell{2, 0});
  CHECK(path.back() == Cell{2, 10});
  CHECK(path_is_connected(path));
  CHECK((path.size() - 1) * world.cell_size_m() == 2.5);
}

TEST_CASE("plan_path: routes through the only gap in a wall") {
  GridWorld world(8, 8, 0.25);
  for (int x = 0; x < 8; ++x) {
    if (x != 6) world.set_occupied({x, 4});
  }
  auto path = plan_path(world, {1, 0}, {1, 7});
  CHECK(path_is_connected(path));
  bool through_gap = false;
  for (Cell c : path) {
    if (c.y == 4) {
      CHECK(c.x == 6);
      through_gap = true;
    }
  }
  CHECK(through_gap);
  CHECK(static_cast<int>(path.size()) - 1 == bfs_oracle_moves(world, {1, 0}, {1, 7}));
}

TEST_CASE("plan_path: enclosed goal has no path") {
  GridWorld world(8, 8, 0.25);
  world.set_occupied({4, 3});
  world.set_occupied({4, 5});
  world.set_occupied({3, 4});
  world.set_occupied({5, 4});
  CHECK_THROWS_AS(plan_path(world, {0, 0}, {4, 4}), NoPathError);
}

TEST_CASE("plan_path: endpoint validation") {
  GridWorld world(4, 4, 0.25);
  world.set_occupied({1, 1});
  CHECK_THROWS_AS(plan_path(world, {1, 1}, {3, 3}), std::invalid_argument);
  CHECK_THROWS_AS(plan_path(world, {0, 0}, {9, 9}), std::invalid_argument);
}

TEST_CASE("property: planner length equals the BFS oracle on random worlds") {
  std::mt19937 rng(79);
  std::uniform_int_distribution<int> dim(4, 14);
  std::uniform_real_distribution<double> density(0.0, 0.35);
  int planned = 0;
  for (int iter = 0; iter < 600; ++iter) {
    GridWorld world(dim(rng), dim(rng), 0.25);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const double p = density(rng);
    for (int y = 0; y < world.height(); ++y) {
      for (int x = 0; x < world.width(); ++x) {
        if (coin(rng) < p) world.set_occupied({x, y});
      }
    }
    Cell start{0, 0};
    Cell goal{world.width() - 1, world.height() - 1};
    if (world.occupied(start) || world.occupied(goal)) continue;

    const int oracle = bfs_oracle_moves(world, start, goal);
    if (oracle < 0) {
      CHECK_THROWS_AS(plan_path(world, start, goal), NoPathError);
      continue;
    }
    auto path = plan_path(world, start, goal);
    CHECK(path_is_connected(path));
    CHECK(static_cast<int>(path.size()) - 1 == oracle);
    ++planned;
  }
  CHECK(planned >= 500);
}

TEST_CASE("replan: zone off the path keeps the remainder verbatim") {
  GridWorld world = hallway_10x56();
  auto path = plan_path(world, {5, 0}, {5, 55});
  AnomalyZone zone{{{0, 20}, {1, 20}}, "spill"};
  ReplanResult result = replan_on_anomaly(world, path, zone);
  CHECK_FALSE(result.blocked);
  CHECK(result.path == path);
}

TEST_CASE("replan: zone across the only passage blocks") {
  GridWorld world(3, 9, 0.25);
  auto path = plan_path(world, {1, 0}, {1, 8});
  AnomalyZone zone{{{0, 4}, {1, 4}, {2, 4}}, "obstruction"};
  ReplanResult result = replan_on_anomaly(world, path, zone);
  CHECK(result.blocked);
  CHECK(result.path.empty());
}

TEST_CASE("replan: the robot's own cell must lie outside the zone") {
  GridWorld world(4, 4, 0.25);
  auto path = plan_path(world, {0, 0}, {3, 3});
  AnomalyZone zone{{{0, 0}}, "spill"};
  CHECK_THROWS_AS(replan_on_anomaly(world, path, zone), std::invalid_argument);
}

TEST_CASE("property: replanned paths dodge the zone at no less than shortest cost") {
  std::mt19937 rng(83);
  std::uniform_int_distribution<int> x(0, 9);
  std::uniform_int_distribution<int> y(5, 50);
  int replanned = 0;
  for (int iter = 0; iter < 500; ++iter) {
    GridWorld world = hallway_10x56();
    auto path = plan_path(world, {5, 0}, {5, 55});

    AnomalyZone zone;
    const int zy = y(rng);
    const int x0 = x(rng);
    for (int dx = 0; dx < 4; ++dx) {
      if (x0 + dx < 10) zone.cells.push_back({x0 + dx, zy});
    }
    if (zone.cells.empty()) continue;
    zone.hazard_class = "obstruction";

    ReplanResult result = replan_on_anomaly(world, path, zone);
    REQUIRE_FALSE(result.blocked);  // a 10-wide hallway always has a gap here
    for (Cell c : result.path) {
      for (Cell z : zone.cells) CHECK(c != z);
    }
    CHECK(result.path.size() >= path.size());
    CHECK(path_is_connected(result.path));
    ++replanned;
  }
  CHECK(replanned >= 450);
}

TEST_CASE("simulate_run: empty hallway end to end") {
  GridWorld world = hallway_10x56();
  NavScenario scenario{{5, 0}, {5, 55}, {}};
  NavMetrics m = simulate_run(world, scenario, true);
  CHECK(m.reached_goal);
  CHECK(m.trajectory_m == 55 * 0.25);  // the 14 m hallway class
  CHECK(m.time_s == 55.0);
  CHECK(m.sudden_stops == 0);
  CHECK(m.anomalies_detected == 0);
}

TEST_CASE("simulate_run: detection ahead of contact avoids the stop") {
  GridWorld world = hallway_10x56();
  NavEvent event;
  event.frame_id = 1;
  event.trigger_time_s = 10.0;
  event.anomalous = true;
  for (int x = 3; x <= 7; ++x) event.zone.cells.push_back({x, 30});
  event.zone.hazard_class = "obstruction";
  NavScenario scenario{{5, 0}, {5, 55}, {event}};

  NavMetrics with_ad = simulate_run(world, scenario, true);
  NavMetrics without_ad = simulate_run(world, scenario, false);

  CHECK(with_ad.anomalies_detected == 1);
  CHECK(with_ad.sudden_stops == 0);
  CHECK(with_ad.reached_goal);

  CHECK(without_ad.anomalies_detected == 0);
  CHECK(without_ad.sudden_stops == 1);
  CHECK(without_ad.reached_goal);
  CHECK(with_ad.time_s <= without_ad.time_s);
}

TEST_CASE("simulate_run: three anomalous events count as three detections") {
  GridWorld world = hallway_10x56();
  NavScenario scenario{{5, 0}, {5, 55}, {}};
  const int rows[3] = {15, 30, 45};
  for (int i = 0; i < 3; ++i) {
    NavEvent event;
    event.frame_id = i + 1;
    event.trigger_time_s = rows[i] - 10.0;
    event.anomalous = true;
    for (int x = 3; x <= 7; ++x) event.zone.cells.push_back({x, rows[i]});
    scenario.events.push_back(event);
  }
  NavMetrics m = simulate_run(world, scenario, true);
  CHECK(m.anomalies_detected == 3);
  CHECK(m.reached_goal);
}

TEST_CASE("simulate_run: a cell trigger fires when the robot stands on it") {
  GridWorld world = hallway_10x56();
  NavEvent event;
  event.frame_id = 9;
  event.trigger_cell = Cell{5, 12};
  event.anomalous = true;
  for (int x = 2; x <= 7; ++x) event.zone.cells.push_back({x, 20});
  NavScenario scenario{{5, 0}, {5, 55}, {event}};
  NavMetrics m = simulate_run(world, scenario, true);
  CHECK(m.anomalies_detected == 1);
  CHECK(m.sudden_stops == 0);
  CHECK(m.reached_goal);
}

TEST_CASE("simulate_run: blocked replan ends in a safe stop") {
  GridWorld world(3, 12, 0.25);
  NavEvent event;
  event.frame_id = 1;
  event.trigger_time_s = 2.0;
  event.anomalous = true;
  event.zone.cells = {{0, 6}, {1, 6}, {2, 6}};
  NavScenario scenario{{1, 0}, {1, 11}, {event}};
  NavMetrics m = simulate_run(world, scenario, true);
  CHECK(m.safe_stopped);
  CHECK_FALSE(m.reached_goal);
}

TEST_CASE("determinism: identical runs yield identical metrics") {
  GridWorld world = hallway_10x56();
  NavEvent event;
  event.trigger_time_s = 8.0;
  event.anomalous = true;
  for (int x = 4; x <= 6; ++x) event.zone.cells.push_back({x, 25});
  NavScenario scenario{{5, 0}, {5, 55}, {event}};
  NavMetrics a = simulate_run(world, scenario, true);
  NavMetrics b = simulate_run(world, scenario, true);
  CHECK(a.trajectory_m == b.trajectory_m);
  CHECK(a.time_s == b.time_s);
  CHECK(a.sudden_stops == b.sudden_stops);
  CHECK(a.anomalies_detected == b.anomalies_detected);
}

TEST_CASE("property: detection dominates contact on the obstruction family") {
  std::mt19937 rng(89);
  std::uniform_int_distribution<int> zone_count(1, 3);
  std::uniform_int_distribution<int> gap_side(0, 1);
  std::uniform_int_distribution<int> width(4, 6);
  int faster_or_equal = 0;
  const int kVariants = 20;
  for (int variant = 0; variant < kVariants; ++variant) {
    GridWorld world = hallway_10x56();
    NavScenario scenario{{5, 0}, {5, 55}, {}};
    const int zones = zone_count(rng);
    for (int z = 0; z < zones; ++z) {
      const int row = 12 + z * 14;
      NavEvent event;
      event.frame_id = z + 1;
      event.trigger_time_s = row - 9.0;
      event.anomalous = true;
      const int w = width(rng);
      const int x0 = gap_side(rng) == 0 ? 2 : 9 - w - 1;
      for (int dx = 0; dx <= w; ++dx) event.zone.cells.push_back({x0 + dx, row});
      event.zone.hazard_class = "obstruction";
      scenario.events.push_back(event);
    }
    NavMetrics on = simulate_run(world, scenario, true);
    NavMetrics off = simulate_run(world, scenario, false);
    CHECK(on.sudden_stops <= off.sudden_stops);
    if (on.time_s <= off.time_s) ++faster_or_equal;
  }
  CHECK(faster_or_equal >= (kVariants * 8) / 10);
}
