#include "vigil/navsim.hpp"

#include <algorithm>
#include <deque>

namespace vigil::nav {

GridWorld::GridWorld(int width, int height, double cell_size_m)
    : width_(width), height_(height), cell_size_m_(cell_size_m) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("grid world dimensions must be positive");
  }
  if (!(cell_size_m > 0.0)) {
    throw std::invalid_argument("cell size must be positive");
  }
  occupied_.assign(static_cast<std::size_t>(width) * height, 0);
}

std::size_t GridWorld::index(Cell c) const {
  if (!in_bounds(c)) throw std::out_of_range("cell outside the grid");
  return static_cast<std::size_t>(c.y) * width_ + c.x;
}

namespace {

// x moves expand before y moves; equal-length paths resolve the same way
// every run.
constexpr int kDx[4] = {1, -1, 0, 0};
constexpr int kDy[4] = {0, 0, 1, -1};

}  // namespace

std::vector<Cell> plan_path(const GridWorld& world, Cell start, Cell goal) {
  if (!world.in_bounds(start) || !world.in_bounds(goal)) {
    throw std::invalid_argument("path endpoints must be in bounds");
  }
  if (world.occupied(start) || world.occupied(goal)) {
    throw std::invalid_argument("path endpoints must be unoccupied");
  }
  if (start == goal) return {start};

  const int w = world.width();
  const int h = world.height();
  auto flat = [w](Cell c) { return static_cast<std::size_t>(c.y) * w + c.x; };
  std::vector<int> parent(static_cast<std::size_t>(w) * h, -2);  // -2 unseen

  std::deque<Cell> queue{start};
  parent[flat(start)] = -1;
  while (!queue.empty()) {
    Cell cur = queue.front();
    queue.pop_front();
    if (cur == goal) break;
    for (int k = 0; k < 4; ++k) {
      Cell next{cur.x + kDx[k], cur.y + kDy[k]};
      if (!world.in_bounds(next) || world.occupied(next)) continue;
      if (parent[flat(next)] != -2) continue;
      parent[flat(next)] = static_cast<int>(flat(cur));
      queue.push_back(next);
    }
  }

  if (parent[flat(goal)] == -2) {
    throw NoPathError("goal unreachable from start");
  }
  std::vector<Cell> path;
  for (int at = static_cast<int>(flat(goal)); at != -1;
       at = parent[static_cast<std::size_t>(at)]) {
    path.push_back(Cell{at % w, at / w});
  }
  std::reverse(path.begin(), path.end());
  return path;
}

ReplanResult replan_on_anomaly(const GridWorld& world,
                               const std::vector<Cell>& current_path,
                               const AnomalyZone& zone) {
  if (current_path.empty()) {
    throw std::invalid_argument("current path must be non-empty");
  }
  auto in_zone = [&zone](Cell c) {
    return std::find(zone.cells.begin(), zone.cells.end(), c) !=
           zone.cells.end();
  };
  if (in_zone(current_path.front())) {
    throw std::invalid_argument("robot cell must lie outside the zone");
  }
  const bool touches =
      std::any_of(current_path.begin(), current_path.end(), in_zone);
  if (!touches) return {false, current_path};

  GridWorld augmented = world;
  for (Cell c : zone.cells) {
    if (augmented.in_bounds(c)) augmented.set_occupied(c);
  }
  try {
    return {false,
            plan_path(augmented, current_path.front(), current_path.back())};
  } catch (const NoPathError&) {
    return {true, {}};
  }
}

// ---------------------------------------------------------------------------

NavStepper::NavStepper(const GridWorld& world, Cell start, Cell goal)
    : world_(world), planning_(world), goal_(goal), position_(start) {
  path_ = plan_path(planning_, start, goal);
}

void NavStepper::add_physical_zone(const AnomalyZone& zone) {
  if (zone.cells.empty()) return;
  zones_.push_back(zone);
  discovered_.push_back(false);
}

int NavStepper::undiscovered_zone_at(Cell c) const {
  for (std::size_t i = 0; i < zones_.size(); ++i) {
    if (discovered_[i]) continue;
    if (std::find(zones_[i].cells.begin(), zones_[i].cells.end(), c) !=
        zones_[i].cells.end()) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

void NavStepper::mark_discovered(std::size_t zone_index) {
  discovered_[zone_index] = true;
  for (Cell c : zones_[zone_index].cells) {
    if (planning_.in_bounds(c)) planning_.set_occupied(c);
  }
}

bool NavStepper::replan_from(Cell from) {
  try {
    path_ = plan_path(planning_, from, goal_);
    path_index_ = 0;
    return true;
  } catch (const NoPathError&) {
    safe_stopped_ = true;
    return false;
  }
}

bool NavStepper::discover_zone(const AnomalyZone& zone) {
  if (zone.cells.empty()) return true;
  if (std::find(zone.cells.begin(), zone.cells.end(), position_) !=
      zone.cells.end()) {
    safe_stopped_ = true;
    return false;
  }

  std::vector<Cell> remaining(path_.begin() + static_cast<long>(path_index_),
                              path_.end());
  if (remaining.empty()) remaining.push_back(position_);
  ReplanResult result = replan_on_anomaly(planning_, remaining, zone);

  // Register the zone (match an already-known physical zone if present).
  bool known = false;
  for (std::size_t i = 0; i < zones_.size(); ++i) {
    if (zones_[i].cells == zone.cells) {
      if (!discovered_[i]) mark_discovered(i);
      known = true;
      break;
    }
  }
  if (!known) {
    zones_.push_back(zone);
    discovered_.push_back(false);
    mark_discovered(zones_.size() - 1);
  }

  if (result.blocked) {
    safe_stopped_ = true;
    return false;
  }
  path_ = std::move(result.path);
  path_index_ = 0;
  return true;
}

void NavStepper::record_speed(int speed) {
  if (prev_speed_ > 0 && speed == 0 && !at_goal()) ++sudden_stops_;
  prev_speed_ = speed;
}

void NavStepper::step() {
  if (at_goal() || safe_stopped_) return;
  time_s_ += 1.0;

  if (phase_ == Phase::Waiting) {
    record_speed(0);
    if (--wait_ticks_left_ <= 0) {
      mark_discovered(static_cast<std::size_t>(pending_zone_));
      pending_zone_ = -1;
      phase_ = Phase::Sidestep;
    }
    return;
  }

  if (phase_ == Phase::Sidestep) {
    Cell chosen;
    bool found = false;
    for (int k = 0; k < 4; ++k) {
      Cell next{position_.x + kDx[k], position_.y + kDy[k]};
      if (!planning_.in_bounds(next) || planning_.occupied(next)) continue;
      if (undiscovered_zone_at(next) >= 0) continue;
      chosen = next;
      found = true;
      break;
    }
    if (!found) {
      safe_stopped_ = true;
      record_speed(0);
      return;
    }
    position_ = chosen;
    ++moved_cells_;
    record_speed(1);
    phase_ = Phase::Cruise;
    replan_from(position_);
    return;
  }

  // Cruise
  if (path_index_ + 1 >= path_.size()) {
    // stale path; try to recover
    if (!replan_from(position_)) return;
    if (path_index_ + 1 >= path_.size()) return;
  }
  Cell next = path_[path_index_ + 1];
  const int zone_hit = undiscovered_zone_at(next);
  if (zone_hit >= 0) {
    // contact with an unseen obstruction: stop, wait, then sidestep
    record_speed(0);
    phase_ = Phase::Waiting;
    wait_ticks_left_ = 2;
    pending_zone_ = zone_hit;
    return;
  }
  if (planning_.occupied(next)) {
    record_speed(0);
    replan_from(position_);
    return;
  }
  position_ = next;
  ++path_index_;
  ++moved_cells_;
  record_speed(1);
}

NavMetrics simulate_run(const GridWorld& world, const NavScenario& scenario,
                        bool ad_enabled) {
  NavStepper stepper(world, scenario.start, scenario.goal);
  for (const auto& event : scenario.events) {
    stepper.add_physical_zone(event.zone);
  }

  std::vector<bool> fired(scenario.events.size(), false);
  NavMetrics metrics;

  constexpr int kMaxTicks = 100000;
  for (int tick = 0; tick <= kMaxTicks; ++tick) {
    for (std::size_t i = 0; i < scenario.events.size(); ++i) {
      if (fired[i]) continue;
      const NavEvent& event = scenario.events[i];
      const bool due_time =
          event.trigger_time_s >= 0.0 && stepper.time_s() >= event.trigger_time_s;
      const bool due_cell =
          event.trigger_cell && stepper.position() == *event.trigger_cell;
      if (!due_time && !due_cell) continue;
      fired[i] = true;
      if (ad_enabled && event.anomalous) {
        ++metrics.anomalies_detected;
        stepper.discover_zone(event.zone);
      }
    }
    if (stepper.at_goal() || stepper.safe_stopped()) break;
    if (tick == kMaxTicks) {
      throw ScenarioInvalid("navigation run did not terminate");
    }
    stepper.step();
  }

  metrics.trajectory_m = stepper.trajectory_m();
  metrics.time_s = stepper.time_s();
  metrics.sudden_stops = stepper.sudden_stops();
  metrics.reached_goal = stepper.at_goal();
  metrics.safe_stopped = stepper.safe_stopped();
  return metrics;
}

}  // namespace vigil::nav
