#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vigil/errors.hpp"

namespace vigil::nav {

struct Cell {
  int x = 0;
  int y = 0;

  bool operator==(const Cell&) const = default;
  auto operator<=>(const Cell&) const = default;
};

struct AnomalyZone {
  std::vector<Cell> cells;
  std::string hazard_class;
};

// Occupancy grid; the default cell size makes a 2.5m x 14m hallway a 10x56
// grid.
class GridWorld {
 public:
  GridWorld(int width, int height, double cell_size_m = 0.25);

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size_m() const { return cell_size_m_; }

  bool in_bounds(Cell c) const {
    return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_;
  }
  bool occupied(Cell c) const { return occupied_[index(c)] != 0; }
  void set_occupied(Cell c, bool value = true) {
    occupied_[index(c)] = value ? 1 : 0;
  }

 private:
  std::size_t index(Cell c) const;

  int width_ = 0;
  int height_ = 0;
  double cell_size_m_ = 0.25;
  std::vector<std::uint8_t> occupied_;
};

// Shortest 4-connected path including both endpoints. Expansion prefers x
// moves over y moves, so equal-length alternatives resolve deterministically.
// Throws NoPathError when start and goal are disconnected, and
// std::invalid_argument when either endpoint is occupied or out of bounds.
std::vector<Cell> plan_path(const GridWorld& world, Cell start, Cell goal);

struct ReplanResult {
  bool blocked = false;
  std::vector<Cell> path;  // empty when blocked
};

// New path from current_path.front() to current_path.back() treating zone
// cells as occupied. When the existing path never touches the zone it is
// returned unchanged. Blocked is a value, not an error.
ReplanResult replan_on_anomaly(const GridWorld& world,
                               const std::vector<Cell>& current_path,
                               const AnomalyZone& zone);

struct NavMetrics {
  double trajectory_m = 0.0;
  double time_s = 0.0;
  int anomalies_detected = 0;
  int sudden_stops = 0;
  bool reached_goal = false;
  bool safe_stopped = false;
};

// One detection event: fires at trigger_time_s (or when the robot stands on
// trigger_cell) and reveals its zone.
struct NavEvent {
  int frame_id = 0;
  std::optional<Cell> trigger_cell;
  double trigger_time_s = -1.0;
  AnomalyZone zone;
  bool anomalous = false;
};

struct NavScenario {
  Cell start;
  Cell goal;
  std::vector<NavEvent> events;
};

// Steps a robot at one cell per tick (1 s per tick). Anomaly zones block
// physically whether or not they were detected. Detection ahead of contact
// replans without stopping; undetected contact costs a sudden stop, a 2-tick
// wait, and a sidestep before replanning.
class NavStepper {
 public:
  NavStepper(const GridWorld& world, Cell start, Cell goal);

  void add_physical_zone(const AnomalyZone& zone);

  // Proactive detection: occupies the zone for planning and replans from the
  // current cell. Returns false when no route remains (caller safe-stops).
  bool discover_zone(const AnomalyZone& zone);

  void step();

  Cell position() const { return position_; }
  bool at_goal() const { return position_ == goal_; }
  bool safe_stopped() const { return safe_stopped_; }
  double time_s() const { return time_s_; }
  double trajectory_m() const { return moved_cells_ * world_.cell_size_m(); }
  int sudden_stops() const { return sudden_stops_; }

 private:
  enum class Phase { Cruise, Waiting, Sidestep };

  bool cell_blocked_for_planning(Cell c) const;
  int undiscovered_zone_at(Cell c) const;  // index or -1
  bool replan_from(Cell from);
  void mark_discovered(std::size_t zone_index);
  void record_speed(int speed);

  GridWorld world_;        // static walls
  GridWorld planning_;     // walls + discovered zones
  Cell goal_;
  Cell position_;
  std::vector<Cell> path_;
  std::size_t path_index_ = 0;

  std::vector<AnomalyZone> zones_;
  std::vector<bool> discovered_;

  Phase phase_ = Phase::Cruise;
  int wait_ticks_left_ = 0;
  int pending_zone_ = -1;

  double time_s_ = 0.0;
  int moved_cells_ = 0;
  int sudden_stops_ = 0;
  int prev_speed_ = 0;
  bool safe_stopped_ = false;
};

// Runs a full navigation scenario. With anomaly detection enabled, events
// fire proactively and count toward anomalies_detected; without it events are
// ignored and zones are only found by contact.
NavMetrics simulate_run(const GridWorld& world, const NavScenario& scenario,
                        bool ad_enabled);

}  // namespace vigil::nav
