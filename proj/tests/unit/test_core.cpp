#include <doctest.h>

#include <random>

#include "vigil/core.hpp"

using namespace vigil;

namespace {

RobotState state_with_speed(double vx, double vy) {
  return RobotState({0.0, 0.0, 0.0}, {vx, vy, 0.0});
}

WorldFrame simple_frame(int id, double at = 0.0) {
  return WorldFrame(id, at, {"hallway"}, {Grid(2, 2)}, TruthLabel::clear());
}

}  // namespace

TEST_CASE("check_constraints: all predicates true") {
  ConstraintSet omega;
  omega.constraints.push_back(
      make_bound_constraint("speed", "speed", CmpOp::Le, 2.0));
  omega.constraints.push_back(make_bound_constraint("x", "q0", CmpOp::Ge, -1.0));

  auto verdict = check_constraints(state_with_speed(1.0, 0.0), omega);
  CHECK(verdict.satisfied);
  CHECK(verdict.violated_ids.empty());
}

TEST_CASE("check_constraints: speed bound failure names the predicate") {
  ConstraintSet omega;
  omega.constraints.push_back(
      make_bound_constraint("speed", "speed", CmpOp::Le, 2.0));

  auto verdict = check_constraints(state_with_speed(3.0, 0.0), omega);
  CHECK_FALSE(verdict.satisfied);
  REQUIRE(verdict.violated_ids.size() == 1);
  CHECK(verdict.violated_ids[0] == "speed");
}

TEST_CASE("check_constraints: violators listed in declaration order") {
  // three predicates, two fail; the truth table below is the oracle
  ConstraintSet omega;
  omega.constraints.push_back(
      make_bound_constraint("a", "speed", CmpOp::Le, 0.5));  // fails
  omega.constraints.push_back(make_bound_constraint("b", "q0", CmpOp::Ge, -1.0));  // holds
  omega.constraints.push_back(make_bound_constraint("c", "v0", CmpOp::Lt, 1.0));  // fails

  RobotState s = state_with_speed(1.0, 0.0);
  bool expect[3] = {s.speed() <= 0.5, s.q()[0] >= -1.0, s.v()[0] < 1.0};
  auto verdict = check_constraints(s, omega);

  std::vector<std::string> expected_violations;
  const char* ids[3] = {"a", "b", "c"};
  for (int i = 0; i < 3; ++i) {
    if (!expect[i]) expected_violations.push_back(ids[i]);
  }
  CHECK(verdict.violated_ids == expected_violations);
  CHECK(expected_violations == std::vector<std::string>{"a", "c"});
}

TEST_CASE("check_constraints: unevaluable predicates count as violated") {
  ConstraintSet omega;
  omega.constraints.push_back(
      make_bound_constraint("bad_field", "warp", CmpOp::Le, 1.0));
  omega.constraints.push_back(
      make_bound_constraint("bad_index", "q9", CmpOp::Le, 1.0));

  auto verdict = check_constraints(state_with_speed(0.0, 0.0), omega);
  CHECK_FALSE(verdict.satisfied);
  CHECK(verdict.violated_ids ==
        std::vector<std::string>{"bad_field", "bad_index"});
  CHECK(verdict.diagnostics.size() == 2);
}

TEST_CASE("check_constraints: empty set rejected") {
  CHECK_THROWS_AS(check_constraints(state_with_speed(0, 0), ConstraintSet{}),
                  std::invalid_argument);
}

TEST_CASE("property: verdict equals conjunction of individual predicates") {
  std::mt19937 rng(20260809);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  std::uniform_int_distribution<int> op_pick(0, 3);
  std::uniform_int_distribution<int> field_pick(0, 2);
  const char* fields[3] = {"speed", "q1", "v0"};

  for (int iter = 0; iter < 1000; ++iter) {
    RobotState s({val(rng), val(rng)}, {val(rng), val(rng)});
    ConstraintSet omega;
    const int n = 1 + (iter % 5);
    for (int i = 0; i < n; ++i) {
      omega.constraints.push_back(make_bound_constraint(
          "c" + std::to_string(i), fields[field_pick(rng)],
          static_cast<CmpOp>(op_pick(rng)), val(rng)));
    }
    auto verdict = check_constraints(s, omega);
    bool conjunction = true;
    for (const auto& c : omega.constraints) conjunction = conjunction && c.eval(s);
    CHECK(verdict.satisfied == conjunction);
  }
}

TEST_CASE("snapshot is a deep copy") {
  std::vector<double> q{1.0, 2.0, 0.5};
  std::vector<double> v{0.25, 0.0, 0.0};
  RobotState state(q, v, {{"crate", {3.0, 4.0, 0.0}}});
  WorldFrame frame = simple_frame(7, 12.5);

  StateSnapshot snap = StateSnapshot::capture(state, frame);
  const std::string before = snap.serialize();

  q[0] = 99.0;  // the snapshot copied, not aliased
  v[1] = -1.0;
  CHECK(snap.serialize() == before);
  CHECK(snap.frame_id() == 7);
  CHECK(snap.captured_at_s() == 12.5);
}

TEST_CASE("snapshots of identical inputs serialize byte-for-byte equal") {
  RobotState a({1.0, 2.0}, {0.1, 0.2});
  RobotState b({1.0, 2.0}, {0.1, 0.2});
  WorldFrame frame = simple_frame(3, 4.0);
  CHECK(StateSnapshot::capture(a, frame).serialize() ==
        StateSnapshot::capture(b, frame).serialize());
}

TEST_CASE("trajectory monotonicity is rejected at construction") {
  using Sample = Trajectory::Sample;
  CHECK_THROWS_AS(Trajectory({Sample{1.0, {0, 0}, {0, 0}}}),
                  std::invalid_argument);  // must start at 0
  CHECK_THROWS_AS(Trajectory({Sample{0.0, {0, 0}, {0, 0}},
                              Sample{0.0, {1, 0}, {0, 0}}}),
                  std::invalid_argument);  // equal times
  CHECK_THROWS_AS(Trajectory({Sample{0.0, {0, 0}, {0, 0}},
                              Sample{2.0, {1, 0}, {0, 0}},
                              Sample{1.0, {2, 0}, {0, 0}}}),
                  std::invalid_argument);  // decreasing
  Trajectory ok({Sample{0.0, {0, 0}, {0, 0}}, Sample{1.5, {1, 0}, {0, 0}}});
  CHECK(ok.duration_s() == 1.5);
}

TEST_CASE("robot state dimension rules") {
  CHECK_THROWS_AS(RobotState({1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(RobotState({1.0, 2.0}, {1.0}), std::invalid_argument);
  RobotState ok({1.0, 2.0}, {3.0, 4.0});
  CHECK(ok.speed() == doctest::Approx(5.0));
}

TEST_CASE("world frame rejects mismatched feature maps") {
  CHECK_THROWS_AS(WorldFrame(1, 0.0, {}, {Grid(2, 2), Grid(3, 2)},
                             TruthLabel::clear()),
                  ShapeMismatch);
}
