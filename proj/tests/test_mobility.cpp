#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "ecoroute/mobility.hpp"
#include "ecoroute/random.hpp"

using namespace ecoroute;
using Catch::Matchers::WithinAbs;

TEST_CASE("position interpolates linearly toward the destination") {
  WaypointState s;
  s.init(Vec2{0, 0}, 0.0);
  s.begin_segment(Vec2{0, 0}, Vec2{30, 40}, 5.0, 0.0);
  // 50 m segment, 25 m covered after five seconds
  const Vec2 at5 = s.position_at(5.0);
  CHECK_THAT(at5.x, WithinAbs(15.0, 1e-12));
  CHECK_THAT(at5.y, WithinAbs(20.0, 1e-12));
  // departure time gives the start position; at/after arrival it clamps
  CHECK(s.position_at(0.0).x == 0.0);
  CHECK(s.position_at(0.0).y == 0.0);
  CHECK_THAT(s.position_at(10.0).x, WithinAbs(30.0, 1e-12));
  CHECK_THAT(s.position_at(25.0).y, WithinAbs(40.0, 1e-12));
}

TEST_CASE("travel time equals distance over speed on drawn legs") {
  Terrain t{100, 100};
  MobilityParams p;
  p.min_speed = 1.0;
  RandomStream rng(1, "m");
  WaypointState s;
  s.init(Vec2{50, 50}, 0.0);
  for (int i = 0; i < 200; ++i) {
    const Vec2 from = s.position_at(0.0);
    const double travel = s.choose_waypoint(0.0, t, p, rng);
    REQUIRE(travel > 0.0);
    CHECK_THAT(travel, WithinAbs(distance(from, s.destination()) / s.speed(), 1e-12));
    s.arrive(travel, 0.0);
    s.init(Vec2{50, 50}, 0.0);
  }
}

TEST_CASE("zero max speed pins the node forever") {
  WaypointState s;
  s.init(Vec2{12, 34}, 0.0);
  Terrain t{1000, 1000};
  MobilityParams p;
  p.min_speed = 0.0;
  p.max_speed = 0.0;
  RandomStream rng(3, "m");
  CHECK(s.choose_waypoint(0.0, t, p, rng) < 0.0);
  CHECK(s.phase() == WaypointState::Phase::Paused);
  CHECK(s.position_at(1e6).x == 12.0);
}

TEST_CASE("speed draws avoid the zero-speed trap but stay in range") {
  Terrain t{1000, 1000};
  MobilityParams p;  // [0, 10] m/s
  RandomStream rng(4, "m");
  WaypointState s;
  s.init(Vec2{500, 500}, 0.0);
  for (int i = 0; i < 5000; ++i) {
    const double travel = s.choose_waypoint(0.0, t, p, rng);
    REQUIRE(travel > 0.0);
    REQUIRE(s.speed() >= WaypointState::kMinUsableSpeed);
    REQUIRE(s.speed() <= 10.0);
  }
}

TEST_CASE("pauses last exactly the configured time") {
  WaypointState s;
  s.init(Vec2{0, 0}, 0.0);
  Terrain t{1000, 1000};
  MobilityParams p;
  RandomStream rng(5, "m");
  const double travel = s.choose_waypoint(0.0, t, p, rng);
  s.arrive(travel, 20.0);
  CHECK(s.phase() == WaypointState::Phase::Paused);
  CHECK_THAT(s.pause_until(), WithinAbs(travel + 20.0, 1e-12));
  CHECK(s.position_at(travel + 10.0).x == s.destination().x);
}

TEST_CASE("positions never leave the terrain along whole trajectories") {
  Terrain t{200, 300};
  MobilityParams p;
  RandomStream rng(6, "m");
  WaypointState s;
  s.init(Vec2{100, 150}, 0.0);
  double now = 0.0;
  for (int leg = 0; leg < 500; ++leg) {
    const double travel = s.choose_waypoint(now, t, p, rng);
    REQUIRE(travel > 0.0);
    for (int j = 0; j <= 10; ++j) {
      const Vec2 pos = s.position_at(now + travel * j / 10.0);
      REQUIRE(pos.x >= 0.0);
      REQUIRE(pos.x <= t.width);
      REQUIRE(pos.y >= 0.0);
      REQUIRE(pos.y <= t.height);
    }
    now += travel;
    s.arrive(now, 2.0);
    now += 2.0;
  }
}

TEST_CASE("waypoint destinations are uniform over the rectangle") {
  // chi-square over a 4x4 grid, 10^4 draws, df=15; 37.70 is the 0.1% cut
  Terrain t{1000, 500};
  MobilityParams p;
  RandomStream rng(7, "m");
  WaypointState s;
  s.init(Vec2{500, 250}, 0.0);
  const int kCells = 4;
  std::vector<int> counts(kCells * kCells, 0);
  const int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    s.init(Vec2{500, 250}, 0.0);
    s.choose_waypoint(0.0, t, p, rng);
    const Vec2 d = s.destination();
    const int cx = std::min(kCells - 1, static_cast<int>(d.x / (t.width / kCells)));
    const int cy = std::min(kCells - 1, static_cast<int>(d.y / (t.height / kCells)));
    ++counts[cy * kCells + cx];
  }
  const double expected = static_cast<double>(kDraws) / (kCells * kCells);
  double chi2 = 0.0;
  for (int c : counts) {
    const double d = c - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < 37.70);
}
