#pragma once

#include "ecoroute/random.hpp"
#include "ecoroute/types.hpp"

namespace ecoroute {

struct Terrain {
  double width = 1000.0;   // meters
  double height = 1000.0;  // meters
};

struct MobilityParams {
  double min_speed = 0.0;   // m/s
  double max_speed = 10.0;  // m/s
  double pause_time = 20.0; // seconds at each waypoint
  double tick = 0.25;       // link reevaluation interval, seconds
};

/// Random waypoint movement: pick a uniform destination in the terrain,
/// travel toward it at a uniform speed, pause, repeat. Positions are
/// interpolated lazily from the piecewise-linear trajectory.
class WaypointState {
 public:
  enum class Phase { Moving, Paused };

  // Effectively-zero speeds would strand a node mid-segment forever, so
  // draws below this are rejected and redrawn.
  static constexpr double kMinUsableSpeed = 1e-6;

  void init(Vec2 position, double now) {
    phase_ = Phase::Paused;
    anchor_ = position;
    dest_ = position;
    anchor_time_ = now;
    pause_until_ = now;
    speed_ = 0.0;
  }

  /// Draws the next destination and speed. Returns the travel time, or a
  /// negative value when the node cannot move (max speed ~ 0), in which
  /// case it stays paused where it is.
  double choose_waypoint(double now, const Terrain& terrain, const MobilityParams& p,
                         RandomStream& rng) {
    if (p.max_speed <= kMinUsableSpeed) return -1.0;
    Vec2 dest;
    do {
      dest = Vec2{rng.uniform(0.0, terrain.width), rng.uniform(0.0, terrain.height)};
    } while (distance(anchor_, dest) == 0.0);
    double speed;
    do {
      speed = rng.uniform(p.min_speed, p.max_speed);
    } while (speed < kMinUsableSpeed);
    dest_ = dest;
    speed_ = speed;
    anchor_time_ = now;
    phase_ = Phase::Moving;
    return distance(anchor_, dest_) / speed_;
  }

  /// Starts a fully specified leg (replays, fixtures).
  void begin_segment(Vec2 from, Vec2 dest, double speed, double depart_time) {
    anchor_ = from;
    dest_ = dest;
    speed_ = speed;
    anchor_time_ = depart_time;
    phase_ = Phase::Moving;
  }

  void arrive(double now, double pause_time) {
    anchor_ = dest_;
    anchor_time_ = now;
    phase_ = Phase::Paused;
    pause_until_ = now + pause_time;
    speed_ = 0.0;
  }

  Vec2 position_at(double t) const {
    if (phase_ == Phase::Paused) return anchor_;
    const double total = distance(anchor_, dest_);
    const double travelled = speed_ * (t - anchor_time_);
    if (travelled >= total) return dest_;
    const double f = travelled / total;
    return anchor_ + f * (dest_ - anchor_);
  }

  Phase phase() const { return phase_; }
  Vec2 destination() const { return dest_; }
  double speed() const { return speed_; }
  double pause_until() const { return pause_until_; }

 private:
  Phase phase_ = Phase::Paused;
  Vec2 anchor_{};
  Vec2 dest_{};
  double anchor_time_ = 0.0;
  double speed_ = 0.0;
  double pause_until_ = 0.0;
};

}  // namespace ecoroute
