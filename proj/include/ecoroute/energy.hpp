#pragma once

#include <algorithm>
#include <limits>

namespace ecoroute {

/// Radio NIC constants. The default card draws 240 mA receiving and
/// 280 mA transmitting at 0.5 V over a 2 Mbps channel; per-packet energy
/// is current * voltage * airtime.
struct EnergyModel {
  double tx_current = 0.280;       // amperes
  double rx_current = 0.240;       // amperes
  double voltage = 0.5;            // volts
  double bandwidth = 2'000'000.0;  // bits per second
};

inline double packet_airtime(double size_bytes, const EnergyModel& m) {
  return size_bytes * 8.0 / m.bandwidth;
}

inline double tx_energy(double size_bytes, const EnergyModel& m) {
  return m.tx_current * m.voltage * packet_airtime(size_bytes, m);
}

inline double rx_energy(double size_bytes, const EnergyModel& m) {
  return m.rx_current * m.voltage * packet_airtime(size_bytes, m);
}

/// Overhearing a transmission addressed to someone else costs the same
/// as receiving it.
inline double overhear_energy(double size_bytes, const EnergyModel& m) {
  return rx_energy(size_bytes, m);
}

enum class DrawCause { Tx = 0, Rx = 1, Overhear = 2 };

/// Per-node battery with a cause-tagged ledger. Depletion is a modeled
/// outcome: draws floor at zero and the node is dead afterwards.
/// Consumption is accumulated directly (draws are tiny next to the 1200 J
/// store; subtracting them from the residual would shed their low bits).
class Battery {
 public:
  Battery() : Battery(1200.0) {}
  explicit Battery(double initial_joules) : initial_(initial_joules) {}

  /// Returns the amount actually drawn (less than `amount` when the
  /// battery empties mid-draw), keeping initial - residual == sum of draws.
  double draw(double amount, DrawCause cause) {
    const double take = std::min(amount, residual());
    consumed_ += take;
    drawn_[static_cast<int>(cause)] += take;
    return take;
  }

  double initial() const { return initial_; }
  double residual() const { return std::max(0.0, initial_ - consumed_); }
  bool depleted() const { return residual() <= 0.0; }

  double drawn(DrawCause cause) const { return drawn_[static_cast<int>(cause)]; }
  double drawn_total() const { return drawn_[0] + drawn_[1] + drawn_[2]; }

  /// Scenario/test initialization hook for heterogeneous start energies.
  void set_residual(double joules) { consumed_ = initial_ - std::min(joules, initial_); }

 private:
  double initial_;
  double consumed_ = 0.0;
  double drawn_[3] = {0.0, 0.0, 0.0};
};

/// Exponentially weighted moving average of the battery drain rate.
/// Each sample is the energy consumed over the last window divided by
/// the window length; new_rate = alpha * old_rate + (1 - alpha) * sample.
class DrainRateEstimator {
 public:
  DrainRateEstimator() = default;
  DrainRateEstimator(double alpha, double sample_interval, double initial_residual)
      : alpha_(alpha), interval_(sample_interval), window_start_(initial_residual) {}

  void sample(const Battery& battery) {
    const double consumed = window_start_ - battery.residual();
    const double s = std::max(0.0, consumed / interval_);
    rate_ = alpha_ * rate_ + (1.0 - alpha_) * s;
    window_start_ = battery.residual();
  }

  double rate() const { return rate_; }
  double alpha() const { return alpha_; }
  double sample_interval() const { return interval_; }

  /// Seeds the estimate directly (tests, warm starts).
  void preset_rate(double joules_per_second) { rate_ = joules_per_second; }

 private:
  double alpha_ = 0.3;
  double interval_ = 1.0;
  double window_start_ = 1200.0;
  double rate_ = 0.0;
};

/// Seconds until predicted depletion: residual energy / drain rate.
/// A node that has drawn nothing (rate 0) has unbounded lifetime and
/// passes any finite threshold; an empty battery has none.
inline double remaining_lifetime(const Battery& battery, const DrainRateEstimator& est) {
  if (battery.residual() <= 0.0) return 0.0;
  if (est.rate() <= 0.0) return std::numeric_limits<double>::infinity();
  return battery.residual() / est.rate();
}

}  // namespace ecoroute
