#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "ecoroute/energy.hpp"
#include "ecoroute/random.hpp"

using namespace ecoroute;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("packet airtime from size and bandwidth") {
  EnergyModel m;
  CHECK_THAT(packet_airtime(512, m), WithinAbs(0.002048, 1e-15));
  CHECK_THAT(packet_airtime(250, m), WithinAbs(0.001, 1e-15));
  CHECK(packet_airtime(0, m) == 0.0);
}

TEST_CASE("per-packet transmit and receive energy at default NIC constants") {
  EnergyModel m;
  CHECK_THAT(tx_energy(512, m), WithinAbs(2.8672e-4, 1e-12));
  CHECK_THAT(rx_energy(512, m), WithinAbs(2.4576e-4, 1e-12));
  CHECK(tx_energy(0, m) == 0.0);
  CHECK(rx_energy(0, m) == 0.0);
  CHECK_THAT(tx_energy(1024, m), WithinRel(2.0 * tx_energy(512, m), 1e-12));
}

TEST_CASE("overhearing costs exactly a reception, at any size") {
  EnergyModel m;
  RandomStream rng(11, "sizes");
  for (int i = 0; i < 100; ++i) {
    const double size = rng.uniform(0.0, 4096.0);
    CHECK(overhear_energy(size, m) == rx_energy(size, m));
  }
}

TEST_CASE("tx/rx energy ratio equals the current ratio for every size") {
  EnergyModel m;
  RandomStream rng(12, "sizes");
  for (int i = 0; i < 100; ++i) {
    const double size = rng.uniform(1.0, 4096.0);
    CHECK_THAT(tx_energy(size, m) / rx_energy(size, m), WithinRel(0.280 / 0.240, 1e-12));
  }
}

TEST_CASE("battery draws floor at empty and stay cause-tagged") {
  Battery b(1.0);
  CHECK(b.draw(0.3, DrawCause::Tx) == 0.3);
  CHECK_THAT(b.residual(), WithinAbs(0.7, 1e-15));
  CHECK(b.draw(0.0, DrawCause::Rx) == 0.0);
  CHECK_THAT(b.residual(), WithinAbs(0.7, 1e-15));
  // drawing past empty takes only what is left; the node is then dead
  Battery low(1.0);
  low.draw(0.9, DrawCause::Tx);
  const double took = low.draw(0.3, DrawCause::Rx);
  CHECK_THAT(took, WithinAbs(0.1, 1e-12));
  CHECK(low.residual() == 0.0);
  CHECK(low.depleted());
}

TEST_CASE("energy conservation: initial - residual equals the tagged draws") {
  Battery b(1200.0);
  RandomStream rng(4, "draws");
  for (int i = 0; i < 100000; ++i) {
    b.draw(rng.uniform(0.0, 1e-3), static_cast<DrawCause>(rng.uniform_int(0, 2)));
  }
  CHECK_THAT(b.initial() - b.residual(), WithinRel(b.drawn_total(), 1e-9));
}

TEST_CASE("drain rate blends old estimate and fresh sample") {
  Battery b(1200.0);
  DrainRateEstimator est(0.5, 1.0, b.residual());
  est.preset_rate(2.0);
  b.draw(4.0, DrawCause::Tx);  // one window consuming 4 J over 1 s
  est.sample(b);
  CHECK_THAT(est.rate(), WithinAbs(3.0, 1e-12));
}

TEST_CASE("alpha one freezes the estimate") {
  Battery b(1200.0);
  DrainRateEstimator est(1.0, 1.0, b.residual());
  est.preset_rate(7.5);
  for (int i = 0; i < 5; ++i) {
    b.draw(3.0, DrawCause::Rx);
    est.sample(b);
    CHECK(est.rate() == 7.5);
  }
}

TEST_CASE("constant samples contract the error geometrically") {
  // independent closed form: after k updates the gap to the sample value
  // shrinks by alpha each step
  for (double alpha : {0.0, 0.3, 0.5, 1.0}) {
    Battery b(1200.0);
    DrainRateEstimator est(alpha, 1.0, b.residual());
    est.preset_rate(2.0);
    const double s = 4.0;
    double expected_gap = std::abs(2.0 - s);
    for (int k = 1; k <= 5; ++k) {
      b.draw(s, DrawCause::Tx);
      est.sample(b);
      expected_gap *= alpha;
      const double gap = std::abs(est.rate() - s);
      if (expected_gap == 0.0) {
        CHECK(gap == 0.0);
      } else {
        CHECK_THAT(gap, WithinRel(expected_gap, 1e-12));
      }
    }
  }
}

TEST_CASE("ewma converges monotonically to a constant sample") {
  Battery b(1200.0);
  DrainRateEstimator est(0.3, 1.0, b.residual());
  est.preset_rate(10.0);
  double prev_gap = std::abs(est.rate() - 0.5);
  for (int k = 0; k < 30; ++k) {
    b.draw(0.5, DrawCause::Tx);
    est.sample(b);
    const double gap = std::abs(est.rate() - 0.5);
    CHECK(gap <= prev_gap);
    prev_gap = gap;
  }
  CHECK_THAT(est.rate(), WithinAbs(0.5, 1e-4));
}

TEST_CASE("remaining lifetime is residual over drain rate") {
  Battery b(1200.0);
  DrainRateEstimator est(0.3, 1.0, b.residual());
  est.preset_rate(2.0);
  CHECK_THAT(remaining_lifetime(b, est), WithinAbs(600.0, 1e-12));
}

TEST_CASE("no drain means unbounded lifetime, empty battery means none") {
  Battery b(1200.0);
  DrainRateEstimator zero(0.3, 1.0, b.residual());
  CHECK(remaining_lifetime(b, zero) == std::numeric_limits<double>::infinity());
  CHECK(remaining_lifetime(b, zero) > 1e18);  // passes any finite threshold

  Battery empty(1.0);
  empty.draw(1.0, DrawCause::Tx);
  DrainRateEstimator est(0.3, 1.0, 1.0);
  est.preset_rate(2.0);
  CHECK(remaining_lifetime(empty, est) == 0.0);
  DrainRateEstimator idle(0.3, 1.0, 1.0);
  CHECK(remaining_lifetime(empty, idle) == 0.0);  // dead node, even with no drain
}

TEST_CASE("remaining lifetime never increases under draws at a fixed rate") {
  Battery b(100.0);
  DrainRateEstimator est(0.3, 1.0, b.residual());
  est.preset_rate(1.5);
  RandomStream rng(9, "draws");
  double prev = remaining_lifetime(b, est);
  for (int i = 0; i < 1000; ++i) {
    b.draw(rng.uniform(0.0, 0.5), DrawCause::Tx);
    const double rlt = remaining_lifetime(b, est);
    CHECK(rlt <= prev);
    prev = rlt;
  }
}
