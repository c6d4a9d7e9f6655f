#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "ecoroute/event_queue.hpp"
#include "ecoroute/random.hpp"

using namespace ecoroute;

TEST_CASE("events dispatch in nondecreasing time, equal times by sequence") {
  EventQueue q;
  std::vector<int> order;
  q.schedule(5.0, EventKind::TimerExpiry, 0, [&] { order.push_back(1); });
  q.schedule(5.0, EventKind::TimerExpiry, 0, [&] { order.push_back(2); });
  q.schedule(2.0, EventKind::TimerExpiry, 0, [&] { order.push_back(0); });
  q.run_until(10.0);
  REQUIRE(order == std::vector<int>{0, 1, 2});
  REQUIRE(q.now() == 10.0);
}

TEST_CASE("an event scheduled at the current clock runs next among equals") {
  EventQueue q;
  std::vector<int> order;
  q.schedule(1.0, EventKind::TimerExpiry, 0, [&] {
    order.push_back(1);
    // same-time follow-up lands after already-queued equal-time events
    q.schedule(q.now(), EventKind::TimerExpiry, 0, [&] { order.push_back(3); });
  });
  q.schedule(1.0, EventKind::TimerExpiry, 0, [&] { order.push_back(2); });
  q.run_until(2.0);
  REQUIRE(order == std::vector<int>{1, 2, 3});
}

TEST_CASE("cancelled events never fire") {
  EventQueue q;
  bool fired = false;
  auto h = q.schedule(3.0, EventKind::TimerExpiry, 0, [&] { fired = true; });
  q.cancel(h);
  q.run_until(5.0);
  REQUIRE_FALSE(fired);
  REQUIRE(q.pending() == 0);
}

TEST_CASE("scheduling into the past is rejected") {
  EventQueue q;
  q.schedule(2.0, EventKind::TimerExpiry, 0, [] {});
  q.run_until(2.0);
  REQUIRE_THROWS_AS(q.schedule(1.0, EventKind::TimerExpiry, 0, [] {}), std::logic_error);
}

TEST_CASE("an empty queue fast-forwards the clock") {
  EventQueue q;
  q.run_until(0.0);
  REQUIRE(q.now() == 0.0);
  q.run_until(900.0);
  REQUIRE(q.now() == 900.0);
}

TEST_CASE("dispatch order is a strict total order over (time, sequence)") {
  EventQueue q;
  RandomStream rng(42, "engine-test");
  std::vector<std::pair<double, int>> trace;
  int counter = 0;
  for (int i = 0; i < 500; ++i) {
    const double t = rng.uniform(0.0, 100.0);
    q.schedule(t, EventKind::TimerExpiry, 0, [&trace, &counter, t] {
      trace.emplace_back(t, counter++);
    });
  }
  q.run_until(100.0);
  REQUIRE(trace.size() == 500);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    REQUIRE(trace[i - 1].first <= trace[i].first);
  }
}

TEST_CASE("events only run up to the horizon") {
  EventQueue q;
  bool late = false;
  q.schedule(5.0, EventKind::TimerExpiry, 0, [&] { late = true; });
  q.run_until(4.0);
  REQUIRE_FALSE(late);
  REQUIRE(q.now() == 4.0);
  REQUIRE(q.pending() == 1);
  q.run_until(5.0);
  REQUIRE(late);
}

TEST_CASE("named substreams are decorrelated but reproducible") {
  RandomStream a1(7, "mobility"), a2(7, "mobility"), b(7, "traffic");
  bool differs = false;
  for (int i = 0; i < 16; ++i) {
    const auto x = a1.next_u64();
    REQUIRE(x == a2.next_u64());
    if (x != b.next_u64()) differs = true;
  }
  REQUIRE(differs);
}

TEST_CASE("uniform_int stays within bounds and hits them") {
  RandomStream rng(3, "bounds");
  bool lo = false, hi = false;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.uniform_int(2, 5);
    REQUIRE(v >= 2);
    REQUIRE(v <= 5);
    lo = lo || v == 2;
    hi = hi || v == 5;
  }
  REQUIRE(lo);
  REQUIRE(hi);
}
