#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ecoroute/types.hpp"

namespace ecoroute {

enum class EventKind {
  PacketDelivery,
  TimerExpiry,
  MobilityUpdate,
  BeaconTick,
  TrafficTick,
  DrainRateSample,
  MetricSample,
};

inline const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::PacketDelivery: return "PacketDelivery";
    case EventKind::TimerExpiry: return "TimerExpiry";
    case EventKind::MobilityUpdate: return "MobilityUpdate";
    case EventKind::BeaconTick: return "BeaconTick";
    case EventKind::TrafficTick: return "TrafficTick";
    case EventKind::DrainRateSample: return "DrainRateSample";
    case EventKind::MetricSample: return "MetricSample";
  }
  return "?";
}

struct EventHandle {
  std::uint64_t seq = 0;  // 0 = empty handle
  bool valid() const { return seq != 0; }
};

/// Time-ordered event core. Events dispatch in nondecreasing time order;
/// equal times break by the monotonically increasing sequence number
/// assigned at scheduling, so a run replays identically for a given seed.
class EventQueue {
 public:
  using Action = std::function<void()>;
  using TraceSink =
      std::function<void(double time, NodeId node, EventKind kind, const std::string& detail)>;

  double now() const { return clock_; }

  /// Scheduling into the past is a logic bug in the caller; the run aborts.
  EventHandle schedule(double time, EventKind kind, NodeId node, std::string detail,
                       Action action) {
    if (time < clock_) {
      throw std::logic_error("event scheduled before current clock (t=" + std::to_string(time) +
                             " < " + std::to_string(clock_) + ")");
    }
    const std::uint64_t seq = ++next_seq_;
    heap_.push(Entry{time, seq, kind, node, std::move(detail), std::move(action)});
    return EventHandle{seq};
  }

  EventHandle schedule(double time, EventKind kind, NodeId node, Action action) {
    return schedule(time, kind, node, std::string(), std::move(action));
  }

  /// Cancelled events are silently skipped at dispatch.
  void cancel(EventHandle h) {
    if (h.valid()) cancelled_.insert(h.seq);
  }

  /// Dispatches every event with time <= end; the clock finishes at end
  /// even when the queue drains early.
  void run_until(double end) {
    while (!heap_.empty() && heap_.top().time <= end) {
      Entry e = pop_top();
      if (cancelled_.erase(e.seq) > 0) continue;
      clock_ = e.time;
      if (trace_) trace_(e.time, e.node, e.kind, e.detail);
      e.action();
    }
    if (end > clock_) clock_ = end;
  }

  bool empty() const { return heap_.size() == cancelled_.size(); }

  std::size_t pending() const { return heap_.size() - cancelled_.size(); }

  void set_trace(TraceSink sink) { trace_ = std::move(sink); }

 private:
  struct Entry {
    double time;
    std::uint64_t seq;
    EventKind kind;
    NodeId node;
    std::string detail;
    Action action;
  };

  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  Entry pop_top() {
    // std::priority_queue::top is const; the entry is moved out via const_cast
    // right before pop, which never observes it again.
    Entry e = std::move(const_cast<Entry&>(heap_.top()));
    heap_.pop();
    return e;
  }

  double clock_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  std::unordered_set<std::uint64_t> cancelled_;
  TraceSink trace_;
};

}  // namespace ecoroute
