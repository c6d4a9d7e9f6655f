#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <vector>

#include "ecoroute/packets.hpp"
#include "ecoroute/types.hpp"

namespace ecoroute {

/// Unit-disk radio: two nodes hear each other iff their distance is at
/// most `range`. No MAC contention is modeled; an optional i.i.d. loss
/// probability applies per receiver per transmission.
struct RadioConfig {
  double range = 250.0;               // meters
  double propagation_delay = 1e-5;    // seconds per hop
  double loss_probability = 0.0;      // in [0, 1)
};

/// Beacon-maintained neighbor set plus the periodic snapshot used to
/// classify a node as stable or unstable: a node is stable while fewer
/// than `stability_threshold` of its snapshot neighbors have departed.
class NeighborTable {
 public:
  void configure(double stability_window, double stability_threshold, double neighbor_timeout) {
    window_ = stability_window;
    threshold_ = stability_threshold;
    timeout_ = neighbor_timeout;
  }

  void heard(NodeId n, double now) { last_heard_[n] = now; }

  /// Sorted ids heard within the neighbor timeout.
  std::vector<NodeId> current(double now) const {
    std::vector<NodeId> ids;
    ids.reserve(last_heard_.size());
    for (const auto& [id, t] : last_heard_) {
      if (now - t <= timeout_) ids.push_back(id);
    }
    return ids;
  }

  int count(double now) const {
    int c = 0;
    for (const auto& [id, t] : last_heard_) {
      if (now - t <= timeout_) ++c;
    }
    return c;
  }

  bool hears(NodeId n, double now) const {
    auto it = last_heard_.find(n);
    return it != last_heard_.end() && now - it->second <= timeout_;
  }

  /// Drops entries past the timeout; returns the ids removed.
  std::vector<NodeId> prune(double now) {
    std::vector<NodeId> gone;
    for (auto it = last_heard_.begin(); it != last_heard_.end();) {
      if (now - it->second > timeout_) {
        gone.push_back(it->first);
        it = last_heard_.erase(it);
      } else {
        ++it;
      }
    }
    return gone;
  }

  void take_snapshot(double now) {
    snapshot_ = current(now);
    snapshot_taken_ = true;
  }

  /// Pure classification rule, shared with offline checks: the fraction of
  /// snapshot neighbors missing from `current` must stay below the
  /// threshold. An empty snapshot is stable.
  static bool stable_verdict(const std::vector<NodeId>& snapshot,
                             const std::vector<NodeId>& current, double threshold) {
    if (snapshot.empty()) return true;
    int departed = 0;
    for (NodeId id : snapshot) {
      if (std::find(current.begin(), current.end(), id) == current.end()) ++departed;
    }
    return static_cast<double>(departed) / static_cast<double>(snapshot.size()) < threshold;
  }

  bool is_stable(double now) const {
    return stable_verdict(snapshot_, current(now), threshold_);
  }

  bool has_snapshot() const { return snapshot_taken_; }
  const std::vector<NodeId>& snapshot() const { return snapshot_; }
  double stability_window() const { return window_; }
  double timeout() const { return timeout_; }

 private:
  std::map<NodeId, double> last_heard_;
  std::vector<NodeId> snapshot_;
  bool snapshot_taken_ = false;
  double window_ = 2.0;
  double threshold_ = 0.5;
  double timeout_ = 1.5;
};

/// FIFO queue of outbound data packets. Enqueueing at capacity drops the
/// new packet and counts it.
class PacketBuffer {
 public:
  PacketBuffer() = default;
  explicit PacketBuffer(int capacity) : capacity_(capacity) {}

  bool enqueue(DataPacket p) {
    if (static_cast<int>(q_.size()) >= capacity_) {
      ++dropped_;
      return false;
    }
    q_.push_back(std::move(p));
    return true;
  }

  DataPacket& front() { return q_.front(); }
  const DataPacket& front() const { return q_.front(); }

  DataPacket pop() {
    DataPacket p = std::move(q_.front());
    q_.pop_front();
    return p;
  }

  bool empty() const { return q_.empty(); }
  int occupancy() const { return static_cast<int>(q_.size()); }
  int capacity() const { return capacity_; }
  long long dropped() const { return dropped_; }

  long long queued_bytes_for(NodeId dest) const {
    long long bytes = 0;
    for (const auto& p : q_) {
      if (p.destination == dest) bytes += static_cast<long long>(p.size);
    }
    return bytes;
  }

  int queued_count_for(NodeId dest) const {
    int c = 0;
    for (const auto& p : q_) {
      if (p.destination == dest) ++c;
    }
    return c;
  }

  /// Removes every packet matching `pred`, preserving order of the rest.
  template <typename Pred>
  std::vector<DataPacket> remove_if(Pred pred) {
    std::vector<DataPacket> removed;
    std::deque<DataPacket> kept;
    for (auto& p : q_) {
      if (pred(p)) {
        removed.push_back(std::move(p));
      } else {
        kept.push_back(std::move(p));
      }
    }
    q_ = std::move(kept);
    return removed;
  }

 private:
  std::deque<DataPacket> q_;
  int capacity_ = 64;
  long long dropped_ = 0;
};

}  // namespace ecoroute
