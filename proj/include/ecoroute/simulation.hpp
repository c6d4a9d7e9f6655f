#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ecoroute/event_queue.hpp"
#include "ecoroute/metrics.hpp"
#include "ecoroute/node.hpp"
#include "ecoroute/random.hpp"
#include "ecoroute/scenario.hpp"

namespace ecoroute {

enum class UnicastOutcome { Delivered, Lost, LinkDown };

/// One simulation run: nodes moving over the terrain, beacon-driven
/// neighbor discovery, on-demand route discovery with destination-side
/// candidate buffering, data forwarding and route maintenance. All state
/// belongs to a single thread; independent runs may execute in parallel.
class Simulation {
 public:
  struct Observers {
    /// Fires for every request accepted into the destination's buffering
    /// window, already finalized (hop count includes the last link, the
    /// destination's own snapshot appended).
    std::function<void(NodeId dest, const RouteRequest&)> rreq_at_destination;
    /// Fires at the source when a reply installs a route.
    std::function<void(const RouteReply&)> route_installed;
  };

  Simulation(const Scenario& scenario, std::uint64_t seed)
      : scn_(scenario),
        seed_(seed),
        mobility_rng_(seed, "mobility"),
        traffic_rng_(seed, "traffic"),
        placement_rng_(seed, "placement"),
        loss_rng_(seed, "loss") {
    scn_.validate();
    const int n = scn_.engine.node_count;
    nodes_.resize(n);
    for (int i = 0; i < n; ++i) {
      NodeState& node = nodes_[i];
      node.id = i;
      node.battery = Battery(scn_.energy.initial_energy);
      node.drain = DrainRateEstimator(scn_.energy.ewma_alpha, scn_.energy.sample_interval,
                                      scn_.energy.initial_energy);
      node.neighbors.configure(scn_.link.stability_window, scn_.link.stability_threshold,
                               scn_.link.neighbor_timeout);
      node.buffer = PacketBuffer(scn_.link.buffer_capacity);
      node.waypoint.init(Vec2{placement_rng_.uniform(0.0, scn_.mobility.terrain.width),
                              placement_rng_.uniform(0.0, scn_.mobility.terrain.height)},
                         0.0);
    }
    build_flows();
    schedule_initial_events();
  }

  double now() const { return queue_.now(); }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  NodeState& node(NodeId id) { return nodes_[id]; }
  const NodeState& node(NodeId id) const { return nodes_[id]; }
  Vec2 position(NodeId id) const { return nodes_[id].waypoint.position_at(queue_.now()); }

  /// Pins a node to a position (static topologies in tests and probes).
  void set_position(NodeId id, Vec2 pos) { nodes_[id].waypoint.init(pos, queue_.now()); }

  EventQueue& queue() { return queue_; }
  const Scenario& scenario() const { return scn_; }
  const MetricsLedger& ledger() const { return ledger_; }
  void set_trace(EventQueue::TraceSink sink) { queue_.set_trace(std::move(sink)); }

  Observers observers;

  /// Dispatches every event up to `end` and returns the finalized ledger.
  MetricsLedger run_until(double end) {
    queue_.run_until(end);
    finalize_ledger();
    return ledger_;
  }

  /// Time a relay must stay alive to push `req_size` bytes through:
  /// raw airtime scaled by the relay factor (received and retransmitted).
  double needed_send_time(double req_size_bytes) const {
    return packet_airtime(req_size_bytes, scn_.energy.model) * scn_.routing.relay_factor;
  }

  // --- radio primitives -------------------------------------------------

  /// Broadcasts to every alive node in range. The sender pays transmit
  /// energy whether or not anyone listens; receivers pay receive energy at
  /// delivery. Returns the ids the transmission was scheduled to reach.
  std::vector<NodeId> broadcast_now(NodeId sender, double size_bytes, const std::string& label,
                                    std::function<void(NodeId)> on_deliver = {}) {
    NodeState& s = nodes_[sender];
    if (!s.alive()) return {};
    charge(sender, tx_energy(size_bytes, scn_.energy.model), DrawCause::Tx);
    std::vector<NodeId> receivers;
    const Vec2 from = position(sender);
    for (NodeId j = 0; j < node_count(); ++j) {
      if (j == sender || !nodes_[j].alive()) continue;
      if (distance(from, position(j)) > scn_.link.radio.range) continue;
      if (scn_.link.radio.loss_probability > 0.0 &&
          loss_rng_.bernoulli(scn_.link.radio.loss_probability)) {
        continue;
      }
      receivers.push_back(j);
      queue_.schedule(queue_.now() + scn_.link.radio.propagation_delay, EventKind::PacketDelivery,
                      j, label + " from=" + std::to_string(sender),
                      [this, j, size_bytes, on_deliver] {
                        if (!nodes_[j].alive()) return;
                        charge(j, rx_energy(size_bytes, scn_.energy.model), DrawCause::Rx);
                        if (on_deliver) on_deliver(j);
                      });
    }
    return receivers;
  }

  /// Unicast with overhearing: every alive in-range bystander pays the
  /// receive-equivalent overhear energy; only the destination gets the
  /// payload. An out-of-range or dead destination is reported immediately
  /// (the transmission still happened); a random loss is silent.
  UnicastOutcome unicast_now(NodeId sender, NodeId dest, double size_bytes,
                             const std::string& label,
                             std::function<void(NodeId)> on_deliver = {}) {
    NodeState& s = nodes_[sender];
    if (!s.alive()) return UnicastOutcome::LinkDown;
    charge(sender, tx_energy(size_bytes, scn_.energy.model), DrawCause::Tx);
    const Vec2 from = position(sender);
    for (NodeId j = 0; j < node_count(); ++j) {
      if (j == sender || j == dest || !nodes_[j].alive()) continue;
      if (distance(from, position(j)) > scn_.link.radio.range) continue;
      queue_.schedule(queue_.now() + scn_.link.radio.propagation_delay, EventKind::PacketDelivery,
                      j, "overhear from=" + std::to_string(sender), [this, j, size_bytes] {
                        if (!nodes_[j].alive()) return;
                        charge(j, overhear_energy(size_bytes, scn_.energy.model),
                               DrawCause::Overhear);
                      });
    }
    const bool reachable =
        nodes_[dest].alive() && distance(from, position(dest)) <= scn_.link.radio.range;
    if (!reachable) return UnicastOutcome::LinkDown;
    if (scn_.link.radio.loss_probability > 0.0 &&
        loss_rng_.bernoulli(scn_.link.radio.loss_probability)) {
      return UnicastOutcome::Lost;
    }
    queue_.schedule(queue_.now() + scn_.link.radio.propagation_delay, EventKind::PacketDelivery,
                    dest, label + " from=" + std::to_string(sender),
                    [this, dest, size_bytes, on_deliver] {
                      if (!nodes_[dest].alive()) return;
                      charge(dest, rx_energy(size_bytes, scn_.energy.model), DrawCause::Rx);
                      if (on_deliver) on_deliver(dest);
                    });
    return UnicastOutcome::Delivered;
  }

  // --- route discovery ---------------------------------------------------

  /// Floods a fresh route request for `dest` carrying the bytes currently
  /// queued for it. No-op while an earlier discovery is still pending.
  void originate_discovery(NodeId source, NodeId dest) {
    NodeState& n = nodes_[source];
    if (!n.alive() || fresh_route(n, dest) || n.pending_discovery.count(dest)) return;
    PendingDiscovery pd;
    pd.retries_left = scn_.routing.rreq_retries;
    pd.flood_id = n.next_flood_id++;
    pd.timer = schedule_discovery_timeout(source, dest);
    n.pending_discovery[dest] = pd;
    flood_request(source, dest, pd.flood_id);
  }

  /// Relay/destination processing of one received request copy.
  void handle_route_request(NodeId at, const RouteRequest& rreq) {
    NodeState& n = nodes_[at];
    if (!n.alive() || rreq.source == at) return;
    if (at == rreq.destination) {
      buffer_at_destination(n, rreq);
      return;
    }
    const FloodKey key{rreq.source, rreq.flood_id};
    if (n.seen_rreq.count(key)) return;  // first copy only
    n.seen_rreq.insert(key);
    if (scn_.routing.rlt_filter_enabled()) {
      const double rlt = remaining_lifetime(n.battery, n.drain);
      if (rlt <= needed_send_time(rreq.req_size)) {
        ++ledger_.rreq_dropped_by_rlt;
        return;
      }
    }
    RouteRequest fwd = rreq;
    NodeSnapshot snap = snapshot_of(n);
    if (snap.unstable) ++fwd.unstable_nodes;
    fwd.sum_neighbors += snap.neighbor_count;
    fwd.sum_buffered += snap.buffered_packets;
    ++fwd.hop_count;
    fwd.reverse_path.push_back(at);
    fwd.annotations.push_back(snap);
    fwd.min_route_residual = std::min(fwd.min_route_residual, n.battery.residual());
    if (scn_.routing.forward_delay > 0.0) {
      // relays take a beat to process and queue the rebroadcast
      queue_.schedule(queue_.now() + scn_.routing.forward_delay, EventKind::TimerExpiry, at,
                      "rreq forward s=" + std::to_string(fwd.source), [this, at, fwd] {
                        if (nodes_[at].alive()) send_rreq(at, fwd);
                      });
    } else {
      send_rreq(at, fwd);
    }
  }

 private:
  struct Flow {
    FlowSpec spec;
    double end = 0.0;
  };

  // --- setup --------------------------------------------------------------

  void build_flows() {
    if (!scn_.traffic.flows.empty()) {
      for (const auto& f : scn_.traffic.flows) flows_.push_back(Flow{f, scn_.engine.sim_time});
      return;
    }
    const int n = scn_.engine.node_count;
    const int k = scn_.effective_flow_count();
    for (int i = 0; i < k; ++i) {
      FlowSpec f;
      f.source = static_cast<NodeId>(traffic_rng_.uniform_int(0, n - 1));
      do {
        f.destination = static_cast<NodeId>(traffic_rng_.uniform_int(0, n - 1));
      } while (f.destination == f.source);
      f.start = traffic_rng_.uniform(0.0, scn_.traffic.start_window);
      flows_.push_back(Flow{f, scn_.engine.sim_time});
    }
  }

  void schedule_initial_events() {
    for (NodeId i = 0; i < node_count(); ++i) {
      queue_.schedule(0.0, EventKind::MobilityUpdate, i, "waypoint start",
                      [this, i] { pick_next_waypoint(i); });
    }
    queue_.schedule(0.0, EventKind::MobilityUpdate, kNoNode, "stability snapshot",
                    [this] { snapshot_tick(); });
    if (scn_.link.beacons_enabled) {
      queue_.schedule(0.0, EventKind::BeaconTick, kNoNode, "beacon round",
                      [this] { beacon_tick(); });
    }
    queue_.schedule(scn_.mobility.params.tick, EventKind::MobilityUpdate, kNoNode, "link check",
                    [this] { link_check_tick(); });
    queue_.schedule(scn_.energy.sample_interval, EventKind::DrainRateSample, kNoNode, "",
                    [this] { drain_tick(); });
    if (scn_.engine.metric_sample_interval > 0.0) {
      queue_.schedule(scn_.engine.metric_sample_interval, EventKind::MetricSample, kNoNode, "",
                      [this] { metric_tick(); });
    }
    for (std::size_t f = 0; f < flows_.size(); ++f) {
      if (flows_[f].spec.start < flows_[f].end) {
        queue_.schedule(flows_[f].spec.start, EventKind::TrafficTick, flows_[f].spec.source,
                        "flow " + std::to_string(f), [this, f] { traffic_tick(f, 0); });
      }
    }
  }

  // --- periodic machinery ---------------------------------------------------

  void beacon_tick() {
    for (NodeId i = 0; i < node_count(); ++i) {
      if (!nodes_[i].alive()) continue;
      count_control(ControlKind::Beacon);
      broadcast_now(i, scn_.link.beacon_size, "beacon",
                    [this, i](NodeId j) { nodes_[j].neighbors.heard(i, queue_.now()); });
    }
    queue_.schedule(queue_.now() + scn_.link.beacon_interval, EventKind::BeaconTick, kNoNode,
                    "beacon round", [this] { beacon_tick(); });
  }

  void snapshot_tick() {
    for (auto& n : nodes_) {
      if (n.alive()) n.neighbors.take_snapshot(queue_.now());
    }
    queue_.schedule(queue_.now() + scn_.link.stability_window, EventKind::MobilityUpdate, kNoNode,
                    "stability snapshot", [this] { snapshot_tick(); });
  }

  void drain_tick() {
    for (auto& n : nodes_) {
      if (n.alive()) n.drain.sample(n.battery);
    }
    queue_.schedule(queue_.now() + scn_.energy.sample_interval, EventKind::DrainRateSample,
                    kNoNode, "", [this] { drain_tick(); });
  }

  void metric_tick() {
    ledger_.energy_series.emplace_back(queue_.now(), ledger_.used_energy);
    queue_.schedule(queue_.now() + scn_.engine.metric_sample_interval, EventKind::MetricSample,
                    kNoNode, "", [this] { metric_tick(); });
  }

  /// Periodic link reevaluation: expire silent neighbors, retire idle route
  /// entries, and break fresh routes whose next hop went quiet.
  void link_check_tick() {
    const double t = queue_.now();
    for (auto& n : nodes_) {
      if (!n.alive()) continue;
      n.neighbors.prune(t);
      for (auto& [dest, entry] : n.routes) {
        if (!entry.active) continue;
        if (route_expired(entry)) {
          entry.active = false;  // nobody is using it; retire quietly
          continue;
        }
        if (!n.neighbors.hears(entry.next_hop, t)) {
          handle_link_break(n, entry);
        }
      }
    }
    queue_.schedule(t + scn_.mobility.params.tick, EventKind::MobilityUpdate, kNoNode,
                    "link check", [this] { link_check_tick(); });
  }

  bool route_expired(const RouteEntry& e) const {
    return queue_.now() - e.last_used > scn_.routing.active_route_timeout;
  }

  /// Route lookup for forwarding decisions: active and recently used.
  RouteEntry* fresh_route(NodeState& n, NodeId dest) {
    RouteEntry* e = n.active_route(dest);
    if (!e) return nullptr;
    if (route_expired(*e)) {
      e->active = false;
      return nullptr;
    }
    return e;
  }

  void refresh_route(NodeState& n, NodeId dest) {
    if (RouteEntry* e = n.active_route(dest)) e->last_used = queue_.now();
  }

  // --- mobility ---------------------------------------------------------

  void pick_next_waypoint(NodeId i) {
    NodeState& n = nodes_[i];
    if (!n.alive()) return;
    const double travel = n.waypoint.choose_waypoint(queue_.now(), scn_.mobility.terrain,
                                                     scn_.mobility.params, mobility_rng_);
    if (travel < 0.0) return;  // static node
    queue_.schedule(queue_.now() + travel, EventKind::MobilityUpdate, i, "waypoint arrival",
                    [this, i] { arrive_at_waypoint(i); });
  }

  void arrive_at_waypoint(NodeId i) {
    NodeState& n = nodes_[i];
    if (!n.alive()) return;
    n.waypoint.arrive(queue_.now(), scn_.mobility.params.pause_time);
    queue_.schedule(n.waypoint.pause_until(), EventKind::MobilityUpdate, i, "pause end",
                    [this, i] { pick_next_waypoint(i); });
  }

  // --- traffic ------------------------------------------------------------

  void traffic_tick(std::size_t flow_idx, long long k) {
    const Flow& flow = flows_[flow_idx];
    NodeState& src = nodes_[flow.spec.source];
    if (src.alive()) {
      DataPacket p;
      p.id = next_packet_id_++;
      p.source = flow.spec.source;
      p.destination = flow.spec.destination;
      p.size = scn_.traffic.packet_size;
      p.created_at = queue_.now();
      ++ledger_.data_sent;
      if (p.destination == p.source) {
        ++ledger_.data_delivered;  // degenerate flow delivers locally
      } else if (!src.buffer.enqueue(p)) {
        ++ledger_.data_dropped_buffer;
      } else {
        ++in_network_;
        try_service(flow.spec.source);
      }
      const double next = flow.spec.start + static_cast<double>(k + 1) * scn_.traffic.interval;
      if (next < flow.end) {
        queue_.schedule(next, EventKind::TrafficTick, flow.spec.source,
                        "flow " + std::to_string(flow_idx),
                        [this, flow_idx, k] { traffic_tick(flow_idx, k + 1); });
      }
    }
  }

  // --- data plane ---------------------------------------------------------

  /// Services the head of the node's outbound buffer: one transmission at
  /// a time, spaced by the packet airtime. Stalls while waiting for a
  /// route or for a retransmission timer.
  void try_service(NodeId id) {
    NodeState& n = nodes_[id];
    while (n.alive() && !n.tx_busy && !n.head_blocked && !n.buffer.empty()) {
      DataPacket& head = n.buffer.front();
      RouteEntry* route = fresh_route(n, head.destination);
      if (!route) {
        if (head.source == id) {
          head.retries = 0;  // a new route gets a clean retransmission budget
          originate_discovery(id, head.destination);
          return;  // held in the buffer until a route appears or discovery fails
        }
        // transiting packet stranded without a route
        n.buffer.pop();
        ++ledger_.data_dropped_no_route;
        --in_network_;
        continue;
      }
      const DataPacket packet = head;
      const NodeId next_hop = route->next_hop;
      route->last_used = queue_.now();
      refresh_route(n, packet.source);  // keep the return leg alive for errors
      const UnicastOutcome outcome =
          unicast_now(id, next_hop, packet.size, "data id=" + std::to_string(packet.id),
                      [this, packet](NodeId j) { receive_data(j, packet); });
      if (outcome == UnicastOutcome::Delivered) {
        n.buffer.pop();
        n.tx_busy = true;
        queue_.schedule(queue_.now() + packet_airtime(packet.size, scn_.energy.model),
                        EventKind::TimerExpiry, id, "tx done", [this, id] {
                          nodes_[id].tx_busy = false;
                          try_service(id);
                        });
        return;
      }
      if (head.retries == 0) {
        // one retransmission attempt per packet after a timeout
        head.retries = 1;
        ++ledger_.data_retransmissions;
        n.head_blocked = true;
        queue_.schedule(queue_.now() + scn_.routing.data_retry_timeout, EventKind::TimerExpiry,
                        id, "data retry id=" + std::to_string(packet.id), [this, id] {
                          nodes_[id].head_blocked = false;
                          try_service(id);
                        });
        return;
      }
      // second failure is terminal for this hop
      if (outcome == UnicastOutcome::LinkDown) {
        handle_link_break(n, *route);
        if (packet.source == id) {
          head.retries = 0;  // fresh start once a new route is found
          originate_discovery(id, packet.destination);
          return;
        }
        n.buffer.pop();
        ++ledger_.data_dropped_no_route;
        --in_network_;
        continue;
      }
      // lost twice on an otherwise healthy link
      n.buffer.pop();
      ++ledger_.data_dropped_loss;
      --in_network_;
    }
  }

  void receive_data(NodeId at, DataPacket packet) {
    NodeState& n = nodes_[at];
    refresh_route(n, packet.source);
    if (packet.destination == at) {
      ++ledger_.data_delivered;
      --in_network_;
      return;
    }
    packet.retries = 0;
    if (!n.buffer.enqueue(packet)) {
      ++ledger_.data_dropped_buffer;
      --in_network_;
      return;
    }
    try_service(at);
  }

  // --- discovery internals --------------------------------------------------

  NodeSnapshot snapshot_of(NodeState& n) {
    NodeSnapshot s;
    s.id = n.id;
    s.residual = n.battery.residual();
    s.initial = n.battery.initial();
    s.tx_cost = tx_energy(scn_.traffic.packet_size, scn_.energy.model);
    s.rx_cost = rx_energy(scn_.traffic.packet_size, scn_.energy.model);
    s.overhear_cost = overhear_energy(scn_.traffic.packet_size, scn_.energy.model);
    s.neighbor_count = n.neighbors.count(queue_.now());
    s.buffered_packets = n.buffer.occupancy();
    s.unstable = !n.neighbors.is_stable(queue_.now());
    return s;
  }

  void flood_request(NodeId source, NodeId dest, std::uint32_t flood_id) {
    NodeState& n = nodes_[source];
    RouteRequest rreq;
    rreq.source = source;
    rreq.destination = dest;
    rreq.flood_id = flood_id;
    rreq.req_size = static_cast<double>(n.buffer.queued_bytes_for(dest));
    rreq.min_route_residual = n.battery.residual();
    rreq.annotations.push_back(snapshot_of(n));
    n.seen_rreq.insert(FloodKey{source, flood_id});
    ++ledger_.discoveries;
    send_rreq(source, rreq);
  }

  void send_rreq(NodeId from, const RouteRequest& rreq) {
    count_control(ControlKind::Rreq);
    broadcast_now(from, scn_.routing.rreq_size,
                  "rreq s=" + std::to_string(rreq.source) + " f=" + std::to_string(rreq.flood_id),
                  [this, rreq](NodeId j) { handle_route_request(j, rreq); });
  }

  EventHandle schedule_discovery_timeout(NodeId source, NodeId dest) {
    return queue_.schedule(queue_.now() + scn_.routing.discovery_timeout, EventKind::TimerExpiry,
                           source, "discovery timeout dest=" + std::to_string(dest),
                           [this, source, dest] { discovery_timeout(source, dest); });
  }

  void discovery_timeout(NodeId source, NodeId dest) {
    NodeState& n = nodes_[source];
    auto it = n.pending_discovery.find(dest);
    if (it == n.pending_discovery.end() || !n.alive()) return;
    if (fresh_route(n, dest)) {  // a reply won the race
      n.pending_discovery.erase(it);
      return;
    }
    if (it->second.retries_left > 0) {
      --it->second.retries_left;
      it->second.flood_id = n.next_flood_id++;
      it->second.timer = schedule_discovery_timeout(source, dest);
      flood_request(source, dest, it->second.flood_id);
      return;
    }
    n.pending_discovery.erase(it);
    const auto undeliverable =
        n.buffer.remove_if([dest](const DataPacket& p) { return p.destination == dest; });
    ledger_.data_dropped_no_route += static_cast<long long>(undeliverable.size());
    in_network_ -= static_cast<long long>(undeliverable.size());
  }

  /// Destination-side buffering: the first copy of a discovery opens the
  /// reply window; later copies replace the held one only when strictly
  /// cheaper, so the first arrival wins ties.
  void buffer_at_destination(NodeState& dest, const RouteRequest& rreq) {
    const FloodKey key{rreq.source, rreq.flood_id};
    if (dest.answered_rreq.count(key)) return;
    RouteRequest finalized = rreq;
    ++finalized.hop_count;  // the link into the destination
    finalized.annotations.push_back(snapshot_of(dest));
    finalized.min_route_residual =
        std::min(finalized.min_route_residual, dest.battery.residual());
    if (observers.rreq_at_destination) observers.rreq_at_destination(dest.id, finalized);
    const ScoreKey score = destination_score(finalized);
    auto it = dest.pending_replies.find(key);
    if (it == dest.pending_replies.end()) {
      PendingReply pr;
      pr.best = std::move(finalized);
      pr.best_key = score;
      pr.candidates = 1;
      pr.timer = queue_.schedule(
          queue_.now() + scn_.routing.buffering_time, EventKind::TimerExpiry, dest.id,
          "reply window s=" + std::to_string(key.first) + " f=" + std::to_string(key.second),
          [this, id = dest.id, key] { reply_window_expired(id, key); });
      dest.pending_replies.emplace(key, std::move(pr));
    } else {
      ++it->second.candidates;
      if (score < it->second.best_key) {
        it->second.best = std::move(finalized);
        it->second.best_key = score;
      }
    }
  }

  ScoreKey destination_score(const RouteRequest& finalized) const {
    if (scn_.routing.protocol == PolicyVariant::Proposed) {
      return ScoreKey{0, route_cost_proposed(finalized.hop_count, finalized.unstable_nodes,
                                             finalized.sum_neighbors, finalized.sum_buffered,
                                             scn_.routing.policy.w1, scn_.routing.policy.w2,
                                             scn_.routing.policy.w3)};
    }
    return route_score_key(scn_.routing.policy, to_annotated_route(finalized));
  }

  void reply_window_expired(NodeId dest_id, FloodKey key) {
    NodeState& dest = nodes_[dest_id];
    auto it = dest.pending_replies.find(key);
    if (it == dest.pending_replies.end()) return;
    const RouteRequest best = std::move(it->second.best);
    dest.pending_replies.erase(it);
    dest.answered_rreq.insert(key);
    if (!dest.alive()) return;
    RouteReply rrep;
    rrep.source = best.source;
    rrep.destination = dest_id;
    rrep.flood_id = best.flood_id;
    rrep.path.reserve(best.reverse_path.size() + 2);
    rrep.path.push_back(best.source);
    rrep.path.insert(rrep.path.end(), best.reverse_path.begin(), best.reverse_path.end());
    rrep.path.push_back(dest_id);
    const int last = static_cast<int>(rrep.path.size()) - 1;
    install_route(dest, rrep.source, rrep.path[last - 1], last, kNoNode);
    send_rrep_hop(dest_id, rrep, last);
  }

  void send_rrep_hop(NodeId from, const RouteReply& rrep, int idx) {
    count_control(ControlKind::Rrep);
    const NodeId prev = rrep.path[idx - 1];
    unicast_now(from, prev, scn_.routing.rrep_size,
                "rrep s=" + std::to_string(rrep.source) + " d=" + std::to_string(rrep.destination),
                [this, rrep, idx](NodeId j) { handle_route_reply(j, rrep, idx - 1); });
    // a failed reply hop is not retried; the source's discovery timer recovers
  }

  void handle_route_reply(NodeId at, const RouteReply& rrep, int idx) {
    NodeState& n = nodes_[at];
    const int last = static_cast<int>(rrep.path.size()) - 1;
    install_route(n, rrep.destination, rrep.path[idx + 1], last - idx, rrep.source);
    if (idx > 0) {
      install_route(n, rrep.source, rrep.path[idx - 1], idx, kNoNode);
      send_rrep_hop(at, rrep, idx);
      return;
    }
    // back at the source: discovery complete
    auto it = n.pending_discovery.find(rrep.destination);
    if (it != n.pending_discovery.end()) {
      queue_.cancel(it->second.timer);
      n.pending_discovery.erase(it);
    }
    if (observers.route_installed) observers.route_installed(rrep);
    try_service(at);
  }

  void install_route(NodeState& n, NodeId dest, NodeId next_hop, int hops, NodeId learned_source) {
    RouteEntry e;
    e.destination = dest;
    e.next_hop = next_hop;
    e.hop_count = hops;
    e.established_at = queue_.now();
    e.last_used = queue_.now();
    e.active = true;
    e.learned_source = learned_source;
    n.routes[dest] = e;
  }

  // --- maintenance -----------------------------------------------------------

  void handle_link_break(NodeState& n, RouteEntry& entry) {
    entry.active = false;
    if (entry.learned_source == n.id) {
      if (n.buffer.queued_count_for(entry.destination) > 0) {
        originate_discovery(n.id, entry.destination);
      }
      return;
    }
    if (entry.learned_source != kNoNode) {
      send_route_error(n, entry.learned_source, entry.destination);
    }
  }

  void send_route_error(NodeState& n, NodeId target_source, NodeId broken_dest) {
    RouteEntry* toward = fresh_route(n, target_source);
    if (!toward) return;  // unreachable source learns from its own delivery failure
    count_control(ControlKind::Rerr);
    RouteError rerr;
    rerr.broken_destination = broken_dest;
    rerr.target_source = target_source;
    unicast_now(n.id, toward->next_hop, scn_.routing.rerr_size,
                "rerr dest=" + std::to_string(broken_dest),
                [this, rerr](NodeId j) { handle_route_error(j, rerr); });
  }

  void handle_route_error(NodeId at, const RouteError& rerr) {
    NodeState& n = nodes_[at];
    auto it = n.routes.find(rerr.broken_destination);
    if (it != n.routes.end()) it->second.active = false;
    if (at == rerr.target_source) {
      if (n.buffer.queued_count_for(rerr.broken_destination) > 0) {
        originate_discovery(at, rerr.broken_destination);
      }
      return;
    }
    send_route_error(n, rerr.target_source, rerr.broken_destination);
  }

  // --- accounting --------------------------------------------------------------

  enum class ControlKind { Rreq, Rrep, Rerr, Beacon };

  void count_control(ControlKind kind) {
    ++ledger_.control_packets;
    switch (kind) {
      case ControlKind::Rreq: ++ledger_.control_rreq; break;
      case ControlKind::Rrep: ++ledger_.control_rrep; break;
      case ControlKind::Rerr: ++ledger_.control_rerr; break;
      case ControlKind::Beacon: ++ledger_.control_beacon; break;
    }
  }

  void charge(NodeId id, double joules, DrawCause cause) {
    NodeState& n = nodes_[id];
    if (n.death_processed) return;
    ledger_.used_energy += n.battery.draw(joules, cause);
    if (n.battery.depleted()) on_death(n);
  }

  /// A drained node drops out: timers cancelled, queued data lost, routes
  /// through it discovered broken by its neighbors.
  void on_death(NodeState& n) {
    if (n.death_processed) return;
    n.death_processed = true;
    for (auto& [key, pr] : n.pending_replies) queue_.cancel(pr.timer);
    n.pending_replies.clear();
    for (auto& [dest, pd] : n.pending_discovery) queue_.cancel(pd.timer);
    n.pending_discovery.clear();
    const auto lost = n.buffer.remove_if([](const DataPacket&) { return true; });
    ledger_.data_dropped_no_route += static_cast<long long>(lost.size());
    in_network_ -= static_cast<long long>(lost.size());
    for (auto& [dest, entry] : n.routes) entry.active = false;
    n.tx_busy = false;
    n.head_blocked = false;
  }

  void finalize_ledger() {
    ledger_.per_node.clear();
    double spent = 0.0;
    for (const auto& n : nodes_) {
      NodeEnergyRow row;
      row.initial = n.battery.initial();
      row.residual = n.battery.residual();
      row.drawn_tx = n.battery.drawn(DrawCause::Tx);
      row.drawn_rx = n.battery.drawn(DrawCause::Rx);
      row.drawn_overhear = n.battery.drawn(DrawCause::Overhear);
      ledger_.per_node.push_back(row);
      spent += row.initial - row.residual;
    }
    // the field is defined as the total battery delta; the incrementally
    // accumulated draw sum backs the mid-run samples
    ledger_.used_energy = spent;
    ledger_.data_in_flight_end = in_network_;
  }

  Scenario scn_;
  std::uint64_t seed_;
  EventQueue queue_;
  RandomStream mobility_rng_;
  RandomStream traffic_rng_;
  RandomStream placement_rng_;
  RandomStream loss_rng_;
  std::vector<NodeState> nodes_;
  std::vector<Flow> flows_;
  MetricsLedger ledger_;
  long long in_network_ = 0;
  long long next_packet_id_ = 1;
};

}  // namespace ecoroute
