#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <utility>

#include "ecoroute/cost.hpp"
#include "ecoroute/energy.hpp"
#include "ecoroute/event_queue.hpp"
#include "ecoroute/linklayer.hpp"
#include "ecoroute/mobility.hpp"
#include "ecoroute/packets.hpp"

namespace ecoroute {

using FloodKey = std::pair<NodeId, std::uint32_t>;  // (source, flood_id)

/// Destination-side holding slot for one discovery: keeps the cheapest
/// request seen so far until the buffering window expires.
struct PendingReply {
  RouteRequest best;
  ScoreKey best_key;
  EventHandle timer;
  int candidates = 0;
};

/// Source-side bookkeeping for an outstanding discovery.
struct PendingDiscovery {
  std::uint32_t flood_id = 0;
  EventHandle timer;
  int retries_left = 0;
};

struct NodeState {
  NodeId id = kNoNode;
  Battery battery;
  DrainRateEstimator drain;
  WaypointState waypoint;
  NeighborTable neighbors;
  PacketBuffer buffer;

  std::map<NodeId, RouteEntry> routes;
  std::set<FloodKey> seen_rreq;                    // floods already relayed or originated
  std::set<FloodKey> answered_rreq;                // floods this node already replied to
  std::map<FloodKey, PendingReply> pending_replies;
  std::map<NodeId, PendingDiscovery> pending_discovery;  // keyed by flow destination
  std::uint32_t next_flood_id = 1;

  bool tx_busy = false;      // data transmitter occupied for the packet airtime
  bool head_blocked = false; // head packet parked on a retransmission timer
  bool death_processed = false;

  bool alive() const { return !battery.depleted(); }

  RouteEntry* active_route(NodeId dest) {
    auto it = routes.find(dest);
    if (it == routes.end() || !it->second.active) return nullptr;
    return &it->second;
  }
};

}  // namespace ecoroute
