#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "ecoroute/cost.hpp"
#include "ecoroute/types.hpp"

namespace ecoroute {

/// Flooded discovery packet. Besides the usual addressing it accumulates,
/// hop by hop, the unstable-forwarder count, the summed neighbor counts
/// and the summed buffer occupancies of the intermediate nodes, plus one
/// state snapshot per path node for the battery-based policies. reqSize
/// carries the bytes of application data the source intends to send, so
/// relays can weigh their remaining lifetime against the relay work.
struct RouteRequest {
  NodeId source = kNoNode;
  NodeId destination = kNoNode;
  std::uint32_t flood_id = 0;
  int hop_count = 0;      // links traversed so far
  double req_size = 0.0;  // bytes of pending application data

  int unstable_nodes = 0;
  long long sum_neighbors = 0;
  long long sum_buffered = 0;
  double min_route_residual = std::numeric_limits<double>::infinity();

  std::vector<NodeId> reverse_path;        // intermediate forwarders, oldest first
  std::vector<NodeSnapshot> annotations;   // per path node, source first
};

inline AnnotatedRoute to_annotated_route(const RouteRequest& rreq) {
  return AnnotatedRoute{rreq.annotations};
}

/// Reply unicast hop-by-hop back along the discovered path.
/// path = source, forwarders..., destination.
struct RouteReply {
  NodeId source = kNoNode;
  NodeId destination = kNoNode;
  std::uint32_t flood_id = 0;
  std::vector<NodeId> path;
};

struct RouteError {
  NodeId broken_destination = kNoNode;
  NodeId target_source = kNoNode;
};

struct RouteEntry {
  NodeId destination = kNoNode;
  NodeId next_hop = kNoNode;
  int hop_count = 0;
  double established_at = 0.0;
  double last_used = 0.0;
  bool active = false;
  // Flow source that installed the entry; route errors are steered back
  // to it. kNoNode for entries with no flow behind them (reverse legs).
  NodeId learned_source = kNoNode;
};

struct DataPacket {
  long long id = 0;
  NodeId source = kNoNode;
  NodeId destination = kNoNode;
  double size = 0.0;  // bytes
  double created_at = 0.0;
  int retries = 0;
};

}  // namespace ecoroute
