#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecoroute/types.hpp"

namespace ecoroute {

enum class PolicyVariant { Proposed, Mtpr, Mbcr, Mmbcr, Cmmbcr, Far, Mmpr };

inline const char* policy_name(PolicyVariant v) {
  switch (v) {
    case PolicyVariant::Proposed: return "proposed";
    case PolicyVariant::Mtpr: return "mtpr";
    case PolicyVariant::Mbcr: return "mbcr";
    case PolicyVariant::Mmbcr: return "mmbcr";
    case PolicyVariant::Cmmbcr: return "cmmbcr";
    case PolicyVariant::Far: return "far";
    case PolicyVariant::Mmpr: return "mmpr";
  }
  return "?";
}

/// Route-scoring strategy plus its tuning knobs. The same policies score
/// offline route snapshots and, at the destination, live discovery
/// candidates (FAR assumes a static network and is offline-only).
struct CostPolicy {
  PolicyVariant variant = PolicyVariant::Proposed;
  // proposed: weights on unstable-node, neighbor and buffered-packet terms
  double w1 = 0.5;
  double w2 = 0.3;
  double w3 = 0.2;
  // cmmbcr: residual-energy threshold as a fraction of initial energy
  double gamma = 0.2;
  // far: link-cost exponents
  double x1 = 1.0;
  double x2 = 1.0;
  double x3 = 1.0;
  // mmpr: weight on the over-threshold penalty term
  double mmpr_T = 1.0;
};

/// Per-node state captured while a route candidate is assembled. One
/// snapshot per path node, in path order (source first, destination last).
struct NodeSnapshot {
  NodeId id = kNoNode;
  double residual = 0.0;    // joules left
  double initial = 0.0;     // joules at boot
  double tx_cost = 0.0;     // energy to transmit one data packet over the outgoing hop
  double rx_cost = 0.0;     // energy to receive one data packet
  double overhear_cost = 0.0;
  int neighbor_count = 0;
  int buffered_packets = 0;
  bool unstable = false;

  double used() const { return initial - residual; }
};

/// A candidate route with everything the policies read. links() is the
/// hop count; nodes.size() == links() + 1.
struct AnnotatedRoute {
  std::vector<NodeSnapshot> nodes;

  int links() const { return static_cast<int>(nodes.size()) - 1; }
};

/// Cost of a discovered route from the accumulators its request gathered:
/// each term is an average liability per intermediate node, weighted and
/// summed. A direct route has no intermediate nodes and costs zero.
inline double route_cost_proposed(int hop_count, int unstable_nodes, long long sum_neighbors,
                                  long long sum_buffered, double w1, double w2, double w3) {
  if (hop_count < 1) {
    throw std::invalid_argument("route cost needs hop_count >= 1, got " +
                                std::to_string(hop_count));
  }
  if (hop_count == 1) return 0.0;
  const double intermediates = hop_count - 1;
  return w1 * (unstable_nodes / intermediates) + w2 * (sum_neighbors / intermediates) +
         w3 * (sum_buffered / intermediates);
}

namespace detail {

inline double mtpr_score(const AnnotatedRoute& r) {
  double total = 0.0;
  for (int i = 0; i < r.links(); ++i) total += r.nodes[i].tx_cost;
  return total;
}

inline double mbcr_score(const AnnotatedRoute& r) {
  // Reluctance summed over intermediate nodes only.
  double total = 0.0;
  for (std::size_t i = 1; i + 1 < r.nodes.size(); ++i) total += 1.0 / r.nodes[i].residual;
  return total;
}

inline double mmbcr_score(const AnnotatedRoute& r) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& n : r.nodes) worst = std::max(worst, 1.0 / n.residual);
  return worst;
}

inline bool cmmbcr_qualified(const AnnotatedRoute& r, double gamma) {
  for (const auto& n : r.nodes) {
    if (!(n.residual > gamma * n.initial)) return false;
  }
  return true;
}

inline double far_score(const AnnotatedRoute& r, const CostPolicy& p) {
  double total = 0.0;
  for (int i = 0; i < r.links(); ++i) {
    const auto& n = r.nodes[i];
    total += std::pow(n.tx_cost, p.x1) * std::pow(n.initial, p.x2) * std::pow(n.residual, -p.x3);
  }
  return total;
}

inline double mmpr_node_cost(const NodeSnapshot& n, double etx, double alpha_used, double T) {
  const double base = n.used() + etx + n.rx_cost + (n.neighbor_count - 1) * n.overhear_cost;
  return base + T * std::max(0.0, base - alpha_used);
}

inline double mmpr_score(const AnnotatedRoute& r, const CostPolicy& p) {
  // alpha is the used energy of the route node with the least remaining
  // energy (first such node on ties).
  std::size_t weakest = 0;
  for (std::size_t i = 1; i < r.nodes.size(); ++i) {
    if (r.nodes[i].residual < r.nodes[weakest].residual) weakest = i;
  }
  const double alpha_used = r.nodes[weakest].used();
  double total = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double etx = (static_cast<int>(i) < r.links()) ? r.nodes[i].tx_cost : 0.0;
    total += mmpr_node_cost(r.nodes[i], etx, alpha_used, p.mmpr_T);
  }
  return total;
}

inline double proposed_score(const AnnotatedRoute& r, const CostPolicy& p) {
  int unstable = 0;
  long long neighbors = 0;
  long long buffered = 0;
  for (std::size_t i = 1; i + 1 < r.nodes.size(); ++i) {
    if (r.nodes[i].unstable) ++unstable;
    neighbors += r.nodes[i].neighbor_count;
    buffered += r.nodes[i].buffered_packets;
  }
  return route_cost_proposed(r.links(), unstable, neighbors, buffered, p.w1, p.w2, p.w3);
}

}  // namespace detail

/// Comparable score for destination-side replacement and offline argmin.
/// The tier makes the conditional policy's two regimes ordered: any
/// qualified candidate beats every unqualified one.
struct ScoreKey {
  int tier = 0;
  double value = 0.0;
};

inline bool operator<(const ScoreKey& a, const ScoreKey& b) {
  if (a.tier != b.tier) return a.tier < b.tier;
  return a.value < b.value;
}

inline double route_score(const CostPolicy& policy, const AnnotatedRoute& route) {
  switch (policy.variant) {
    case PolicyVariant::Proposed: return detail::proposed_score(route, policy);
    case PolicyVariant::Mtpr: return detail::mtpr_score(route);
    case PolicyVariant::Mbcr: return detail::mbcr_score(route);
    case PolicyVariant::Mmbcr: return detail::mmbcr_score(route);
    case PolicyVariant::Cmmbcr:
      return detail::cmmbcr_qualified(route, policy.gamma) ? detail::mtpr_score(route)
                                                           : detail::mmbcr_score(route);
    case PolicyVariant::Far: return detail::far_score(route, policy);
    case PolicyVariant::Mmpr: return detail::mmpr_score(route, policy);
  }
  throw std::logic_error("unknown policy variant");
}

inline ScoreKey route_score_key(const CostPolicy& policy, const AnnotatedRoute& route) {
  if (policy.variant == PolicyVariant::Cmmbcr) {
    const bool ok = detail::cmmbcr_qualified(route, policy.gamma);
    return ScoreKey{ok ? 0 : 1, ok ? detail::mtpr_score(route) : detail::mmbcr_score(route)};
  }
  return ScoreKey{0, route_score(policy, route)};
}

/// Index of the best candidate; earlier-listed wins ties. For the
/// conditional policy this selects by minimum transmission energy among
/// candidates whose nodes all sit above the battery threshold, falling
/// back to the min-max battery rule when no candidate does.
inline std::size_t select_route(const CostPolicy& policy,
                                const std::vector<AnnotatedRoute>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("select_route: no candidates");
  std::size_t best = 0;
  ScoreKey best_key = route_score_key(policy, candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const ScoreKey key = route_score_key(policy, candidates[i]);
    if (key < best_key) {
      best = i;
      best_key = key;
    }
  }
  return best;
}

}  // namespace ecoroute
