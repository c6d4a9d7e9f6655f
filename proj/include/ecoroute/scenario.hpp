#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecoroute/cost.hpp"
#include "ecoroute/energy.hpp"
#include "ecoroute/linklayer.hpp"
#include "ecoroute/mobility.hpp"

namespace ecoroute {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RltMode { Auto, On, Off };

struct EngineConfig {
  int node_count = 30;
  double sim_time = 900.0;
  int runs = 10;
  std::vector<std::uint64_t> seed_list;  // empty = seeds 1..runs
  std::string sweep_key;                 // empty = no sweep
  std::vector<double> sweep_values;
  double metric_sample_interval = 0.0;   // 0 = no periodic energy samples
};

struct EnergyConfig {
  EnergyModel model;
  double initial_energy = 1200.0;
  double ewma_alpha = 0.3;
  double sample_interval = 1.0;
};

struct MobilityConfig {
  Terrain terrain;
  MobilityParams params;
};

struct LinkConfig {
  RadioConfig radio;
  bool beacons_enabled = true;
  double beacon_interval = 0.5;
  double beacon_size = 32.0;  // bytes
  double neighbor_timeout = 1.5;
  double stability_window = 2.0;
  double stability_threshold = 0.5;
  int buffer_capacity = 64;
};

struct RoutingConfig {
  PolicyVariant protocol = PolicyVariant::Proposed;
  CostPolicy policy;
  double buffering_time = 0.100;
  double relay_factor = 2.0;  // each relayed byte is received and retransmitted
  double rreq_size = 72.0;
  double rrep_size = 44.0;
  double rerr_size = 32.0;
  RltMode rlt_filter = RltMode::Auto;
  double discovery_timeout = 1.0;
  int rreq_retries = 2;
  double data_retry_timeout = 0.5;
  double forward_delay = 0.040;        // per-hop request forwarding latency
  double active_route_timeout = 3.0;   // unused entries expire silently

  /// The lifetime filter belongs to the proposed discovery scheme; the
  /// baseline policies ride plain flooding unless forced on.
  bool rlt_filter_enabled() const {
    switch (rlt_filter) {
      case RltMode::On: return true;
      case RltMode::Off: return false;
      case RltMode::Auto: return protocol == PolicyVariant::Proposed;
    }
    return false;
  }
};

struct FlowSpec {
  NodeId source = kNoNode;
  NodeId destination = kNoNode;
  double start = 0.0;
};

struct TrafficConfig {
  double packet_size = 512.0;  // bytes
  double interval = 0.25;      // seconds between packets
  int flow_count = -1;         // -1 = auto: max(1, node_count / 10)
  double start_window = 10.0;  // flow starts drawn uniformly from [0, start_window]
  std::vector<FlowSpec> flows; // explicit flows override the drawn ones
};

struct Scenario {
  EngineConfig engine;
  EnergyConfig energy;
  MobilityConfig mobility;
  LinkConfig link;
  RoutingConfig routing;
  TrafficConfig traffic;

  void apply(const std::string& key, const std::string& value);
  void validate() const;

  std::vector<std::uint64_t> seeds() const {
    if (!engine.seed_list.empty()) return engine.seed_list;
    std::vector<std::uint64_t> s;
    for (int i = 1; i <= engine.runs; ++i) s.push_back(static_cast<std::uint64_t>(i));
    return s;
  }

  int effective_flow_count() const {
    if (!traffic.flows.empty()) return static_cast<int>(traffic.flows.size());
    if (traffic.flow_count >= 0) return traffic.flow_count;
    return std::max(1, engine.node_count / 10);
  }

  static Scenario parse(std::istream& in);
  static Scenario load(const std::string& path);
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& raw) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(raw, &pos);
    while (pos < raw.size() && std::isspace(static_cast<unsigned char>(raw[pos]))) ++pos;
    if (pos != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ScenarioError(key + ": not a number: '" + raw + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& raw) {
  const double v = parse_double(key, raw);
  const long long i = static_cast<long long>(v);
  if (static_cast<double>(i) != v) throw ScenarioError(key + ": expected an integer, got '" + raw + "'");
  return i;
}

inline void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ScenarioError(key + ": " + what);
}

inline std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : raw) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

inline PolicyVariant parse_protocol(const std::string& key, const std::string& raw) {
  for (PolicyVariant v : {PolicyVariant::Proposed, PolicyVariant::Mtpr, PolicyVariant::Mbcr,
                          PolicyVariant::Mmbcr, PolicyVariant::Cmmbcr, PolicyVariant::Far,
                          PolicyVariant::Mmpr}) {
    if (raw == policy_name(v)) {
      if (v == PolicyVariant::Far) {
        throw ScenarioError(key + ": far evaluates static graph snapshots offline only and "
                                  "cannot run in-protocol");
      }
      return v;
    }
  }
  throw ScenarioError(key + ": unknown protocol '" + raw +
                      "' (expected proposed|mtpr|mbcr|mmbcr|cmmbcr|mmpr)");
}

using KeySetter = std::function<void(Scenario&, const std::string& key, const std::string& value)>;

inline const std::map<std::string, KeySetter>& scenario_keys() {
  static const std::map<std::string, KeySetter> table = [] {
    std::map<std::string, KeySetter> t;

    auto add_double = [&t](const char* name, std::function<double&(Scenario&)> field,
                           std::function<void(const std::string&, double)> check) {
      t[name] = [field, check](Scenario& s, const std::string& key, const std::string& raw) {
        const double v = parse_double(key, raw);
        check(key, v);
        field(s) = v;
      };
    };
    auto add_int = [&t](const char* name, std::function<int&(Scenario&)> field,
                        std::function<void(const std::string&, long long)> check) {
      t[name] = [field, check](Scenario& s, const std::string& key, const std::string& raw) {
        const long long v = parse_int(key, raw);
        check(key, v);
        field(s) = static_cast<int>(v);
      };
    };
    auto positive = [](const std::string& key, double v) {
      require(v > 0.0, key, "must be > 0, got " + std::to_string(v));
    };
    auto nonneg = [](const std::string& key, double v) {
      require(v >= 0.0, key, "must be >= 0, got " + std::to_string(v));
    };
    auto fraction = [](const std::string& key, double v) {
      require(v >= 0.0 && v <= 1.0, key, "must be in [0, 1], got " + std::to_string(v));
    };
    auto ipositive = [](const std::string& key, long long v) {
      require(v >= 1, key, "must be >= 1, got " + std::to_string(v));
    };
    auto inonneg = [](const std::string& key, long long v) {
      require(v >= 0, key, "must be >= 0, got " + std::to_string(v));
    };

    add_int("engine.node_count", [](Scenario& s) -> int& { return s.engine.node_count; }, ipositive);
    add_double("engine.sim_time", [](Scenario& s) -> double& { return s.engine.sim_time; }, positive);
    add_int("engine.runs", [](Scenario& s) -> int& { return s.engine.runs; }, ipositive);
    t["engine.seed_list"] = [](Scenario& s, const std::string& key, const std::string& raw) {
      s.engine.seed_list.clear();
      for (const auto& part : split_list(raw)) {
        s.engine.seed_list.push_back(static_cast<std::uint64_t>(parse_int(key, part)));
      }
      require(!s.engine.seed_list.empty(), key, "empty seed list");
    };
    t["engine.sweep"] = [](Scenario& s, const std::string& key, const std::string& raw) {
      require(!raw.empty(), key, "empty sweep key");
      s.engine.sweep_key = raw;
    };
    t["engine.sweep_values"] = [](Scenario& s, const std::string& key, const std::string& raw) {
      s.engine.sweep_values.clear();
      for (const auto& part : split_list(raw)) {
        s.engine.sweep_values.push_back(parse_double(key, part));
      }
      require(!s.engine.sweep_values.empty(), key, "empty sweep value list");
    };
    add_double("engine.metric_sample_interval",
               [](Scenario& s) -> double& { return s.engine.metric_sample_interval; }, nonneg);

    add_double("energy.tx_current", [](Scenario& s) -> double& { return s.energy.model.tx_current; }, positive);
    add_double("energy.rx_current", [](Scenario& s) -> double& { return s.energy.model.rx_current; }, positive);
    add_double("energy.voltage", [](Scenario& s) -> double& { return s.energy.model.voltage; }, positive);
    add_double("energy.bandwidth", [](Scenario& s) -> double& { return s.energy.model.bandwidth; }, positive);
    add_double("energy.initial_energy", [](Scenario& s) -> double& { return s.energy.initial_energy; }, positive);
    add_double("energy.ewma_alpha", [](Scenario& s) -> double& { return s.energy.ewma_alpha; }, fraction);
    add_double("energy.sample_interval", [](Scenario& s) -> double& { return s.energy.sample_interval; }, positive);

    add_double("mobility.terrain_width", [](Scenario& s) -> double& { return s.mobility.terrain.width; }, positive);
    add_double("mobility.terrain_height", [](Scenario& s) -> double& { return s.mobility.terrain.height; }, positive);
    add_double("mobility.min_speed", [](Scenario& s) -> double& { return s.mobility.params.min_speed; }, nonneg);
    add_double("mobility.max_speed", [](Scenario& s) -> double& { return s.mobility.params.max_speed; }, nonneg);
    add_double("mobility.pause_time", [](Scenario& s) -> double& { return s.mobility.params.pause_time; }, nonneg);
    add_double("mobility.tick", [](Scenario& s) -> double& { return s.mobility.params.tick; }, positive);

    add_double("link.radio_range", [](Scenario& s) -> double& { return s.link.radio.range; }, positive);
    add_double("link.propagation_delay", [](Scenario& s) -> double& { return s.link.radio.propagation_delay; }, nonneg);
    t["link.loss_probability"] = [](Scenario& s, const std::string& key, const std::string& raw) {
      const double v = parse_double(key, raw);
      require(v >= 0.0 && v < 1.0, key, "must be in [0, 1), got " + std::to_string(v));
      s.link.radio.loss_probability = v;
    };
    t["link.beacons"] = [](Scenario& s, const std::string& key, const std::string& raw) {
      if (raw == "on") s.link.beacons_enabled = true;
      else if (raw == "off") s.link.beacons_enabled = false;
      else throw ScenarioError(key + ": expected on|off, got '" + raw + "'");
    };
    add_double("link.beacon_interval", [](Scenario& s) -> double& { return s.link.beacon_interval; }, positive);
    add_double("link.beacon_size", [](Scenario& s) -> double& { return s.link.beacon_size; }, nonneg);
    add_double("link.neighbor_timeout", [](Scenario& s) -> double& { return s.link.neighbor_timeout; }, positive);
    add_double("link.stability_window", [](Scenario& s) -> double& { return s.link.stability_window; }, positive);
    add_double("link.stability_threshold", [](Scenario& s) -> double& { return s.link.stability_threshold; }, fraction);
    add_int("link.buffer_capacity", [](Scenario& s) -> int& { return s.link.buffer_capacity; }, ipositive);

    t["routing.protocol"] = [](Scenario& s, const std::string& key, const std::string& raw) {
      s.routing.protocol = parse_protocol(key, raw);
      s.routing.policy.variant = s.routing.protocol;
    };
    add_double("routing.w1", [](Scenario& s) -> double& { return s.routing.policy.w1; }, nonneg);
    add_double("routing.w2", [](Scenario& s) -> double& { return s.routing.policy.w2; }, nonneg);
    add_double("routing.w3", [](Scenario& s) -> double& { return s.routing.policy.w3; }, nonneg);
    add_double("routing.gamma", [](Scenario& s) -> double& { return s.routing.policy.gamma; }, fraction);
    add_double("routing.x1", [](Scenario& s) -> double& { return s.routing.policy.x1; }, nonneg);
    add_double("routing.x2", [](Scenario& s) -> double& { return s.routing.policy.x2; }, nonneg);
    add_double("routing.x3", [](Scenario& s) -> double& { return s.routing.policy.x3; }, nonneg);
    add_double("routing.mmpr_T", [](Scenario& s) -> double& { return s.routing.policy.mmpr_T; }, nonneg);
    add_double("routing.buffering_time", [](Scenario& s) -> double& { return s.routing.buffering_time; }, positive);
    add_double("routing.relay_factor", [](Scenario& s) -> double& { return s.routing.relay_factor; }, positive);
    add_double("routing.rreq_size", [](Scenario& s) -> double& { return s.routing.rreq_size; }, positive);
    add_double("routing.rrep_size", [](Scenario& s) -> double& { return s.routing.rrep_size; }, positive);
    add_double("routing.rerr_size", [](Scenario& s) -> double& { return s.routing.rerr_size; }, positive);
    t["routing.rlt_filter"] = [](Scenario& s, const std::string& key, const std::string& raw) {
      if (raw == "auto") s.routing.rlt_filter = RltMode::Auto;
      else if (raw == "on") s.routing.rlt_filter = RltMode::On;
      else if (raw == "off") s.routing.rlt_filter = RltMode::Off;
      else throw ScenarioError(key + ": expected auto|on|off, got '" + raw + "'");
    };
    add_double("routing.discovery_timeout", [](Scenario& s) -> double& { return s.routing.discovery_timeout; }, positive);
    add_int("routing.rreq_retries", [](Scenario& s) -> int& { return s.routing.rreq_retries; }, inonneg);
    add_double("routing.data_retry_timeout", [](Scenario& s) -> double& { return s.routing.data_retry_timeout; }, positive);
    add_double("routing.forward_delay", [](Scenario& s) -> double& { return s.routing.forward_delay; }, nonneg);
    add_double("routing.active_route_timeout", [](Scenario& s) -> double& { return s.routing.active_route_timeout; }, positive);

    add_double("traffic.packet_size", [](Scenario& s) -> double& { return s.traffic.packet_size; }, positive);
    add_double("traffic.interval", [](Scenario& s) -> double& { return s.traffic.interval; }, positive);
    t["traffic.flow_count"] = [](Scenario& s, const std::string& key, const std::string& raw) {
      if (raw == "auto") {
        s.traffic.flow_count = -1;
        return;
      }
      const long long v = parse_int(key, raw);
      require(v >= 0, key, "must be >= 0 or 'auto', got " + raw);
      s.traffic.flow_count = static_cast<int>(v);
    };
    add_double("traffic.start_window", [](Scenario& s) -> double& { return s.traffic.start_window; }, nonneg);
    t["traffic.flow_list"] = [](Scenario& s, const std::string& key, const std::string& raw) {
      s.traffic.flows.clear();
      for (const auto& part : split_list(raw)) {
        FlowSpec f;
        const auto c1 = part.find(':');
        const auto c2 = part.find(':', c1 == std::string::npos ? c1 : c1 + 1);
        require(c1 != std::string::npos && c2 != std::string::npos, key,
                "flow must be src:dst:start, got '" + part + "'");
        f.source = static_cast<NodeId>(parse_int(key, part.substr(0, c1)));
        f.destination = static_cast<NodeId>(parse_int(key, part.substr(c1 + 1, c2 - c1 - 1)));
        f.start = parse_double(key, part.substr(c2 + 1));
        require(f.start >= 0.0, key, "flow start must be >= 0");
        s.traffic.flows.push_back(f);
      }
    };
    return t;
  }();
  return table;
}

}  // namespace detail

inline void Scenario::apply(const std::string& key, const std::string& value) {
  const auto& table = detail::scenario_keys();
  auto it = table.find(key);
  if (it == table.end()) throw ScenarioError("unknown key '" + key + "'");
  it->second(*this, key, value);
}

inline void Scenario::validate() const {
  using detail::require;
  require(mobility.params.max_speed >= mobility.params.min_speed, "mobility.max_speed",
          "must be >= mobility.min_speed");
  if (!engine.sweep_key.empty()) {
    require(!engine.sweep_values.empty(), "engine.sweep_values",
            "required when engine.sweep is set");
    const auto& table = detail::scenario_keys();
    require(table.count(engine.sweep_key) > 0, "engine.sweep",
            "unknown sweep key '" + engine.sweep_key + "'");
    require(engine.sweep_key != "engine.sweep" && engine.sweep_key != "engine.sweep_values" &&
                engine.sweep_key != "engine.seed_list",
            "engine.sweep", "cannot sweep '" + engine.sweep_key + "'");
  } else {
    require(engine.sweep_values.empty(), "engine.sweep_values",
            "engine.sweep must name the swept key");
  }
  for (const auto& f : traffic.flows) {
    require(f.source >= 0 && f.source < engine.node_count, "traffic.flow_list",
            "flow source " + std::to_string(f.source) + " outside 0.." +
                std::to_string(engine.node_count - 1));
    require(f.destination >= 0 && f.destination < engine.node_count, "traffic.flow_list",
            "flow destination " + std::to_string(f.destination) + " outside 0.." +
                std::to_string(engine.node_count - 1));
  }
  if (traffic.flows.empty() && effective_flow_count() > 0) {
    require(engine.node_count >= 2 || effective_flow_count() == 0, "traffic.flow_count",
            "auto flows need at least 2 nodes");
  }
}

inline Scenario Scenario::parse(std::istream& in) {
  Scenario s;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip comment and surrounding whitespace
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ScenarioError("line " + std::to_string(lineno) + ": expected key = value");
    }
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string();
      const auto e = v.find_last_not_of(" \t");
      return v.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      s.apply(key, value);
    } catch (const ScenarioError& e) {
      throw ScenarioError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  s.validate();
  return s;
}

inline Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  try {
    return parse(in);
  } catch (const ScenarioError& e) {
    throw ScenarioError(path + ": " + e.what());
  }
}

}  // namespace ecoroute
