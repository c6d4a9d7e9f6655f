#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ecoroute {

struct NodeEnergyRow {
  double initial = 0.0;
  double residual = 0.0;
  double drawn_tx = 0.0;
  double drawn_rx = 0.0;
  double drawn_overhear = 0.0;

  friend bool operator==(const NodeEnergyRow&, const NodeEnergyRow&) = default;
};

/// Per-run counters behind the overhead and energy comparisons.
/// control_packets counts transmissions, never receptions.
struct MetricsLedger {
  long long control_packets = 0;
  long long control_rreq = 0;
  long long control_rrep = 0;
  long long control_rerr = 0;
  long long control_beacon = 0;

  double used_energy = 0.0;  // running sum of every logged battery draw

  long long data_sent = 0;
  long long data_delivered = 0;
  long long data_dropped_buffer = 0;
  long long data_dropped_no_route = 0;
  long long data_dropped_loss = 0;
  long long data_in_flight_end = 0;
  long long data_retransmissions = 0;

  long long rreq_dropped_by_rlt = 0;
  long long discoveries = 0;

  std::vector<NodeEnergyRow> per_node;
  std::vector<std::pair<double, double>> energy_series;  // (time, used_energy)

  friend bool operator==(const MetricsLedger&, const MetricsLedger&) = default;
};

struct MetricField {
  const char* name;
  double (*get)(const MetricsLedger&);
};

/// The scalar metrics that are averaged across runs and written to CSV.
inline const std::array<MetricField, 8>& metric_fields() {
  static const std::array<MetricField, 8> fields = {{
      {"control_packets", [](const MetricsLedger& m) { return double(m.control_packets); }},
      {"used_energy_J", [](const MetricsLedger& m) { return m.used_energy; }},
      {"data_sent", [](const MetricsLedger& m) { return double(m.data_sent); }},
      {"data_delivered", [](const MetricsLedger& m) { return double(m.data_delivered); }},
      {"rreq_dropped_by_rlt", [](const MetricsLedger& m) { return double(m.rreq_dropped_by_rlt); }},
      {"discoveries", [](const MetricsLedger& m) { return double(m.discoveries); }},
      {"data_dropped_buffer", [](const MetricsLedger& m) { return double(m.data_dropped_buffer); }},
      {"data_dropped_no_route",
       [](const MetricsLedger& m) { return double(m.data_dropped_no_route); }},
  }};
  return fields;
}

struct AggregateStats {
  std::size_t runs = 0;
  std::vector<double> mean;    // aligned with metric_fields()
  std::vector<double> stddev;  // sample standard deviation; 0 for a single run

  double mean_of(const char* name) const { return lookup(mean, name); }
  double stddev_of(const char* name) const { return lookup(stddev, name); }

 private:
  static double lookup(const std::vector<double>& v, const char* name) {
    const auto& fields = metric_fields();
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (std::string_view(fields[i].name) == name) return v[i];
    }
    throw std::invalid_argument(std::string("unknown metric: ") + name);
  }
};

/// Mean and sample standard deviation per metric over a batch of runs.
inline AggregateStats aggregate(const std::vector<MetricsLedger>& ledgers) {
  if (ledgers.empty()) throw std::invalid_argument("aggregate: no ledgers");
  const auto& fields = metric_fields();
  AggregateStats out;
  out.runs = ledgers.size();
  out.mean.assign(fields.size(), 0.0);
  out.stddev.assign(fields.size(), 0.0);
  for (std::size_t f = 0; f < fields.size(); ++f) {
    double sum = 0.0;
    for (const auto& l : ledgers) sum += fields[f].get(l);
    out.mean[f] = sum / static_cast<double>(ledgers.size());
  }
  if (ledgers.size() > 1) {
    for (std::size_t f = 0; f < fields.size(); ++f) {
      double ss = 0.0;
      for (const auto& l : ledgers) {
        const double d = fields[f].get(l) - out.mean[f];
        ss += d * d;
      }
      out.stddev[f] = std::sqrt(ss / static_cast<double>(ledgers.size() - 1));
    }
  }
  return out;
}

}  // namespace ecoroute
