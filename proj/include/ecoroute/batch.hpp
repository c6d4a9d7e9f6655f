#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "ecoroute/metrics.hpp"
#include "ecoroute/scenario.hpp"
#include "ecoroute/simulation.hpp"

namespace ecoroute {

struct BatchOptions {
  std::vector<PolicyVariant> protocols;  // empty = scenario's protocol only
  std::optional<int> seed_count;         // overrides scenario runs
  std::vector<std::uint64_t> seed_list;  // overrides everything else
  int threads = 0;                       // 0 = auto (ECOROUTE_THREADS, then hardware)
  std::ostream* trace_out = nullptr;     // forces single-threaded execution
};

struct RunRow {
  std::string sweep_param;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  PolicyVariant protocol = PolicyVariant::Proposed;
  MetricsLedger ledger;
};

namespace detail {

inline std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline int batch_threads(const BatchOptions& opt, std::size_t jobs) {
  if (opt.trace_out) return 1;
  int t = opt.threads;
  if (t <= 0) {
    if (const char* env = std::getenv("ECOROUTE_THREADS")) {
      t = std::atoi(env);
    }
  }
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  if (t <= 0) t = 1;
  return static_cast<int>(std::min<std::size_t>(t, jobs));
}

}  // namespace detail

inline std::vector<std::uint64_t> batch_seeds(const Scenario& scn, const BatchOptions& opt) {
  if (!opt.seed_list.empty()) return opt.seed_list;
  if (opt.seed_count) {
    std::vector<std::uint64_t> s;
    for (int i = 1; i <= *opt.seed_count; ++i) s.push_back(static_cast<std::uint64_t>(i));
    return s;
  }
  return scn.seeds();
}

/// Runs the full sweep x seed x protocol grid. Rows come back in
/// deterministic (sweep, seed, protocol) order regardless of how the
/// worker threads interleave.
inline std::vector<RunRow> execute_batch(const Scenario& scenario, const BatchOptions& opt) {
  const std::vector<std::uint64_t> seeds = batch_seeds(scenario, opt);
  std::vector<PolicyVariant> protocols = opt.protocols;
  if (protocols.empty()) protocols.push_back(scenario.routing.protocol);

  const bool swept = !scenario.engine.sweep_key.empty();
  std::vector<double> sweep_values =
      swept ? scenario.engine.sweep_values : std::vector<double>{0.0};

  struct Job {
    Scenario scenario;
    RunRow row;
  };
  std::vector<Job> jobs;
  for (double value : sweep_values) {
    Scenario base = scenario;
    if (swept) base.apply(scenario.engine.sweep_key, detail::format_value(value));
    base.engine.sweep_key.clear();
    base.engine.sweep_values.clear();
    base.validate();
    for (std::uint64_t seed : seeds) {
      for (PolicyVariant protocol : protocols) {
        Job job;
        job.scenario = base;
        job.scenario.routing.protocol = protocol;
        job.scenario.routing.policy.variant = protocol;
        job.row.sweep_param = swept ? scenario.engine.sweep_key : "none";
        job.row.sweep_value = value;
        job.row.seed = seed;
        job.row.protocol = protocol;
        jobs.push_back(std::move(job));
      }
    }
  }

  std::vector<RunRow> rows(jobs.size());
  const int threads = detail::batch_threads(opt, jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        Simulation sim(jobs[i].scenario, jobs[i].row.seed);
        if (opt.trace_out) {
          std::ostream& out = *opt.trace_out;
          sim.set_trace([&out](double t, NodeId node, EventKind kind, const std::string& detail) {
            char head[64];
            std::snprintf(head, sizeof(head), "%.9f\t%d\t", t, node);
            out << head << event_kind_name(kind) << '\t' << detail << '\n';
          });
        }
        rows[i] = jobs[i].row;
        rows[i].ledger = sim.run_until(jobs[i].scenario.engine.sim_time);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return rows;
}

/// One row per run plus one aggregate (mean over seeds) row per
/// (sweep value, protocol) pair, appended after all run rows.
inline void write_csv(std::ostream& out, const std::vector<RunRow>& rows) {
  out << "sweep_param,sweep_value,seed,protocol,control_packets,used_energy_J,data_sent,"
         "data_delivered,rreq_dropped_by_rlt,discoveries\n";
  auto metrics_of = [](const MetricsLedger& m) {
    return std::vector<double>{double(m.control_packets), m.used_energy,     double(m.data_sent),
                               double(m.data_delivered),  double(m.rreq_dropped_by_rlt),
                               double(m.discoveries)};
  };
  for (const auto& r : rows) {
    out << r.sweep_param << ',' << detail::format_value(r.sweep_value) << ',' << r.seed << ','
        << policy_name(r.protocol);
    for (double v : metrics_of(r.ledger)) out << ',' << detail::format_value(v);
    out << '\n';
  }
  // aggregates in first-seen (sweep value, protocol) order
  std::vector<std::pair<double, PolicyVariant>> groups;
  for (const auto& r : rows) {
    const std::pair<double, PolicyVariant> g{r.sweep_value, r.protocol};
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  }
  for (const auto& [value, protocol] : groups) {
    std::vector<double> sums(6, 0.0);
    std::size_t count = 0;
    std::string param = "none";
    for (const auto& r : rows) {
      if (r.sweep_value != value || r.protocol != protocol) continue;
      const auto m = metrics_of(r.ledger);
      for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += m[i];
      ++count;
      param = r.sweep_param;
    }
    out << param << ',' << detail::format_value(value) << ",mean," << policy_name(protocol);
    for (double s : sums) out << ',' << detail::format_value(s / double(count));
    out << '\n';
  }
}

/// Per-node battery breakdown, one row per (run, node).
inline void write_per_node_csv(std::ostream& out, const std::vector<RunRow>& rows) {
  out << "sweep_param,sweep_value,seed,protocol,node,initial_J,residual_J,drawn_tx_J,"
         "drawn_rx_J,drawn_overhear_J\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.ledger.per_node.size(); ++i) {
      const NodeEnergyRow& n = r.ledger.per_node[i];
      out << r.sweep_param << ',' << detail::format_value(r.sweep_value) << ',' << r.seed << ','
          << policy_name(r.protocol) << ',' << i << ',' << detail::format_value(n.initial) << ','
          << detail::format_value(n.residual) << ',' << detail::format_value(n.drawn_tx) << ','
          << detail::format_value(n.drawn_rx) << ',' << detail::format_value(n.drawn_overhear)
          << '\n';
    }
  }
}

/// Full batch with CSV output. Returns the process exit status: 0 on
/// success, 2 when a run fails or the output cannot be written (a partial
/// file is removed rather than left behind).
inline int run_batch(const Scenario& scenario, const BatchOptions& opt,
                     const std::string& out_path, std::string* error = nullptr,
                     const std::string& per_node_path = {}) {
  std::vector<RunRow> rows;
  try {
    rows = execute_batch(scenario, opt);
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return 2;
  }
  auto emit = [&](const std::string& path, auto writer) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
      if (error) *error = "cannot write output file: " + path;
      return false;
    }
    writer(out);
    out.flush();
    if (!out) {
      out.close();
      std::remove(path.c_str());
      if (error) *error = "write failed: " + path;
      return false;
    }
    return true;
  };
  if (!emit(out_path, [&](std::ostream& o) { write_csv(o, rows); })) return 2;
  if (!per_node_path.empty() &&
      !emit(per_node_path, [&](std::ostream& o) { write_per_node_csv(o, rows); })) {
    return 2;
  }
  return 0;
}

}  // namespace ecoroute
