// ecoroute command line: batch execution, scenario linting and single-run
// event tracing for the energy-aware route discovery simulator.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ecoroute/ecoroute.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::vector<ecoroute::PolicyVariant> parse_protocols(const std::string& list) {
  std::vector<ecoroute::PolicyVariant> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    bool found = false;
    for (auto v : {ecoroute::PolicyVariant::Proposed, ecoroute::PolicyVariant::Mtpr,
                   ecoroute::PolicyVariant::Mbcr, ecoroute::PolicyVariant::Mmbcr,
                   ecoroute::PolicyVariant::Cmmbcr, ecoroute::PolicyVariant::Mmpr}) {
      if (cur == ecoroute::policy_name(v)) {
        out.push_back(v);
        found = true;
        break;
      }
    }
    if (!found) {
      throw ecoroute::ScenarioError("--protocols: unknown protocol '" + cur +
                                    "' (expected proposed|mtpr|mbcr|mmbcr|cmmbcr|mmpr)");
    }
    cur.clear();
  };
  for (char c : list) {
    if (c == ',' || c == ' ') {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& list) {
  std::vector<std::uint64_t> out;
  std::string cur;
  for (char c : list + ",") {
    if (c == ',' || c == ' ') {
      if (!cur.empty()) out.push_back(std::stoull(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ecoroute: energy-aware route discovery simulator for mobile ad hoc networks"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::optional<int> seeds_n;
  std::string seed_list;
  std::string protocols;
  bool trace_runs = false;

  std::string per_node_path;
  auto* run = app.add_subcommand("run", "run a batch over sweep values, seeds and protocols");
  run->add_option("--scenario", scenario_path, "scenario file")->required();
  run->add_option("--out", out_path, "CSV output path")->required();
  run->add_option("--per-node-out", per_node_path, "per-node energy CSV path");
  run->add_option("--seeds", seeds_n, "run seeds 1..N");
  run->add_option("--seed-list", seed_list, "explicit comma-separated seeds");
  run->add_option("--protocols", protocols, "comma-separated protocols to compare");
  run->add_flag("--trace", trace_runs, "log every dispatched event to stdout (single-threaded)");

  auto* validate = app.add_subcommand("validate", "parse and validate a scenario file");
  validate->add_option("--scenario", scenario_path, "scenario file")->required();

  std::optional<std::uint64_t> trace_seed;
  auto* trace = app.add_subcommand("trace", "single run with a per-event log");
  trace->add_option("--scenario", scenario_path, "scenario file")->required();
  trace->add_option("--out", out_path, "trace output path (default stdout)");
  trace->add_option("--seed", trace_seed, "seed for the traced run (default first seed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (validate->parsed()) {
      const auto scn = ecoroute::Scenario::load(scenario_path);
      std::cout << "OK: " << scn.engine.node_count << " nodes, " << scn.engine.sim_time
                << " s horizon, " << scn.seeds().size() << " seeds, protocol "
                << ecoroute::policy_name(scn.routing.protocol);
      if (!scn.engine.sweep_key.empty()) {
        std::cout << ", sweep " << scn.engine.sweep_key << " over "
                  << scn.engine.sweep_values.size() << " values";
      }
      std::cout << "\n";
      return kExitOk;
    }

    if (run->parsed()) {
      const auto scn = ecoroute::Scenario::load(scenario_path);
      ecoroute::BatchOptions opt;
      if (seeds_n) opt.seed_count = *seeds_n;
      if (!seed_list.empty()) opt.seed_list = parse_seed_list(seed_list);
      if (!protocols.empty()) opt.protocols = parse_protocols(protocols);
      if (trace_runs) opt.trace_out = &std::cout;
      std::string error;
      const int status = ecoroute::run_batch(scn, opt, out_path, &error, per_node_path);
      if (status != 0) {
        std::cerr << "error: " << error << "\n";
      }
      return status;
    }

    if (trace->parsed()) {
      auto scn = ecoroute::Scenario::load(scenario_path);
      if (!scn.engine.sweep_key.empty()) {
        // trace the first sweep point
        scn.apply(scn.engine.sweep_key,
                  ecoroute::detail::format_value(scn.engine.sweep_values.front()));
        scn.engine.sweep_key.clear();
        scn.engine.sweep_values.clear();
        scn.validate();
      }
      const std::uint64_t seed = trace_seed ? *trace_seed : scn.seeds().front();
      std::ofstream file;
      std::ostream* out = &std::cout;
      if (!out_path.empty()) {
        file.open(out_path, std::ios::binary | std::ios::trunc);
        if (!file) {
          std::cerr << "error: cannot write output file: " << out_path << "\n";
          return kExitRuntime;
        }
        out = &file;
      }
      ecoroute::Simulation sim(scn, seed);
      sim.set_trace([out](double t, ecoroute::NodeId node, ecoroute::EventKind kind,
                          const std::string& detail) {
        char head[64];
        std::snprintf(head, sizeof(head), "%.9f\t%d\t", t, node);
        *out << head << ecoroute::event_kind_name(kind) << '\t' << detail << '\n';
      });
      sim.run_until(scn.engine.sim_time);
      return kExitOk;
    }
  } catch (const ecoroute::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
