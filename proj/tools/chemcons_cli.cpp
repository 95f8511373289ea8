// chemcons command-line interface.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 runtime error.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "chemcons/crn_analysis.hpp"
#include "chemcons/error.hpp"
#include "chemcons/record_io.hpp"
#include "chemcons/scenario.hpp"
#include "chemcons/topology.hpp"

namespace fs = std::filesystem;
using namespace chemcons;
using nlohmann::json;

namespace {

constexpr int exit_config = 1;
constexpr int exit_runtime = 2;

fs::path default_out_root() {
  if (const char* env = std::getenv("CHEMCONS_OUT"); env && *env) return env;
  return "runs";
}

fs::path run_dir(const std::string& config_path, const std::string& out) {
  if (!out.empty()) return out;
  return default_out_root() / fs::path(config_path).stem();
}

std::string optional_seconds(const std::optional<double>& t) { return t ? format_double(*t) + " s" : "never"; }

void print_summary(std::ostream& os, const RunRecord& record, const fs::path& dir) {
  const auto& m = record.metrics;
  os << "algorithm:        " << to_string(record.config.algorithm) << "\n"
     << "nodes:            " << record.config.z.size() << "\n"
     << "samples:          " << record.samples.size() << "\n"
     << "final nmse:       " << (m.nmse.empty() ? "n/a" : format_double(m.nmse.back())) << "\n"
     << "final mean:       " << format_double(m.final_mean) << "\n"
     << "convergence time: " << optional_seconds(m.convergence_time) << " (nmse < " << format_double(m.threshold)
     << ")\n"
     << "output:           " << dir.string() << "\n";
}

struct RunOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  bool with_oracle = false;
};

int cmd_run(const RunOptions& o) {
  auto config = load_scenario(o.config);
  if (o.seed) config.set_seed(*o.seed);
  if (o.duration) {
    if (!(*o.duration > 0.0)) throw ConfigError(ErrorCode::schema, "--duration must be positive");
    config.duration = *o.duration;
  }
  const auto record = run_scenario(config);
  const fs::path dir = run_dir(o.config, o.out);
  write_run(record, dir);
  if (o.with_oracle && is_chemical(config.algorithm)) {
    std::ofstream os(dir / "oracle.csv", std::ios::binary);
    write_states_csv(os, run_oracle(config));
    if (!os) throw std::runtime_error("failed writing oracle.csv");
  }
  print_summary(std::cout, record, dir);
  return 0;
}

int cmd_analyze(const std::string& path, bool as_json) {
  const auto config = load_scenario(path);
  const auto g = build_graph(config);
  json report = consensus_analysis(g);
  report["topology"] = to_string(config.topology.kind);
  report["nodes"] = g.size();
  if (as_json) {
    std::cout << report.dump(2) << "\n";
    return 0;
  }
  std::cout << "network:           " << report["network"].get<std::string>() << "\n"
            << "topology:          " << to_string(config.topology.kind) << ", M = " << g.size() << "\n"
            << "complexes:         " << report["complexes"] << "\n"
            << "linkage classes:   " << report["linkage_classes"] << "\n"
            << "rank:              " << report["rank"] << "\n"
            << "deficiency:        " << report["deficiency"] << "\n"
            << "weakly reversible: " << (report["weakly_reversible"].get<bool>() ? "yes" : "no") << "\n"
            << "verdict:           " << report["verdict"].get<std::string>() << "\n"
            << "lambda_2:          " << std::setprecision(10) << report["algebraic_connectivity"].get<double>()
            << "\n";
  return 0;
}

struct TopologyOptions {
  std::string kind;
  std::size_t nodes = 0;
  std::size_t k = 3;
  std::size_t edges = 0;
  double rewire_p = 0.5;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_topology(const TopologyOptions& o) {
  TopologySpec spec;
  spec.kind = parse_topology_kind(o.kind);
  if (spec.kind == TopologyKind::edge_list) throw ConfigError(ErrorCode::schema, "topology kind must be a generator");
  spec.nodes = o.nodes;
  spec.k = o.k;
  spec.edges = o.edges;
  spec.rewire_p = o.rewire_p;
  spec.seed = o.seed;
  const auto g = make_topology(spec);
  if (o.out.empty() || o.out == "-") {
    write_edge_list(std::cout, g);
  } else {
    std::ofstream os(o.out);
    if (!os) throw std::runtime_error("cannot write " + o.out);
    write_edge_list(os, g);
    std::cerr << "lambda_2 = " << std::setprecision(10) << algebraic_connectivity(g) << "\n";
  }
  return 0;
}

// Sweepable parameters and where they live in the config document.
const std::map<std::string, std::pair<json::json_pointer, bool>>& sweep_targets() {
  static const std::map<std::string, std::pair<json::json_pointer, bool>> targets{
      {"delta", {json::json_pointer("/params/delta"), false}},
      {"lambda", {json::json_pointer("/params/lambda"), false}},
      {"scale", {json::json_pointer("/params/scale"), true}},
      {"mu", {json::json_pointer("/params/mu"), false}},
      {"mix", {json::json_pointer("/params/mix"), false}},
      {"p", {json::json_pointer("/channel/p"), false}},
      {"latency", {json::json_pointer("/channel/latency"), false}},
      {"seed", {json::json_pointer("/seed"), true}},
      {"rewire_p", {json::json_pointer("/topology/rewire_p"), false}},
      {"M", {json::json_pointer("/topology/M"), true}},
      {"duration", {json::json_pointer("/duration"), false}},
  };
  return targets;
}

struct SweepOptions {
  std::string config;
  std::string param;
  std::vector<std::string> values;
  std::string out;
  unsigned jobs = 0;
};

int cmd_sweep(const SweepOptions& o) {
  const auto it = sweep_targets().find(o.param);
  if (it == sweep_targets().end()) throw ConfigError(ErrorCode::schema, "cannot sweep '" + o.param + "'");
  const auto& [pointer, integral] = it->second;
  const json base = read_json_file(o.config);

  std::vector<ScenarioConfig> configs;
  for (const auto& text : o.values) {
    const double v = parse_double(text);
    json doc = base;
    if (integral) {
      if (v < 0 || v != std::floor(v)) throw ConfigError(ErrorCode::schema, o.param + " takes non-negative integers");
      doc[pointer] = static_cast<std::uint64_t>(v);
    } else {
      doc[pointer] = v;
    }
    configs.push_back(parse_scenario(doc));
  }

  const fs::path root = o.out.empty() ? default_out_root() / (fs::path(o.config).stem().string() + "_sweep") : fs::path(o.out);
  const unsigned jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::optional<RunRecord>> records(configs.size());
  for (std::size_t start = 0; start < configs.size(); start += jobs) {
    std::vector<std::future<RunRecord>> batch;
    for (std::size_t i = start; i < std::min(configs.size(), start + jobs); ++i) {
      batch.push_back(std::async(std::launch::async, [&configs, i] { return run_scenario(configs[i]); }));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) records[start + i] = batch[i].get();
  }

  fs::create_directories(root);
  std::ofstream summary(root / "sweep.csv", std::ios::binary);
  summary << "param,value,dir,final_nmse,final_mean,convergence_time\n";
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto& r = *records[i];
    const std::string name = o.param + "=" + o.values[i];
    write_run(r, root / name);
    const auto& m = r.metrics;
    summary << o.param << ',' << o.values[i] << ',' << name << ',' << format_double(m.nmse.back()) << ','
            << format_double(m.final_mean) << ',' << (m.convergence_time ? format_double(*m.convergence_time) : "")
            << '\n';
    std::cout << std::left << std::setw(20) << name << " final nmse " << format_double(m.nmse.back())
              << ", convergence " << optional_seconds(m.convergence_time) << "\n";
  }
  if (!summary) throw std::runtime_error("failed writing sweep.csv");
  std::cout << "output: " << root.string() << "\n";
  return 0;
}

int cmd_oracle(const std::string& path, const std::string& out) {
  const auto traj = run_oracle(load_scenario(path));
  if (out.empty() || out == "-") {
    write_states_csv(std::cout, traj);
    return 0;
  }
  std::ofstream os(out, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + out);
  write_states_csv(os, traj);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chemical average-consensus simulator"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Execute a scenario and write its run directory");
  run_cmd->add_option("config", run.config, "Scenario JSON")->required();
  run_cmd->add_option("--out", run.out, "Output directory (default $CHEMCONS_OUT/<config name>, else runs/...)");
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_option("--duration", run.duration, "Override the duration in seconds");
  run_cmd->add_flag("--with-oracle", run.with_oracle, "Also write the mean-field trajectory as oracle.csv");

  std::string analyze_config;
  bool analyze_json = false;
  auto* analyze_cmd = app.add_subcommand("analyze", "Print the reaction-network analysis and lambda_2");
  analyze_cmd->add_option("config", analyze_config, "Scenario JSON")->required();
  analyze_cmd->add_flag("--json", analyze_json, "Emit JSON");

  TopologyOptions topo;
  auto* topo_cmd = app.add_subcommand("topology", "Generate a topology as an edge list");
  topo_cmd->add_option("kind", topo.kind, "ring | complete | lattice | small_world")->required();
  topo_cmd->add_option("--nodes,-M", topo.nodes, "Node count")->required();
  topo_cmd->add_option("--k", topo.k, "Lattice neighbours on each side");
  topo_cmd->add_option("--edges", topo.edges, "Small-world undirected edge count (default 3 M)");
  topo_cmd->add_option("--rewire-p", topo.rewire_p, "Small-world rewiring probability");
  topo_cmd->add_option("--seed", topo.seed, "Small-world seed");
  topo_cmd->add_option("--out", topo.out, "Edge list file (default stdout)");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario for several values of one parameter");
  sweep_cmd->add_option("config", sweep.config, "Scenario JSON")->required();
  sweep_cmd->add_option("--param", sweep.param, "delta | lambda | scale | mu | mix | p | latency | seed | rewire_p | M | duration")
      ->required();
  sweep_cmd->add_option("--values", sweep.values, "Comma-separated values")->required()->delimiter(',');
  sweep_cmd->add_option("--out", sweep.out, "Output directory");
  sweep_cmd->add_option("--jobs", sweep.jobs, "Parallel runs (default: hardware threads)");

  std::string oracle_config, oracle_out;
  auto* oracle_cmd = app.add_subcommand("oracle", "Emit the mean-field reference trajectory as CSV");
  oracle_cmd->add_option("config", oracle_config, "Scenario JSON")->required();
  oracle_cmd->add_option("--out", oracle_out, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*analyze_cmd) return cmd_analyze(analyze_config, analyze_json);
    if (*topo_cmd) return cmd_topology(topo);
    if (*sweep_cmd) return cmd_sweep(sweep);
    if (*oracle_cmd) return cmd_oracle(oracle_config, oracle_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return exit_config;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_runtime;
  }
  return exit_runtime;
}
