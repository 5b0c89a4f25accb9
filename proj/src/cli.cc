// Copyright 2026 The gridcosim Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gridcosim/cli.h"

#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "gridcosim/engine.h"
#include "gridcosim/errors.h"
#include "gridcosim/grid.h"
#include "gridcosim/netgraph.h"
#include "gridcosim/secmetric.h"

namespace gridcosim {
namespace {

// Routes the default logger to `err` for the lifetime of the guard and
// restores the previous logger afterwards, since `err` may not outlive it.
class LoggingScope {
 public:
  explicit LoggingScope(std::ostream& err) : previous_(spdlog::default_logger()) {
    ConfigureLogging(err);
  }
  ~LoggingScope() { spdlog::set_default_logger(previous_); }
  LoggingScope(const LoggingScope&) = delete;
  LoggingScope& operator=(const LoggingScope&) = delete;

 private:
  static void ConfigureLogging(std::ostream& err);
  std::shared_ptr<spdlog::logger> previous_;
};

void LoggingScope::ConfigureLogging(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("gridcosim", sink);
  logger->set_pattern("[%l] %v");
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("GRIDCOSIM_LOG_LEVEL")) {
    level = spdlog::level::from_str(env);
  }
  logger->set_level(level);
  spdlog::set_default_logger(logger);
}

std::string Join(const std::vector<double>& values) {
  std::ostringstream out;
  out.precision(10);
  for (size_t i = 0; i < values.size(); ++i) out << (i ? ";" : "") << values[i];
  return out.str();
}

struct RunArgs {
  std::string scenario;
  std::string case_path;
  std::string network;
  std::string out;
  std::optional<std::uint64_t> seed_noise;
  std::optional<std::uint64_t> seed_loss;
  std::string packet_trace;
  std::string dump_h;
};

int DoRun(const RunArgs& args, std::ostream& out) {
  ScenarioConfig config = LoadScenario(args.scenario);
  if (!args.case_path.empty()) config.case_path = args.case_path;
  if (!args.network.empty()) config.network_path = args.network;
  if (args.seed_noise) config.noise_seed = *args.seed_noise;
  if (args.seed_loss) config.loss_seed = *args.seed_loss;

  GridCase grid_case = LoadGridCase(config.case_path);
  CommGraph graph = LoadCommGraph(config.network_path, &grid_case);
  if (!args.dump_h.empty()) WriteHMatrixCsv(grid_case, args.dump_h);
  ScenarioOutput result =
      RunScenario(config, grid_case, graph, !args.packet_trace.empty());
  if (!args.out.empty()) ExportTrace(result.layout, result.records, args.out);
  if (!args.packet_trace.empty()) {
    std::ofstream trace(args.packet_trace);
    if (!trace) throw IoError("cannot write " + args.packet_trace);
    trace << "time,packet,event,node,tampered,dropped\n";
    trace.precision(17);
    for (const NetTraceEvent& e : result.packet_trace) {
      trace << e.time << "," << e.packet << "," << NetEventKindName(e.kind)
            << "," << graph.nodes()[e.node].id << "," << (e.tampered ? 1 : 0)
            << "," << (e.dropped ? 1 : 0) << "\n";
    }
    if (!trace) throw IoError("failed writing " + args.packet_trace);
  }
  for (const std::string& event : result.events) spdlog::info("{}", event);

  const NetStats& s = result.net_stats;
  out << "command=run scenario=" << config.name
      << " ticks=" << result.records.size()
      << " se_cycles=" << result.se_cycles << " alarms=" << result.alarms
      << " sent=" << s.sent << " delivered=" << s.delivered
      << " dropped_loss=" << s.dropped_loss
      << " dropped_attack=" << s.dropped_attack
      << " setpoints=" << Join(result.records.back().setpoints)
      << " trace=" << (args.out.empty() ? "-" : args.out) << "\n";
  return kExitOk;
}

struct MetricArgs {
  std::string case_path;
  std::string network;
  std::string metric = "alpha";
  std::string method = "milp";
  std::optional<int> target;
  double mu = 0.1;
  std::int64_t max_nodes = 2'000'000;
  int max_card = 6;
  bool rtu_groups = false;
  bool allow_mtu = false;
  std::string out;
};

int DoMetric(const MetricArgs& args, std::ostream& out) {
  GridCase grid_case = LoadGridCase(args.case_path);
  const Eigen::MatrixXd h = BuildHMatrix(grid_case);
  std::optional<CommGraph> graph;
  std::optional<RoutingMatrix> routing;
  const bool beta = args.metric == "beta";
  if (beta || args.rtu_groups) {
    if (args.network.empty()) {
      throw ConfigError("--network is required for this metric");
    }
    graph.emplace(LoadCommGraph(args.network, &grid_case));
    routing.emplace(ComputeRoutes(*graph, MeasurementSources(grid_case, *graph),
                                  RoutingScheme::kSinglePath));
  }
  MetricOptions options;
  options.max_nodes = args.max_nodes;
  options.allow_mtu = args.allow_mtu;
  if (args.rtu_groups) {
    options.rtu_groups = MeasurementSources(grid_case, *graph);
  }

  std::vector<int> targets;
  if (args.target) {
    if (*args.target < 0 || *args.target >= h.rows()) {
      throw ConfigError("--target out of range");
    }
    targets.push_back(*args.target);
  } else {
    for (int j = 0; j < h.rows(); ++j) targets.push_back(j);
  }

  std::ostringstream csv;
  csv << "target,label,metric,method,status,value,nodes,seconds\n";
  int feasible = 0;
  int last_value = -1;
  std::string last_status;
  for (int j : targets) {
    MetricResult r;
    if (args.method == "brute") {
      r = beta ? BruteForceMetric(h, *graph, *routing, j, args.mu,
                                  args.max_card, args.allow_mtu)
               : BruteForceMetric(h, j, args.mu, args.max_card);
    } else {
      r = beta ? BetaMetric(h, *graph, *routing, j, args.mu, options)
               : AlphaMetric(h, j, args.mu, options);
    }
    feasible += r.feasible;
    last_value = r.feasible ? r.value : -1;
    last_status = std::string(MetricStatusName(r.status));
    csv << j << "," << MeasurementLabel(grid_case, j) << "," << args.metric
        << "," << args.method << "," << last_status << ","
        << (r.feasible ? std::to_string(r.value) : "") << "," << r.nodes << ","
        << r.seconds << "\n";
  }
  if (!args.out.empty()) {
    std::ofstream file(args.out);
    if (!file) throw IoError("cannot write " + args.out);
    file << csv.str();
    if (!file) throw IoError("failed writing " + args.out);
  }
  out << "command=metric metric=" << args.metric << " method=" << args.method
      << " targets=" << targets.size() << " feasible=" << feasible;
  if (targets.size() == 1) {
    out << " target=" << targets.front() << " status=" << last_status
        << " value=" << last_value;
  }
  out << " out=" << (args.out.empty() ? "-" : args.out) << "\n";
  return kExitOk;
}

struct RouteArgs {
  std::string case_path;
  std::string network;
  std::string scheme = "single";
  int k = 1;
  std::string out;
};

int DoRoute(const RouteArgs& args, std::ostream& out) {
  GridCase grid_case = LoadGridCase(args.case_path);
  CommGraph graph = LoadCommGraph(args.network, &grid_case);
  RoutingMatrix routing =
      ComputeRoutes(graph, MeasurementSources(grid_case, graph),
                    ParseRoutingScheme(args.scheme), args.k);
  if (!args.out.empty()) WriteRoutingCsv(graph, routing, args.out);
  int busiest = -1;
  size_t busiest_count = 0;
  for (int v = 0; v < graph.num_nodes(); ++v) {
    if (graph.nodes()[v].kind != NodeKind::kRouter) continue;
    size_t count = MeasurementsThroughNode(routing, v).size();
    if (count > busiest_count) {
      busiest = v;
      busiest_count = count;
    }
  }
  out << "command=route measurements=" << routing.num_measurements()
      << " paths=" << routing.rows().size() << " busiest_router="
      << (busiest >= 0 ? graph.nodes()[busiest].id : "-")
      << " busiest_count=" << busiest_count
      << " out=" << (args.out.empty() ? "-" : args.out) << "\n";
  return kExitOk;
}

struct ValidateArgs {
  std::string case_path;
  std::string network;
  std::string scenario;
  std::string dump_h;
};

int DoValidate(const ValidateArgs& args, std::ostream& out) {
  std::string case_path = args.case_path;
  std::string network = args.network;
  std::optional<ScenarioConfig> config;
  if (!args.scenario.empty()) {
    config = LoadScenario(args.scenario);
    if (case_path.empty()) case_path = config->case_path.string();
    if (network.empty()) network = config->network_path.string();
  }
  if (case_path.empty()) throw ConfigError("nothing to validate: give --case or --scenario");
  GridCase grid_case = LoadGridCase(case_path);
  if (!args.dump_h.empty()) WriteHMatrixCsv(grid_case, args.dump_h);
  const Eigen::MatrixXd h = BuildHMatrix(grid_case);
  bool observable =
      CheckObservability(h, std::vector<bool>(grid_case.num_measurements(), true));
  if (!observable) throw ModelError(case_path + ": measurement plan is unobservable");
  int nodes = 0;
  if (!network.empty()) {
    CommGraph graph = LoadCommGraph(network, &grid_case);
    nodes = graph.num_nodes();
    RoutingMatrix routing =
        ComputeRoutes(graph, MeasurementSources(grid_case, graph),
                      config ? config->routing : RoutingScheme::kSinglePath,
                      config ? config->routing_k : 1);
    if (config) ResolveAttack(config->attack, grid_case, graph, routing);
  }
  out << "command=validate valid=1 buses=" << grid_case.num_buses()
      << " branches=" << grid_case.num_branches()
      << " measurements=" << grid_case.num_measurements()
      << " comm_nodes=" << nodes << "\n";
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  LoggingScope logging(err);
  CLI::App app{"Deterministic power grid and SCADA co-simulation", "gridcosim"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Run a closed-loop scenario");
  run->add_option("--scenario", run_args.scenario, "Scenario JSON")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--case", run_args.case_path, "Override the case file")
      ->check(CLI::ExistingFile);
  run->add_option("--network", run_args.network, "Override the network file")
      ->check(CLI::ExistingFile);
  run->add_option("--out", run_args.out, "Trace CSV output");
  run->add_option("--seed-noise", run_args.seed_noise, "Measurement noise seed");
  run->add_option("--seed-loss", run_args.seed_loss, "Packet loss seed");
  run->add_option("--packet-trace", run_args.packet_trace,
                  "Per-packet event CSV output");
  run->add_option("--dump-h", run_args.dump_h, "Write H as CSV");

  MetricArgs metric_args;
  CLI::App* metric = app.add_subcommand("metric", "Compute security metrics");
  metric->add_option("--case", metric_args.case_path, "Case JSON")
      ->required()
      ->check(CLI::ExistingFile);
  metric->add_option("--network", metric_args.network, "Network JSON")
      ->check(CLI::ExistingFile);
  metric->add_option("--metric", metric_args.metric, "alpha or beta")
      ->check(CLI::IsMember({"alpha", "beta"}));
  metric->add_option("--method", metric_args.method, "milp or brute")
      ->check(CLI::IsMember({"milp", "brute"}));
  metric->add_option("--target", metric_args.target,
                     "Measurement id (all when omitted)");
  metric->add_option("--mu", metric_args.mu, "Injected magnitude on the target");
  metric->add_option("--max-nodes", metric_args.max_nodes,
                     "Branch-and-bound node limit");
  metric->add_option("--max-card", metric_args.max_card,
                     "Cardinality bound for the brute-force method");
  metric->add_flag("--rtu-groups", metric_args.rtu_groups,
                   "Count RTUs instead of measurements (alpha)");
  metric->add_flag("--allow-mtu", metric_args.allow_mtu,
                   "Let the MTU itself be compromised (beta)");
  metric->add_option("--out", metric_args.out, "Per-target CSV output");

  RouteArgs route_args;
  CLI::App* route = app.add_subcommand("route", "Dump the routing matrix");
  route->add_option("--case", route_args.case_path, "Case JSON")
      ->required()
      ->check(CLI::ExistingFile);
  route->add_option("--network", route_args.network, "Network JSON")
      ->required()
      ->check(CLI::ExistingFile);
  route->add_option("--scheme", route_args.scheme, "single or k-shortest");
  route->add_option("--k", route_args.k, "Paths per measurement")
      ->check(CLI::PositiveNumber);
  route->add_option("--out", route_args.out, "Routing CSV output");

  ValidateArgs validate_args;
  CLI::App* validate =
      app.add_subcommand("validate", "Check input files without running");
  validate->add_option("--case", validate_args.case_path, "Case JSON")
      ->check(CLI::ExistingFile);
  validate->add_option("--network", validate_args.network, "Network JSON")
      ->check(CLI::ExistingFile);
  validate->add_option("--scenario", validate_args.scenario, "Scenario JSON")
      ->check(CLI::ExistingFile);
  validate->add_option("--dump-h", validate_args.dump_h, "Write H as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) return DoRun(run_args, out);
    if (metric->parsed()) return DoMetric(metric_args, out);
    if (route->parsed()) return DoRoute(route_args, out);
    if (validate->parsed()) return DoValidate(validate_args, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << "\n";
    return kExitModel;
  } catch (const GraphError& e) {
    err << "network error: " << e.what() << "\n";
    return kExitModel;
  } catch (const ContractError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitModel;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitUsage;
}

}  // namespace gridcosim
