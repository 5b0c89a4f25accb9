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

#include "gridcosim/engine.h"

#include <cmath>
#include <limits>
#include <sstream>

#include <spdlog/spdlog.h>

#include "gridcosim/errors.h"
#include "gridcosim/secmetric.h"

namespace gridcosim {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string At(double t) {
  std::ostringstream out;
  out << "t=" << t << ": ";
  return out.str();
}

std::vector<bool> Flags(const CommGraph& graph,
                        const std::vector<std::string>& ids, bool links) {
  std::vector<bool> out(links ? graph.num_links() : graph.num_nodes(), false);
  for (const std::string& id : ids) {
    try {
      out[links ? graph.link_index(id) : graph.node_index(id)] = true;
    } catch (const GraphError& e) {
      throw ConfigError(std::string("attack: ") + e.what());
    }
  }
  return out;
}

}  // namespace

void ScenarioConfig::Validate() const {
  if (!(measurement_period > 0.0)) {
    throw ConfigError("measurement_period must be > 0");
  }
  if (!(opf_period > 0.0)) throw ConfigError("opf_period must be > 0");
  if (!(duration >= opf_period)) {
    throw ConfigError("duration must cover at least one opf_period");
  }
  if (!(significance > 0.0 && significance < 1.0)) {
    throw ConfigError("significance must lie in (0, 1)");
  }
  if (routing_k < 1) throw ConfigError("routing k must be >= 1");
  if (link_loss && !(*link_loss >= 0.0 && *link_loss <= 1.0)) {
    throw ConfigError("link_loss must lie in [0, 1]");
  }
  if (attack.form != AttackForm::kNone && attack.start_time < 0.0) {
    throw ConfigError("attack start_time must be >= 0");
  }
}

ControlCenter::ControlCenter(const GridCase& grid_case, double significance)
    : case_(grid_case),
      h_(BuildHMatrix(grid_case)),
      sigmas_(grid_case.sigmas()),
      significance_(significance) {}

ControlCenter::Cycle ControlCenter::Run(
    const MeasurementVector& pool, const std::vector<double>& commanded) const {
  Cycle cycle;
  try {
    cycle.estimate = WlsEstimate(h_, pool, sigmas_, significance_);
  } catch (const EstimationError& e) {
    cycle.note = std::string("state estimation skipped: ") + e.what();
    return cycle;
  }
  cycle.load_estimates = ExtractLoadEstimates(case_, *cycle.estimate, commanded);
  try {
    cycle.dispatch = SolveDcOpf(case_, cycle.load_estimates);
  } catch (const DispatchError& e) {
    cycle.note = std::string("set points held: ") + e.what();
  }
  return cycle;
}

AttackSpec ResolveAttack(const AttackConfig& attack, const GridCase& grid_case,
                         const CommGraph& graph, const RoutingMatrix& routing) {
  const Eigen::MatrixXd h = BuildHMatrix(grid_case);
  const int m = static_cast<int>(h.rows());
  const int n = static_cast<int>(h.cols());
  std::vector<bool> x = Flags(graph, attack.nodes, false);
  std::vector<bool> y = Flags(graph, attack.links, true);
  const bool networked = !attack.nodes.empty() || !attack.links.empty();

  AttackSpec spec;
  switch (attack.form) {
    case AttackForm::kNone:
      spec.c = Eigen::VectorXd::Zero(n);
      spec.a = Eigen::VectorXd::Zero(m);
      spec.d.assign(m, false);
      break;
    case AttackForm::kExplicit: {
      if (static_cast<int>(attack.c.size()) != n) {
        throw ConfigError("attack c must have " + std::to_string(n) +
                          " entries");
      }
      std::vector<bool> d(m, false);
      for (int i : attack.removed) {
        if (i < 0 || i >= m) throw ConfigError("attack d names a bad row");
        d[i] = true;
      }
      spec = BuildCombined(
          h, Eigen::Map<const Eigen::VectorXd>(attack.c.data(), n), d);
      break;
    }
    case AttackForm::kTargeted:
      if (attack.target < 0 || attack.target >= m) {
        throw ConfigError("attack target out of range");
      }
      if (attack.mu == 0.0) throw ConfigError("attack mu must be nonzero");
      if (!networked) {
        throw ConfigError("targeted attacks need compromised nodes or links");
      }
      spec = ResolveAttackAtVantage(h, routing, x, y, attack.target, attack.mu);
      break;
    case AttackForm::kBias:
      if (attack.target < 0 || attack.target >= m) {
        throw ConfigError("bias measurement out of range");
      }
      spec = MakeBiasAttack(m, n, attack.target, attack.mu);
      break;
  }
  spec.x = x;
  spec.y = y;
  spec.start_time = attack.start_time;

  if (networked && !attack.strict) {
    std::vector<bool> integrity = IntegrityReach(routing, x);
    std::vector<bool> availability = AvailabilityReach(routing, x, y);
    for (int i = 0; i < m; ++i) {
      if (!integrity[i]) spec.a[i] = 0.0;
      if (!availability[i]) spec.d[i] = false;
    }
    if (spec.target >= 0 && spec.a[spec.target] == 0.0) {
      spec.target = -1;
      spec.mu = 0.0;
    }
  }
  return spec;
}

TraceLayout MakeTraceLayout(const GridCase& grid_case,
                            const ScenarioConfig& config) {
  TraceLayout layout;
  for (int i = 0; i < grid_case.num_buses(); ++i) {
    layout.bus_ids.push_back(grid_case.buses()[i].id);
    if (grid_case.state_column(i) >= 0) {
      layout.state_bus_ids.push_back(grid_case.buses()[i].id);
    }
  }
  for (const Branch& br : grid_case.branches()) layout.branch_ids.push_back(br.id);
  layout.num_generators = grid_case.num_generators();
  layout.num_measurements = grid_case.num_measurements();
  layout.attack_start = config.attack.form == AttackForm::kNone
                            ? -1.0
                            : config.attack.start_time;
  return layout;
}

ScenarioOutput RunScenario(const ScenarioConfig& config,
                           const GridCase& grid_case, const CommGraph& input_graph,
                           bool record_packets) {
  config.Validate();
  const int m = grid_case.num_measurements();
  const int ng = grid_case.num_generators();
  const int nb = grid_case.num_buses();

  std::optional<CommGraph> overridden;
  if (config.link_loss) {
    std::vector<CommLink> links = input_graph.links();
    for (CommLink& link : links) link.channel.loss_probability = *config.link_loss;
    overridden.emplace(input_graph.nodes(), std::move(links),
                       input_graph.substations());
  }
  const CommGraph& graph = overridden ? *overridden : input_graph;

  std::vector<int> sources = MeasurementSources(grid_case, graph);
  RoutingMatrix routing =
      ComputeRoutes(graph, sources, config.routing, config.routing_k);

  ScenarioOutput out;
  out.layout = MakeTraceLayout(grid_case, config);

  NetworkSimulator net(graph, config.loss_seed, record_packets);
  std::vector<std::vector<int>> measurement_paths(m);
  for (int i = 0; i < m; ++i) {
    for (int r : routing.paths_of(i)) {
      measurement_paths[i].push_back(net.AddPath(PathOf(routing.rows()[r])));
    }
  }
  std::vector<int> setpoint_paths;
  for (int site : GeneratorSites(grid_case, graph)) {
    std::vector<int> up = ShortestPathToMtu(graph, site);
    setpoint_paths.push_back(
        net.AddPath(Reversed(PathOf(MakeRoutingVector(graph, up, 0, 0)))));
  }

  const bool attacking = config.attack.form != AttackForm::kNone;
  const bool networked =
      !config.attack.nodes.empty() || !config.attack.links.empty();
  if (attacking) {
    out.attack = ResolveAttack(config.attack, grid_case, graph, routing);
    if (networked) {
      net.Compromise(*out.attack, routing, config.attack.setpoint_bias);
    }
  }

  const Eigen::VectorXd loads = grid_case.loads();
  const double total_load = loads.sum();
  const std::vector<int> gen_bus = grid_case.generator_bus_indices();
  int slack = 0;
  for (int g = 0; g < ng; ++g) {
    if (gen_bus[g] == grid_case.reference_index()) {
      slack = g;
      break;
    }
  }

  std::vector<double> load_vec(loads.data(), loads.data() + nb);
  DispatchResult initial = SolveDcOpf(grid_case, load_vec);
  std::vector<double> commanded = initial.setpoints;
  std::vector<double> applied = initial.setpoints;
  out.dispatches.push_back(initial);

  ControlCenter center(grid_case, config.significance);
  std::vector<double> zero_sigmas(m, 0.0);
  std::vector<double> pool_value(m, 0.0);
  std::vector<double> pool_created(m, -std::numeric_limits<double>::infinity());

  Eigen::VectorXd last_estimate = Eigen::VectorXd::Zero(grid_case.num_states());
  std::vector<double> last_loads(nb, 0.0);
  double last_stat = 0.0;
  double last_threshold = 0.0;
  bool last_alarm = false;

  const double mp = config.measurement_period;
  const long ticks = static_cast<long>(std::floor(config.duration / mp + 1e-9));
  double next_opf = config.opf_period;

  for (long k = 0; k <= ticks; ++k) {
    const double t = static_cast<double>(k) * mp;
    net.RunUntil(t);
    for (const Packet& p : net.TakeDelivered()) {
      if (p.kind == PacketKind::kMeasurement) {
        if (p.created_at >= pool_created[p.item]) {
          pool_value[p.item] = p.value;
          pool_created[p.item] = p.created_at;
        }
      } else {
        applied[p.item] = p.value;
      }
    }

    // Physical snapshot; the slack unit absorbs any mismatch.
    std::vector<double> generation = applied;
    double scheduled = 0.0;
    for (double v : applied) scheduled += v;
    generation[slack] += total_load - scheduled;
    Eigen::VectorXd injections = -loads;
    for (int g = 0; g < ng; ++g) injections[gen_bus[g]] += generation[g];
    double imbalance = injections.sum();
    injections[gen_bus[slack]] -= imbalance;
    generation[slack] -= imbalance;
    PowerFlowSolution pf = DcPowerFlow(grid_case, injections);

    const std::uint64_t seed = SplitMix64(config.noise_seed ^ SplitMix64(k));
    MeasurementVector z =
        config.noise ? GenerateMeasurements(grid_case, pf.state, seed, t)
                     : GenerateMeasurements(grid_case, pf.state, zero_sigmas,
                                            seed, t);
    const bool active = attacking && t >= config.attack.start_time;
    if (active && !networked) z = ApplyAttack(z, *out.attack);
    for (int i = 0; i < m; ++i) {
      if (!z.available[i]) continue;
      const auto& paths = measurement_paths[i];
      net.Send(PacketKind::kMeasurement, i, z.values[i], t,
               paths[static_cast<size_t>(k) % paths.size()]);
    }

    MeasurementVector pool;
    pool.values = Eigen::Map<const Eigen::VectorXd>(pool_value.data(), m);
    pool.available.assign(m, false);
    pool.timestamp = t;
    for (int i = 0; i < m; ++i) {
      pool.available[i] = t - pool_created[i] <= mp + 1e-9;
      if (!pool.available[i]) pool.values[i] = 0.0;
    }

    bool se_ran = false;
    if (t >= next_opf - 1e-9) {
      next_opf += config.opf_period;
      ControlCenter::Cycle cycle = center.Run(pool, commanded);
      if (cycle.estimate) {
        se_ran = true;
        ++out.se_cycles;
        last_estimate = cycle.estimate->estimate.angles;
        last_stat = cycle.estimate->bdd_statistic;
        last_threshold = cycle.estimate->bdd_threshold;
        last_alarm = cycle.estimate->bdd_alarm;
        last_loads = cycle.load_estimates;
        if (last_alarm) {
          ++out.alarms;
          out.events.push_back(At(t) + "bad data alarm (J = " +
                               std::to_string(last_stat) + ")");
        }
      }
      if (!cycle.note.empty()) {
        out.events.push_back(At(t) + cycle.note);
        spdlog::warn("{}{}", At(t), cycle.note);
      }
      if (cycle.dispatch) {
        commanded = cycle.dispatch->setpoints;
        out.dispatches.push_back(*cycle.dispatch);
        for (int g = 0; g < ng; ++g) {
          net.Send(PacketKind::kSetpoint, g, commanded[g], t, setpoint_paths[g]);
        }
      }
    }

    TraceRecord rec;
    rec.time = t;
    rec.attack_active = active;
    rec.true_angles = pf.state.angles;
    rec.true_flows = pf.flows;
    rec.generation = generation;
    rec.setpoints = commanded;
    rec.injection_sum = injections.sum();
    rec.pool_values = pool.values;
    rec.pool_available = pool.available;
    rec.se_ran = se_ran;
    rec.estimate = last_estimate;
    rec.bdd_statistic = last_stat;
    rec.bdd_threshold = last_threshold;
    rec.bdd_alarm = last_alarm;
    rec.load_estimates = last_loads;
    out.records.push_back(std::move(rec));
  }

  out.net_stats = net.stats();
  out.packet_trace = net.trace();
  spdlog::debug("{}: {} ticks, {} SE cycles, {} alarms, {} packets sent",
               config.name, out.records.size(), out.se_cycles, out.alarms,
               out.net_stats.sent);
  return out;
}

ScenarioOutput RunScenario(const ScenarioConfig& config, bool record_packets) {
  GridCase grid_case = LoadGridCase(config.case_path);
  CommGraph graph = LoadCommGraph(config.network_path, &grid_case);
  return RunScenario(config, grid_case, graph, record_packets);
}

}  // namespace gridcosim
