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

#include "gridcosim/netsim.h"

#include <fstream>
#include <iomanip>
#include <utility>

#include "gridcosim/errors.h"

namespace gridcosim {

PacketPath PathOf(const RoutingVector& route) {
  return {route.node_sequence, route.link_sequence};
}

PacketPath Reversed(const PacketPath& path) {
  return {{path.nodes.rbegin(), path.nodes.rend()},
          {path.links.rbegin(), path.links.rend()}};
}

void EventQueue::Push(double time, int payload) {
  heap_.push({time, next_seq_++, payload});
}

EventQueue::Event EventQueue::Pop() {
  Event e = heap_.top();
  heap_.pop();
  now_ = e.time;
  return e;
}

std::string_view NetEventKindName(NetEventKind kind) {
  switch (kind) {
    case NetEventKind::kArrive:
      return "arrive";
    case NetEventKind::kForward:
      return "forward";
    case NetEventKind::kDeliver:
      return "deliver";
    case NetEventKind::kDropLoss:
      return "drop_loss";
    case NetEventKind::kDropAttack:
      return "drop_attack";
  }
  return "?";
}

NetworkSimulator::NetworkSimulator(const CommGraph& graph,
                                   std::uint64_t loss_seed, bool record_trace)
    : graph_(graph), loss_rng_(loss_seed), record_trace_(record_trace) {}

void NetworkSimulator::Compromise(const AttackSpec& spec,
                                  const RoutingMatrix& routing,
                                  std::vector<double> setpoint_bias) {
  const int m = spec.num_measurements();
  if (routing.num_measurements() != m ||
      static_cast<int>(spec.d.size()) != m) {
    throw ConfigError("attack and routing cover different measurement sets");
  }
  std::vector<bool> x = spec.x;
  std::vector<bool> y = spec.y;
  x.resize(graph_.num_nodes(), false);
  y.resize(graph_.num_links(), false);

  for (int i = 0; i < m; ++i) {
    bool integrity = spec.a[i] != 0.0 && !spec.d[i];
    if (!integrity && !spec.d[i]) continue;
    for (int r : routing.paths_of(i)) {
      const RoutingVector& row = routing.rows()[r];
      bool node_hit = false;
      bool link_hit = false;
      for (int v : row.node_sequence) node_hit = node_hit || x[v];
      for (int e : row.link_sequence) link_hit = link_hit || y[e];
      if (integrity && !node_hit) {
        throw ConfigError("measurement " + std::to_string(i) +
                          " is altered but path " +
                          std::to_string(row.path_id) +
                          " crosses no compromised node");
      }
      if (spec.d[i] && !node_hit && !link_hit) {
        throw ConfigError("measurement " + std::to_string(i) +
                          " is blocked but path " +
                          std::to_string(row.path_id) +
                          " crosses no compromised element");
      }
    }
  }
  attack_ = spec;
  node_compromised_ = std::move(x);
  link_compromised_ = std::move(y);
  setpoint_bias_ = std::move(setpoint_bias);
  attack_installed_ = true;
}

void NetworkSimulator::CompromiseRouter(int node, const AttackSpec& spec,
                                        const RoutingMatrix& routing) {
  if (node < 0 || node >= graph_.num_nodes() ||
      graph_.nodes()[node].kind != NodeKind::kRouter) {
    throw ConfigError("only routers can be compromised this way");
  }
  AttackSpec scoped = spec;
  scoped.x.assign(graph_.num_nodes(), false);
  scoped.x[node] = true;
  scoped.y.assign(graph_.num_links(), false);
  Compromise(scoped, routing);
}

int NetworkSimulator::AddPath(PacketPath path) {
  if (path.nodes.empty() || path.links.size() + 1 != path.nodes.size()) {
    throw ContractError("malformed packet path");
  }
  paths_.push_back(std::move(path));
  return static_cast<int>(paths_.size()) - 1;
}

std::int64_t NetworkSimulator::Send(PacketKind kind, int item, double value,
                                    double created_at, int path) {
  if (path < 0 || path >= static_cast<int>(paths_.size())) {
    throw ContractError("unknown packet path");
  }
  if (created_at < queue_.now()) {
    throw ContractError("packet created in the past");
  }
  Packet p;
  p.id = static_cast<std::int64_t>(packets_.size());
  p.kind = kind;
  p.item = item;
  p.value = value;
  p.created_at = created_at;
  p.path = path;
  packets_.push_back(p);
  queue_.Push(created_at, static_cast<int>(p.id));
  ++stats_.sent;
  return p.id;
}

void NetworkSimulator::Record(NetEventKind kind, const Packet& packet, int node,
                              double t) {
  if (!record_trace_) return;
  trace_.push_back({t, packet.id, kind, node, packet.tampered, packet.dropped});
}

void NetworkSimulator::Process(int packet_index, double t) {
  Packet& p = packets_[packet_index];
  const PacketPath& path = paths_[p.path];
  const int node = path.nodes[p.hop_index];
  ++stats_.events;

  bool active = attack_installed_ && p.created_at >= attack_.start_time;
  if (active && node_compromised_[node]) {
    if (p.kind == PacketKind::kMeasurement) {
      if (attack_.d[p.item]) {
        p.dropped = true;
        ++stats_.dropped_attack;
        Record(NetEventKind::kDropAttack, p, node, t);
        return;
      }
      if (attack_.a[p.item] != 0.0 && !p.tampered) {
        p.value += attack_.a[p.item];
        p.tampered = true;
        ++stats_.tampered;
      }
    } else if (!setpoint_bias_.empty() && !p.tampered &&
               graph_.nodes()[node].kind == NodeKind::kRouter &&
               setpoint_bias_[p.item] != 0.0) {
      p.value += setpoint_bias_[p.item];
      p.tampered = true;
      ++stats_.tampered;
    }
  }

  if (p.hop_index + 1 == static_cast<int>(path.nodes.size())) {
    p.delivered_at = t;
    ++stats_.delivered;
    Record(NetEventKind::kDeliver, p, node, t);
    delivered_.push_back(p);
    return;
  }

  const int link = path.links[p.hop_index];
  if (active && link_compromised_[link] && p.kind == PacketKind::kMeasurement &&
      attack_.d[p.item]) {
    p.dropped = true;
    ++stats_.dropped_attack;
    Record(NetEventKind::kDropAttack, p, node, t);
    return;
  }
  const ChannelParams& ch = graph_.links()[link].channel;
  bool lost = ch.loss_probability >= 1.0 ||
              (ch.loss_probability > 0.0 &&
               uniform_(loss_rng_) < ch.loss_probability);
  if (lost) {
    p.dropped = true;
    ++stats_.dropped_loss;
    Record(NetEventKind::kDropLoss, p, node, t);
    return;
  }
  Record(p.hop_index == 0 ? NetEventKind::kArrive : NetEventKind::kForward, p,
         node, t);
  ++p.hop_index;
  queue_.Push(t + ch.latency, packet_index);
}

void NetworkSimulator::RunUntil(double t) {
  if (t < queue_.now()) throw ContractError("cannot run backwards in time");
  while (!queue_.Empty() && queue_.Top().time <= t) {
    EventQueue::Event e = queue_.Pop();
    Process(e.payload, e.time);
  }
  queue_.set_now(t);
}

std::vector<Packet> NetworkSimulator::TakeDelivered() {
  std::vector<Packet> out;
  out.swap(delivered_);
  return out;
}

std::int64_t NetworkSimulator::in_flight() const {
  return stats_.sent - stats_.delivered - stats_.dropped_loss -
         stats_.dropped_attack;
}

void NetworkSimulator::WriteTraceCsv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "time,packet,event,node,tampered,dropped\n" << std::setprecision(17);
  for (const NetTraceEvent& e : trace_) {
    out << e.time << "," << e.packet << "," << NetEventKindName(e.kind) << ","
        << graph_.nodes()[e.node].id << "," << (e.tampered ? 1 : 0) << ","
        << (e.dropped ? 1 : 0) << "\n";
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace gridcosim
