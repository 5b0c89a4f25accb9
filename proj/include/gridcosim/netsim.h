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

#ifndef GRIDCOSIM_NETSIM_H_
#define GRIDCOSIM_NETSIM_H_

#include <cstdint>
#include <filesystem>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "gridcosim/attack.h"
#include "gridcosim/netgraph.h"

namespace gridcosim {

enum class PacketKind { kMeasurement, kSetpoint };

// Hop sequence a packet follows; links[h] joins nodes[h] and nodes[h + 1].
struct PacketPath {
  std::vector<int> nodes;
  std::vector<int> links;
};

PacketPath PathOf(const RoutingVector& route);
PacketPath Reversed(const PacketPath& path);

struct Packet {
  std::int64_t id = 0;
  PacketKind kind = PacketKind::kMeasurement;
  int item = 0;  // measurement id or generator index
  double value = 0.0;
  double created_at = 0.0;
  double delivered_at = 0.0;
  int path = 0;  // index into the simulator's path table
  int hop_index = 0;
  bool tampered = false;
  bool dropped = false;
};

// Min-heap on (time, insertion sequence).
class EventQueue {
 public:
  struct Event {
    double time = 0.0;
    std::uint64_t seq = 0;
    int payload = 0;
  };

  void Push(double time, int payload);
  bool Empty() const { return heap_.empty(); }
  const Event& Top() const { return heap_.top(); }
  Event Pop();
  double now() const { return now_; }
  void set_now(double t) { now_ = t; }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Event& l, const Event& r) const {
      if (l.time != r.time) return l.time > r.time;
      return l.seq > r.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
  double now_ = 0.0;
};

struct NetStats {
  std::int64_t sent = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped_loss = 0;
  std::int64_t dropped_attack = 0;
  std::int64_t events = 0;
  std::int64_t tampered = 0;
};

enum class NetEventKind { kArrive, kForward, kDeliver, kDropLoss, kDropAttack };

struct NetTraceEvent {
  double time = 0.0;
  std::int64_t packet = 0;
  NetEventKind kind = NetEventKind::kArrive;
  int node = 0;
  bool tampered = false;
  bool dropped = false;
};

std::string_view NetEventKindName(NetEventKind kind);

class NetworkSimulator {
 public:
  NetworkSimulator(const CommGraph& graph, std::uint64_t loss_seed,
                   bool record_trace = false);

  // Installs the attack on the nodes and links flagged in spec.x / spec.y.
  // Integrity changes (a != 0) need a compromised node on every path of the
  // measurement; availability changes (d = 1) need a compromised node or
  // link on every path. Throws ConfigError otherwise. On any path the first
  // compromised element acts; later ones forward unchanged. Measurement
  // packets are altered only when created at or after spec.start_time.
  // `setpoint_bias` (per generator, may be empty) is added to set-point
  // packets crossing a compromised router.
  void Compromise(const AttackSpec& spec, const RoutingMatrix& routing,
                  std::vector<double> setpoint_bias = {});

  // Single-router form; throws ConfigError if `node` is not a router.
  void CompromiseRouter(int node, const AttackSpec& spec,
                        const RoutingMatrix& routing);

  int AddPath(PacketPath path);

  // Schedules the packet at its first node at `created_at`; returns its id.
  std::int64_t Send(PacketKind kind, int item, double value, double created_at,
                    int path);

  // Processes every event with time <= t; throws ContractError if t lies in
  // the past.
  void RunUntil(double t);

  double now() const { return queue_.now(); }
  std::vector<Packet> TakeDelivered();
  const NetStats& stats() const { return stats_; }
  const std::vector<NetTraceEvent>& trace() const { return trace_; }
  std::int64_t in_flight() const;
  const PacketPath& path(int index) const { return paths_[index]; }

  void WriteTraceCsv(const std::filesystem::path& path) const;

 private:
  void Record(NetEventKind kind, const Packet& packet, int node, double t);
  void Process(int packet_index, double t);

  const CommGraph& graph_;
  std::mt19937_64 loss_rng_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  bool record_trace_;
  EventQueue queue_;
  std::vector<PacketPath> paths_;
  std::vector<Packet> packets_;
  std::vector<Packet> delivered_;
  std::vector<NetTraceEvent> trace_;
  NetStats stats_;

  bool attack_installed_ = false;
  AttackSpec attack_;
  std::vector<bool> node_compromised_;
  std::vector<bool> link_compromised_;
  std::vector<double> setpoint_bias_;
};

}  // namespace gridcosim

#endif  // GRIDCOSIM_NETSIM_H_
