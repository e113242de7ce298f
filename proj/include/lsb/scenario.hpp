#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lsb/adversary.hpp"
#include "lsb/smarthome.hpp"

namespace lsb::sim {

// Aggregate request rate that takes effect at `from` and holds until the
// next phase (or the horizon).
struct LoadPhase {
  double from = 0;
  double rate = 0;  // transactions per second, spread round-robin over pairs
};

enum class AttackKind {
  none,
  appending,
  burst,
  early_fire,
  modification,
  dropping,
  false_reputation,
  forge_dtm,
};

const char* attack_name(AttackKind a);
std::optional<AttackKind> attack_from_name(const std::string& s);

// Complete description of one simulated deployment. Everything a run needs
// is in here, so two builds from the same scenario are bit-identical.
struct Scenario {
  uint64_t seed = 1;
  double horizon = 55;

  // topology: a full overlay backbone, every backbone node can be promoted
  uint64_t overlay_nodes = 50;
  uint64_t obm_count = 13;  // initially active block managers
  double mesh_latency = 0.005;
  double member_link_min = 0.001;
  double member_link_max = 0.010;
  double device_link = 0.002;
  double bandwidth = 125e6;  // bytes per second per interface

  // consensus
  uint64_t t_max = 10;
  double consensus_period = 10;
  double max_waiting = 0;  // 0: derived as twice the max end-to-end delay
  bool vouch = true;
  // active-OBM list offsets allowed to generate blocks; empty means all
  std::vector<uint64_t> generators;

  trust::TrustConfig trust;
  bool dtm_enabled = true;
  dtm::DtmConfig dtm;

  // overlay request load
  uint64_t requester_pairs = 5;
  std::vector<LoadPhase> load{{0, 20}};  // aggregate tx/s, split across the pairs
  bool rotate_requester_keys = true;
  double confirm_timeout = 0;     // member watchdog; 0 disables
  double inbound_rate_limit = 0;  // requestee-side cap; 0 disables

  // smart home tier
  uint64_t homes = 0;
  uint64_t devices_per_home = 2;
  bool with_cloud = false;
  double anchor_interval = 0;  // ledger-hash anchor cadence; 0 disables
  uint64_t device_stores = 0;  // periodic local sensor stores per device
  double device_store_period = 1.0;
  // scripted overlay accesses from one service provider against home 0
  uint64_t sp_flows = 0;
  double sp_flow_start = 0.5;
  double sp_flow_period = 1.0;
  ledger::ActionKind sp_action = ledger::ActionKind::access;

  // adversary
  AttackKind attack = AttackKind::none;
  uint64_t attacker_count = 1;
  AdversaryConfig adv;

  // "key = value" lines with '#' comments; section headers are ignored.
  static std::optional<Scenario> parse(const std::string& text, std::string* err = nullptr);
  static std::optional<Scenario> load_file(const std::string& path, std::string* err = nullptr);
};

// A built simulation plus the node directory experiments need to inspect it.
struct Sim {
  Scenario sc;
  std::unique_ptr<Engine> engine;
  crypto::KeyPair ca_root;

  std::vector<NodeId> backbone;  // promotion order; first sc.obm_count active
  std::vector<NodeId> requesters;
  std::vector<NodeId> responders;
  std::vector<NodeId> homes;
  std::vector<std::vector<NodeId>> home_devices;
  NodeId cloud = kNoNode;
  NodeId sp = kNoNode;
  std::vector<NodeId> attackers;

  ObmNode& obm(size_t active_index);
  MemberNode& member(NodeId id);
  HomeManagerNode& home(size_t index);
  std::vector<NodeId> honest_obms() const;
  void run() { engine->run(sc.horizon); }
};

Sim build_sim(const Scenario& sc);

}  // namespace lsb::sim
