#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "lsb/crypto.hpp"
#include "lsb/dtm.hpp"
#include "lsb/ledger.hpp"

namespace lsb::sim {

using NodeId = uint64_t;
using SimTime = double;
using crypto::Hash256;
using crypto::PublicKey;
using crypto::Signature;

constexpr NodeId kNoNode = ~0ull;

// --- messages ---

struct TxSubmit {      // member -> its OBM
  ledger::AnyTx tx;
};
struct TxRelay {       // OBM -> OBM pool gossip
  ledger::AnyTx tx;
  NodeId origin = kNoNode;  // submitting member when relaying a pending request
};
struct TxForward {     // OBM -> requestee cluster member, awaiting decision
  ledger::MultisigTx tx;
  NodeId origin = kNoNode;  // submitting member, so the answer can be routed back
};
struct TxComplete {    // requestee -> requester, the dual-signed result
  ledger::MultisigTx tx;
  bool accepted = false;
};
struct TxConfirm {     // OBM -> requester member, tx reached the chain
  Hash256 tx_id{};
};
struct BlockAnnounce {
  std::shared_ptr<const ledger::Block> block;
  SimTime sent_at = 0;  // generator clock at send, used to order rival tips
};
struct VouchNotice {
  Hash256 body_hash{};
  uint64_t generator = 0;
  uint64_t voucher = 0;
  Signature sig{};
};
struct DtmProposal {
  uint64_t window = 0;
  dtm::DtmAction action;
  uint64_t signer = 0;
  Signature sig{};
};
struct DtmCosign {
  uint64_t window = 0;
  dtm::DtmAction action;
  uint64_t signer = 0;
  Signature sig{};
};
struct KeylistUpdate {
  bool add = true;
  bool any_requester = false;
  PublicKey requester{};
  PublicKey requestee{};
  NodeId member = kNoNode;
};
struct LocalTx {       // device <-> home manager, symmetric-encrypted
  uint64_t device = 0;
  Bytes ciphertext;
};
struct DataPacket {
  uint64_t flow = 0;
  Bytes payload;
  Hash256 data_hash{};
  SimTime originated_at = 0;
};
struct StoreRequest {  // home manager -> cloud store
  PublicKey credential{};
  Bytes blob;
  ledger::MultisigTx tx;  // requester-signed, cloud completes it
};
struct KeyControl {
  enum class Op : uint8_t { grant = 0, revoke = 1 };
  Op op = Op::grant;
  uint64_t device_a = 0;
  uint64_t device_b = 0;
  uint64_t dh_public_a = 0;
  uint64_t dh_public_b = 0;
};
struct TimerFire {
  enum class Kind : uint8_t {
    block_wait,
    eligibility,
    dtm_sample,
    dtm_propose,
    load_tick,
    confirm_timeout,
    monitor_tick,
    generic,
  };
  Kind kind = Kind::generic;
  uint64_t tag = 0;
};

using Message =
    std::variant<TxSubmit, TxRelay, TxForward, TxComplete, TxConfirm, BlockAnnounce, VouchNotice,
                 DtmProposal, DtmCosign, KeylistUpdate, LocalTx, DataPacket, StoreRequest,
                 KeyControl, TimerFire>;

const char* message_kind_name(const Message& m);
size_t message_wire_size(const Message& m);

struct SimEvent {
  SimTime at = 0;
  NodeId dst = 0;
  uint64_t seq = 0;
  NodeId src = kNoNode;
  Message msg;
};

// --- metrics ---

struct Counter {
  uint64_t count = 0;
  uint64_t bytes = 0;
};

class PacketLedger {
 public:
  void set_phase(std::string phase) { phase_ = std::move(phase); }
  const std::string& phase() const { return phase_; }
  void record(const char* kind, NodeId dst, size_t bytes);
  const std::map<std::string, Counter>& by_kind() const { return by_kind_; }
  Counter total() const;
  Counter kind_total(const std::string& kind) const;
  // fixed column order: phase,kind,node,count,bytes
  std::string csv() const;

 private:
  std::string phase_ = "run";
  std::map<std::string, Counter> by_kind_;
  std::map<std::tuple<std::string, std::string, NodeId>, Counter> rows_;
};

// --- topology ---

enum class NodeKind : uint8_t { obm, member, home_manager, cloud, device, storage };

struct Topology {
  size_t node_count = 0;
  std::vector<NodeKind> kinds;
  std::map<std::pair<NodeId, NodeId>, double> link_latency;  // key: (min,max)
  std::vector<NodeId> obm_capable;  // overlay backbone, in promotion order
  std::vector<NodeId> active_obms;
  std::map<NodeId, NodeId> cluster_of;  // member -> its OBM
  double bandwidth_bytes_per_s = 1e9;

  bool has_link(NodeId a, NodeId b) const;
  double latency(NodeId a, NodeId b) const;
  void add_link(NodeId a, NodeId b, double seconds);
  bool is_active_obm(NodeId n) const;

  // Shortest latency paths over the allowed two-tier edges: member links may
  // only start or end a path at that member's own cluster head; the OBM mesh
  // carries everything in between. Devices hang off their home manager.
  void rebuild_routes();
  const std::vector<NodeId>* path(NodeId from, NodeId to) const;  // incl. endpoints
  double path_latency(NodeId from, NodeId to) const;
  double max_end_to_end() const { return max_e2e_; }

  // Nearest active OBM by direct link latency; excludes listed ids.
  NodeId nearest_obm(NodeId member, const std::set<NodeId>& exclude = {}) const;

 private:
  std::map<std::pair<NodeId, NodeId>, std::vector<NodeId>> paths_;
  double max_e2e_ = 0;
};

// --- engine ---

class Engine;

struct Ctx {
  Engine& eng;
  SimTime now;
  crypto::Rng& rng;
};

class Node {
 public:
  Node(NodeId id, NodeKind kind) : id_(id), kind_(kind) {}
  virtual ~Node() = default;
  NodeId id() const { return id_; }
  NodeKind kind() const { return kind_; }
  virtual void on_start(Ctx&) {}
  virtual void on_event(Ctx&, const SimEvent&) = 0;

 private:
  NodeId id_;
  NodeKind kind_;
};

class Engine {
 public:
  Engine(Topology topo, uint64_t seed);

  void add_node(std::unique_ptr<Node> n);
  Node* node(NodeId id) { return nodes_.at(id).get(); }
  template <typename T>
  T* node_as(NodeId id) {
    return dynamic_cast<T*>(nodes_.at(id).get());
  }

  Topology& topo() { return topo_; }
  const Topology& topo() const { return topo_; }
  PacketLedger& packets() { return packets_; }
  SimTime now() const { return now_; }
  uint64_t seed() const { return seed_; }
  crypto::Rng& node_rng(NodeId id);

  // Direct single-link transmission; sender serializes onto the wire in call
  // order. Source must be adjacent to dst.
  void send(NodeId src, NodeId dst, Message msg);
  // Multi-hop unicast along the routed path; every hop is charged.
  void route(NodeId src, NodeId dst, Message msg);
  // One copy per active OBM other than src, ascending id.
  void broadcast_obms(NodeId src, const Message& msg);
  void schedule(NodeId dst, SimTime delay, TimerFire t);

  void run(SimTime horizon);
  bool routing_failed() const { return routing_failed_; }

  // DTM recluster: adjusts the active OBM set to the first new_m capable
  // nodes, reassigns members, rebuilds routes. State for promoted OBMs is
  // bootstrapped by the caller.
  void recluster(uint64_t new_m);
  std::function<void(Engine&, uint64_t)> on_recluster;

 private:
  struct EventCmp {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.at != b.at) return a.at > b.at;
      if (a.dst != b.dst) return a.dst > b.dst;
      return a.seq > b.seq;
    }
  };
  void enqueue(SimTime at, NodeId src, NodeId dst, Message msg);
  double serialize_delay(NodeId src, size_t bytes);

  Topology topo_;
  uint64_t seed_;
  SimTime now_ = 0;
  uint64_t seq_ = 0;
  bool started_ = false;
  bool routing_failed_ = false;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<crypto::Rng> rngs_;
  std::map<NodeId, SimTime> tx_busy_until_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, EventCmp> queue_;
  PacketLedger packets_;
  // Routed packets are re-enqueued hop by hop; key tracks remaining path.
  struct Transit {
    Message msg;
    std::vector<NodeId> remaining;
    NodeId origin;
  };
  std::map<uint64_t, Transit> transits_;
  uint64_t next_transit_ = 1;
};

}  // namespace lsb::sim
