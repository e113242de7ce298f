#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>

#include "lsb/obm.hpp"

namespace lsb::sim {

// Encrypted home-tier command, carried inside LocalTx ciphertext.
struct HomeCmd {
  enum class Op : uint8_t { read = 0, reply = 1, store = 2 };
  Op op = Op::read;
  uint64_t flow = 0;
  Bytes data;

  Bytes canonical() const;
  static std::optional<HomeCmd> parse(const Bytes& b);
};

struct HomeDevice {
  uint64_t device_id = 0;
  NodeId node = kNoNode;
  crypto::SymmetricKey key{};  // shared with the home manager
  uint64_t dh_public = 0;
};

struct HomeCounters {
  uint64_t local_stores = 0;
  uint64_t local_replies = 0;
  uint64_t rejected_local = 0;  // bad key or unknown device
  uint64_t policy_denied = 0;
  uint64_t policy_granted = 0;
  uint64_t grants = 0;
  uint64_t revokes = 0;
  uint64_t anchors = 0;
  uint64_t cloud_stores_started = 0;
};

// Local block manager: overlay member (stable requestee identity) plus the
// home's immutable ledger, device keys and policy enforcement.
class HomeManagerNode : public MemberNode {
 public:
  HomeManagerNode(NodeId id, crypto::KeyPair identity, MemberConfig mc,
                  crypto::DhGroup dh = {});

  void add_device(const HomeDevice& d) { devices_[d.device_id] = d; }
  void set_cloud(const PublicKey& cloud_pk, NodeId cloud_node) {
    cloud_pk_ = cloud_pk;
    cloud_node_ = cloud_node;
  }
  void set_anchor(ledger::ChainWriter anchor_writer, double interval) {
    anchor_writer_ = std::move(anchor_writer);
    anchor_interval_ = interval;
  }
  void set_policy(std::vector<ledger::PolicyEntry> policy) { il_.set_policy(std::move(policy)); }
  void grant_key(Ctx& ctx, uint64_t dev_a, uint64_t dev_b);
  void revoke_key(Ctx& ctx, uint64_t dev_a, uint64_t dev_b);

  const ledger::ImmutableLedger& il() const { return il_; }
  const HomeCounters& home_counters() const { return home_; }

  void on_start(Ctx& ctx) override;
  void on_event(Ctx& ctx, const SimEvent& ev) override;

 protected:
  bool authorize(Ctx& ctx, const ledger::MultisigTx& tx, bool* respond) override;
  void after_response(Ctx& ctx, const ledger::MultisigTx& done, bool accept,
                      NodeId origin) override;
  void on_completed(Ctx& ctx, const ledger::MultisigTx& tx) override;

 private:
  struct Flow {
    NodeId origin = kNoNode;
    ledger::ActionKind action = ledger::ActionKind::access;
    uint64_t device = 0;
    Hash256 overlay_tx{};
    uint64_t repeats_left = 0;
    double period = 0;
    double asked_at = 0;
  };
  void read_device(Ctx& ctx, uint64_t flow_id);
  void handle_device_reply(Ctx& ctx, uint64_t device_id, const HomeCmd& cmd);
  void start_cloud_store(Ctx& ctx, uint64_t device, const Bytes& data);
  ledger::IlTxType il_type(ledger::ActionKind a) const;

  ledger::ImmutableLedger il_;
  crypto::DhGroup dh_;
  std::map<uint64_t, HomeDevice> devices_;
  std::map<uint64_t, Flow> flows_;
  uint64_t next_flow_ = 1;
  PublicKey cloud_pk_{};
  NodeId cloud_node_ = kNoNode;
  ledger::ChainWriter anchor_writer_;
  double anchor_interval_ = 0;
  uint64_t monitor_repeats_ = 3;
  double monitor_period_ = 1.0;
  bool store_busy_ = false;
  std::deque<std::pair<uint64_t, Bytes>> store_q_;
  HomeCounters home_;
};

struct DeviceCounters {
  uint64_t commands = 0;
  uint64_t replies = 0;
  uint64_t stores_sent = 0;
  uint64_t bad_cmds = 0;
  uint64_t peer_received = 0;
  uint64_t peer_dropped = 0;
};

class DeviceNode : public Node {
 public:
  DeviceNode(NodeId id, uint64_t device_id, NodeId manager, crypto::SymmetricKey key,
             crypto::DhGroup dh, uint64_t dh_secret);

  uint64_t device_id() const { return device_id_; }
  uint64_t dh_public() const;
  // Periodic unsolicited readings pushed to the manager as local stores.
  void set_store_schedule(double period, uint64_t count) {
    store_period_ = period;
    store_left_ = count;
  }
  bool has_peer_key(uint64_t peer) const { return peer_keys_.count(peer) > 0; }
  void send_to_peer(Ctx& ctx, uint64_t peer_device, NodeId peer_node);
  const DeviceCounters& counters() const { return counters_; }

  void on_start(Ctx& ctx) override;
  void on_event(Ctx& ctx, const SimEvent& ev) override;

 private:
  Bytes reading();
  uint64_t device_id_;
  NodeId manager_;
  crypto::SymmetricKey key_;
  crypto::DhGroup dh_;
  uint64_t dh_secret_;
  std::map<uint64_t, crypto::SymmetricKey> peer_keys_;
  double store_period_ = 0;
  uint64_t store_left_ = 0;
  uint64_t seq_ = 0;
  DeviceCounters counters_;
};

struct CloudCounters {
  uint64_t stored = 0;
  uint64_t rejected_credential = 0;
  uint64_t rejected_integrity = 0;
};

class CloudNode : public MemberNode {
 public:
  CloudNode(NodeId id, crypto::KeyPair identity, MemberConfig mc)
      : MemberNode(id, std::move(identity), mc, NodeKind::cloud) {}

  void add_credential(const PublicKey& pk) { credentials_.insert(Bytes(pk.begin(), pk.end())); }
  const std::map<Bytes, Bytes>& storage() const { return store_; }
  const CloudCounters& cloud_counters() const { return cloud_; }

  void on_event(Ctx& ctx, const SimEvent& ev) override;

 private:
  std::set<Bytes> credentials_;
  std::map<Bytes, Bytes> store_;  // data hash -> blob
  CloudCounters cloud_;
};

}  // namespace lsb::sim
