#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lsb/dtm.hpp"
#include "lsb/ledger.hpp"
#include "lsb/netsim.hpp"
#include "lsb/trust.hpp"

namespace lsb::sim {

// k distinct indices out of [0, n), consumed from the caller's stream in a
// fixed order so results are reproducible from the seed alone.
std::vector<size_t> sample_without_replacement(crypto::Rng& rng, size_t n, size_t k);

struct KeyListEntry {
  bool any_requester = true;
  PublicKey requester{};  // exact match when !any_requester
  PublicKey requestee{};
  NodeId member = kNoNode;
};

struct ConsensusConfig {
  uint64_t t_max = 10;
  double consensus_period = 600;
  double max_waiting = 0;  // 0: filled with 2 * max_e2e at start
  double max_e2e = 0;
  bool can_generate = true;
  bool vouch = true;
  bool dtm_enabled = false;
};

struct ObmCounters {
  uint64_t blocks_generated = 0;
  uint64_t blocks_accepted = 0;
  uint64_t blocks_rejected_compliance = 0;
  uint64_t blocks_rejected_invalid_tx = 0;
  uint64_t blocks_rejected_bad_sig = 0;
  uint64_t blocks_rejected_malformed = 0;
  uint64_t blocks_stale = 0;
  uint64_t blocks_duplicate = 0;
  uint64_t reorgs = 0;
  uint64_t tx_admitted = 0;
  uint64_t tx_duplicate = 0;
  uint64_t tx_rejected = 0;
  uint64_t tx_forwarded = 0;
  uint64_t tx_no_route = 0;
  uint64_t confirms_sent = 0;
  ledger::VerifyStats verify;

  uint64_t blocks_rejected_total() const {
    return blocks_rejected_compliance + blocks_rejected_invalid_tx + blocks_rejected_bad_sig +
           blocks_rejected_malformed;
  }
};

// One accepted block as seen by this verifier: how much transaction-level
// validation its trust ranking actually required.
struct BlockVerifyRecord {
  double at = 0;
  uint64_t generator = 0;
  uint64_t ptv = 0;
  uint64_t sampled = 0;
  uint64_t block_txs = 0;
  uint64_t alg1_delta = 0;
};

class ObmNode : public Node {
 public:
  ObmNode(NodeId id, crypto::KeyPair block_key, ConsensusConfig cc, trust::TrustConfig tc,
          dtm::DtmConfig dc);

  // wiring, called by the scenario builder before the run
  void set_directory(std::map<NodeId, PublicKey> block_keys) { directory_ = std::move(block_keys); }
  void set_genesis_rules(ledger::TrustRoots roots, ledger::BurnLedger burns);
  void bootstrap(const ledger::Chain& replica) { chain_ = replica; }
  void add_keylist(const KeyListEntry& e) { keylist_.push_back(e); }
  void remove_keylist(const PublicKey& requestee);
  void set_active(bool a) { active_ = a; }
  bool active() const { return active_; }

  const ledger::Chain& chain() const { return chain_; }
  ledger::Chain& chain_mut() { return chain_; }
  trust::TrustTable& trust() { return trust_; }
  const ObmCounters& counters() const { return counters_; }
  ConsensusConfig& config() { return cc_; }
  const dtm::DtmConfig& dtm_config() const { return dc_; }
  size_t pool_size() const { return pool_.size(); }
  const PublicKey& block_pk() const { return key_.pk; }
  const std::vector<dtm::UtilizationSample>& dtm_trace() const { return dtm_trace_; }
  const std::vector<std::pair<double, dtm::DtmAction>>& dtm_applied() const {
    return dtm_applied_;
  }
  const std::vector<BlockVerifyRecord>& verify_log() const { return verify_log_; }
  uint64_t trust_penalties() const { return penalties_; }
  double last_dtm_sample() const { return last_sample_; }

  // Re-aligns a promoted OBM with a live replica (out-of-band state sync).
  void adopt_state(const ObmNode& donor);

  void on_start(Ctx&) override;
  void on_event(Ctx&, const SimEvent&) override;

 protected:
  // adversarial subclasses bend these
  virtual double pick_waiting(Ctx& ctx);
  virtual bool respect_period() const { return true; }
  virtual bool needs_full_pool() const { return true; }
  // Transactions for the next own block; empty means nothing to do.
  virtual std::vector<ledger::AnyTx> select_block_txs(Ctx& ctx);
  virtual std::optional<dtm::DtmAction> dtm_decision(Ctx& ctx, const dtm::UtilizationSample& s);
  virtual bool drop_member_traffic() const { return false; }

  void handle_tx(Ctx& ctx, const ledger::AnyTx& tx, NodeId src, bool from_member, NodeId origin);
  bool admit_to_pool(Ctx& ctx, const ledger::AnyTx& tx);
  ledger::TipResolver pool_aware_resolver(ledger::LedgerKind kind) const;
  void rebuild_pool_tips();
  void maybe_arm(Ctx& ctx);
  void fire_block(Ctx& ctx);
  void handle_block(Ctx& ctx, const SimEvent& ev);
  // full verdict for a foreign block; fills reason on failure
  enum class BlockVerdict { accept, reject_compliance, reject_invalid_tx, reject_bad_sig,
                            reject_malformed };
  BlockVerdict verify_block(Ctx& ctx, const ledger::Block& b, BlockVerifyRecord* rec);
  // called after every foreign block verdict on the straight path
  virtual void post_block_event(Ctx&, const ledger::Block&, BlockVerdict) {}
  void accept_block(Ctx& ctx, const ledger::Block& b, bool own);
  void penalize(uint64_t generator);
  void handle_vouch(Ctx& ctx, const VouchNotice& v);
  void dtm_sample(Ctx& ctx);
  void dtm_tally(Ctx& ctx, uint64_t window, const dtm::DtmAction& act, uint64_t signer,
                 const Signature& sig, bool is_proposal);
  void apply_dtm(Ctx& ctx, const dtm::DtmAction& act);
  void send_confirms(Ctx& ctx, const ledger::Block& b);

  crypto::KeyPair key_;
  ConsensusConfig cc_;
  trust::TrustConfig tc_;
  dtm::DtmConfig dc_;
  bool active_ = true;
  // A generator that knows its blocks are junk skips its own replica.
  bool self_appends_ = true;

  ledger::Chain chain_;
  ledger::TrustRoots roots_;
  ledger::BurnLedger burns_;
  trust::TrustTable trust_;
  std::map<NodeId, PublicKey> directory_;
  std::vector<KeyListEntry> keylist_;

  std::vector<ledger::AnyTx> pool_;
  std::unordered_set<Hash256, ledger::HashKey> pool_ids_;
  std::unordered_map<Hash256, ledger::TipRecord, ledger::HashKey> pool_ms_tips_;
  std::unordered_map<Hash256, ledger::TipRecord, ledger::HashKey> pool_ss_tips_;
  std::optional<double> pool_fill_time_;

  bool armed_ = false;
  uint64_t arm_tag_ = 0;
  bool eligibility_scheduled_ = false;
  double last_own_block_ = -1e18;
  // announce time of the current tip; rivals for the same parent are settled
  // by whichever copy left its generator first, so every replica picks the
  // same winner no matter the arrival order
  double tip_sent_at_ = -1e18;

  // per-generator last block arrival for emission-rate policing
  std::map<uint64_t, double> last_block_seen_;
  uint64_t penalties_ = 0;

  // one-shot confirm registrations: requester PK -> submitting members
  // (both sides of an intra-cluster transaction may wait on the same PK)
  std::map<Bytes, std::set<NodeId>> confirm_reg_;
  // vouches that arrived ahead of their block
  std::map<Hash256, std::vector<VouchNotice>> pending_vouches_;
  std::unordered_map<Hash256, size_t, ledger::HashKey> block_index_;  // body hash -> height

  // DTM state
  dtm::RateWindow arrivals_;
  double last_sample_ = 0;
  uint64_t window_id_ = 0;
  std::optional<dtm::DtmAction> pending_action_;
  bool signed_this_window_ = false;
  std::map<uint64_t, std::map<Bytes, std::set<uint64_t>>> dtm_tally_;
  std::set<uint64_t> dtm_window_applied_;
  std::vector<dtm::UtilizationSample> dtm_trace_;
  std::vector<std::pair<double, dtm::DtmAction>> dtm_applied_;

  ObmCounters counters_;
  std::vector<BlockVerifyRecord> verify_log_;
  // dedicated sampling stream, reproducible from (seed, verifier id) alone
  std::optional<crypto::Rng> sample_rng_;
};

struct MemberConfig {
  bool rotate_requester_keys = true;
  double confirm_timeout = 0;     // seconds; 0 disables the watchdog
  double inbound_rate_limit = 0;  // accepted requests per second; 0 = unlimited
  double inbound_rate_window = 1.0;
};

struct MemberCounters {
  uint64_t submitted = 0;
  uint64_t completed_back = 0;
  uint64_t completed_rejected = 0;
  uint64_t confirms = 0;
  uint64_t timeouts = 0;
  uint64_t reassociations = 0;
  uint64_t responded = 0;
  uint64_t rejected_requests = 0;
  uint64_t dropped_rate_limit = 0;
  uint64_t ticks_queued = 0;
  uint64_t data_received = 0;
};

class MemberNode : public Node {
 public:
  MemberNode(NodeId id, crypto::KeyPair identity, MemberConfig mc,
             NodeKind kind = NodeKind::member);

  const PublicKey& identity_pk() const { return identity_.pk; }
  const crypto::KeyPair& identity() const { return identity_; }
  void set_obm(NodeId o) { obm_ = o; }
  NodeId obm() const { return obm_; }
  void set_writer(ledger::ChainWriter w) { writer_ = std::move(w); }
  ledger::ChainWriter& writer() { return writer_; }
  void set_load_target(const PublicKey& requestee, const ledger::TxMetadata& meta) {
    target_ = requestee;
    target_meta_ = meta;
  }
  const MemberCounters& counters() const { return counters_; }
  const std::vector<double>& confirm_latencies() const { return confirm_lat_; }
  const std::vector<double>& data_latencies() const { return data_lat_; }

  void on_event(Ctx&, const SimEvent&) override;

 protected:
  // policy hook for requestees; default accepts everything
  virtual bool authorize(Ctx& ctx, const ledger::MultisigTx& tx, bool* respond);
  virtual void on_completed(Ctx& ctx, const ledger::MultisigTx& tx) { (void)ctx; (void)tx; }
  // requestee-side hook after the signed decision went out
  virtual void after_response(Ctx& ctx, const ledger::MultisigTx& done, bool accept,
                              NodeId origin) {
    (void)ctx; (void)done; (void)accept; (void)origin;
  }
  void emit_load_tx(Ctx& ctx);
  void submit_completed(Ctx& ctx, const ledger::MultisigTx& tx);
  void reassociate(Ctx& ctx);

  crypto::KeyPair identity_;
  MemberConfig mc_;
  NodeId obm_ = kNoNode;
  ledger::ChainWriter writer_;
  PublicKey target_{};
  ledger::TxMetadata target_meta_;
  bool awaiting_complete_ = false;
  uint64_t queued_ticks_ = 0;
  struct Pending {
    ledger::MultisigTx tx;
    double submitted_at = 0;
  };
  std::map<Bytes, Pending> pending_;  // key: tx_id bytes
  std::deque<double> inbound_times_;
  std::set<NodeId> blacklist_;
  bool keylist_registered_ = false;
  MemberCounters counters_;
  std::vector<double> confirm_lat_;
  std::vector<double> data_lat_;
};

}  // namespace lsb::sim
