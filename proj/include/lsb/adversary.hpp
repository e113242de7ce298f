#pragma once

#include "lsb/obm.hpp"

namespace lsb::sim {

// Structurally well-formed transaction with no valid ancestry or signatures;
// survives format admission, dies under verification when sampled.
ledger::MultisigTx fabricate_tx(crypto::Rng& rng);

struct AdversaryConfig {
  double attack_start = 0;      // quiet until then
  double attack_interval = 1.0; // pacing between hostile blocks
  uint64_t fake_txs = 1;        // fabricated txs per block
  uint64_t burst_blocks = 3;    // burst length before going quiet
  uint64_t colluder = kNoNode;  // generator the false vouchers boost
  dtm::DtmAction forged_action; // injected proposal, every window
};

// Publishes blocks padded with fabricated transactions, skipping its own
// replica so every hostile block lands on the honest tip.
class AppendingObm : public ObmNode {
 public:
  AppendingObm(NodeId id, crypto::KeyPair key, ConsensusConfig cc, trust::TrustConfig tc,
               dtm::DtmConfig dc, AdversaryConfig ac);

 protected:
  double pick_waiting(Ctx& ctx) override;
  bool respect_period() const override { return false; }
  bool needs_full_pool() const override { return false; }
  std::vector<ledger::AnyTx> select_block_txs(Ctx& ctx) override;
  AdversaryConfig ac_;
};

// Publishes a fixed burst of honest-content blocks far inside one consensus
// period, then stops; everything but the first must get rate-policed away.
class BurstObm : public ObmNode {
 public:
  BurstObm(NodeId id, crypto::KeyPair key, ConsensusConfig cc, trust::TrustConfig tc,
           dtm::DtmConfig dc, AdversaryConfig ac);

 protected:
  double pick_waiting(Ctx& ctx) override;
  bool respect_period() const override { return false; }
  bool needs_full_pool() const override { return false; }
  std::vector<ledger::AnyTx> select_block_txs(Ctx& ctx) override;
  AdversaryConfig ac_;
  uint64_t fired_ = 0;
};

// Generates honest content but fires instantly and ignores the period.
class EarlyFireObm : public ObmNode {
 public:
  EarlyFireObm(NodeId id, crypto::KeyPair key, ConsensusConfig cc, trust::TrustConfig tc,
               dtm::DtmConfig dc, AdversaryConfig ac);

 protected:
  double pick_waiting(Ctx& ctx) override;
  bool respect_period() const override { return false; }
  AdversaryConfig ac_;
};

// Takes honest pool transactions and corrupts one before publishing.
class ModifyingObm : public ObmNode {
 public:
  ModifyingObm(NodeId id, crypto::KeyPair key, ConsensusConfig cc, trust::TrustConfig tc,
               dtm::DtmConfig dc, AdversaryConfig ac);

 protected:
  double pick_waiting(Ctx& ctx) override;
  bool respect_period() const override { return false; }
  std::vector<ledger::AnyTx> select_block_txs(Ctx& ctx) override;
  AdversaryConfig ac_;
};

// Silently discards everything its own cluster members submit.
class DroppingObm : public ObmNode {
 public:
  using ObmNode::ObmNode;

 protected:
  bool drop_member_traffic() const override { return true; }
};

// Vouches for one generator's blocks whether or not they verified.
class FalseRepObm : public ObmNode {
 public:
  FalseRepObm(NodeId id, crypto::KeyPair key, ConsensusConfig cc, trust::TrustConfig tc,
              dtm::DtmConfig dc, AdversaryConfig ac);

 protected:
  void post_block_event(Ctx& ctx, const ledger::Block& b, BlockVerdict verdict) override;
  AdversaryConfig ac_;
};

// Proposes a forged throughput-management action every window.
class ForgeDtmObm : public ObmNode {
 public:
  ForgeDtmObm(NodeId id, crypto::KeyPair key, ConsensusConfig cc, trust::TrustConfig tc,
              dtm::DtmConfig dc, AdversaryConfig ac);

 protected:
  std::optional<dtm::DtmAction> dtm_decision(Ctx& ctx,
                                             const dtm::UtilizationSample& s) override;
  AdversaryConfig ac_;
};

}  // namespace lsb::sim
