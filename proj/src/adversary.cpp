#include "lsb/adversary.hpp"

namespace lsb::sim {

using ledger::AnyTx;
using ledger::MultisigTx;

MultisigTx fabricate_tx(crypto::Rng& rng) {
  MultisigTx t;
  auto fill = [&rng](auto& arr) {
    for (auto& b : arr) b = uint8_t(rng());
  };
  fill(t.prev_tx_id);
  fill(t.requester_pk);
  fill(t.requester_sig);
  fill(t.requestee_pk);
  fill(t.requestee_sig);
  fill(t.output.next_pk_hash);
  t.requestee_signed = true;
  t.output.accepted = rng() % 100;
  t.output.rejected = rng() % 100;
  t.metadata_ct.resize(64);
  for (auto& b : t.metadata_ct) b = uint8_t(rng());
  t.tx_id = t.compute_tx_id();
  return t;
}

AppendingObm::AppendingObm(NodeId id, crypto::KeyPair key, ConsensusConfig cc,
                           trust::TrustConfig tc, dtm::DtmConfig dc, AdversaryConfig ac)
    : ObmNode(id, std::move(key), cc, tc, dc), ac_(ac) {
  self_appends_ = false;
}

double AppendingObm::pick_waiting(Ctx& ctx) {
  double defer = ac_.attack_start > ctx.now ? ac_.attack_start - ctx.now : 0.0;
  return defer + ac_.attack_interval;
}

std::vector<AnyTx> AppendingObm::select_block_txs(Ctx& ctx) {
  std::vector<AnyTx> txs;
  size_t fakes = std::max<uint64_t>(1, ac_.fake_txs);
  size_t reals = 0;
  if (cc_.t_max > fakes) reals = std::min<size_t>(pool_.size(), cc_.t_max - fakes);
  for (size_t i = 0; i < reals; ++i) txs.push_back(pool_[i]);
  for (size_t i = 0; i < fakes; ++i) txs.push_back(fabricate_tx(ctx.rng));
  return txs;
}

BurstObm::BurstObm(NodeId id, crypto::KeyPair key, ConsensusConfig cc, trust::TrustConfig tc,
                   dtm::DtmConfig dc, AdversaryConfig ac)
    : ObmNode(id, std::move(key), cc, tc, dc), ac_(ac) {}

double BurstObm::pick_waiting(Ctx& ctx) {
  if (fired_ == 0) return ac_.attack_start > ctx.now ? ac_.attack_start - ctx.now : 0.0;
  return ac_.attack_interval;
}

std::vector<AnyTx> BurstObm::select_block_txs(Ctx& ctx) {
  if (fired_ >= ac_.burst_blocks) return {};
  fired_++;
  return ObmNode::select_block_txs(ctx);
}

EarlyFireObm::EarlyFireObm(NodeId id, crypto::KeyPair key, ConsensusConfig cc,
                           trust::TrustConfig tc, dtm::DtmConfig dc, AdversaryConfig ac)
    : ObmNode(id, std::move(key), cc, tc, dc), ac_(ac) {
  self_appends_ = false;
}

double EarlyFireObm::pick_waiting(Ctx& ctx) {
  return ac_.attack_start > ctx.now ? ac_.attack_start - ctx.now : 0.0;
}

ModifyingObm::ModifyingObm(NodeId id, crypto::KeyPair key, ConsensusConfig cc,
                           trust::TrustConfig tc, dtm::DtmConfig dc, AdversaryConfig ac)
    : ObmNode(id, std::move(key), cc, tc, dc), ac_(ac) {
  self_appends_ = false;
}

double ModifyingObm::pick_waiting(Ctx& ctx) {
  double defer = ac_.attack_start > ctx.now ? ac_.attack_start - ctx.now : 0.0;
  return defer + ac_.attack_interval;
}

std::vector<AnyTx> ModifyingObm::select_block_txs(Ctx& ctx) {
  std::vector<AnyTx> txs = ObmNode::select_block_txs(ctx);
  for (auto it = txs.rbegin(); it != txs.rend(); ++it) {
    if (auto* ms = std::get_if<MultisigTx>(&*it)) {
      // corrupt the sealed metadata and re-seat the id so the tamper only
      // shows up under signature verification
      if (ms->metadata_ct.empty()) ms->metadata_ct.push_back(0);
      ms->metadata_ct[0] ^= 0x01;
      ms->tx_id = ms->compute_tx_id();
      break;
    }
  }
  return txs;
}

FalseRepObm::FalseRepObm(NodeId id, crypto::KeyPair key, ConsensusConfig cc,
                         trust::TrustConfig tc, dtm::DtmConfig dc, AdversaryConfig ac)
    : ObmNode(id, std::move(key), cc, tc, dc), ac_(ac) {}

void FalseRepObm::post_block_event(Ctx& ctx, const ledger::Block& b, BlockVerdict verdict) {
  if (b.header.generator != ac_.colluder) return;
  if (verdict == BlockVerdict::accept) return;  // base path already vouched
  Hash256 body = b.body_hash();
  Signature sig = crypto::sign(key_.sk, Bytes(body.begin(), body.end()));
  ctx.eng.broadcast_obms(id(), VouchNotice{body, b.header.generator, id(), sig});
}

ForgeDtmObm::ForgeDtmObm(NodeId id, crypto::KeyPair key, ConsensusConfig cc,
                         trust::TrustConfig tc, dtm::DtmConfig dc, AdversaryConfig ac)
    : ObmNode(id, std::move(key), cc, tc, dc), ac_(ac) {}

std::optional<dtm::DtmAction> ForgeDtmObm::dtm_decision(Ctx& ctx,
                                                        const dtm::UtilizationSample& s) {
  (void)s;
  if (ctx.now < ac_.attack_start) return std::nullopt;
  return ac_.forged_action;
}

}  // namespace lsb::sim
