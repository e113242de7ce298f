#include "lsb/obm.hpp"

#include <algorithm>
#include <cmath>

namespace lsb::sim {

using ledger::AnyTx;
using ledger::Block;
using ledger::GenesisTx;
using ledger::LedgerKind;
using ledger::MultisigTx;
using ledger::SingleSigTx;
using ledger::TipRecord;

std::vector<size_t> sample_without_replacement(crypto::Rng& rng, size_t n, size_t k) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  k = std::min(k, n);
  for (size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

namespace {

Bytes pk_bytes(const PublicKey& pk) { return Bytes(pk.begin(), pk.end()); }

Bytes hash_bytes(const Hash256& h) { return Bytes(h.begin(), h.end()); }

}  // namespace

ObmNode::ObmNode(NodeId id, crypto::KeyPair block_key, ConsensusConfig cc, trust::TrustConfig tc,
                 dtm::DtmConfig dc)
    : Node(id, NodeKind::obm), key_(std::move(block_key)), cc_(cc), tc_(tc), dc_(dc), trust_(tc) {}

void ObmNode::set_genesis_rules(ledger::TrustRoots roots, ledger::BurnLedger burns) {
  roots_ = std::move(roots);
  burns_ = std::move(burns);
}

void ObmNode::adopt_state(const ObmNode& donor) {
  chain_ = donor.chain_;
  block_index_.clear();
  for (size_t i = 0; i < chain_.blocks().size(); ++i)
    block_index_[chain_.blocks()[i].body_hash()] = i;
  pool_ = donor.pool_;
  pool_ids_ = donor.pool_ids_;
  rebuild_pool_tips();
  last_sample_ = donor.last_sample_;
  window_id_ = donor.window_id_;
  arrivals_ = donor.arrivals_;
  cc_.consensus_period = donor.cc_.consensus_period;
}

void ObmNode::remove_keylist(const PublicKey& requestee) {
  keylist_.erase(std::remove_if(keylist_.begin(), keylist_.end(),
                                [&](const KeyListEntry& e) { return e.requestee == requestee; }),
                 keylist_.end());
}

void ObmNode::on_start(Ctx& ctx) {
  const Topology& topo = ctx.eng.topo();
  if (cc_.max_e2e <= 0) cc_.max_e2e = topo.max_end_to_end();
  if (cc_.max_waiting <= 0) cc_.max_waiting = 2 * cc_.max_e2e;
  if (dc_.cp_min <= 0) dc_.cp_min = 2 * cc_.max_e2e;
  if (!sample_rng_)
    sample_rng_ = crypto::derive_rng(ctx.eng.seed(), 0x5A00ull ^ (uint64_t(id()) << 16));
  if (cc_.dtm_enabled && active_) {
    last_sample_ = 0;
    ctx.eng.schedule(id(), cc_.consensus_period, TimerFire{TimerFire::Kind::dtm_sample, 0});
  }
}

void ObmNode::on_event(Ctx& ctx, const SimEvent& ev) {
  if (auto* t = std::get_if<TimerFire>(&ev.msg)) {
    switch (t->kind) {
      case TimerFire::Kind::block_wait:
        if (armed_ && t->tag == arm_tag_) {
          armed_ = false;
          fire_block(ctx);
        }
        return;
      case TimerFire::Kind::eligibility:
        eligibility_scheduled_ = false;
        maybe_arm(ctx);
        return;
      case TimerFire::Kind::dtm_sample:
        dtm_sample(ctx);
        return;
      case TimerFire::Kind::dtm_propose:
        if (pending_action_ && t->tag == window_id_ - 1 && !signed_this_window_) {
          Signature sig =
              crypto::sign(key_.sk, pending_action_->canonical(t->tag));
          signed_this_window_ = true;
          ctx.eng.broadcast_obms(id(), DtmProposal{t->tag, *pending_action_, id(), sig});
          dtm_tally(ctx, t->tag, *pending_action_, id(), sig, false);
        }
        return;
      default:
        return;
    }
  }
  if (!active_) return;
  if (auto* s = std::get_if<TxSubmit>(&ev.msg)) {
    handle_tx(ctx, s->tx, ev.src, true, ev.src);
    return;
  }
  if (auto* r = std::get_if<TxRelay>(&ev.msg)) {
    handle_tx(ctx, r->tx, ev.src, false, r->origin);
    return;
  }
  if (std::holds_alternative<BlockAnnounce>(ev.msg)) {
    handle_block(ctx, ev);
    return;
  }
  if (auto* v = std::get_if<VouchNotice>(&ev.msg)) {
    handle_vouch(ctx, *v);
    return;
  }
  if (auto* p = std::get_if<DtmProposal>(&ev.msg)) {
    dtm_tally(ctx, p->window, p->action, p->signer, p->sig, true);
    return;
  }
  if (auto* c = std::get_if<DtmCosign>(&ev.msg)) {
    dtm_tally(ctx, c->window, c->action, c->signer, c->sig, false);
    return;
  }
  if (auto* k = std::get_if<KeylistUpdate>(&ev.msg)) {
    if (k->add) {
      KeyListEntry e;
      e.any_requester = k->any_requester;
      e.requester = k->requester;
      e.requestee = k->requestee;
      e.member = k->member != kNoNode ? k->member : ev.src;
      keylist_.push_back(e);
    } else {
      remove_keylist(k->requestee);
    }
    return;
  }
}

// --- transaction plane ---

void ObmNode::handle_tx(Ctx& ctx, const AnyTx& tx, NodeId src, bool from_member,
                        NodeId origin) {
  if (from_member && drop_member_traffic()) return;
  const auto* ms = std::get_if<MultisigTx>(&tx);
  if (ms && !ms->requestee_signed) {
    // pending request: route by key list, broadcast if unresolved locally
    if (from_member) confirm_reg_[pk_bytes(ms->requester_pk)].insert(src);
    for (const auto& e : keylist_) {
      if (!e.any_requester && !(e.requester == ms->requester_pk)) continue;
      if (!(e.requestee == ms->requestee_pk)) continue;
      counters_.tx_forwarded++;
      ctx.eng.send(id(), e.member, TxForward{*ms, origin});
      return;
    }
    if (from_member) {
      ctx.eng.broadcast_obms(id(), TxRelay{tx, origin});
    } else {
      counters_.tx_no_route++;
    }
    return;
  }
  if (from_member) {
    // requester PKs of finished transactions map back to the submitting
    // member so it can be confirmed once the transaction is mined
    if (ms) confirm_reg_[pk_bytes(ms->requester_pk)].insert(src);
    if (const auto* ss = std::get_if<SingleSigTx>(&tx))
      confirm_reg_[pk_bytes(ss->requester_pk)].insert(src);
    if (const auto* g = std::get_if<GenesisTx>(&tx))
      confirm_reg_[pk_bytes(g->pk)].insert(src);
  }
  bool admitted = admit_to_pool(ctx, tx);
  if (admitted && from_member) ctx.eng.broadcast_obms(id(), TxRelay{tx, kNoNode});
}

ledger::TipResolver ObmNode::pool_aware_resolver(LedgerKind kind) const {
  const auto& over = kind == LedgerKind::multisig ? pool_ms_tips_ : pool_ss_tips_;
  auto chain_res =
      kind == LedgerKind::multisig ? chain_.multisig_resolver() : chain_.singlesig_resolver();
  return [&over, chain_res](const Hash256& h) -> std::optional<TipRecord> {
    auto it = over.find(h);
    if (it != over.end()) return it->second;
    return chain_res(h);
  };
}

void ObmNode::rebuild_pool_tips() {
  pool_ms_tips_.clear();
  pool_ss_tips_.clear();
  for (const auto& tx : pool_) {
    if (const auto* ms = std::get_if<MultisigTx>(&tx)) {
      pool_ms_tips_[ms->output.next_pk_hash] =
          TipRecord{ms->tx_id, ms->output.accepted, ms->output.rejected};
    } else if (const auto* ss = std::get_if<SingleSigTx>(&tx)) {
      pool_ss_tips_[ss->next_pk_hash] = TipRecord{ss->tx_id, 0, 0};
    } else if (const auto* g = std::get_if<GenesisTx>(&tx)) {
      auto& over = g->kind == LedgerKind::multisig ? pool_ms_tips_ : pool_ss_tips_;
      over[g->next_pk_hash] = TipRecord{g->tx_id, 0, 0};
    }
  }
}

bool ObmNode::admit_to_pool(Ctx& ctx, const AnyTx& tx) {
  Hash256 tid = ledger::tx_id_of(tx);
  if (chain_.contains_tx(tid) || pool_ids_.count(tid)) {
    counters_.tx_duplicate++;
    return false;
  }
  if (!ledger::well_formed(tx)) {
    counters_.tx_rejected++;
    return false;
  }
  ledger::VerifyResult vr;
  if (const auto* ms = std::get_if<MultisigTx>(&tx)) {
    vr = ledger::verify_multisig(*ms, pool_aware_resolver(LedgerKind::multisig),
                                 &counters_.verify);
  } else if (const auto* ss = std::get_if<SingleSigTx>(&tx)) {
    vr = ledger::verify_singlesig(*ss, pool_aware_resolver(LedgerKind::singlesig),
                                  &counters_.verify);
  } else {
    vr = ledger::verify_genesis(std::get<GenesisTx>(tx), roots_, burns_, &counters_.verify);
  }
  if (!vr.ok()) {
    counters_.tx_rejected++;
    return false;
  }
  bool was_below = pool_.size() < cc_.t_max;
  pool_.push_back(tx);
  pool_ids_.insert(tid);
  if (const auto* ms = std::get_if<MultisigTx>(&tx)) {
    pool_ms_tips_[ms->output.next_pk_hash] =
        TipRecord{ms->tx_id, ms->output.accepted, ms->output.rejected};
  } else if (const auto* ss = std::get_if<SingleSigTx>(&tx)) {
    pool_ss_tips_[ss->next_pk_hash] = TipRecord{ss->tx_id, 0, 0};
  } else if (const auto* g = std::get_if<GenesisTx>(&tx)) {
    auto& over = g->kind == LedgerKind::multisig ? pool_ms_tips_ : pool_ss_tips_;
    over[g->next_pk_hash] = TipRecord{g->tx_id, 0, 0};
  }
  counters_.tx_admitted++;
  arrivals_.record(ctx.now);
  if (was_below && pool_.size() >= cc_.t_max) pool_fill_time_ = ctx.now;
  maybe_arm(ctx);
  return true;
}

// --- block generation ---

double ObmNode::pick_waiting(Ctx& ctx) {
  std::uniform_real_distribution<double> u(0.0, cc_.max_waiting);
  return u(ctx.rng);
}

std::vector<AnyTx> ObmNode::select_block_txs(Ctx&) {
  size_t n = std::min<size_t>(cc_.t_max, pool_.size());
  return std::vector<AnyTx>(pool_.begin(), pool_.begin() + n);
}

void ObmNode::maybe_arm(Ctx& ctx) {
  if (!active_ || !cc_.can_generate || armed_) return;
  if (needs_full_pool() && pool_.size() < cc_.t_max) return;
  if (respect_period() && ctx.now - last_own_block_ < cc_.consensus_period - 1e-9) {
    if (!eligibility_scheduled_) {
      eligibility_scheduled_ = true;
      double due = last_own_block_ + cc_.consensus_period - ctx.now;
      ctx.eng.schedule(id(), std::max(due, 0.0), TimerFire{TimerFire::Kind::eligibility, 0});
    }
    return;
  }
  armed_ = true;
  ++arm_tag_;
  ctx.eng.schedule(id(), pick_waiting(ctx), TimerFire{TimerFire::Kind::block_wait, arm_tag_});
}

void ObmNode::fire_block(Ctx& ctx) {
  if (!active_) return;
  std::vector<AnyTx> txs = select_block_txs(ctx);
  if (txs.empty()) return;  // pool drained while waiting
  Block b;
  b.header.prev_block_hash = chain_.tip_hash();
  b.header.generator = id();
  b.txs = std::move(txs);
  b.header.generator_sig = crypto::sign(key_.sk, hash_bytes(b.body_hash()));
  counters_.blocks_generated++;
  last_own_block_ = ctx.now;
  tip_sent_at_ = ctx.now;
  auto shared = std::make_shared<const Block>(b);
  if (self_appends_) accept_block(ctx, b, true);
  ctx.eng.broadcast_obms(id(), BlockAnnounce{shared, ctx.now});
  maybe_arm(ctx);
}

void ObmNode::penalize(uint64_t generator) {
  trust_.record_penalty(generator);
  penalties_++;
}

ObmNode::BlockVerdict ObmNode::verify_block(Ctx& ctx, const Block& b, BlockVerifyRecord* rec) {
  if (b.txs.empty() || b.txs.size() > cc_.t_max) return BlockVerdict::reject_malformed;
  auto dit = directory_.find(b.header.generator);
  if (dit == directory_.end()) return BlockVerdict::reject_bad_sig;
  if (!crypto::verify(dit->second, hash_bytes(b.body_hash()), b.header.generator_sig))
    return BlockVerdict::reject_bad_sig;

  int ptv = trust_.select_ptv(b.header.generator);
  size_t n = b.txs.size();
  size_t k = size_t((uint64_t(ptv) * n + 99) / 100);
  uint64_t alg1_before = counters_.verify.alg1_executions;
  std::vector<size_t> picked = sample_without_replacement(*sample_rng_, n, k);
  std::vector<bool> is_sampled(n, false);
  for (size_t i : picked) is_sampled[i] = true;

  // Verify only the sampled transactions, but apply every transaction to a
  // local tip overlay so later block entries chain correctly.
  std::unordered_map<Hash256, TipRecord, ledger::HashKey> ms_over, ss_over;
  auto overlay_resolver = [&](LedgerKind kind) -> ledger::TipResolver {
    auto& over = kind == LedgerKind::multisig ? ms_over : ss_over;
    auto chain_res =
        kind == LedgerKind::multisig ? chain_.multisig_resolver() : chain_.singlesig_resolver();
    return [&over, chain_res](const Hash256& h) -> std::optional<TipRecord> {
      auto it = over.find(h);
      if (it != over.end()) return it->second;
      return chain_res(h);
    };
  };
  for (size_t i = 0; i < n; ++i) {
    const AnyTx& tx = b.txs[i];
    if (is_sampled[i]) {
      ledger::VerifyResult vr;
      if (!ledger::well_formed(tx)) return BlockVerdict::reject_invalid_tx;
      if (const auto* ms = std::get_if<MultisigTx>(&tx)) {
        vr = ledger::verify_multisig(*ms, overlay_resolver(LedgerKind::multisig),
                                     &counters_.verify);
      } else if (const auto* ss = std::get_if<SingleSigTx>(&tx)) {
        vr = ledger::verify_singlesig(*ss, overlay_resolver(LedgerKind::singlesig),
                                      &counters_.verify);
      } else {
        vr = ledger::verify_genesis(std::get<GenesisTx>(tx), roots_, burns_, &counters_.verify);
      }
      if (!vr.ok()) return BlockVerdict::reject_invalid_tx;
    }
    if (const auto* ms = std::get_if<MultisigTx>(&tx)) {
      ms_over[ms->output.next_pk_hash] =
          TipRecord{ms->tx_id, ms->output.accepted, ms->output.rejected};
    } else if (const auto* ss = std::get_if<SingleSigTx>(&tx)) {
      ss_over[ss->next_pk_hash] = TipRecord{ss->tx_id, 0, 0};
    } else if (const auto* g = std::get_if<GenesisTx>(&tx)) {
      auto& over = g->kind == LedgerKind::multisig ? ms_over : ss_over;
      over[g->next_pk_hash] = TipRecord{g->tx_id, 0, 0};
    }
  }
  if (rec) {
    rec->at = ctx.now;
    rec->generator = b.header.generator;
    rec->ptv = uint64_t(ptv);
    rec->sampled = k;
    rec->block_txs = n;
    rec->alg1_delta = counters_.verify.alg1_executions - alg1_before;
  }
  return BlockVerdict::accept;
}

void ObmNode::accept_block(Ctx& ctx, const Block& b, bool own) {
  chain_.append(b);
  block_index_[b.body_hash()] = chain_.blocks().size() - 1;
  // prune mined transactions out of the pool
  std::unordered_set<Hash256, ledger::HashKey> mined;
  for (const auto& tx : b.txs) mined.insert(ledger::tx_id_of(tx));
  std::vector<AnyTx> keep;
  keep.reserve(pool_.size());
  for (auto& tx : pool_) {
    Hash256 tid = ledger::tx_id_of(tx);
    if (mined.count(tid)) {
      pool_ids_.erase(tid);
    } else {
      keep.push_back(std::move(tx));
    }
  }
  pool_ = std::move(keep);
  rebuild_pool_tips();
  if (pool_.size() < cc_.t_max) {
    pool_fill_time_.reset();
    if (armed_) {
      armed_ = false;
      ++arm_tag_;
    }
  } else {
    pool_fill_time_ = ctx.now;
  }
  if (!own) {
    counters_.blocks_accepted++;
    trust_.record_validated(b.header.generator);
    Hash256 body = b.body_hash();
    auto pend = pending_vouches_.find(body);
    if (pend != pending_vouches_.end()) {
      for (const auto& v : pend->second) {
        chain_.blocks().back().add_vouch(v.voucher, v.sig);
        trust_.record_vouch(v.generator, v.voucher);
      }
      pending_vouches_.erase(pend);
    }
    if (cc_.vouch) {
      Signature sig = crypto::sign(key_.sk, hash_bytes(body));
      chain_.blocks().back().add_vouch(id(), sig);
      ctx.eng.broadcast_obms(id(), VouchNotice{body, b.header.generator, id(), sig});
    }
  }
  send_confirms(ctx, b);
  maybe_arm(ctx);
}

void ObmNode::send_confirms(Ctx& ctx, const Block& b) {
  const Topology& topo = ctx.eng.topo();
  for (const auto& tx : b.txs) {
    Bytes key;
    Hash256 tid = ledger::tx_id_of(tx);
    if (const auto* ms = std::get_if<MultisigTx>(&tx)) {
      key = pk_bytes(ms->requester_pk);
    } else if (const auto* ss = std::get_if<SingleSigTx>(&tx)) {
      key = pk_bytes(ss->requester_pk);
    } else {
      key = pk_bytes(std::get<GenesisTx>(tx).pk);
    }
    auto it = confirm_reg_.find(key);
    if (it == confirm_reg_.end()) continue;
    for (NodeId member : it->second) {
      if (!topo.has_link(id(), member)) continue;
      ctx.eng.send(id(), member, TxConfirm{tid});
      counters_.confirms_sent++;
    }
    confirm_reg_.erase(it);
  }
}

void ObmNode::handle_block(Ctx& ctx, const SimEvent& ev) {
  const auto& ba = std::get<BlockAnnounce>(ev.msg);
  const Block& b = *ba.block;
  Hash256 body = b.body_hash();
  if (block_index_.count(body)) {
    counters_.blocks_duplicate++;
    return;
  }
  uint64_t gen = b.header.generator;

  // Emission rate is policed independently of chain position: an honest
  // generator never publishes twice inside one period, so a too-soon block
  // is dropped and penalized even when it would otherwise be stale. Honest
  // spacing can undershoot the period by one waiting draw, so the policing
  // threshold concedes max_waiting plus a millisecond of jitter.
  double rate_floor = cc_.consensus_period - cc_.max_waiting - 1e-3;
  auto seen = last_block_seen_.find(gen);
  bool rate_violation = seen != last_block_seen_.end() && ev.at - seen->second < rate_floor;
  last_block_seen_[gen] = ev.at;
  if (rate_violation) {
    counters_.blocks_rejected_compliance++;
    penalize(gen);
    post_block_event(ctx, b, BlockVerdict::reject_compliance);
    return;
  }

  const Hash256 prev = b.header.prev_block_hash;
  if (!(prev == chain_.tip_hash())) {
    // A rival extending the same parent as my tip: the copy that left its
    // generator first wins, ties go to the smaller id. Every replica applies
    // the same send-time rule, so siblings resolve identically everywhere
    // regardless of arrival order.
    size_t h = chain_.blocks().size();
    Hash256 parent = h >= 2 ? chain_.blocks()[h - 2].body_hash() : ledger::kZeroHash;
    bool sibling = h >= 1 && prev == parent;
    if (sibling) {
      uint64_t tip_gen = chain_.blocks().back().header.generator;
      bool yield = ba.sent_at < tip_sent_at_ || (ba.sent_at == tip_sent_at_ && gen < tip_gen);
      if (yield) {
        Block loser = chain_.pop_tip();
        block_index_.erase(loser.body_hash());
        auto saved_pool = pool_;
        auto saved_ids = pool_ids_;
        auto saved_fill = pool_fill_time_;
        // displaced transactions rejoin the pool ahead of everything else so
        // the challenger is verified against the parent's ledger state
        std::vector<AnyTx> merged(loser.txs.begin(), loser.txs.end());
        for (auto& tx : pool_) merged.push_back(std::move(tx));
        pool_ = std::move(merged);
        pool_ids_.clear();
        for (const auto& tx : pool_) pool_ids_.insert(ledger::tx_id_of(tx));
        rebuild_pool_tips();
        BlockVerifyRecord rec;
        BlockVerdict verdict = verify_block(ctx, b, &rec);
        if (verdict == BlockVerdict::accept) {
          counters_.reorgs++;
          accept_block(ctx, b, false);
          verify_log_.push_back(rec);
          tip_sent_at_ = ba.sent_at;
        } else {
          // challenger was no good: put my old tip and pool back untouched
          pool_ = std::move(saved_pool);
          pool_ids_ = std::move(saved_ids);
          pool_fill_time_ = saved_fill;
          rebuild_pool_tips();
          chain_.append(loser);
          block_index_[chain_.blocks().back().body_hash()] = chain_.blocks().size() - 1;
          switch (verdict) {
            case BlockVerdict::reject_invalid_tx:
              counters_.blocks_rejected_invalid_tx++;
              penalize(gen);
              break;
            case BlockVerdict::reject_malformed:
              counters_.blocks_rejected_malformed++;
              penalize(gen);
              break;
            default:
              counters_.blocks_rejected_bad_sig++;
              break;
          }
        }
        post_block_event(ctx, b, verdict);
        return;
      }
    }
    counters_.blocks_stale++;
    return;
  }

  BlockVerifyRecord rec;
  BlockVerdict verdict = verify_block(ctx, b, &rec);
  switch (verdict) {
    case BlockVerdict::accept:
      accept_block(ctx, b, false);
      verify_log_.push_back(rec);
      tip_sent_at_ = ba.sent_at;
      break;
    case BlockVerdict::reject_compliance:
      counters_.blocks_rejected_compliance++;
      penalize(gen);
      break;
    case BlockVerdict::reject_invalid_tx:
      counters_.blocks_rejected_invalid_tx++;
      penalize(gen);
      break;
    case BlockVerdict::reject_malformed:
      counters_.blocks_rejected_malformed++;
      penalize(gen);
      break;
    case BlockVerdict::reject_bad_sig:
      counters_.blocks_rejected_bad_sig++;
      break;
  }
  post_block_event(ctx, b, verdict);
}

void ObmNode::handle_vouch(Ctx& ctx, const VouchNotice& v) {
  (void)ctx;
  auto dit = directory_.find(v.voucher);
  if (dit == directory_.end()) return;
  if (!crypto::verify(dit->second, hash_bytes(v.body_hash), v.sig)) return;
  auto bit = block_index_.find(v.body_hash);
  if (bit == block_index_.end()) {
    auto& q = pending_vouches_[v.body_hash];
    if (q.size() < 64) q.push_back(v);
    return;
  }
  chain_.blocks()[bit->second].add_vouch(v.voucher, v.sig);
  trust_.record_vouch(v.generator, v.voucher);
}

// --- dtm ---

std::optional<dtm::DtmAction> ObmNode::dtm_decision(Ctx& ctx, const dtm::UtilizationSample& s) {
  const Topology& topo = ctx.eng.topo();
  dtm::DtmAction act = dtm::evaluate(dc_, s.alpha, s.rate, topo.active_obms.size(),
                                     topo.obm_capable.size());
  if (act.kind == dtm::DtmAction::Kind::none) return std::nullopt;
  return act;
}

void ObmNode::dtm_sample(Ctx& ctx) {
  if (!active_ || !cc_.dtm_enabled) return;
  const Topology& topo = ctx.eng.topo();
  double t0 = last_sample_;
  double t1 = ctx.now;
  if (t1 <= t0) return;
  uint64_t m = topo.active_obms.size();
  dtm::UtilizationSample s;
  s.t = t1;
  s.generated = arrivals_.count_in(t0, t1);
  s.appendable = dc_.t_max * m;
  s.rate = arrivals_.estimate(dc_, t0, t1);
  s.alpha = s.rate * (t1 - t0) / double(s.appendable);
  dtm_trace_.push_back(s);

  uint64_t window = window_id_;
  window_id_++;
  pending_action_.reset();
  signed_this_window_ = false;
  std::optional<dtm::DtmAction> decision = dtm_decision(ctx, s);
  double next_cp = cc_.consensus_period;
  if (decision) {
    pending_action_ = *decision;
    std::uniform_real_distribution<double> u(0.0, cc_.max_e2e);
    ctx.eng.schedule(id(), u(ctx.rng), TimerFire{TimerFire::Kind::dtm_propose, window});
    if (decision->kind == dtm::DtmAction::Kind::set_consensus_period)
      next_cp = decision->consensus_period;
    else if (decision->kind == dtm::DtmAction::Kind::recluster)
      next_cp = dc_.cp_default;
  }
  arrivals_.drop_before(t0 - (t1 - t0));
  last_sample_ = t1;
  ctx.eng.schedule(id(), next_cp, TimerFire{TimerFire::Kind::dtm_sample, 0});
}

void ObmNode::dtm_tally(Ctx& ctx, uint64_t window, const dtm::DtmAction& act, uint64_t signer,
                        const Signature& sig, bool is_proposal) {
  if (signer != id()) {
    auto dit = directory_.find(signer);
    if (dit == directory_.end()) return;
    if (!crypto::verify(dit->second, act.canonical(window), sig)) return;
  }
  Bytes key = act.canonical(window);
  auto& signers = dtm_tally_[window][key];
  signers.insert(signer);
  // matching proposal from a peer: co-sign instead of proposing separately
  if (is_proposal && pending_action_ && window == window_id_ - 1 && act == *pending_action_ &&
      !signed_this_window_) {
    Signature mine = crypto::sign(key_.sk, key);
    signed_this_window_ = true;
    signers.insert(id());
    ctx.eng.broadcast_obms(id(), DtmCosign{window, act, id(), mine});
  }
  uint64_t m = ctx.eng.topo().active_obms.size();
  if (2 * signers.size() > m && !dtm_window_applied_.count(window)) {
    dtm_window_applied_.insert(window);
    dtm_applied_.push_back({ctx.now, act});
    apply_dtm(ctx, act);
  }
}

void ObmNode::apply_dtm(Ctx& ctx, const dtm::DtmAction& act) {
  if (act.kind == dtm::DtmAction::Kind::set_consensus_period) {
    cc_.consensus_period = act.consensus_period;
  } else if (act.kind == dtm::DtmAction::Kind::recluster) {
    cc_.consensus_period = dc_.cp_default;
    ctx.eng.recluster(act.obm_count);
  }
}

// --- member ---

MemberNode::MemberNode(NodeId id, crypto::KeyPair identity, MemberConfig mc, NodeKind kind)
    : Node(id, kind), identity_(std::move(identity)), mc_(mc) {}

bool MemberNode::authorize(Ctx&, const ledger::MultisigTx&, bool* respond) {
  *respond = true;
  return true;
}

void MemberNode::on_event(Ctx& ctx, const SimEvent& ev) {
  if (auto* t = std::get_if<TimerFire>(&ev.msg)) {
    if (t->kind == TimerFire::Kind::load_tick) {
      emit_load_tx(ctx);
    } else if (t->kind == TimerFire::Kind::confirm_timeout) {
      bool stale = false;
      for (auto& [k, p] : pending_)
        if (ctx.now - p.submitted_at >= mc_.confirm_timeout - 1e-9) stale = true;
      if (stale) {
        counters_.timeouts++;
        reassociate(ctx);
      }
    }
    return;
  }
  if (auto* f = std::get_if<TxForward>(&ev.msg)) {
    if (mc_.inbound_rate_limit > 0) {
      while (!inbound_times_.empty() &&
             inbound_times_.front() < ctx.now - mc_.inbound_rate_window)
        inbound_times_.pop_front();
      if (double(inbound_times_.size()) >=
          mc_.inbound_rate_limit * mc_.inbound_rate_window) {
        counters_.dropped_rate_limit++;
        if (counters_.dropped_rate_limit == 1 && obm_ != kNoNode) {
          // too hot: have the cluster head stop forwarding to me
          ctx.eng.send(id(), obm_,
                       KeylistUpdate{false, true, PublicKey{}, identity_.pk, id()});
        }
        return;
      }
      inbound_times_.push_back(ctx.now);
    }
    bool respond = true;
    bool accept = authorize(ctx, f->tx, &respond);
    if (!respond) {
      counters_.rejected_requests++;
      return;
    }
    if (!accept) counters_.rejected_requests++;
    ledger::MultisigTx done = ledger::complete_multisig(f->tx, identity_, accept);
    counters_.responded++;
    submit_completed(ctx, done);
    if (f->origin != kNoNode && f->origin != id())
      ctx.eng.route(id(), f->origin, TxComplete{done, accept});
    else if (f->origin == id())
      on_event(ctx, SimEvent{ctx.now, id(), 0, id(), TxComplete{done, accept}});
    after_response(ctx, done, accept, f->origin);
    return;
  }
  if (auto* c = std::get_if<TxComplete>(&ev.msg)) {
    counters_.completed_back++;
    if (!c->accepted) counters_.completed_rejected++;
    writer_.advance_multisig(c->tx, ctx.rng);
    awaiting_complete_ = false;
    on_completed(ctx, c->tx);
    if (queued_ticks_ > 0) {
      queued_ticks_--;
      emit_load_tx(ctx);
    }
    return;
  }
  if (auto* d = std::get_if<DataPacket>(&ev.msg)) {
    counters_.data_received++;
    data_lat_.push_back(ctx.now - d->originated_at);
    return;
  }
  if (auto* cf = std::get_if<TxConfirm>(&ev.msg)) {
    auto it = pending_.find(hash_bytes(cf->tx_id));
    if (it != pending_.end()) {
      confirm_lat_.push_back(ctx.now - it->second.submitted_at);
      pending_.erase(it);
      counters_.confirms++;
    }
    return;
  }
}

void MemberNode::emit_load_tx(Ctx& ctx) {
  if (obm_ == kNoNode) return;
  if (awaiting_complete_) {
    queued_ticks_++;
    counters_.ticks_queued++;
    return;
  }
  ledger::MultisigTx tx = writer_.begin_multisig(target_, target_meta_, ctx.rng);
  awaiting_complete_ = true;
  counters_.submitted++;
  ctx.eng.send(id(), obm_, TxSubmit{tx});
}

void MemberNode::submit_completed(Ctx& ctx, const ledger::MultisigTx& tx) {
  if (obm_ == kNoNode) return;
  pending_[hash_bytes(tx.tx_id)] = Pending{tx, ctx.now};
  ctx.eng.send(id(), obm_, TxSubmit{ledger::AnyTx{tx}});
  if (mc_.confirm_timeout > 0)
    ctx.eng.schedule(id(), mc_.confirm_timeout, TimerFire{TimerFire::Kind::confirm_timeout, 0});
}

void MemberNode::reassociate(Ctx& ctx) {
  if (obm_ != kNoNode) blacklist_.insert(obm_);
  NodeId next = ctx.eng.topo().nearest_obm(id(), blacklist_);
  if (next == kNoNode) return;
  obm_ = next;
  counters_.reassociations++;
  ctx.eng.topo().cluster_of[id()] = next;
  ctx.eng.topo().rebuild_routes();
  ctx.eng.send(id(), obm_, KeylistUpdate{true, true, PublicKey{}, identity_.pk, id()});
  for (auto& [k, p] : pending_) {
    p.submitted_at = ctx.now;
    ctx.eng.send(id(), obm_, TxSubmit{ledger::AnyTx{p.tx}});
  }
  if (!pending_.empty() && mc_.confirm_timeout > 0)
    ctx.eng.schedule(id(), mc_.confirm_timeout, TimerFire{TimerFire::Kind::confirm_timeout, 0});
}

}  // namespace lsb::sim
