#include "lsb/smarthome.hpp"

#include <algorithm>

namespace lsb::sim {

using ledger::ActionKind;
using ledger::IlTx;
using ledger::IlTxType;
using ledger::MultisigTx;

Bytes HomeCmd::canonical() const {
  ByteWriter w;
  w.u8(uint8_t(op));
  w.u64(flow);
  w.blob(data);
  return w.take();
}

std::optional<HomeCmd> HomeCmd::parse(const Bytes& b) {
  try {
    ByteReader r(b);
    HomeCmd c;
    c.op = Op(r.u8());
    c.flow = r.u64();
    c.data = r.blob();
    if (!r.done()) return std::nullopt;
    return c;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// --- home manager ---

HomeManagerNode::HomeManagerNode(NodeId id, crypto::KeyPair identity, MemberConfig mc,
                                 crypto::DhGroup dh)
    : MemberNode(id, std::move(identity), mc, NodeKind::home_manager), dh_(dh) {}

void HomeManagerNode::on_start(Ctx& ctx) {
  if (anchor_interval_ > 0)
    ctx.eng.schedule(id(), anchor_interval_, TimerFire{TimerFire::Kind::generic, 1});
}

ledger::IlTxType HomeManagerNode::il_type(ActionKind a) const {
  switch (a) {
    case ActionKind::store_locally: return IlTxType::store_local;
    case ActionKind::store_cloud: return IlTxType::store_cloud;
    case ActionKind::access: return IlTxType::access;
    default: return IlTxType::monitor;
  }
}

bool HomeManagerNode::authorize(Ctx&, const MultisigTx& tx, bool* respond) {
  *respond = true;
  auto plain = crypto::open_sealed(identity_, tx.metadata_ct);
  if (!plain) return false;
  auto meta = ledger::TxMetadata::parse(*plain);
  if (!meta) return false;
  ledger::PolicyQuery q;
  q.from_overlay = true;
  q.pk = tx.requester_pk;
  q.action = meta->action;
  q.target_device = meta->target_device;
  return il_.policy_allows(q);
}

void HomeManagerNode::after_response(Ctx& ctx, const MultisigTx& done, bool accept,
                                     NodeId origin) {
  if (!accept) {
    home_.policy_denied++;
    return;
  }
  home_.policy_granted++;
  auto plain = crypto::open_sealed(identity_, done.metadata_ct);
  if (!plain) return;
  auto meta = ledger::TxMetadata::parse(*plain);
  if (!meta) return;
  IlTx mirror;
  mirror.device_id = meta->target_device;
  mirror.tx_type = il_type(meta->action);
  mirror.overlay_tx_hash = done.tx_id;
  il_.append(mirror);
  uint64_t flow_id = next_flow_++;
  Flow f;
  f.origin = origin;
  f.action = meta->action;
  f.device = meta->target_device;
  f.overlay_tx = done.tx_id;
  f.asked_at = ctx.now;
  f.repeats_left = meta->action == ActionKind::monitor_periodic ? monitor_repeats_ : 1;
  f.period = monitor_period_;
  flows_[flow_id] = f;
  read_device(ctx, flow_id);
}

void HomeManagerNode::read_device(Ctx& ctx, uint64_t flow_id) {
  auto fit = flows_.find(flow_id);
  if (fit == flows_.end()) return;
  auto dit = devices_.find(fit->second.device);
  if (dit == devices_.end()) {
    flows_.erase(fit);
    return;
  }
  HomeCmd cmd;
  cmd.op = HomeCmd::Op::read;
  cmd.flow = flow_id;
  Bytes ct = crypto::symmetric_encrypt(dit->second.key, cmd.canonical(), ctx.rng);
  ctx.eng.send(id(), dit->second.node, LocalTx{fit->second.device, ct});
}

void HomeManagerNode::handle_device_reply(Ctx& ctx, uint64_t device_id, const HomeCmd& cmd) {
  home_.local_replies++;
  auto fit = flows_.find(cmd.flow);
  if (fit == flows_.end()) return;
  Flow& f = fit->second;
  if (f.device != device_id) return;
  switch (f.action) {
    case ActionKind::access:
    case ActionKind::monitor:
    case ActionKind::monitor_periodic: {
      if (f.origin != kNoNode) {
        DataPacket dp;
        dp.flow = cmd.flow;
        dp.payload = cmd.data;
        dp.data_hash = crypto::sha256(cmd.data);
        dp.originated_at = f.asked_at;
        ctx.eng.route(id(), f.origin, dp);
      }
      break;
    }
    case ActionKind::store_cloud: {
      if (cloud_node_ != kNoNode) start_cloud_store(ctx, f.device, cmd.data);
      break;
    }
    case ActionKind::store_locally:
      break;
  }
  if (f.repeats_left > 1) {
    f.repeats_left--;
    ctx.eng.schedule(id(), f.period, TimerFire{TimerFire::Kind::monitor_tick, cmd.flow});
  } else {
    flows_.erase(fit);
  }
}

void HomeManagerNode::start_cloud_store(Ctx& ctx, uint64_t device, const Bytes& data) {
  if (store_busy_) {
    store_q_.push_back({device, data});
    return;
  }
  store_busy_ = true;
  home_.cloud_stores_started++;
  ledger::TxMetadata meta;
  meta.action = ActionKind::store_cloud;
  meta.target_device = device;
  meta.data_hash = crypto::sha256(data);
  MultisigTx tx = writer_.begin_multisig(cloud_pk_, meta, ctx.rng);
  StoreRequest req;
  req.credential = identity_.pk;
  req.blob = data;
  req.tx = tx;
  ctx.eng.route(id(), cloud_node_, req);
}

void HomeManagerNode::on_completed(Ctx& ctx, const MultisigTx& tx) {
  // cloud acknowledged a store: mirror it into the local ledger
  if (tx.meta_shadow.action == ActionKind::store_cloud) {
    IlTx mirror;
    mirror.device_id = tx.meta_shadow.target_device;
    mirror.tx_type = IlTxType::store_cloud;
    mirror.overlay_tx_hash = tx.tx_id;
    il_.append(mirror);
    store_busy_ = false;
    if (!store_q_.empty()) {
      auto next = store_q_.front();
      store_q_.pop_front();
      start_cloud_store(ctx, next.first, next.second);
    }
  }
}

void HomeManagerNode::grant_key(Ctx& ctx, uint64_t dev_a, uint64_t dev_b) {
  auto a = devices_.find(dev_a);
  auto b = devices_.find(dev_b);
  if (a == devices_.end() || b == devices_.end()) return;
  KeyControl kc;
  kc.op = KeyControl::Op::grant;
  kc.device_a = dev_a;
  kc.device_b = dev_b;
  kc.dh_public_a = a->second.dh_public;
  kc.dh_public_b = b->second.dh_public;
  ctx.eng.send(id(), a->second.node, kc);
  ctx.eng.send(id(), b->second.node, kc);
  home_.grants++;
  for (uint64_t d : {dev_a, dev_b}) {
    IlTx t;
    t.device_id = d;
    t.tx_type = IlTxType::key_grant;
    il_.append(t);
  }
}

void HomeManagerNode::revoke_key(Ctx& ctx, uint64_t dev_a, uint64_t dev_b) {
  auto a = devices_.find(dev_a);
  auto b = devices_.find(dev_b);
  if (a == devices_.end() || b == devices_.end()) return;
  KeyControl kc;
  kc.op = KeyControl::Op::revoke;
  kc.device_a = dev_a;
  kc.device_b = dev_b;
  ctx.eng.send(id(), a->second.node, kc);
  ctx.eng.send(id(), b->second.node, kc);
  home_.revokes++;
  for (uint64_t d : {dev_a, dev_b}) {
    IlTx t;
    t.device_id = d;
    t.tx_type = IlTxType::key_revoke;
    il_.append(t);
  }
}

void HomeManagerNode::on_event(Ctx& ctx, const SimEvent& ev) {
  if (auto* t = std::get_if<TimerFire>(&ev.msg)) {
    if (t->kind == TimerFire::Kind::generic && t->tag == 1) {
      // anchor the local ledger state into the public chain
      ledger::SingleSigTx anchor = anchor_writer_.make_singlesig(
          Bytes(il_.ledger_hash().begin(), il_.ledger_hash().end()), ctx.rng);
      anchor_writer_.advance_singlesig(anchor, ctx.rng);
      home_.anchors++;
      if (obm_ != kNoNode) ctx.eng.send(id(), obm_, TxSubmit{ledger::AnyTx{anchor}});
      ctx.eng.schedule(id(), anchor_interval_, TimerFire{TimerFire::Kind::generic, 1});
      return;
    }
    if (t->kind == TimerFire::Kind::monitor_tick) {
      read_device(ctx, t->tag);
      return;
    }
  }
  if (auto* lt = std::get_if<LocalTx>(&ev.msg)) {
    auto dit = devices_.find(lt->device);
    if (dit == devices_.end()) {
      home_.rejected_local++;
      return;
    }
    auto plain = crypto::symmetric_decrypt(dit->second.key, lt->ciphertext);
    if (!plain) {
      home_.rejected_local++;
      return;
    }
    auto cmd = HomeCmd::parse(*plain);
    if (!cmd) {
      home_.rejected_local++;
      return;
    }
    if (cmd->op == HomeCmd::Op::store) {
      home_.local_stores++;
      IlTx t;
      t.device_id = lt->device;
      t.tx_type = IlTxType::store_local;
      il_.append(t);
    } else if (cmd->op == HomeCmd::Op::reply) {
      handle_device_reply(ctx, lt->device, *cmd);
    }
    return;
  }
  MemberNode::on_event(ctx, ev);
}

// --- device ---

DeviceNode::DeviceNode(NodeId id, uint64_t device_id, NodeId manager, crypto::SymmetricKey key,
                       crypto::DhGroup dh, uint64_t dh_secret)
    : Node(id, NodeKind::device),
      device_id_(device_id),
      manager_(manager),
      key_(key),
      dh_(dh),
      dh_secret_(dh_secret) {}

uint64_t DeviceNode::dh_public() const { return crypto::dh_public(dh_, dh_secret_); }

Bytes DeviceNode::reading() {
  ByteWriter w;
  w.u64(device_id_);
  w.u64(seq_++);
  w.str("reading");
  return w.take();
}

void DeviceNode::on_start(Ctx& ctx) {
  if (store_period_ > 0 && store_left_ > 0)
    ctx.eng.schedule(id(), store_period_, TimerFire{TimerFire::Kind::monitor_tick, 0});
}

void DeviceNode::send_to_peer(Ctx& ctx, uint64_t peer_device, NodeId peer_node) {
  auto kit = peer_keys_.find(peer_device);
  if (kit == peer_keys_.end()) return;
  HomeCmd cmd;
  cmd.op = HomeCmd::Op::reply;
  cmd.flow = 0;
  cmd.data = reading();
  Bytes ct = crypto::symmetric_encrypt(kit->second, cmd.canonical(), ctx.rng);
  ctx.eng.send(id(), peer_node, LocalTx{device_id_, ct});
}

void DeviceNode::on_event(Ctx& ctx, const SimEvent& ev) {
  if (auto* t = std::get_if<TimerFire>(&ev.msg)) {
    if (t->kind == TimerFire::Kind::monitor_tick && store_left_ > 0) {
      store_left_--;
      HomeCmd cmd;
      cmd.op = HomeCmd::Op::store;
      cmd.data = reading();
      Bytes ct = crypto::symmetric_encrypt(key_, cmd.canonical(), ctx.rng);
      ctx.eng.send(id(), manager_, LocalTx{device_id_, ct});
      counters_.stores_sent++;
      if (store_left_ > 0)
        ctx.eng.schedule(id(), store_period_, TimerFire{TimerFire::Kind::monitor_tick, 0});
    }
    return;
  }
  if (auto* kc = std::get_if<KeyControl>(&ev.msg)) {
    uint64_t peer = kc->device_a == device_id_ ? kc->device_b : kc->device_a;
    if (kc->op == KeyControl::Op::grant) {
      uint64_t peer_pub = kc->device_a == device_id_ ? kc->dh_public_b : kc->dh_public_a;
      peer_keys_[peer] = crypto::dh_key(dh_, peer_pub, dh_secret_);
    } else {
      peer_keys_.erase(peer);
    }
    return;
  }
  if (auto* lt = std::get_if<LocalTx>(&ev.msg)) {
    if (ev.src == manager_) {
      auto plain = crypto::symmetric_decrypt(key_, lt->ciphertext);
      if (!plain) {
        counters_.bad_cmds++;
        return;
      }
      auto cmd = HomeCmd::parse(*plain);
      if (!cmd || cmd->op != HomeCmd::Op::read) {
        counters_.bad_cmds++;
        return;
      }
      counters_.commands++;
      HomeCmd reply;
      reply.op = HomeCmd::Op::reply;
      reply.flow = cmd->flow;
      reply.data = reading();
      Bytes ct = crypto::symmetric_encrypt(key_, reply.canonical(), ctx.rng);
      ctx.eng.send(id(), manager_, LocalTx{device_id_, ct});
      counters_.replies++;
      return;
    }
    // peer-to-peer: only decodable with a granted pair key
    auto kit = peer_keys_.find(lt->device);
    if (kit == peer_keys_.end()) {
      counters_.peer_dropped++;
      return;
    }
    auto plain = crypto::symmetric_decrypt(kit->second, lt->ciphertext);
    if (!plain) {
      counters_.peer_dropped++;
      return;
    }
    counters_.peer_received++;
    return;
  }
}

// --- cloud ---

void CloudNode::on_event(Ctx& ctx, const SimEvent& ev) {
  if (auto* sr = std::get_if<StoreRequest>(&ev.msg)) {
    if (!credentials_.count(Bytes(sr->credential.begin(), sr->credential.end()))) {
      cloud_.rejected_credential++;
      return;
    }
    auto plain = crypto::open_sealed(identity_, sr->tx.metadata_ct);
    std::optional<ledger::TxMetadata> meta;
    if (plain) meta = ledger::TxMetadata::parse(*plain);
    Hash256 got = crypto::sha256(sr->blob);
    if (!meta || !(meta->data_hash == got)) {
      cloud_.rejected_integrity++;
      return;
    }
    store_[Bytes(got.begin(), got.end())] = sr->blob;
    cloud_.stored++;
    MultisigTx done = ledger::complete_multisig(sr->tx, identity_, true);
    counters_.responded++;
    submit_completed(ctx, done);
    if (ev.src != kNoNode && ev.src != id()) ctx.eng.route(id(), ev.src, TxComplete{done, true});
    return;
  }
  MemberNode::on_event(ctx, ev);
}

}  // namespace lsb::sim
