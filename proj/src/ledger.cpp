#include "lsb/ledger.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

namespace lsb::ledger {

using crypto::sha256;

const char* action_name(ActionKind a) {
  switch (a) {
    case ActionKind::store_locally: return "store_locally";
    case ActionKind::store_cloud: return "store_cloud";
    case ActionKind::access: return "access";
    case ActionKind::monitor: return "monitor";
    case ActionKind::monitor_periodic: return "monitor_periodic";
  }
  return "?";
}

const char* verify_fail_name(VerifyFail f) {
  switch (f) {
    case VerifyFail::none: return "ok";
    case VerifyFail::unchained: return "unchained";
    case VerifyFail::requester_sig: return "requester_sig";
    case VerifyFail::output_delta: return "output_delta";
    case VerifyFail::requestee_sig: return "requestee_sig";
    case VerifyFail::malformed: return "malformed";
    case VerifyFail::genesis_credential: return "genesis_credential";
  }
  return "?";
}

Bytes TxMetadata::canonical() const {
  ByteWriter w;
  w.u8(uint8_t(action));
  w.u64(target_device);
  w.fixed(data_hash);
  return w.take();
}

std::optional<TxMetadata> TxMetadata::parse(const Bytes& b) {
  try {
    ByteReader r(b);
    TxMetadata m;
    m.action = ActionKind(r.u8());
    m.target_device = r.u64();
    m.data_hash = r.fixed<32>();
    if (!r.done()) return std::nullopt;
    return m;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

Bytes MultisigTx::requester_body() const {
  ByteWriter w;
  w.fixed(prev_tx_id);
  w.fixed(requester_pk);
  w.fixed(requestee_pk);
  w.fixed(output.next_pk_hash);
  w.blob(metadata_ct);
  return w.take();
}

Bytes MultisigTx::requestee_body() const {
  ByteWriter w;
  w.raw(requester_body());
  w.u64(output.accepted);
  w.u64(output.rejected);
  w.fixed(requester_sig);
  return w.take();
}

static void write_multisig_after_id(ByteWriter& w, const MultisigTx& t) {
  w.fixed(t.prev_tx_id);
  w.fixed(t.requester_pk);
  w.fixed(t.requester_sig);
  w.fixed(t.requestee_pk);
  w.u8(t.requestee_signed ? 1 : 0);
  w.fixed(t.requestee_sig);
  w.u64(t.output.accepted);
  w.u64(t.output.rejected);
  w.fixed(t.output.next_pk_hash);
  w.blob(t.metadata_ct);
}

Bytes MultisigTx::canonical() const {
  ByteWriter w;
  w.fixed(tx_id);
  write_multisig_after_id(w, *this);
  return w.take();
}

Hash256 MultisigTx::compute_tx_id() const {
  ByteWriter w;
  write_multisig_after_id(w, *this);
  return sha256(w.bytes());
}

Bytes SingleSigTx::signed_body() const {
  ByteWriter w;
  w.fixed(prev_tx_id);
  w.fixed(requester_pk);
  w.fixed(next_pk_hash);
  w.blob(payload);
  return w.take();
}

static void write_singlesig_after_id(ByteWriter& w, const SingleSigTx& t) {
  w.fixed(t.prev_tx_id);
  w.fixed(t.requester_pk);
  w.fixed(t.requester_sig);
  w.fixed(t.next_pk_hash);
  w.blob(t.payload);
}

Bytes SingleSigTx::canonical() const {
  ByteWriter w;
  w.fixed(tx_id);
  write_singlesig_after_id(w, *this);
  return w.take();
}

Hash256 SingleSigTx::compute_tx_id() const {
  ByteWriter w;
  write_singlesig_after_id(w, *this);
  return sha256(w.bytes());
}

static void write_credential(ByteWriter& w, const GenesisCredential& c) {
  if (std::holds_alternative<CaCredential>(c)) {
    w.u8(0);
    w.fixed(std::get<CaCredential>(c).root_sig);
  } else {
    w.u8(1);
    w.u64(std::get<BurnCredential>(c).burn_entry);
  }
}

Bytes GenesisTx::signed_body() const {
  ByteWriter w;
  w.u8(uint8_t(kind));
  w.fixed(pk);
  w.fixed(next_pk_hash);
  write_credential(w, credential);
  return w.take();
}

static void write_genesis_after_id(ByteWriter& w, const GenesisTx& t) {
  w.u8(uint8_t(t.kind));
  w.fixed(t.pk);
  w.fixed(t.self_sig);
  w.fixed(t.next_pk_hash);
  write_credential(w, t.credential);
}

Bytes GenesisTx::canonical() const {
  ByteWriter w;
  w.fixed(tx_id);
  write_genesis_after_id(w, *this);
  return w.take();
}

Hash256 GenesisTx::compute_tx_id() const {
  ByteWriter w;
  write_genesis_after_id(w, *this);
  return sha256(w.bytes());
}

Hash256 tx_id_of(const AnyTx& tx) {
  return std::visit([](const auto& t) { return t.tx_id; }, tx);
}

size_t tx_wire_size(const AnyTx& tx) {
  return std::visit([](const auto& t) { return t.wire_size(); }, tx) + 1;  // kind tag
}

Bytes tx_canonical(const AnyTx& tx) {
  return std::visit([](const auto& t) { return t.canonical(); }, tx);
}

void write_tx(ByteWriter& w, const AnyTx& tx) {
  w.u8(uint8_t(tx.index()));
  w.blob(tx_canonical(tx));
}

static std::optional<AnyTx> parse_tx_body(uint8_t kind, const Bytes& body) {
  try {
    ByteReader r(body);
    if (kind == 0) {
      GenesisTx t;
      t.tx_id = r.fixed<32>();
      t.kind = LedgerKind(r.u8());
      t.pk = r.fixed<32>();
      t.self_sig = r.fixed<64>();
      t.next_pk_hash = r.fixed<32>();
      uint8_t ck = r.u8();
      if (ck == 0) {
        CaCredential c;
        c.root_sig = r.fixed<64>();
        t.credential = c;
      } else {
        BurnCredential c;
        c.burn_entry = r.u64();
        t.credential = c;
      }
      if (!r.done()) return std::nullopt;
      return AnyTx(t);
    }
    if (kind == 1) {
      MultisigTx t;
      t.tx_id = r.fixed<32>();
      t.prev_tx_id = r.fixed<32>();
      t.requester_pk = r.fixed<32>();
      t.requester_sig = r.fixed<64>();
      t.requestee_pk = r.fixed<32>();
      t.requestee_signed = r.u8() != 0;
      t.requestee_sig = r.fixed<64>();
      t.output.accepted = r.u64();
      t.output.rejected = r.u64();
      t.output.next_pk_hash = r.fixed<32>();
      t.metadata_ct = r.blob();
      if (!r.done()) return std::nullopt;
      return AnyTx(t);
    }
    if (kind == 2) {
      SingleSigTx t;
      t.tx_id = r.fixed<32>();
      t.prev_tx_id = r.fixed<32>();
      t.requester_pk = r.fixed<32>();
      t.requester_sig = r.fixed<64>();
      t.next_pk_hash = r.fixed<32>();
      t.payload = r.blob();
      if (!r.done()) return std::nullopt;
      return AnyTx(t);
    }
    return std::nullopt;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<AnyTx> parse_tx(ByteReader& r) {
  try {
    uint8_t kind = r.u8();
    Bytes body = r.blob();
    return parse_tx_body(kind, body);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

Hash256 Block::body_hash() const {
  ByteWriter w;
  w.fixed(header.prev_block_hash);
  w.u64(header.generator);
  for (const auto& tx : txs) w.fixed(tx_id_of(tx));
  return sha256(w.bytes());
}

Bytes Block::canonical() const {
  ByteWriter w;
  w.fixed(header.prev_block_hash);
  w.u64(header.generator);
  w.fixed(header.generator_sig);
  w.u32(uint32_t(header.verifier_sigs.size()));
  for (const auto& [id, sig] : header.verifier_sigs) {
    w.u64(id);
    w.fixed(sig);
  }
  w.u32(uint32_t(txs.size()));
  for (const auto& tx : txs) write_tx(w, tx);
  return w.take();
}

void Block::add_vouch(uint64_t verifier, const Signature& sig) {
  auto pos = std::lower_bound(header.verifier_sigs.begin(), header.verifier_sigs.end(), verifier,
                              [](const auto& a, uint64_t v) { return a.first < v; });
  if (pos != header.verifier_sigs.end() && pos->first == verifier) return;
  header.verifier_sigs.insert(pos, {verifier, sig});
}

VerifyResult verify_multisig(const MultisigTx& tx, const TipResolver& prev_of,
                             VerifyStats* stats) {
  if (stats) stats->alg1_executions++;
  Hash256 pk_hash = sha256(tx.requester_pk.data(), tx.requester_pk.size());
  auto prev = prev_of(pk_hash);
  if (!prev || prev->tx_id != tx.prev_tx_id) return {VerifyFail::unchained};

  if (stats) stats->sig_verifications++;
  if (!crypto::verify(tx.requester_pk, tx.requester_body(), tx.requester_sig))
    return {VerifyFail::requester_sig};

  int64_t da = int64_t(tx.output.accepted) - int64_t(prev->accepted);
  int64_t dr = int64_t(tx.output.rejected) - int64_t(prev->rejected);
  bool one_step = (da == 1 && dr == 0) || (da == 0 && dr == 1);
  if (!one_step) return {VerifyFail::output_delta};

  if (!tx.requestee_signed) return {VerifyFail::requestee_sig};
  if (stats) stats->sig_verifications++;
  if (!crypto::verify(tx.requestee_pk, tx.requestee_body(), tx.requestee_sig))
    return {VerifyFail::requestee_sig};
  return {};
}

VerifyResult verify_singlesig(const SingleSigTx& tx, const TipResolver& prev_of,
                              VerifyStats* stats) {
  if (stats) stats->alg1_executions++;
  Hash256 pk_hash = sha256(tx.requester_pk.data(), tx.requester_pk.size());
  auto prev = prev_of(pk_hash);
  if (!prev || prev->tx_id != tx.prev_tx_id) return {VerifyFail::unchained};
  if (stats) stats->sig_verifications++;
  if (!crypto::verify(tx.requester_pk, tx.signed_body(), tx.requester_sig))
    return {VerifyFail::requester_sig};
  return {};
}

VerifyResult verify_genesis(const GenesisTx& g, const TrustRoots& roots, const BurnLedger& burns,
                            VerifyStats* stats) {
  bool credential_ok = false;
  if (std::holds_alternative<CaCredential>(g.credential)) {
    const auto& c = std::get<CaCredential>(g.credential);
    Bytes subject(g.pk.begin(), g.pk.end());
    for (const auto& root : roots.roots) {
      if (stats) stats->sig_verifications++;
      if (crypto::verify(root, subject, c.root_sig)) {
        credential_ok = true;
        break;
      }
    }
  } else {
    const auto& c = std::get<BurnCredential>(g.credential);
    credential_ok = c.burn_entry < burns.entries.size() && burns.entries[c.burn_entry] == g.pk;
  }
  if (!credential_ok) return {VerifyFail::genesis_credential};
  if (stats) stats->sig_verifications++;
  if (!crypto::verify(g.pk, g.signed_body(), g.self_sig)) return {VerifyFail::requester_sig};
  return {};
}

std::optional<TipRecord> Chain::multisig_tip(const Hash256& h) const {
  auto it = multisig_tips_.find(h);
  if (it == multisig_tips_.end()) return std::nullopt;
  return it->second;
}

std::optional<TipRecord> Chain::singlesig_tip(const Hash256& h) const {
  auto it = singlesig_tips_.find(h);
  if (it == singlesig_tips_.end()) return std::nullopt;
  return it->second;
}

TipResolver Chain::multisig_resolver() const {
  return [this](const Hash256& h) { return multisig_tip(h); };
}

TipResolver Chain::singlesig_resolver() const {
  return [this](const Hash256& h) { return singlesig_tip(h); };
}

void Chain::apply_tx_to_tips(const AnyTx& tx) {
  tx_ids_.insert(tx_id_of(tx));
  if (std::holds_alternative<GenesisTx>(tx)) {
    const auto& g = std::get<GenesisTx>(tx);
    auto& tips = g.kind == LedgerKind::multisig ? multisig_tips_ : singlesig_tips_;
    tips[g.next_pk_hash] = TipRecord{g.tx_id, 0, 0};
  } else if (std::holds_alternative<MultisigTx>(tx)) {
    const auto& t = std::get<MultisigTx>(tx);
    multisig_tips_.erase(sha256(t.requester_pk.data(), t.requester_pk.size()));
    multisig_tips_[t.output.next_pk_hash] =
        TipRecord{t.tx_id, t.output.accepted, t.output.rejected};
  } else {
    const auto& t = std::get<SingleSigTx>(tx);
    singlesig_tips_.erase(sha256(t.requester_pk.data(), t.requester_pk.size()));
    singlesig_tips_[t.next_pk_hash] = TipRecord{t.tx_id, 0, 0};
  }
}

void Chain::append(Block block) {
  if (block.header.prev_block_hash != tip_hash())
    throw std::logic_error("chain append: prev hash does not match tip");
  for (const auto& tx : block.txs) apply_tx_to_tips(tx);
  blocks_.push_back(std::move(block));
}

Block Chain::pop_tip() {
  if (blocks_.empty()) throw std::logic_error("pop on empty chain");
  Block removed = std::move(blocks_.back());
  blocks_.pop_back();
  multisig_tips_.clear();
  singlesig_tips_.clear();
  tx_ids_.clear();
  for (const auto& b : blocks_)
    for (const auto& tx : b.txs) apply_tx_to_tips(tx);
  return removed;
}

Bytes Chain::serialize() const {
  ByteWriter w;
  w.u32(uint32_t(blocks_.size()));
  for (const auto& b : blocks_) w.blob(b.canonical());
  return w.take();
}

Hash256 Chain::content_hash() const {
  ByteWriter w;
  for (const auto& b : blocks_) w.fixed(b.body_hash());
  return crypto::sha256(w.take());
}

std::string Chain::dump() const {
  std::ostringstream os;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    os << "block " << i << " prev=" << to_hex(b.header.prev_block_hash.data(), 32)
       << " generator=" << b.header.generator
       << " body=" << to_hex(b.body_hash().data(), 32) << " vouches=";
    for (size_t k = 0; k < b.header.verifier_sigs.size(); ++k) {
      if (k) os << ",";
      os << b.header.verifier_sigs[k].first;
    }
    os << "\n";
    for (const auto& tx : b.txs) {
      os << "  tx " << to_hex(tx_id_of(tx).data(), 32) << " ";
      if (std::holds_alternative<GenesisTx>(tx)) {
        const auto& g = std::get<GenesisTx>(tx);
        os << "genesis kind=" << (g.kind == LedgerKind::multisig ? "multisig" : "singlesig")
           << " pk=" << to_hex(g.pk.data(), 32);
      } else if (std::holds_alternative<MultisigTx>(tx)) {
        const auto& t = std::get<MultisigTx>(tx);
        os << "multisig requester=" << to_hex(t.requester_pk.data(), 32)
           << " accepted=" << t.output.accepted << " rejected=" << t.output.rejected
           << " next=" << to_hex(t.output.next_pk_hash.data(), 32);
      } else {
        const auto& t = std::get<SingleSigTx>(tx);
        os << "singlesig requester=" << to_hex(t.requester_pk.data(), 32)
           << " payload_bytes=" << t.payload.size();
      }
      os << "\n";
    }
  }
  return os.str();
}

std::string Chain::integrity_error(const TrustRoots& roots, const BurnLedger& burns) const {
  Chain replay;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    if (b.header.prev_block_hash != replay.tip_hash())
      return "block " + std::to_string(i) + ": prev hash link broken";
    if (b.txs.empty()) return "block " + std::to_string(i) + ": empty";
    Block copy;
    copy.header = b.header;
    for (size_t t = 0; t < b.txs.size(); ++t) {
      const AnyTx& tx = b.txs[t];
      Hash256 want = std::visit([](const auto& x) { return x.compute_tx_id(); }, tx);
      if (want != tx_id_of(tx))
        return "block " + std::to_string(i) + " tx " + std::to_string(t) + ": tx id mismatch";
      VerifyResult r;
      if (std::holds_alternative<GenesisTx>(tx)) {
        r = verify_genesis(std::get<GenesisTx>(tx), roots, burns);
      } else if (std::holds_alternative<MultisigTx>(tx)) {
        r = verify_multisig(std::get<MultisigTx>(tx), replay.multisig_resolver());
      } else {
        r = verify_singlesig(std::get<SingleSigTx>(tx), replay.singlesig_resolver());
      }
      if (!r.ok())
        return "block " + std::to_string(i) + " tx " + std::to_string(t) + ": " +
               verify_fail_name(r.fail);
      replay.apply_tx_to_tips(tx);
      copy.txs.push_back(tx);
    }
    replay.blocks_.push_back(std::move(copy));
  }
  return "";
}

GenesisTx make_genesis(LedgerKind kind, const KeyPair& owner, const Hash256& next_pk_hash,
                       GenesisCredential cred) {
  GenesisTx g;
  g.kind = kind;
  g.pk = owner.pk;
  g.next_pk_hash = next_pk_hash;
  g.credential = std::move(cred);
  g.self_sig = crypto::sign(owner.sk, g.signed_body());
  g.tx_id = g.compute_tx_id();
  return g;
}

Signature ca_sign(const crypto::SecretKey& root_sk, const PublicKey& subject) {
  return crypto::sign(root_sk, Bytes(subject.begin(), subject.end()));
}

ChainWriter ChainWriter::start(Rng& rng, bool rotate) {
  ChainWriter w;
  w.rotate = rotate;
  w.current = crypto::keygen(rng);
  w.next = rotate ? crypto::keygen(rng) : w.current;
  return w;
}

Hash256 ChainWriter::committed_next_hash() const {
  const PublicKey& pk = rotate ? next.pk : current.pk;
  return sha256(pk.data(), pk.size());
}

MultisigTx ChainWriter::begin_multisig(const PublicKey& requestee, const TxMetadata& meta,
                                       Rng& rng) {
  MultisigTx tx;
  tx.prev_tx_id = prev_tx_id;
  tx.requester_pk = current.pk;
  tx.requestee_pk = requestee;
  tx.output.accepted = accepted;
  tx.output.rejected = rejected;
  tx.output.next_pk_hash = committed_next_hash();
  tx.metadata_ct = crypto::seal_to(requestee, meta.canonical(), rng);
  tx.meta_shadow = meta;
  tx.requester_sig = crypto::sign(current.sk, tx.requester_body());
  return tx;
}

SingleSigTx ChainWriter::make_singlesig(const Bytes& payload, Rng&) {
  SingleSigTx tx;
  tx.prev_tx_id = prev_tx_id;
  tx.requester_pk = current.pk;
  tx.next_pk_hash = committed_next_hash();
  tx.payload = payload;
  tx.requester_sig = crypto::sign(current.sk, tx.signed_body());
  tx.tx_id = tx.compute_tx_id();
  return tx;
}

void ChainWriter::roll_keys(Rng& rng) {
  if (rotate) {
    current = next;
    next = crypto::keygen(rng);
  }
}

void ChainWriter::advance_multisig(const MultisigTx& completed, Rng& rng) {
  prev_tx_id = completed.tx_id;
  accepted = completed.output.accepted;
  rejected = completed.output.rejected;
  roll_keys(rng);
}

void ChainWriter::advance_singlesig(const SingleSigTx& tx, Rng& rng) {
  prev_tx_id = tx.tx_id;
  roll_keys(rng);
}

MultisigTx complete_multisig(MultisigTx tx, const KeyPair& requestee, bool accept) {
  if (accept)
    tx.output.accepted += 1;
  else
    tx.output.rejected += 1;
  tx.requestee_sig = crypto::sign(requestee.sk, tx.requestee_body());
  tx.requestee_signed = true;
  tx.tx_id = tx.compute_tx_id();
  return tx;
}

bool well_formed(const AnyTx& tx) {
  Hash256 want = std::visit([](const auto& x) { return x.compute_tx_id(); }, tx);
  if (want != tx_id_of(tx)) return false;
  if (std::holds_alternative<MultisigTx>(tx) && !std::get<MultisigTx>(tx).requestee_signed)
    return false;
  return true;
}

// --- immutable ledger ---

Bytes IlTx::canonical() const {
  ByteWriter w;
  w.fixed(prev_tx_ptr);
  w.fixed(tx_id);
  w.u64(device_id);
  w.u8(uint8_t(tx_type));
  w.u8(overlay_tx_hash ? 1 : 0);
  if (overlay_tx_hash) w.fixed(*overlay_tx_hash);
  return w.take();
}

Hash256 IlTx::compute_tx_id() const {
  ByteWriter w;
  w.fixed(prev_tx_ptr);
  w.u64(device_id);
  w.u8(uint8_t(tx_type));
  w.u8(overlay_tx_hash ? 1 : 0);
  if (overlay_tx_hash) w.fixed(*overlay_tx_hash);
  return sha256(w.bytes());
}

Bytes PolicyEntry::canonical() const {
  ByteWriter w;
  w.u8(uint8_t(who));
  w.u64(device_id);
  w.fixed(pk);
  w.u8(uint8_t(action));
  w.u64(target_device);
  w.u64(reserved);
  return w.take();
}

Bytes IlBlock::canonical() const {
  ByteWriter w;
  w.fixed(prev_block_hash);
  w.u32(uint32_t(policy.size()));
  for (const auto& p : policy) w.blob(p.canonical());
  w.u32(uint32_t(txs.size()));
  for (const auto& t : txs) w.blob(t.canonical());
  return w.take();
}

Hash256 IlBlock::block_hash() const { return sha256(canonical()); }

void ImmutableLedger::seal_open_block() { block_open_ = false; }

void ImmutableLedger::set_policy(std::vector<PolicyEntry> policy) {
  seal_open_block();
  IlBlock b;
  b.prev_block_hash = blocks_.empty() ? kZeroHash : blocks_.back().block_hash();
  b.policy = std::move(policy);
  blocks_.push_back(std::move(b));
  block_open_ = true;
}

Hash256 ImmutableLedger::append(IlTx tx) {
  if (!block_open_ || blocks_.empty()) {
    IlBlock b;
    b.prev_block_hash = blocks_.empty() ? kZeroHash : blocks_.back().block_hash();
    blocks_.push_back(std::move(b));
    block_open_ = true;
  }
  tx.prev_tx_ptr = last_tx_id_;
  tx.tx_id = tx.compute_tx_id();
  last_tx_id_ = tx.tx_id;
  blocks_.back().txs.push_back(tx);
  ++tx_count_;
  if (blocks_.back().txs.size() >= cap_) seal_open_block();
  return last_tx_id_;
}

bool ImmutableLedger::policy_allows(const PolicyQuery& q) const {
  // Newest block that declares any policy is the active ACL.
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
    if (it->policy.empty()) continue;
    for (const auto& e : it->policy) {
      bool who_ok = false;
      switch (e.who) {
        case PolicyEntry::Requester::any: who_ok = true; break;
        case PolicyEntry::Requester::device:
          who_ok = !q.from_overlay && e.device_id == q.device_id;
          break;
        case PolicyEntry::Requester::overlay_pk: who_ok = q.from_overlay && e.pk == q.pk; break;
      }
      if (!who_ok) continue;
      if (e.action != q.action) continue;
      if (e.target_device != PolicyEntry::kAnyDevice && e.target_device != q.target_device)
        continue;
      return true;
    }
    return false;  // declared policy, no match: deny
  }
  return false;  // no policy anywhere: deny
}

Hash256 ImmutableLedger::ledger_hash() const { return sha256(serialize()); }

Bytes ImmutableLedger::serialize() const {
  ByteWriter w;
  w.u32(uint32_t(blocks_.size()));
  for (const auto& b : blocks_) w.blob(b.canonical());
  return w.take();
}

std::string ImmutableLedger::integrity_error() const {
  Hash256 prev_block = kZeroHash;
  Hash256 prev_tx = kZeroHash;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const IlBlock& b = blocks_[i];
    if (b.prev_block_hash != prev_block) return "il block " + std::to_string(i) + ": link broken";
    for (size_t t = 0; t < b.txs.size(); ++t) {
      const IlTx& tx = b.txs[t];
      if (tx.prev_tx_ptr != prev_tx)
        return "il tx " + std::to_string(t) + " in block " + std::to_string(i) + ": prev ptr";
      if (tx.compute_tx_id() != tx.tx_id)
        return "il tx " + std::to_string(t) + " in block " + std::to_string(i) + ": id mismatch";
      prev_tx = tx.tx_id;
    }
    prev_block = b.block_hash();
  }
  return "";
}

}  // namespace lsb::ledger
