#include "doctest.h"
#include "lsb/ledger.hpp"

using namespace lsb;
using namespace lsb::ledger;

namespace {

struct Fixture {
  crypto::Rng rng = crypto::derive_rng(77, 0);
  crypto::KeyPair root;
  TrustRoots roots;
  BurnLedger burns;

  Fixture() {
    crypto::init();
    root = crypto::keygen(rng);
    roots.roots.push_back(root.pk);
  }

  // writer bound to a CA genesis; the genesis lands in its own block
  ChainWriter writer_with_genesis(Chain& chain, bool rotate, LedgerKind kind) {
    ChainWriter w = ChainWriter::start(rng, rotate);
    GenesisTx g = make_genesis(kind, w.current, w.committed_next_hash(),
                               CaCredential{ca_sign(root.sk, w.current.pk)});
    w.bind_genesis(g, rng);
    Block b;
    b.header.prev_block_hash = chain.tip_hash();
    b.txs.push_back(g);
    chain.append(std::move(b));
    return w;
  }

  void append_tx(Chain& chain, AnyTx tx) {
    Block b;
    b.header.prev_block_hash = chain.tip_hash();
    b.txs.push_back(std::move(tx));
    chain.append(std::move(b));
  }
};

}  // namespace

TEST_CASE("genesis verifies under either credential and rejects forgeries") {
  Fixture f;
  crypto::KeyPair owner = crypto::keygen(f.rng);
  Hash256 next{};
  next[0] = 1;

  GenesisTx ca = make_genesis(LedgerKind::multisig, owner, next,
                              CaCredential{ca_sign(f.root.sk, owner.pk)});
  CHECK(verify_genesis(ca, f.roots, f.burns).ok());

  // a root signature over some other key does not transfer
  crypto::KeyPair other = crypto::keygen(f.rng);
  GenesisTx stolen = make_genesis(LedgerKind::multisig, owner, next,
                                  CaCredential{ca_sign(f.root.sk, other.pk)});
  CHECK(verify_genesis(stolen, f.roots, f.burns).fail == VerifyFail::genesis_credential);

  // burn entry must name the owner pk
  f.burns.entries.push_back(owner.pk);
  GenesisTx burned = make_genesis(LedgerKind::multisig, owner, next, BurnCredential{0});
  CHECK(verify_genesis(burned, f.roots, f.burns).ok());
  GenesisTx wrong_entry = make_genesis(LedgerKind::multisig, owner, next, BurnCredential{5});
  CHECK_FALSE(verify_genesis(wrong_entry, f.roots, f.burns).ok());
}

TEST_CASE("multisig chain builds, verifies and counts one-step outputs") {
  Fixture f;
  Chain chain;
  ChainWriter w = f.writer_with_genesis(chain, true, LedgerKind::multisig);
  crypto::KeyPair requestee = crypto::keygen(f.rng);

  VerifyStats stats;
  for (int i = 0; i < 4; ++i) {
    TxMetadata meta;
    meta.action = ActionKind::access;
    meta.target_device = 3;
    MultisigTx tx = w.begin_multisig(requestee.pk, meta, f.rng);
    bool accept = i % 2 == 0;
    MultisigTx done = complete_multisig(tx, requestee, accept);
    CHECK(well_formed(AnyTx{done}));
    CHECK(verify_multisig(done, chain.multisig_resolver(), &stats).ok());
    f.append_tx(chain, done);
    w.advance_multisig(done, f.rng);
  }
  CHECK(stats.alg1_executions == 4);
  CHECK(stats.sig_verifications > 0);
  CHECK(chain.tx_count() == 5);  // genesis + 4
  CHECK(w.accepted == 2);
  CHECK(w.rejected == 2);
  CHECK(chain.integrity_error(f.roots, f.burns) == "");

  // the tip record tracks the last committed next-pk hash
  auto tip = chain.multisig_tip(w.committed_next_hash());
  REQUIRE(tip.has_value());
  CHECK(tip->accepted == 2);
  CHECK(tip->rejected == 2);
}

TEST_CASE("multisig verification fails in the advertised order") {
  Fixture f;
  Chain chain;
  ChainWriter w = f.writer_with_genesis(chain, true, LedgerKind::multisig);
  crypto::KeyPair requestee = crypto::keygen(f.rng);
  TxMetadata meta;
  MultisigTx good = complete_multisig(w.begin_multisig(requestee.pk, meta, f.rng),
                                      requestee, true);
  auto resolver = chain.multisig_resolver();
  CHECK(verify_multisig(good, resolver).ok());

  SUBCASE("unknown requester pk has no predecessor") {
    MultisigTx tx = good;
    tx.requester_pk[0] ^= 1;
    CHECK(verify_multisig(tx, resolver).fail == VerifyFail::unchained);
  }
  SUBCASE("stale prev tx id") {
    MultisigTx tx = good;
    tx.prev_tx_id[0] ^= 1;
    CHECK(verify_multisig(tx, resolver).fail == VerifyFail::unchained);
  }
  SUBCASE("tampered metadata breaks the requester signature") {
    MultisigTx tx = good;
    tx.metadata_ct.push_back(0);
    tx.tx_id = tx.compute_tx_id();
    CHECK(verify_multisig(tx, resolver).fail == VerifyFail::requester_sig);
  }
  SUBCASE("counters may move by exactly one, exactly once") {
    MultisigTx tx = good;
    tx.output.accepted += 1;  // second increment on top of the legitimate one
    tx.tx_id = tx.compute_tx_id();
    CHECK(verify_multisig(tx, resolver).fail == VerifyFail::output_delta);

    MultisigTx both = good;
    both.output.rejected += 1;
    both.tx_id = both.compute_tx_id();
    CHECK(verify_multisig(both, resolver).fail == VerifyFail::output_delta);
  }
  SUBCASE("requestee signature covers the final counters") {
    MultisigTx tx = good;
    tx.requestee_sig[0] ^= 1;
    tx.tx_id = tx.compute_tx_id();
    CHECK(verify_multisig(tx, resolver).fail == VerifyFail::requestee_sig);
  }
  SUBCASE("missing requestee signature is malformed") {
    MultisigTx tx = good;
    tx.requestee_signed = false;
    tx.tx_id = tx.compute_tx_id();
    CHECK(verify_multisig(tx, resolver).fail == VerifyFail::malformed);
  }
  SUBCASE("tx id must match the content") {
    MultisigTx tx = good;
    tx.tx_id[0] ^= 1;
    CHECK(verify_multisig(tx, resolver).fail == VerifyFail::malformed);
    CHECK_FALSE(well_formed(AnyTx{tx}));
  }
}

TEST_CASE("singlesig chains verify and reject payload tampering") {
  Fixture f;
  Chain chain;
  ChainWriter w = f.writer_with_genesis(chain, true, LedgerKind::singlesig);

  SingleSigTx tx = w.make_singlesig(Bytes{1, 2, 3}, f.rng);
  CHECK(verify_singlesig(tx, chain.singlesig_resolver()).ok());
  f.append_tx(chain, tx);
  w.advance_singlesig(tx, f.rng);

  SingleSigTx second = w.make_singlesig(Bytes{4, 5}, f.rng);
  CHECK(verify_singlesig(second, chain.singlesig_resolver()).ok());

  SingleSigTx bad = second;
  bad.payload.push_back(9);
  bad.tx_id = bad.compute_tx_id();
  CHECK(verify_singlesig(bad, chain.singlesig_resolver()).fail == VerifyFail::requester_sig);

  // a multisig genesis does not seed the singlesig index
  Chain ms;
  f.writer_with_genesis(ms, true, LedgerKind::multisig);
  CHECK_FALSE(ms.singlesig_tip(crypto::sha256(Bytes{})).has_value());
}

TEST_CASE("non-rotating writer keeps a stable requester key") {
  Fixture f;
  Chain chain;
  ChainWriter w = f.writer_with_genesis(chain, false, LedgerKind::multisig);
  crypto::KeyPair requestee = crypto::keygen(f.rng);
  TxMetadata meta;

  MultisigTx a = complete_multisig(w.begin_multisig(requestee.pk, meta, f.rng), requestee, true);
  f.append_tx(chain, a);
  w.advance_multisig(a, f.rng);
  MultisigTx b = complete_multisig(w.begin_multisig(requestee.pk, meta, f.rng), requestee, true);
  CHECK(a.requester_pk == b.requester_pk);
  CHECK(verify_multisig(b, chain.multisig_resolver()).ok());

  // rotating writers change pk every transaction
  Chain chain2;
  ChainWriter r = f.writer_with_genesis(chain2, true, LedgerKind::multisig);
  MultisigTx c = complete_multisig(r.begin_multisig(requestee.pk, meta, f.rng), requestee, true);
  f.append_tx(chain2, c);
  r.advance_multisig(c, f.rng);
  MultisigTx d = complete_multisig(r.begin_multisig(requestee.pk, meta, f.rng), requestee, true);
  CHECK(c.requester_pk != d.requester_pk);
}

TEST_CASE("chain pop_tip rolls the tip indexes back") {
  Fixture f;
  Chain chain;
  ChainWriter w = f.writer_with_genesis(chain, true, LedgerKind::multisig);
  crypto::KeyPair requestee = crypto::keygen(f.rng);
  TxMetadata meta;

  Hash256 before = w.committed_next_hash();
  MultisigTx tx = complete_multisig(w.begin_multisig(requestee.pk, meta, f.rng), requestee, true);
  f.append_tx(chain, tx);
  CHECK(chain.contains_tx(tx.tx_id));
  auto moved = chain.multisig_tip(crypto::sha256(Bytes(tx.requester_pk.begin(),
                                                       tx.requester_pk.end())));
  CHECK_FALSE(moved.has_value());  // consumed tip is gone

  Block popped = chain.pop_tip();
  CHECK(popped.txs.size() == 1);
  CHECK_FALSE(chain.contains_tx(tx.tx_id));
  // the pre-append tip record is live again, so the tx verifies once more
  CHECK(chain.multisig_tip(before).has_value());
  CHECK(verify_multisig(tx, chain.multisig_resolver()).ok());
}

TEST_CASE("content hash ignores vouches, integrity audit does not miss tampering") {
  Fixture f;
  Chain a;
  ChainWriter w = f.writer_with_genesis(a, true, LedgerKind::multisig);
  crypto::KeyPair requestee = crypto::keygen(f.rng);
  TxMetadata meta;
  MultisigTx tx = complete_multisig(w.begin_multisig(requestee.pk, meta, f.rng), requestee, true);
  f.append_tx(a, tx);

  Bytes wire = a.serialize();
  CHECK(wire.size() > 0);

  Chain b = a;
  b.blocks().back().add_vouch(9, crypto::Signature{});
  CHECK(a.content_hash() == b.content_hash());

  CHECK(a.integrity_error(f.roots, f.burns) == "");
  Chain bad = a;
  std::get<MultisigTx>(bad.blocks().back().txs[0]).output.accepted += 1;
  CHECK(bad.integrity_error(f.roots, f.burns) != "");
}

TEST_CASE("transaction serialization roundtrips every kind") {
  Fixture f;
  Chain chain;
  ChainWriter w = f.writer_with_genesis(chain, true, LedgerKind::multisig);
  crypto::KeyPair requestee = crypto::keygen(f.rng);
  TxMetadata meta;
  meta.action = ActionKind::store_cloud;
  meta.data_hash[3] = 7;
  MultisigTx ms = complete_multisig(w.begin_multisig(requestee.pk, meta, f.rng), requestee, true);

  ChainWriter s = ChainWriter::start(f.rng, true);
  SingleSigTx ss = s.make_singlesig(Bytes{1, 2}, f.rng);
  GenesisTx g = make_genesis(LedgerKind::singlesig, s.current, s.committed_next_hash(),
                             CaCredential{ca_sign(f.root.sk, s.current.pk)});

  for (AnyTx tx : {AnyTx{ms}, AnyTx{ss}, AnyTx{g}}) {
    ByteWriter bw;
    write_tx(bw, tx);
    ByteReader br(bw.data());
    auto back = parse_tx(br);
    REQUIRE(back.has_value());
    CHECK(tx_canonical(*back) == tx_canonical(tx));
    CHECK(tx_id_of(*back) == tx_id_of(tx));
    CHECK(tx_wire_size(tx) == bw.data().size());
  }
}

TEST_CASE("immutable ledger chains transactions and audits cleanly") {
  ImmutableLedger il(3);
  Hash256 prev{};
  for (int i = 0; i < 7; ++i) {
    IlTx tx;
    tx.device_id = uint64_t(i % 2);
    tx.tx_type = i == 0 ? IlTxType::genesis : IlTxType::store_local;
    Hash256 id = il.append(tx);
    CHECK_FALSE(id == prev);
    prev = id;
  }
  CHECK(il.tx_count() == 7);
  CHECK(il.blocks().size() >= 3);  // capacity 3 per block
  CHECK(il.integrity_error() == "");
  CHECK(il.serialize().size() > 0);

  ImmutableLedger il2(3);
  for (int i = 0; i < 7; ++i) {
    IlTx tx;
    tx.device_id = uint64_t(i % 2);
    tx.tx_type = i == 0 ? IlTxType::genesis : IlTxType::store_local;
    il2.append(tx);
  }
  CHECK(il.ledger_hash() == il2.ledger_hash());
}

TEST_CASE("immutable ledger policy is newest-block-wins with default deny") {
  ImmutableLedger il(2);
  PolicyQuery q;
  q.device_id = 4;
  q.action = ActionKind::access;
  q.target_device = 1;
  CHECK_FALSE(il.policy_allows(q));  // nothing declared

  PolicyEntry allow;
  allow.who = PolicyEntry::Requester::device;
  allow.device_id = 4;
  allow.action = ActionKind::access;
  allow.target_device = PolicyEntry::kAnyDevice;
  il.set_policy({allow});
  CHECK(il.policy_allows(q));

  PolicyQuery other = q;
  other.device_id = 5;
  CHECK_FALSE(il.policy_allows(other));

  // overlay requesters are matched by pk
  crypto::Rng rng = crypto::derive_rng(4, 0);
  crypto::KeyPair sp = crypto::keygen(rng);
  PolicyQuery overlay;
  overlay.from_overlay = true;
  overlay.pk = sp.pk;
  overlay.action = ActionKind::monitor;
  overlay.target_device = 2;
  CHECK_FALSE(il.policy_allows(overlay));
  PolicyEntry grant_sp;
  grant_sp.who = PolicyEntry::Requester::overlay_pk;
  grant_sp.pk = sp.pk;
  grant_sp.action = ActionKind::monitor;
  grant_sp.target_device = 2;
  il.set_policy({allow, grant_sp});
  CHECK(il.policy_allows(overlay));

  // a newer block that drops the device rule revokes it outright
  il.set_policy({grant_sp});
  CHECK_FALSE(il.policy_allows(q));
  CHECK(il.policy_allows(overlay));
  CHECK(il.integrity_error() == "");
}
