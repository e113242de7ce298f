#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "lsb/crypto.hpp"

namespace lsb::ledger {

using crypto::Hash256;
using crypto::KeyPair;
using crypto::PublicKey;
using crypto::Rng;
using crypto::Signature;

constexpr Hash256 kZeroHash{};

struct HashKey {
  size_t operator()(const Hash256& h) const {
    uint64_t v;
    std::memcpy(&v, h.data(), 8);
    return size_t(v);
  }
};

enum class ActionKind : uint8_t {
  store_locally = 0,
  store_cloud = 1,
  access = 2,
  monitor = 3,
  monitor_periodic = 4,
};

const char* action_name(ActionKind a);

// output[0]/output[1] are the requester's lifetime accepted/rejected totals;
// output[2] commits the hash of the PK the requester will use next, which is
// what links consecutive transactions of one requester.
struct TxOutput {
  uint64_t accepted = 0;
  uint64_t rejected = 0;
  Hash256 next_pk_hash{};
};

// Control metadata travels sealed to the requestee; the plaintext shadow is
// simulation bookkeeping and never enters the canonical byte form.
struct TxMetadata {
  ActionKind action = ActionKind::access;
  uint64_t target_device = 0;
  Hash256 data_hash{};  // hash of the stored blob for store_cloud, else zero

  Bytes canonical() const;
  static std::optional<TxMetadata> parse(const Bytes& b);
};

struct MultisigTx {
  Hash256 tx_id{};
  Hash256 prev_tx_id{};
  PublicKey requester_pk{};
  Signature requester_sig{};
  PublicKey requestee_pk{};
  bool requestee_signed = false;
  Signature requestee_sig{};
  TxOutput output;
  Bytes metadata_ct;

  TxMetadata meta_shadow;  // not serialized

  // Signed by the requester: everything it commits to before the requestee
  // decides, i.e. all fields except tx_id, both signatures and the counters.
  Bytes requester_body() const;
  // Signed by the requestee after incrementing exactly one counter.
  Bytes requestee_body() const;
  Bytes canonical() const;
  Hash256 compute_tx_id() const;
  size_t wire_size() const { return canonical().size(); }
};

// Data-plane bookkeeping transactions (single signature): no requestee, no
// metadata, no accept/reject counters. Chained exactly like multisig ones.
struct SingleSigTx {
  Hash256 tx_id{};
  Hash256 prev_tx_id{};
  PublicKey requester_pk{};
  Signature requester_sig{};
  Hash256 next_pk_hash{};
  Bytes payload;

  Bytes signed_body() const;
  Bytes canonical() const;
  Hash256 compute_tx_id() const;
  size_t wire_size() const { return canonical().size(); }
};

enum class LedgerKind : uint8_t { multisig = 0, singlesig = 1 };

// Either a signature by a configured trust root over the owner PK, or a
// pointer into the mock burn ledger that must name the same PK.
struct CaCredential {
  Signature root_sig{};
};
struct BurnCredential {
  uint64_t burn_entry = 0;
};
using GenesisCredential = std::variant<CaCredential, BurnCredential>;

struct GenesisTx {
  Hash256 tx_id{};
  LedgerKind kind = LedgerKind::multisig;
  PublicKey pk{};
  Signature self_sig{};
  Hash256 next_pk_hash{};
  GenesisCredential credential;

  Bytes signed_body() const;
  Bytes canonical() const;
  Hash256 compute_tx_id() const;
  size_t wire_size() const { return canonical().size(); }
};

using AnyTx = std::variant<GenesisTx, MultisigTx, SingleSigTx>;

Hash256 tx_id_of(const AnyTx& tx);
size_t tx_wire_size(const AnyTx& tx);
Bytes tx_canonical(const AnyTx& tx);

struct BlockHeader {
  Hash256 prev_block_hash{};
  uint64_t generator = 0;
  Signature generator_sig{};
  // Vouches accumulate here as they arrive, kept sorted by verifier id so
  // replica dumps are byte-identical. Not covered by the body hash.
  std::vector<std::pair<uint64_t, Signature>> verifier_sigs;
};

struct Block {
  BlockHeader header;
  std::vector<AnyTx> txs;

  // The immutable content: prev hash, generator id and the tx ids.
  Hash256 body_hash() const;
  Bytes canonical() const;
  size_t wire_size() const { return canonical().size(); }
  void add_vouch(uint64_t verifier, const Signature& sig);
};

enum class VerifyFail : uint8_t {
  none = 0,
  unchained,       // no predecessor under hash(requester_pk), or stale prev id
  requester_sig,
  output_delta,    // counters moved by anything but exactly one, once
  requestee_sig,
  malformed,       // tx_id mismatch or missing requestee signature
  genesis_credential,
};

const char* verify_fail_name(VerifyFail f);

struct VerifyResult {
  VerifyFail fail = VerifyFail::none;
  bool ok() const { return fail == VerifyFail::none; }
};

// Latest transaction of one requester chain, keyed by its committed
// next-PK hash in the owning index.
struct TipRecord {
  Hash256 tx_id{};
  uint64_t accepted = 0;
  uint64_t rejected = 0;
};

using TipResolver = std::function<std::optional<TipRecord>(const Hash256&)>;

struct VerifyStats {
  uint64_t alg1_executions = 0;
  uint64_t sig_verifications = 0;
};

// Transaction verification, checks in fixed order:
//   1. predecessor lookup via hash(requester_pk) against committed next-PK
//   2. requester signature
//   3. exactly one counter incremented by exactly one
//   4. requestee signature
VerifyResult verify_multisig(const MultisigTx& tx, const TipResolver& prev_of,
                             VerifyStats* stats = nullptr);
// Single-signature chains run checks 1 and 2 only.
VerifyResult verify_singlesig(const SingleSigTx& tx, const TipResolver& prev_of,
                              VerifyStats* stats = nullptr);

struct TrustRoots {
  std::vector<PublicKey> roots;
};
struct BurnLedger {
  std::vector<PublicKey> entries;  // entry index -> PK that burned
};

VerifyResult verify_genesis(const GenesisTx& g, const TrustRoots& roots,
                            const BurnLedger& burns, VerifyStats* stats = nullptr);

// One replica of the public BC. Multisig and single-signature chains keep
// disjoint tip indexes; a genesis seeds exactly one of them.
class Chain {
 public:
  const std::vector<Block>& blocks() const { return blocks_; }
  std::vector<Block>& blocks() { return blocks_; }
  Hash256 tip_hash() const { return blocks_.empty() ? kZeroHash : blocks_.back().body_hash(); }
  size_t tx_count() const { return tx_ids_.size(); }

  bool contains_tx(const Hash256& tx_id) const { return tx_ids_.count(tx_id) > 0; }
  std::optional<TipRecord> multisig_tip(const Hash256& next_pk_hash) const;
  std::optional<TipRecord> singlesig_tip(const Hash256& next_pk_hash) const;
  TipResolver multisig_resolver() const;
  TipResolver singlesig_resolver() const;

  // pre: block.header.prev_block_hash == tip_hash()
  void append(Block block);
  // Drops the newest block and rolls the tip indexes back; used when a
  // generator yields to a competing block that the rest of the network saw
  // first. Returns the removed block.
  Block pop_tip();

  std::string dump() const;          // newline-delimited structured text
  Bytes serialize() const;
  // Replica identity: hash over the block body hashes only. Vouches trickle
  // in asynchronously and are excluded, so converged replicas compare equal.
  Hash256 content_hash() const;
  // Full audit: hash links, generator and vouch signatures, tx ids and a
  // replay of every chain rule from genesis. Empty string means clean.
  std::string integrity_error(const TrustRoots& roots, const BurnLedger& burns) const;

 private:
  void apply_tx_to_tips(const AnyTx& tx);
  std::vector<Block> blocks_;
  std::unordered_map<Hash256, TipRecord, HashKey> multisig_tips_;
  std::unordered_map<Hash256, TipRecord, HashKey> singlesig_tips_;
  std::unordered_set<Hash256, HashKey> tx_ids_;
};

// --- construction helpers ---

GenesisTx make_genesis(LedgerKind kind, const KeyPair& owner, const Hash256& next_pk_hash,
                       GenesisCredential cred);
Signature ca_sign(const crypto::SecretKey& root_sk, const PublicKey& subject);

// Requester-side builder for one chain. A rotating writer uses a fresh PK per
// transaction (anonymity); a non-rotating one keeps a stable identity key for
// peers that authorize it by exact PK.
struct ChainWriter {
  bool rotate = true;
  KeyPair current;
  KeyPair next;
  Hash256 prev_tx_id{};
  uint64_t accepted = 0;
  uint64_t rejected = 0;

  static ChainWriter start(Rng& rng, bool rotate = true);
  // Genesis commits to the NEXT key, so binding rolls the writer onto it.
  void bind_genesis(const GenesisTx& g, Rng& rng) {
    prev_tx_id = g.tx_id;
    roll_keys(rng);
  }
  Hash256 committed_next_hash() const;

  // Incomplete transaction: counters carry the previous totals, requestee
  // still has to decide and sign.
  MultisigTx begin_multisig(const PublicKey& requestee, const TxMetadata& meta, Rng& rng);
  SingleSigTx make_singlesig(const Bytes& payload, Rng& rng);
  // Advance once the transaction is final and submitted.
  void advance_multisig(const MultisigTx& completed, Rng& rng);
  void advance_singlesig(const SingleSigTx& tx, Rng& rng);

 private:
  void roll_keys(Rng& rng);
};

// Requestee side: increments exactly one counter, signs, fixes tx_id.
MultisigTx complete_multisig(MultisigTx tx, const KeyPair& requestee, bool accept);

// Format admission: recomputed tx_id matches and multisig carries both sigs.
bool well_formed(const AnyTx& tx);

void write_tx(ByteWriter& w, const AnyTx& tx);
std::optional<AnyTx> parse_tx(ByteReader& r);

// --- smart-home immutable ledger ---

enum class IlTxType : uint8_t {
  genesis = 0,
  store_local = 1,
  store_cloud = 2,
  access = 3,
  monitor = 4,
  key_grant = 5,
  key_revoke = 6,
};

// Exactly the five fields of a local transaction; overlay_tx_hash is present
// iff the transaction mirrors an overlay one.
struct IlTx {
  Hash256 prev_tx_ptr{};
  Hash256 tx_id{};
  uint64_t device_id = 0;
  IlTxType tx_type = IlTxType::genesis;
  std::optional<Hash256> overlay_tx_hash;

  Bytes canonical() const;
  Hash256 compute_tx_id() const;
};

struct PolicyEntry {
  enum class Requester : uint8_t { any = 0, device = 1, overlay_pk = 2 };
  Requester who = Requester::any;
  uint64_t device_id = 0;  // when who == device
  PublicKey pk{};          // when who == overlay_pk
  ActionKind action = ActionKind::access;
  uint64_t target_device = 0;
  static constexpr uint64_t kAnyDevice = ~0ull;
  uint64_t reserved = 0;  // carried, never interpreted

  Bytes canonical() const;
};

struct IlBlock {
  Hash256 prev_block_hash{};
  std::vector<PolicyEntry> policy;
  std::vector<IlTx> txs;

  Bytes canonical() const;
  Hash256 block_hash() const;
};

struct PolicyQuery {
  bool from_overlay = false;
  PublicKey pk{};       // overlay requester
  uint64_t device_id = 0;  // local requester
  ActionKind action = ActionKind::access;
  uint64_t target_device = 0;
};

class ImmutableLedger {
 public:
  explicit ImmutableLedger(size_t max_txs_per_block = 10) : cap_(max_txs_per_block) {}

  void set_policy(std::vector<PolicyEntry> policy);  // starts a fresh block
  Hash256 append(IlTx tx);                           // fills in prev ptr + id
  // The newest block that declares a policy wins outright; default deny.
  bool policy_allows(const PolicyQuery& q) const;

  const std::vector<IlBlock>& blocks() const { return blocks_; }
  size_t tx_count() const { return tx_count_; }
  Hash256 ledger_hash() const;
  Bytes serialize() const;
  std::string integrity_error() const;

 private:
  void seal_open_block();
  size_t cap_;
  size_t tx_count_ = 0;
  Hash256 last_tx_id_{};
  std::vector<IlBlock> blocks_;
  bool block_open_ = false;
};

}  // namespace lsb::ledger
