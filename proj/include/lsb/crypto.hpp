#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "lsb/bytes.hpp"

namespace lsb::crypto {

// Every random draw in the library goes through an injected Rng stream so a
// run is fully reproducible from the scenario seed. No ambient entropy.
using Rng = std::mt19937_64;

uint64_t splitmix64(uint64_t x);

// Derives an independent child stream; used to give each node its own rng.
Rng derive_rng(uint64_t master_seed, uint64_t stream_id);

using Hash256 = std::array<uint8_t, 32>;
using PublicKey = std::array<uint8_t, 32>;   // Ed25519
using SecretKey = std::array<uint8_t, 64>;   // Ed25519 (seed || pk)
using Signature = std::array<uint8_t, 64>;
using SymmetricKey = std::array<uint8_t, 32>;

struct KeyPair {
  PublicKey pk{};
  SecretKey sk{};
};

// Must be called once before any other primitive; safe to call repeatedly.
void init();

Hash256 sha256(const uint8_t* data, size_t len);
Hash256 sha256(const Bytes& b);
std::string hash_hex(const Hash256& h);

// Deterministic: the 32-byte seed is drawn from rng.
KeyPair keygen(Rng& rng);
Signature sign(const SecretKey& sk, const Bytes& msg);
bool verify(const PublicKey& pk, const Bytes& msg, const Signature& sig);

// Authenticated symmetric encryption; a random nonce drawn from rng is
// prepended to the ciphertext. Returns nullopt on authentication failure.
Bytes symmetric_encrypt(const SymmetricKey& key, const Bytes& plaintext, Rng& rng);
std::optional<Bytes> symmetric_decrypt(const SymmetricKey& key, const Bytes& ciphertext);

// Anonymous public-key encryption to the holder of an Ed25519 key. The
// ephemeral key comes from rng instead of ambient entropy; the wire format is
// the standard sealed box, so only the sender side is custom.
Bytes seal_to(const PublicKey& recipient_ed_pk, const Bytes& plaintext, Rng& rng);
std::optional<Bytes> open_sealed(const KeyPair& recipient_ed, const Bytes& ciphertext);

// Diffie-Hellman over a configurable multiplicative group mod a small safe
// prime. Groups this size are simulation stand-ins, not security parameters.
struct DhGroup {
  uint64_t p = 2147483647;  // 2^31 - 1
  uint64_t g = 7;
};

uint64_t powmod(uint64_t base, uint64_t exp, uint64_t mod);
uint64_t dh_public(const DhGroup& grp, uint64_t secret);
uint64_t dh_shared_element(const DhGroup& grp, uint64_t peer_public, uint64_t secret);
// Shared key = sha256 of the canonical (u64 little-endian) shared element.
SymmetricKey dh_key(const DhGroup& grp, uint64_t peer_public, uint64_t secret);

size_t sealed_overhead();

}  // namespace lsb::crypto
