#include "lsb/crypto.hpp"

#include <sodium.h>

#include <cstdio>
#include <mutex>
#include <stdexcept>

namespace lsb {

std::string to_hex(const uint8_t* data, size_t len) {
  static const char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (size_t i = 0; i < len; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xf]);
  }
  return out;
}

std::string to_hex(const Bytes& b) { return to_hex(b.data(), b.size()); }

static int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw std::runtime_error("bad hex digit");
}

Bytes from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) throw std::runtime_error("odd hex length");
  Bytes out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = uint8_t(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  return out;
}

}  // namespace lsb

namespace lsb::crypto {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Rng derive_rng(uint64_t master_seed, uint64_t stream_id) {
  return Rng(splitmix64(master_seed ^ splitmix64(stream_id)));
}

void init() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
  });
}

Hash256 sha256(const uint8_t* data, size_t len) {
  init();
  Hash256 h;
  crypto_hash_sha256(h.data(), data, len);
  return h;
}

Hash256 sha256(const Bytes& b) { return sha256(b.data(), b.size()); }

std::string hash_hex(const Hash256& h) { return to_hex(h.data(), h.size()); }

static void fill_random(uint8_t* out, size_t len, Rng& rng) {
  size_t i = 0;
  while (i < len) {
    uint64_t v = rng();
    for (int k = 0; k < 8 && i < len; ++k, ++i) out[i] = uint8_t(v >> (8 * k));
  }
}

KeyPair keygen(Rng& rng) {
  init();
  uint8_t seed[crypto_sign_SEEDBYTES];
  fill_random(seed, sizeof seed, rng);
  KeyPair kp;
  crypto_sign_seed_keypair(kp.pk.data(), kp.sk.data(), seed);
  return kp;
}

Signature sign(const SecretKey& sk, const Bytes& msg) {
  init();
  Signature sig;
  crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), sk.data());
  return sig;
}

bool verify(const PublicKey& pk, const Bytes& msg, const Signature& sig) {
  init();
  return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), pk.data()) == 0;
}

Bytes symmetric_encrypt(const SymmetricKey& key, const Bytes& plaintext, Rng& rng) {
  init();
  Bytes out(crypto_secretbox_NONCEBYTES + plaintext.size() + crypto_secretbox_MACBYTES);
  fill_random(out.data(), crypto_secretbox_NONCEBYTES, rng);
  crypto_secretbox_easy(out.data() + crypto_secretbox_NONCEBYTES, plaintext.data(),
                        plaintext.size(), out.data(), key.data());
  return out;
}

std::optional<Bytes> symmetric_decrypt(const SymmetricKey& key, const Bytes& ciphertext) {
  init();
  if (ciphertext.size() < crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES)
    return std::nullopt;
  Bytes out(ciphertext.size() - crypto_secretbox_NONCEBYTES - crypto_secretbox_MACBYTES);
  if (crypto_secretbox_open_easy(out.data(), ciphertext.data() + crypto_secretbox_NONCEBYTES,
                                 ciphertext.size() - crypto_secretbox_NONCEBYTES,
                                 ciphertext.data(), key.data()) != 0)
    return std::nullopt;
  return out;
}

size_t sealed_overhead() { return crypto_box_PUBLICKEYBYTES + crypto_box_MACBYTES; }

// Standard sealed-box layout (ephemeral pk || box) with the ephemeral secret
// drawn from rng, so ciphertexts replay deterministically under a fixed seed.
Bytes seal_to(const PublicKey& recipient_ed_pk, const Bytes& plaintext, Rng& rng) {
  init();
  uint8_t recipient_curve_pk[crypto_box_PUBLICKEYBYTES];
  if (crypto_sign_ed25519_pk_to_curve25519(recipient_curve_pk, recipient_ed_pk.data()) != 0)
    throw std::runtime_error("pk conversion failed");

  uint8_t esk[crypto_box_SECRETKEYBYTES];
  fill_random(esk, sizeof esk, rng);
  uint8_t epk[crypto_box_PUBLICKEYBYTES];
  crypto_scalarmult_base(epk, esk);

  uint8_t nonce[crypto_box_NONCEBYTES];
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, sizeof nonce);
  crypto_generichash_update(&st, epk, sizeof epk);
  crypto_generichash_update(&st, recipient_curve_pk, sizeof recipient_curve_pk);
  crypto_generichash_final(&st, nonce, sizeof nonce);

  Bytes out(sizeof epk + plaintext.size() + crypto_box_MACBYTES);
  std::memcpy(out.data(), epk, sizeof epk);
  if (crypto_box_easy(out.data() + sizeof epk, plaintext.data(), plaintext.size(), nonce,
                      recipient_curve_pk, esk) != 0)
    throw std::runtime_error("box failed");
  return out;
}

std::optional<Bytes> open_sealed(const KeyPair& recipient_ed, const Bytes& ciphertext) {
  init();
  if (ciphertext.size() < sealed_overhead()) return std::nullopt;
  uint8_t curve_pk[crypto_box_PUBLICKEYBYTES];
  uint8_t curve_sk[crypto_box_SECRETKEYBYTES];
  if (crypto_sign_ed25519_pk_to_curve25519(curve_pk, recipient_ed.pk.data()) != 0)
    return std::nullopt;
  if (crypto_sign_ed25519_sk_to_curve25519(curve_sk, recipient_ed.sk.data()) != 0)
    return std::nullopt;
  Bytes out(ciphertext.size() - sealed_overhead());
  if (crypto_box_seal_open(out.data(), ciphertext.data(), ciphertext.size(), curve_pk,
                           curve_sk) != 0)
    return std::nullopt;
  return out;
}

uint64_t powmod(uint64_t base, uint64_t exp, uint64_t mod) {
  if (mod == 0) throw std::runtime_error("powmod: zero modulus");
  unsigned __int128 acc = 1;
  unsigned __int128 b = base % mod;
  while (exp > 0) {
    if (exp & 1) acc = acc * b % mod;
    b = b * b % mod;
    exp >>= 1;
  }
  return uint64_t(acc);
}

uint64_t dh_public(const DhGroup& grp, uint64_t secret) { return powmod(grp.g, secret, grp.p); }

uint64_t dh_shared_element(const DhGroup& grp, uint64_t peer_public, uint64_t secret) {
  return powmod(peer_public, secret, grp.p);
}

SymmetricKey dh_key(const DhGroup& grp, uint64_t peer_public, uint64_t secret) {
  uint64_t elem = dh_shared_element(grp, peer_public, secret);
  ByteWriter w;
  w.u64(elem);
  Hash256 h = sha256(w.bytes());
  SymmetricKey k;
  std::memcpy(k.data(), h.data(), k.size());
  return k;
}

}  // namespace lsb::crypto
