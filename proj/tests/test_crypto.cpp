#include "doctest.h"
#include "lsb/crypto.hpp"

using namespace lsb;
using namespace lsb::crypto;

TEST_CASE("sha256 matches published vectors") {
  init();
  Bytes empty;
  CHECK(hash_hex(sha256(empty)) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  Bytes abc{'a', 'b', 'c'};
  CHECK(hash_hex(sha256(abc)) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("derived rngs are deterministic and stream-independent") {
  Rng a1 = derive_rng(42, 7);
  Rng a2 = derive_rng(42, 7);
  Rng b = derive_rng(42, 8);
  uint64_t x1 = a1(), x2 = a2(), y = b();
  CHECK(x1 == x2);
  CHECK(x1 != y);
  // splitmix64 never maps distinct small inputs to the same word
  CHECK(splitmix64(1) != splitmix64(2));
}

TEST_CASE("sign and verify roundtrip, tampering breaks both paths") {
  init();
  Rng rng = derive_rng(1, 0);
  KeyPair kp = keygen(rng);
  Bytes msg{'h', 'i'};
  Signature sig = sign(kp.sk, msg);
  CHECK(verify(kp.pk, msg, sig));

  Bytes other{'h', 'o'};
  CHECK_FALSE(verify(kp.pk, other, sig));

  Signature bad = sig;
  bad[0] ^= 1;
  CHECK_FALSE(verify(kp.pk, msg, bad));

  KeyPair stranger = keygen(rng);
  CHECK_FALSE(verify(stranger.pk, msg, sig));
}

TEST_CASE("keygen is deterministic per rng state") {
  init();
  Rng r1 = derive_rng(5, 1);
  Rng r2 = derive_rng(5, 1);
  CHECK(keygen(r1).pk == keygen(r2).pk);
  Rng r3 = derive_rng(5, 2);
  CHECK(keygen(r1).pk != keygen(r3).pk);
}

TEST_CASE("symmetric encryption roundtrips and authenticates") {
  init();
  Rng rng = derive_rng(2, 0);
  SymmetricKey key{};
  for (size_t i = 0; i < key.size(); ++i) key[i] = uint8_t(i);
  Bytes pt{1, 2, 3, 4, 5};
  Bytes ct = symmetric_encrypt(key, pt, rng);
  CHECK(ct.size() > pt.size());

  auto back = symmetric_decrypt(key, ct);
  REQUIRE(back.has_value());
  CHECK(*back == pt);

  Bytes forged = ct;
  forged.back() ^= 1;
  CHECK_FALSE(symmetric_decrypt(key, forged).has_value());

  SymmetricKey wrong = key;
  wrong[0] ^= 1;
  CHECK_FALSE(symmetric_decrypt(wrong, ct).has_value());
}

TEST_CASE("sealed box opens only for the addressed keypair") {
  init();
  Rng rng = derive_rng(3, 0);
  KeyPair alice = keygen(rng);
  KeyPair bob = keygen(rng);
  Bytes pt{9, 8, 7};
  Bytes ct = seal_to(bob.pk, pt, rng);
  CHECK(ct.size() == pt.size() + sealed_overhead());

  auto got = open_sealed(bob, ct);
  REQUIRE(got.has_value());
  CHECK(*got == pt);
  CHECK_FALSE(open_sealed(alice, ct).has_value());
}

TEST_CASE("diffie-hellman toy group agrees on the shared element") {
  DhGroup grp;
  grp.p = 23;
  grp.g = 5;
  // 5^6 mod 23 = 8, 5^15 mod 23 = 19, shared secret 2
  uint64_t pa = dh_public(grp, 6);
  uint64_t pb = dh_public(grp, 15);
  CHECK(pa == 8);
  CHECK(pb == 19);
  CHECK(dh_shared_element(grp, pb, 6) == 2);
  CHECK(dh_shared_element(grp, pa, 15) == 2);
  CHECK(dh_key(grp, pb, 6) == dh_key(grp, pa, 15));
}

TEST_CASE("powmod handles large exponents") {
  CHECK(powmod(2, 10, 1000) == 24);
  CHECK(powmod(7, 0, 13) == 1);
  // default group stays inside 64-bit intermediate math
  DhGroup grp;
  uint64_t pub = dh_public(grp, 123456789);
  CHECK(pub < grp.p);
  CHECK(dh_shared_element(grp, pub, 987654321) ==
        dh_shared_element(grp, dh_public(grp, 987654321), 123456789));
}
