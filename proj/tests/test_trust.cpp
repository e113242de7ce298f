#include "doctest.h"
#include "lsb/trust.hpp"

using namespace lsb::trust;

TEST_CASE("direct evidence walks the verification ladder down") {
  TrustTable t;
  uint64_t gen = 7;
  CHECK(t.select_ptv(gen) == 100);  // unknown generator: verify everything

  t.record_validated(gen);
  CHECK(t.select_ptv(gen) == 80);
  for (int i = 0; i < 9; ++i) t.record_validated(gen);  // 10 total
  CHECK(t.select_ptv(gen) == 50);
  for (int i = 0; i < 15; ++i) t.record_validated(gen);  // 25 total
  CHECK(t.select_ptv(gen) == 30);
  for (int i = 0; i < 25; ++i) t.record_validated(gen);  // 50 total
  CHECK(t.select_ptv(gen) == 20);
  // floor holds, no matter how much longer the history grows
  for (int i = 0; i < 500; ++i) t.record_validated(gen);
  CHECK(t.select_ptv(gen) == 20);
}

TEST_CASE("penalties subtract direct evidence") {
  TrustTable t;
  uint64_t gen = 1;
  for (int i = 0; i < 10; ++i) t.record_validated(gen);
  CHECK(t.select_ptv(gen) == 50);
  for (int i = 0; i < 9; ++i) t.record_penalty(gen);
  CHECK(t.direct_evidence(gen) == 1);
  CHECK(t.select_ptv(gen) == 80);
  t.record_penalty(gen);
  // history exists but proves nothing: back to full verification
  CHECK(t.has_direct(gen));
  CHECK(t.select_ptv(gen) == 100);
  t.record_penalty(gen);
  CHECK(t.direct_evidence(gen) == -1);
  CHECK(t.select_ptv(gen) == 100);
}

TEST_CASE("indirect evidence counts distinct vouchers only") {
  TrustTable t;
  uint64_t gen = 3;
  t.record_vouch(gen, 11);
  t.record_vouch(gen, 11);
  t.record_vouch(gen, 11);
  CHECK(t.indirect_evidence(gen) == 1);
  CHECK(t.select_ptv(gen) == 90);

  t.record_vouch(gen, 12);
  t.record_vouch(gen, 13);
  CHECK(t.indirect_evidence(gen) == 3);
  CHECK(t.select_ptv(gen) == 70);

  for (uint64_t v = 14; v < 18; ++v) t.record_vouch(gen, v);
  CHECK(t.select_ptv(gen) == 50);
}

TEST_CASE("direct history outranks vouches once present") {
  TrustTable t;
  uint64_t gen = 4;
  for (uint64_t v = 0; v < 7; ++v) t.record_vouch(gen, 100 + v);
  CHECK(t.select_ptv(gen) == 50);
  t.record_validated(gen);
  CHECK(t.select_ptv(gen) == 80);  // one direct validation beats seven vouches
}

TEST_CASE("configured floor clamps every tier") {
  TrustConfig cfg;
  cfg.ptv_floor = 60;
  TrustTable t(cfg);
  uint64_t gen = 5;
  for (int i = 0; i < 50; ++i) t.record_validated(gen);
  CHECK(t.select_ptv(gen) == 60);
}

TEST_CASE("fixed ptv overrides evidence entirely") {
  TrustConfig cfg;
  cfg.fixed_ptv = 37;
  TrustTable t(cfg);
  uint64_t gen = 6;
  CHECK(t.select_ptv(gen) == 37);
  for (int i = 0; i < 50; ++i) t.record_validated(gen);
  CHECK(t.select_ptv(gen) == 37);
}

TEST_CASE("guideline minimum ptv follows the published table") {
  CHECK(guideline_min_ptv(3) == 80);
  CHECK(guideline_min_ptv(5) == 60);
  CHECK(guideline_min_ptv(7) == 60);
  CHECK(guideline_min_ptv(10) == 40);
  CHECK(guideline_min_ptv(13) == 20);
  CHECK(guideline_min_ptv(15) == 20);
  CHECK(guideline_min_ptv(17) == 20);
  CHECK(guideline_min_ptv(20) == 10);
  // off-grid sizes fall back to the next smaller tabulated network
  CHECK(guideline_min_ptv(4) == 80);
  CHECK(guideline_min_ptv(12) == 40);
  CHECK(guideline_min_ptv(100) == 10);
  // below the smallest tabulated size the strictest entry applies
  CHECK(guideline_min_ptv(1) == 80);
}
