#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace lsb::trust {

struct Tier {
  uint64_t at_least = 0;  // evidence count where this tier starts
  int ptv = 100;          // percent of block transactions to verify
};

// Direct evidence (own validated blocks, penalties subtract) outranks
// indirect evidence (distinct vouching peers). No evidence means full
// verification. The floor keeps PTV strictly positive forever.
struct TrustConfig {
  std::vector<Tier> direct_tiers{{1, 80}, {10, 50}, {25, 30}, {50, 20}};
  std::vector<Tier> indirect_tiers{{1, 90}, {3, 70}, {7, 50}};
  int ptv_floor = 20;
  // Pins every verifier to one sampling rate, for detection-rate studies.
  std::optional<int> fixed_ptv;
};

// Fraction of transactions that must be verified per block, as a function of
// the OBM count, for an appending attack to be caught reliably. Values
// between configured points fall back to the next lower OBM count.
int guideline_min_ptv(size_t obm_count);

class TrustTable {
 public:
  explicit TrustTable(TrustConfig cfg = {}) : cfg_(std::move(cfg)) {}

  void record_validated(uint64_t generator) { direct_[generator] += 1; }
  void record_penalty(uint64_t generator) { direct_[generator] -= 1; }
  void record_vouch(uint64_t generator, uint64_t voucher) { vouchers_[generator].insert(voucher); }

  int64_t direct_evidence(uint64_t generator) const;
  uint64_t indirect_evidence(uint64_t generator) const;  // distinct vouchers
  bool has_direct(uint64_t generator) const { return direct_.count(generator) > 0; }

  // Direct tier if any direct history exists, else indirect tier, else 100.
  // Always clamped up to the configured floor.
  int select_ptv(uint64_t generator) const;

  const TrustConfig& config() const { return cfg_; }
  TrustConfig& config() { return cfg_; }

 private:
  int tier_lookup(const std::vector<Tier>& tiers, int64_t evidence) const;
  TrustConfig cfg_;
  std::map<uint64_t, int64_t> direct_;
  std::map<uint64_t, std::set<uint64_t>> vouchers_;
};

}  // namespace lsb::trust
