#include "lsb/trust.hpp"

#include <algorithm>

namespace lsb::trust {

int guideline_min_ptv(size_t obm_count) {
  static const std::vector<std::pair<size_t, int>> table = {
      {3, 80}, {5, 60}, {7, 60}, {10, 40}, {13, 20}, {15, 20}, {17, 20}, {20, 10}};
  int out = table.front().second;
  for (const auto& [m, ptv] : table)
    if (obm_count >= m) out = ptv;
  return out;
}

int64_t TrustTable::direct_evidence(uint64_t generator) const {
  auto it = direct_.find(generator);
  return it == direct_.end() ? 0 : it->second;
}

uint64_t TrustTable::indirect_evidence(uint64_t generator) const {
  auto it = vouchers_.find(generator);
  return it == vouchers_.end() ? 0 : it->second.size();
}

int TrustTable::tier_lookup(const std::vector<Tier>& tiers, int64_t evidence) const {
  int ptv = 100;
  for (const auto& t : tiers)
    if (evidence >= int64_t(t.at_least)) ptv = t.ptv;
  return ptv;
}

int TrustTable::select_ptv(uint64_t generator) const {
  if (cfg_.fixed_ptv) return *cfg_.fixed_ptv;
  int ptv = 100;
  if (has_direct(generator)) {
    ptv = tier_lookup(cfg_.direct_tiers, direct_evidence(generator));
  } else if (indirect_evidence(generator) > 0) {
    ptv = tier_lookup(cfg_.indirect_tiers, int64_t(indirect_evidence(generator)));
  }
  return std::max(ptv, cfg_.ptv_floor);
}

}  // namespace lsb::trust
