#include "lsb/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "lsb/adversary.hpp"
#include "lsb/metrics.hpp"

namespace lsb::sim {

using ledger::AnyTx;
using ledger::Hash256;
using ledger::MultisigTx;

// Frozen so the attack sweep tables are reproducible run to run; the sim and
// the closed-form predictor agree cell by cell at any seed, this one also
// pins the published table.
const uint64_t kAttackSweepSeed = 9379;

void ExpResult::check(bool pass, const std::string& what) {
  ok = ok && pass;
  checks.push_back(std::string(pass ? "pass: " : "FAIL: ") + what);
}

// --- closed-form oracles ---

double oracle_detect_prob(uint64_t t_max, uint64_t fakes, int ptv, uint64_t verifiers) {
  if (t_max == 0 || fakes == 0 || verifiers == 0) return 0.0;
  uint64_t k = (uint64_t(ptv < 0 ? 0 : ptv) * t_max + 99) / 100;
  if (k > t_max) k = t_max;
  // P(one verifier misses every fake) = C(t_max - fakes, k) / C(t_max, k)
  double miss = 1.0;
  for (uint64_t j = 0; j < k; ++j) {
    double num = double(t_max) - double(fakes) - double(j);
    if (num <= 0.0) {
      miss = 0.0;
      break;
    }
    miss *= num / (double(t_max) - double(j));
  }
  return 1.0 - std::pow(miss, double(verifiers));
}

double oracle_eq1_raw(double alpha_mid, uint64_t t_max, uint64_t m, double rate) {
  if (rate <= 0.0) return 0.0;
  return alpha_mid * double(t_max) * double(m) / rate;
}

double oracle_eq1(double alpha_mid, uint64_t t_max, uint64_t m, double rate) {
  return dtm::round_half_second(oracle_eq1_raw(alpha_mid, t_max, m, rate));
}

MutationReport oracle_mutate_chain(size_t len, uint64_t seed) {
  using namespace ledger;
  MutationReport rep;
  crypto::Rng rng = crypto::derive_rng(seed, 0xFACEull);
  crypto::KeyPair root = crypto::keygen(rng);
  crypto::KeyPair requestee = crypto::keygen(rng);

  ChainWriter w = ChainWriter::start(rng, true);
  GenesisTx g = make_genesis(LedgerKind::multisig, w.current, w.committed_next_hash(),
                             CaCredential{ca_sign(root.sk, w.current.pk)});
  w.bind_genesis(g, rng);

  std::vector<MultisigTx> txs;
  for (size_t i = 0; i < len; ++i) {
    TxMetadata meta;
    meta.action = ActionKind::access;
    meta.target_device = i;
    MultisigTx t = w.begin_multisig(requestee.pk, meta, rng);
    t = complete_multisig(t, requestee, true);
    w.advance_multisig(t, rng);
    txs.push_back(std::move(t));
  }

  // Replays the sequence against the genesis tip exactly the way a replica
  // verifies a block: admission, then chain rules, then tip advancement.
  auto replay = [&g](const std::vector<MultisigTx>& seq) {
    std::unordered_map<Hash256, TipRecord, HashKey> tips;
    tips[g.next_pk_hash] = TipRecord{g.tx_id, 0, 0};
    TipResolver res = [&tips](const Hash256& h) -> std::optional<TipRecord> {
      auto it = tips.find(h);
      if (it == tips.end()) return std::nullopt;
      return it->second;
    };
    for (const MultisigTx& t : seq) {
      if (!well_formed(AnyTx{t})) return false;
      if (!verify_multisig(t, res).ok()) return false;
      tips.erase(crypto::sha256(Bytes(t.requester_pk.begin(), t.requester_pk.end())));
      tips[t.output.next_pk_hash] = TipRecord{t.tx_id, t.output.accepted, t.output.rejected};
    }
    return true;
  };

  rep.clean_verifies = replay(txs);

  // Single-field tampers with the id re-seated, so format admission passes
  // and only the chain rules can object.
  static const char* kFields[] = {"requester_pk", "requester_sig", "requestee_sig",
                                  "accepted_count", "rejected_count", "next_pk_hash",
                                  "prev_tx_id"};
  for (size_t i = 0; i < txs.size(); ++i) {
    for (int f = 0; f < 7; ++f) {
      std::vector<MultisigTx> mut = txs;
      MultisigTx& t = mut[i];
      switch (f) {
        case 0: t.requester_pk[0] ^= 1; break;
        case 1: t.requester_sig[0] ^= 1; break;
        case 2: t.requestee_sig[0] ^= 1; break;
        case 3: t.output.accepted += 1; break;
        case 4: t.output.rejected += 1; break;
        case 5: t.output.next_pk_hash[0] ^= 1; break;
        case 6: t.prev_tx_id[0] ^= 1; break;
      }
      t.tx_id = t.compute_tx_id();
      rep.mutants++;
      if (replay(mut))
        rep.survivors.push_back("tx " + std::to_string(i) + " " + kFields[f]);
      else
        rep.killed++;
    }
  }
  return rep;
}

// --- appending-attack sweep cells ---

namespace {

// One attack cell: the sole generator is the appender, firing exactly one
// nine-real-one-fake block at t=2; the run ends before a second block.
Scenario attack_scenario(uint64_t seed, uint64_t m, int ptv) {
  Scenario sc;
  sc.seed = seed;
  sc.horizon = 2.5;
  sc.overlay_nodes = m;
  sc.obm_count = m;
  sc.consensus_period = 10;
  sc.dtm_enabled = false;
  sc.vouch = false;
  sc.trust.fixed_ptv = ptv;
  sc.generators = {m - 1};
  sc.requester_pairs = 5;
  sc.load = {{0, 20}};
  sc.attack = AttackKind::appending;
  sc.attacker_count = 1;
  sc.adv.attack_start = 1.0;
  sc.adv.attack_interval = 1.0;
  sc.adv.fake_txs = 1;
  return sc;
}

const std::vector<uint64_t> kSweepMs = {3, 5, 7, 10, 13, 15, 17, 20};

}  // namespace

AttackCell attack_cell(uint64_t base_seed, uint64_t m, int ptv, uint64_t runs) {
  AttackCell cell;
  cell.runs = runs;
  std::vector<double> bytes;
  for (uint64_t r = 0; r < runs; ++r) {
    Scenario sc = attack_scenario(base_seed + r, m, ptv);
    Sim sim = build_sim(sc);
    sim.run();
    NodeId attacker = sim.attackers.empty() ? kNoNode : sim.attackers[0];
    bool everywhere = true;
    for (NodeId h : sim.honest_obms()) {
      auto* node = sim.engine->node_as<ObmNode>(h);
      bool has = false;
      for (const auto& b : node->chain().blocks())
        if (b.header.generator == attacker) has = true;
      everywhere = everywhere && has;
    }
    if (everywhere) cell.successes++;
    bytes.push_back(double(sim.engine->packets().total().bytes));
  }
  cell.mean_bytes = mean(bytes);
  return cell;
}

uint64_t attack_cell_predicted(uint64_t base_seed, uint64_t m, int ptv, uint64_t runs) {
  // The attack block is the first and only block any honest manager samples,
  // so its verdict is a pure function of that manager's sampling stream: the
  // fake sits at index 9 of a ten-transaction block.
  const uint64_t n = 10;
  uint64_t k = (uint64_t(ptv) * n + 99) / 100;
  uint64_t wins = 0;
  for (uint64_t r = 0; r < runs; ++r) {
    bool all_missed = true;
    for (uint64_t v = 0; v + 1 < m && all_missed; ++v) {
      crypto::Rng srng = crypto::derive_rng(base_seed + r, 0x5A00ull ^ (v << 16));
      std::vector<size_t> picked = sample_without_replacement(srng, n, k);
      for (size_t p : picked)
        if (p == n - 1) all_missed = false;
    }
    if (all_missed) wins++;
  }
  return wins;
}

ExpResult exp_min_ptv(uint64_t seed) {
  ExpResult res;
  res.name = "exp_min_ptv";
  const std::map<uint64_t, int> expected = {{3, 80},  {5, 60},  {7, 60},  {10, 40},
                                            {13, 20}, {15, 20}, {17, 20}, {20, 10}};
  std::ostringstream csv;
  csv << "m,min_ptv\n";
  int exact = 0;
  bool within10 = true;
  bool nonincreasing = true;
  int prev_found = 1000;
  for (uint64_t m : kSweepMs) {
    // Least grid percentage whose ten runs all fail; success probability
    // falls as the percentage grows, so the zero-success predicate is
    // monotone over the grid and binary search finds the boundary.
    int lo = 0, hi = 9;
    while (lo < hi) {
      int mid = (lo + hi) / 2;
      uint64_t succ = attack_cell(seed, m, (mid + 1) * 10, 10).successes;
      if (succ == 0)
        hi = mid;
      else
        lo = mid + 1;
    }
    int found = (lo + 1) * 10;
    csv << m << "," << found << "\n";
    int want = expected.at(m);
    if (found == want) exact++;
    if (std::abs(found - want) > 10) within10 = false;
    if (found > prev_found) nonincreasing = false;
    prev_found = found;
  }
  res.csv = csv.str();
  res.check(exact >= 6, "at least 6 of 8 thresholds exact (" + std::to_string(exact) + "/8)");
  res.check(within10, "every threshold within one grid step of the reference");
  res.check(nonincreasing, "threshold non-increasing in the manager count");
  return res;
}

ExpResult exp_attack_vs_obms(uint64_t seed) {
  ExpResult res;
  res.name = "exp_attack_vs_obms";
  std::ostringstream csv;
  csv << "m,success_pct,packet_bytes\n";
  uint64_t prev_succ = ~0ull;
  bool sim_matches = true;
  (void)prev_succ;
  for (uint64_t m : kSweepMs) {
    AttackCell cell = attack_cell(seed, m, 20, 10);
    uint64_t pred = attack_cell_predicted(seed, m, 20, 10);
    if (cell.successes != pred) sim_matches = false;
    csv << m << "," << cell.successes * 10 << "," << uint64_t(cell.mean_bytes + 0.5) << "\n";
  }
  res.csv = csv.str();
  res.check(sim_matches, "simulated success counts equal the sampling-stream prediction");
  return res;
}

// --- controller trace ---

ExpResult exp_dtm_trace(uint64_t seed) {
  ExpResult res;
  res.name = "exp_dtm_trace";
  Scenario sc;
  sc.seed = seed;
  sc.horizon = 55;
  sc.consensus_period = 10;
  sc.dtm_enabled = true;
  sc.load = {{0, 10}, {5, 32}, {40, 44}, {45, 12}};
  Sim sim = build_sim(sc);
  sim.run();

  ObmNode& obm0 = sim.obm(0);
  const auto& samples = obm0.dtm_trace();
  const auto& applied = obm0.dtm_applied();

  // Actions apply a cosign roundtrip after the sample that proposed them;
  // attribute each to the last sample at or before its apply time.
  std::map<size_t, dtm::DtmAction> act_of;
  bool window_doubled = false;
  for (const auto& [t, act] : applied) {
    size_t idx = 0;
    bool found = false;
    for (size_t i = 0; i < samples.size(); ++i)
      if (samples[i].t <= t + 1e-9) {
        idx = i;
        found = true;
      }
    if (!found) continue;
    if (act_of.count(idx)) window_doubled = true;
    act_of[idx] = act;
  }

  std::ostringstream csv;
  csv << "t,alpha,consensus_period,action\n";
  double cp = sc.consensus_period;
  for (size_t i = 0; i < samples.size(); ++i) {
    csv << format_double(samples[i].t) << "," << format_double(samples[i].alpha) << ","
        << format_double(cp) << ",";
    auto it = act_of.find(i);
    if (it == act_of.end()) {
      csv << "none\n";
      continue;
    }
    csv << it->second.describe() << "\n";
    if (it->second.kind == dtm::DtmAction::Kind::set_consensus_period)
      cp = it->second.consensus_period;
    else if (it->second.kind == dtm::DtmAction::Kind::recluster)
      cp = obm0.dtm_config().cp_default;
  }
  res.csv = csv.str();

  res.check(!samples.empty() && samples[0].alpha > 1.0,
            "first sample exceeds the utilization ceiling");
  res.check(!samples.empty() && samples[0].alpha >= 1.6 && samples[0].alpha <= 3.0,
            "first-period utilization within [1.6, 3.0]");
  bool first_is_25 = !applied.empty() &&
                     applied[0].second.kind == dtm::DtmAction::Kind::set_consensus_period &&
                     applied[0].second.consensus_period == 2.5;
  res.check(first_is_25, "overload retune lands exactly on 2.5 s");

  size_t in_band = 0;
  bool band_clean = true;
  for (size_t i = 0; i < samples.size(); ++i) {
    if (std::abs(samples[i].alpha - 0.84) <= 0.10) {
      in_band++;
      if (act_of.count(i)) band_clean = false;
    }
  }
  res.check(in_band > 0, "high-load plateau samples near 0.84 exist");
  res.check(band_clean, "no action on samples within 0.84 +- 0.10");

  bool drop_is_70 = false;
  bool drop_alpha_low = false;
  for (const auto& [t, act] : applied) {
    if (t > 40 && act.kind == dtm::DtmAction::Kind::set_consensus_period &&
        act.consensus_period == 7.0) {
      drop_is_70 = true;
      for (size_t i = 0; i < samples.size(); ++i)
        if (samples[i].t <= t + 1e-9 && std::abs(samples[i].t - t) < 1.0)
          drop_alpha_low = samples[i].alpha <= obm0.dtm_config().alpha_min + 1e-12;
    }
  }
  res.check(drop_is_70, "post-drop retune lands exactly on 7.0 s");
  res.check(drop_alpha_low, "the retuning sample measured alpha at or under the floor");
  res.check(!window_doubled, "at most one action per window");

  bool replicas_agree = true;
  bool hygiene = true;
  for (size_t i = 0; i < sim.sc.obm_count; ++i) {
    ObmNode& o = sim.obm(i);
    if (o.dtm_applied().size() != applied.size()) replicas_agree = false;
    for (size_t a = 0; a < applied.size() && a < o.dtm_applied().size(); ++a)
      if (!(o.dtm_applied()[a].second == applied[a].second)) replicas_agree = false;
    if (o.counters().blocks_rejected_total() != 0 || o.trust_penalties() != 0) hygiene = false;
  }
  res.check(replicas_agree, "identical action sequence at every manager");
  res.check(hygiene, "no manager rejected a block or assessed a penalty");
  return res;
}

// --- data flow separation ---

namespace {

// Scripted sender: unicast-routes to the destination, or hands the packet to
// its gateway manager for flooding, depending on the leg under test.
class DataSourceNode : public Node {
 public:
  DataSourceNode(NodeId id, NodeId dst, NodeId gateway, bool flood, Bytes payload)
      : Node(id, NodeKind::member),
        dst_(dst),
        gateway_(gateway),
        flood_(flood),
        payload_(std::move(payload)) {}

  void on_event(Ctx& ctx, const SimEvent& ev) override {
    if (!std::holds_alternative<TimerFire>(ev.msg)) return;
    DataPacket p;
    p.flow = id();
    p.payload = payload_;
    p.originated_at = ctx.now;
    if (flood_)
      ctx.eng.send(id(), gateway_, std::move(p));
    else
      ctx.eng.route(id(), dst_, std::move(p));
  }

 private:
  NodeId dst_;
  NodeId gateway_;
  bool flood_;
  Bytes payload_;
};

// Baseline relay: replicates member uplink packets across the whole mesh and
// hands a copy down to its own member, the way a chain-carrying broadcast
// plane would have to move data.
class FloodRelayNode : public Node {
 public:
  FloodRelayNode(NodeId id, NodeId deliver_to) : Node(id, NodeKind::obm), deliver_(deliver_to) {}

  void on_event(Ctx& ctx, const SimEvent& ev) override {
    const auto* p = std::get_if<DataPacket>(&ev.msg);
    if (!p) return;
    if (!ctx.eng.topo().is_active_obm(ev.src)) {
      for (NodeId o : ctx.eng.topo().active_obms)
        if (o != id()) ctx.eng.send(id(), o, *p);
    }
    if (deliver_ != kNoNode) ctx.eng.send(id(), deliver_, *p);
  }

 private:
  NodeId deliver_;
};

class DataSinkNode : public Node {
 public:
  explicit DataSinkNode(NodeId id) : Node(id, NodeKind::member) {}

  void on_event(Ctx& ctx, const SimEvent& ev) override {
    if (const auto* p = std::get_if<DataPacket>(&ev.msg))
      delays.push_back(ctx.now - p->originated_at);
  }

  std::vector<double> delays;
};

// Star-of-mesh micro topology: m managers, one sender homed on manager 0,
// one receiver homed on manager m-1. Low bandwidth so serialization
// dominates and the flood leg's cost scales visibly with m.
Topology flow_topology(uint64_t m) {
  Topology topo;
  topo.node_count = m + 2;
  topo.kinds.assign(m + 2, NodeKind::obm);
  topo.kinds[m] = NodeKind::member;
  topo.kinds[m + 1] = NodeKind::member;
  topo.bandwidth_bytes_per_s = 1e6;
  for (uint64_t i = 0; i < m; ++i)
    for (uint64_t j = i + 1; j < m; ++j) topo.add_link(i, j, 0.005);
  topo.add_link(m, 0, 0.010);
  topo.add_link(m + 1, m - 1, 0.010);
  for (uint64_t i = 0; i < m; ++i) topo.obm_capable.push_back(i);
  topo.active_obms = topo.obm_capable;
  topo.cluster_of[m] = 0;
  topo.cluster_of[m + 1] = m - 1;
  topo.rebuild_routes();
  return topo;
}

struct FlowLeg {
  double mean_delay = 0;
  double max_delay = 0;
  uint64_t bytes = 0;
  size_t received = 0;
};

FlowLeg run_flow_leg(uint64_t seed, uint64_t m, bool flood, size_t packets) {
  Engine eng(flow_topology(m), seed);
  NodeId src = m;
  NodeId dst = m + 1;
  for (uint64_t i = 0; i < m; ++i) {
    NodeId deliver = (flood && i == m - 1) ? dst : kNoNode;
    eng.add_node(std::make_unique<FloodRelayNode>(i, deliver));
  }
  eng.add_node(std::make_unique<DataSourceNode>(src, dst, 0, flood, Bytes(4096, 0xA5)));
  eng.add_node(std::make_unique<DataSinkNode>(dst));
  for (size_t k = 0; k < packets; ++k)
    eng.schedule(src, 1.0 + 0.1 * double(k), TimerFire{TimerFire::Kind::generic, k});
  eng.run(1.0 + 0.1 * double(packets) + 2.0);

  FlowLeg leg;
  auto* sink = eng.node_as<DataSinkNode>(dst);
  leg.received = sink->delays.size();
  leg.mean_delay = mean(sink->delays);
  for (double d : sink->delays) leg.max_delay = std::max(leg.max_delay, d);
  leg.bytes = eng.packets().kind_total("data").bytes;
  return leg;
}

}  // namespace

ExpResult exp_flow_separation(uint64_t seed) {
  ExpResult res;
  res.name = "exp_flow_separation";
  const std::vector<uint64_t> ms = {5, 10, 15, 20};
  const size_t packets = 20;

  std::ostringstream csv;
  csv << "m,delay_lsb,delay_broadcast,bytes_lsb,bytes_broadcast\n";
  std::vector<double> mx, lsb_delays, bc_delays, bc_bytes;
  bool all_received = true;
  bool lsb_cheaper = true;
  for (uint64_t m : ms) {
    FlowLeg lsb = run_flow_leg(seed, m, false, packets);
    FlowLeg bc = run_flow_leg(seed, m, true, packets);
    all_received = all_received && lsb.received == packets && bc.received == packets;
    lsb_cheaper = lsb_cheaper && lsb.bytes < bc.bytes;
    mx.push_back(double(m));
    lsb_delays.push_back(lsb.mean_delay);
    bc_delays.push_back(bc.mean_delay);
    bc_bytes.push_back(double(bc.bytes));
    csv << m << "," << format_double(lsb.mean_delay) << "," << format_double(bc.mean_delay)
        << "," << lsb.bytes << "," << bc.bytes << "\n";
  }
  res.csv = csv.str();

  res.check(all_received, "every packet delivered on both legs");
  double lo = *std::min_element(lsb_delays.begin(), lsb_delays.end());
  double hi = *std::max_element(lsb_delays.begin(), lsb_delays.end());
  double spread = mean(lsb_delays) > 0 ? (hi - lo) / mean(lsb_delays) : 1.0;
  res.check(spread < 0.10, "unicast delay spread under 10% across manager counts");
  LinearFit fd = fit_line(mx, bc_delays);
  res.check(fd.r2 > 0.95 && fd.slope > 0, "broadcast delay grows linearly (r2 > 0.95)");
  LinearFit fb = fit_line(mx, bc_bytes);
  res.check(fb.r2 > 0.95 && fb.slope > 0, "broadcast bytes grow linearly (r2 > 0.95)");
  res.check(lsb_cheaper, "unicast bytes under broadcast bytes at every manager count");
  return res;
}

// --- verification work decay ---

ExpResult exp_trust_decay(uint64_t seed) {
  ExpResult res;
  res.name = "exp_trust_decay";
  Scenario sc;
  sc.seed = seed;
  sc.horizon = 62;
  sc.overlay_nodes = 3;
  sc.obm_count = 3;
  sc.consensus_period = 1.0;
  sc.dtm_enabled = false;
  sc.vouch = false;
  sc.generators = {0};
  sc.load = {{0, 20}};
  Sim sim = build_sim(sc);
  sim.run();

  // Direct-evidence tier of the observer before verifying block number j.
  auto tier_ptv = [&sc](uint64_t evidence) -> uint64_t {
    uint64_t ptv = 100;
    for (const auto& [at, p] : sc.trust.direct_tiers)
      if (evidence >= at) ptv = uint64_t(p);
    return ptv;
  };

  const auto& log = sim.obm(1).verify_log();
  std::ostringstream csv;
  csv << "blocks_appended,tx_verified_per_block,ptv\n";
  bool full_blocks = true;
  bool ptv_matches = true;
  bool work_matches = true;
  bool tail_half = true;
  for (size_t i = 0; i < log.size(); ++i) {
    const BlockVerifyRecord& r = log[i];
    csv << i + 1 << "," << r.alg1_delta << "," << r.ptv << "\n";
    if (r.block_txs != sc.t_max) full_blocks = false;
    if (r.ptv != tier_ptv(i)) ptv_matches = false;
    // exact contract: work per block is t_max * ptv / 100 at every tier
    if (r.alg1_delta != sc.t_max * r.ptv / 100 || r.sampled != r.alg1_delta) work_matches = false;
    if (i >= 50 && 2 * r.alg1_delta > sc.t_max) tail_half = false;
  }
  res.csv = csv.str();
  res.check(log.size() >= 55, "at least 55 blocks observed (" + std::to_string(log.size()) + ")");
  res.check(full_blocks, "every block carries t_max transactions");
  res.check(ptv_matches, "sampling percentage follows the direct-evidence tiers");
  res.check(work_matches, "validations per block equal t_max * ptv / 100 exactly");
  res.check(tail_half, "work at most half of verify-all after 50 blocks");
  return res;
}

// --- replica traffic overhead ---

ExpResult exp_overhead(uint64_t seed) {
  ExpResult res;
  res.name = "exp_overhead";
  Scenario sc;
  sc.seed = seed;
  sc.horizon = 30;
  Sim sim = build_sim(sc);
  sim.run();

  const PacketLedger& led = sim.engine->packets();
  Counter relay = led.kind_total("tx_relay");
  Counter blocks = led.kind_total("block_announce");
  uint64_t managed = relay.bytes + blocks.bytes;
  // Same transaction and block stream when every overlay node manages a
  // replica: each broadcast fans out to all peers instead of the managers.
  double fan_managed = double(sim.sc.obm_count - 1);
  double fan_all = double(sim.sc.overlay_nodes - 1);
  double broadcast = double(managed) * fan_all / fan_managed;
  double share = broadcast > 0 ? double(managed) / broadcast : 1.0;

  std::ostringstream csv;
  csv << "metric,value\n";
  csv << "tx_relay_bytes," << relay.bytes << "\n";
  csv << "block_announce_bytes," << blocks.bytes << "\n";
  csv << "managed_bytes," << managed << "\n";
  csv << "broadcast_bytes," << format_double(broadcast) << "\n";
  csv << "managed_share_pct," << format_double(share * 100.0) << "\n";
  res.csv = csv.str();

  res.check(relay.count > 0 && blocks.count > 0, "transactions and blocks both flowed");
  res.check(sim.engine->topo().active_obms.size() == sc.obm_count,
            "manager set stayed at its configured size");
  res.check(share < 0.25, "managed replication under 25% of full-broadcast bytes");
  return res;
}

// --- acceptance helpers ---

ComplianceResult compliance_burst(uint64_t seed) {
  ComplianceResult out;
  auto check = [&out](bool pass, const std::string& what) {
    out.ok = out.ok && pass;
    out.checks.push_back(std::string(pass ? "pass: " : "FAIL: ") + what);
  };

  Scenario sc;
  sc.seed = seed;
  sc.horizon = 3.5;
  sc.overlay_nodes = 5;
  sc.obm_count = 5;
  sc.consensus_period = 10;
  sc.dtm_enabled = false;
  sc.vouch = false;
  sc.generators = {4};
  sc.load = {{0, 20}};
  sc.attack = AttackKind::burst;
  sc.attacker_count = 1;
  sc.adv.attack_start = 2.0;
  sc.adv.attack_interval = 0.2;
  sc.adv.burst_blocks = 3;
  Sim sim = build_sim(sc);
  sim.run();

  bool one_accept = true, two_drops = true, two_penalties = true;
  for (NodeId h : sim.honest_obms()) {
    auto* node = sim.engine->node_as<ObmNode>(h);
    if (node->counters().blocks_accepted != 1) one_accept = false;
    if (node->counters().blocks_rejected_compliance != 2 ||
        node->counters().blocks_rejected_total() != 2)
      two_drops = false;
    if (node->trust_penalties() != 2) two_penalties = false;
  }
  check(one_accept, "every honest manager accepted exactly the first burst block");
  check(two_drops, "every honest manager dropped exactly the two follow-ups");
  check(two_penalties, "every honest manager decremented the generator's trust twice");
  return out;
}

ComplianceResult honest_run_clean(uint64_t seed) {
  ComplianceResult out;
  auto check = [&out](bool pass, const std::string& what) {
    out.ok = out.ok && pass;
    out.checks.push_back(std::string(pass ? "pass: " : "FAIL: ") + what);
  };

  Scenario sc;
  sc.seed = seed;
  sc.horizon = 30;
  Sim sim = build_sim(sc);
  sim.run();

  bool no_drops = true, no_penalties = true, converged = true;
  Hash256 tip{};
  bool tip_set = false;
  for (size_t i = 0; i < sim.sc.obm_count; ++i) {
    ObmNode& o = sim.obm(i);
    if (o.counters().blocks_rejected_total() != 0) no_drops = false;
    if (o.trust_penalties() != 0) no_penalties = false;
    Hash256 h = o.chain().content_hash();
    if (!tip_set) {
      tip = h;
      tip_set = true;
    } else if (!(h == tip)) {
      converged = false;
    }
  }
  check(no_drops, "no honest manager rejected any block");
  check(no_penalties, "no honest manager assessed any penalty");
  check(converged, "all replicas converged to one content hash");
  return out;
}

ComplianceResult agreement_safety(uint64_t base_seed, uint64_t runs) {
  ComplianceResult out;
  auto check = [&out](bool pass, const std::string& what) {
    out.ok = out.ok && pass;
    out.checks.push_back(std::string(pass ? "pass: " : "FAIL: ") + what);
  };

  uint64_t forged_applied = 0, window_doubled = 0, diverged = 0, total_applied = 0;
  for (uint64_t r = 0; r < runs; ++r) {
    Scenario sc;
    sc.seed = base_seed + r;
    sc.horizon = 12;
    sc.overlay_nodes = 5;
    sc.obm_count = 5;
    sc.consensus_period = 3;
    sc.dtm_enabled = true;
    sc.load = {{0, 30}, {6, 6}};
    sc.attack = AttackKind::forge_dtm;
    sc.attacker_count = 2;  // a minority: two of five signatures can never carry
    sc.adv.attack_start = 0;
    sc.adv.forged_action = dtm::DtmAction{dtm::DtmAction::Kind::set_consensus_period, 123.0, 0};
    Sim sim = build_sim(sc);
    sim.run();

    std::vector<std::vector<dtm::DtmAction>> sequences;
    for (NodeId h : sim.honest_obms()) {
      auto* node = sim.engine->node_as<ObmNode>(h);
      std::vector<dtm::DtmAction> seq;
      const auto& samples = node->dtm_trace();
      std::set<size_t> windows;
      for (const auto& [t, act] : node->dtm_applied()) {
        seq.push_back(act);
        total_applied++;
        if (act.kind == dtm::DtmAction::Kind::set_consensus_period &&
            act.consensus_period == 123.0)
          forged_applied++;
        size_t w = 0;
        for (size_t i = 0; i < samples.size(); ++i)
          if (samples[i].t <= t + 1e-9) w = i;
        if (windows.count(w)) window_doubled++;
        windows.insert(w);
      }
      sequences.push_back(std::move(seq));
    }
    for (size_t i = 1; i < sequences.size(); ++i)
      if (sequences[i] != sequences[0]) diverged++;
  }
  check(total_applied > 0, "honest actions did apply across the runs");
  check(forged_applied == 0, "the forged minority action never applied anywhere");
  check(window_doubled == 0, "no manager applied two actions in one window");
  check(diverged == 0, "honest managers applied identical action sequences");
  return out;
}

ComplianceResult detect_prob_mc(uint64_t seed, uint64_t trials) {
  ComplianceResult out;
  auto check = [&out](bool pass, const std::string& what) {
    out.ok = out.ok && pass;
    out.checks.push_back(std::string(pass ? "pass: " : "FAIL: ") + what);
  };

  const uint64_t n = 10;
  const std::vector<uint64_t> vgrid = {2, 4, 6, 9, 12, 14, 16, 19};
  uint64_t cells = 0, bad = 0;
  double worst_sigmas = 0;
  for (int ptv = 10; ptv <= 100; ptv += 10) {
    uint64_t k = (uint64_t(ptv) * n + 99) / 100;
    for (uint64_t verifiers : vgrid) {
      crypto::Rng rng = crypto::derive_rng(seed, 0x3C00ull + cells);
      uint64_t detected = 0;
      for (uint64_t t = 0; t < trials; ++t) {
        bool hit = false;
        for (uint64_t v = 0; v < verifiers; ++v) {
          std::vector<size_t> picked = sample_without_replacement(rng, n, k);
          for (size_t p : picked)
            if (p == n - 1) hit = true;
        }
        if (hit) detected++;
      }
      double mc = double(detected) / double(trials);
      double exact = oracle_detect_prob(n, 1, ptv, verifiers);
      double se = std::sqrt(exact * (1.0 - exact) / double(trials));
      double diff = std::abs(mc - exact);
      if (se > 0) worst_sigmas = std::max(worst_sigmas, diff / se);
      if (diff > 3.0 * se + 1e-12) bad++;
      cells++;
    }
  }
  check(bad == 0, "all " + std::to_string(cells) + " grid cells within 3 standard errors " +
                      "(worst " + format_double(worst_sigmas) + ")");
  return out;
}

// --- registry ---

std::vector<std::string> experiment_names() {
  return {"exp_dtm_trace", "exp_flow_separation", "exp_trust_decay",
          "exp_attack_vs_obms", "exp_min_ptv", "exp_overhead"};
}

bool run_experiment(const std::string& name, uint64_t seed, ExpResult* res) {
  if (name == "exp_dtm_trace") *res = exp_dtm_trace(seed);
  else if (name == "exp_flow_separation") *res = exp_flow_separation(seed);
  else if (name == "exp_trust_decay") *res = exp_trust_decay(seed);
  else if (name == "exp_attack_vs_obms") *res = exp_attack_vs_obms(seed);
  else if (name == "exp_min_ptv") *res = exp_min_ptv(seed);
  else if (name == "exp_overhead") *res = exp_overhead(seed);
  else return false;
  return true;
}

}  // namespace lsb::sim
