#include "lsb/scenario.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace lsb::sim {

using ledger::ActionKind;
using ledger::ChainWriter;
using ledger::GenesisTx;
using ledger::LedgerKind;

const char* attack_name(AttackKind a) {
  switch (a) {
    case AttackKind::none: return "none";
    case AttackKind::appending: return "appending";
    case AttackKind::burst: return "burst";
    case AttackKind::early_fire: return "early_fire";
    case AttackKind::modification: return "modification";
    case AttackKind::dropping: return "dropping";
    case AttackKind::false_reputation: return "false_reputation";
    case AttackKind::forge_dtm: return "forge_dtm";
  }
  return "none";
}

std::optional<AttackKind> attack_from_name(const std::string& s) {
  for (AttackKind a : {AttackKind::none, AttackKind::appending, AttackKind::burst,
                       AttackKind::early_fire, AttackKind::modification, AttackKind::dropping,
                       AttackKind::false_reputation, AttackKind::forge_dtm})
    if (s == attack_name(a)) return a;
  return std::nullopt;
}

namespace {

std::optional<ActionKind> action_from_name(const std::string& s) {
  for (ActionKind a : {ActionKind::store_locally, ActionKind::store_cloud, ActionKind::access,
                       ActionKind::monitor, ActionKind::monitor_periodic})
    if (s == ledger::action_name(a)) return a;
  return std::nullopt;
}

bool parse_bool(const std::string& v, bool* out) {
  if (v == "true" || v == "1" || v == "yes") { *out = true; return true; }
  if (v == "false" || v == "0" || v == "no") { *out = false; return true; }
  return false;
}

}  // namespace

std::optional<Scenario> Scenario::parse(const std::string& text, std::string* err) {
  Scenario sc;
  bool load_reset = false;
  bool gen_reset = false;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    if (err) *err = "line " + std::to_string(lineno) + ": " + why;
    return std::nullopt;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    if (line.front() == '[' && line.back() == ']') continue;  // cosmetic grouping
    auto eq = line.find('=');
    if (eq == std::string::npos) return fail("expected key = value");
    auto rstrip = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      auto e = s.find_last_not_of(" \t");
      s.erase(e == std::string::npos ? 0 : e + 1);
      return s;
    };
    std::string key = rstrip(line.substr(0, eq));
    std::string val = rstrip(line.substr(eq + 1));
    if (key.empty() || val.empty()) return fail("expected key = value");
    std::istringstream vs(val);
    auto num = [&](auto* out) { return bool(vs >> *out) && (vs >> std::ws).eof(); };
    auto boolean = [&](bool* out) { return parse_bool(val, out); };

    if (key == "seed") { if (!num(&sc.seed)) return fail("bad seed"); }
    else if (key == "horizon") { if (!num(&sc.horizon)) return fail("bad horizon"); }
    else if (key == "overlay_nodes") { if (!num(&sc.overlay_nodes)) return fail("bad overlay_nodes"); }
    else if (key == "obm_count") { if (!num(&sc.obm_count)) return fail("bad obm_count"); }
    else if (key == "mesh_latency") { if (!num(&sc.mesh_latency)) return fail("bad mesh_latency"); }
    else if (key == "member_link_min") { if (!num(&sc.member_link_min)) return fail("bad member_link_min"); }
    else if (key == "member_link_max") { if (!num(&sc.member_link_max)) return fail("bad member_link_max"); }
    else if (key == "device_link") { if (!num(&sc.device_link)) return fail("bad device_link"); }
    else if (key == "bandwidth") { if (!num(&sc.bandwidth)) return fail("bad bandwidth"); }
    else if (key == "t_max") { if (!num(&sc.t_max)) return fail("bad t_max"); }
    else if (key == "consensus_period") { if (!num(&sc.consensus_period)) return fail("bad consensus_period"); }
    else if (key == "max_waiting") { if (!num(&sc.max_waiting)) return fail("bad max_waiting"); }
    else if (key == "vouch") { if (!boolean(&sc.vouch)) return fail("bad vouch"); }
    else if (key == "generators") {
      if (!gen_reset) { sc.generators.clear(); gen_reset = true; }
      uint64_t g;
      while (vs >> g) sc.generators.push_back(g);
    }
    else if (key == "fixed_ptv") {
      int p;
      if (!num(&p)) return fail("bad fixed_ptv");
      sc.trust.fixed_ptv = p;
    }
    else if (key == "ptv_floor") { if (!num(&sc.trust.ptv_floor)) return fail("bad ptv_floor"); }
    else if (key == "dtm_enabled") { if (!boolean(&sc.dtm_enabled)) return fail("bad dtm_enabled"); }
    else if (key == "alpha_min") { if (!num(&sc.dtm.alpha_min)) return fail("bad alpha_min"); }
    else if (key == "alpha_max") { if (!num(&sc.dtm.alpha_max)) return fail("bad alpha_max"); }
    else if (key == "cp_default") { if (!num(&sc.dtm.cp_default)) return fail("bad cp_default"); }
    else if (key == "cp_min") { if (!num(&sc.dtm.cp_min)) return fail("bad cp_min"); }
    else if (key == "cp_max") { if (!num(&sc.dtm.cp_max)) return fail("bad cp_max"); }
    else if (key == "trailing_window") { if (!num(&sc.dtm.trailing_window)) return fail("bad trailing_window"); }
    else if (key == "requester_pairs") { if (!num(&sc.requester_pairs)) return fail("bad requester_pairs"); }
    else if (key == "load") {
      if (!load_reset) { sc.load.clear(); load_reset = true; }
      LoadPhase p;
      if (!(vs >> p.from >> p.rate)) return fail("load wants: from rate");
      sc.load.push_back(p);
    }
    else if (key == "rotate_requester_keys") { if (!boolean(&sc.rotate_requester_keys)) return fail("bad rotate_requester_keys"); }
    else if (key == "confirm_timeout") { if (!num(&sc.confirm_timeout)) return fail("bad confirm_timeout"); }
    else if (key == "inbound_rate_limit") { if (!num(&sc.inbound_rate_limit)) return fail("bad inbound_rate_limit"); }
    else if (key == "homes") { if (!num(&sc.homes)) return fail("bad homes"); }
    else if (key == "devices_per_home") { if (!num(&sc.devices_per_home)) return fail("bad devices_per_home"); }
    else if (key == "with_cloud") { if (!boolean(&sc.with_cloud)) return fail("bad with_cloud"); }
    else if (key == "anchor_interval") { if (!num(&sc.anchor_interval)) return fail("bad anchor_interval"); }
    else if (key == "device_stores") { if (!num(&sc.device_stores)) return fail("bad device_stores"); }
    else if (key == "device_store_period") { if (!num(&sc.device_store_period)) return fail("bad device_store_period"); }
    else if (key == "sp_flows") { if (!num(&sc.sp_flows)) return fail("bad sp_flows"); }
    else if (key == "sp_flow_start") { if (!num(&sc.sp_flow_start)) return fail("bad sp_flow_start"); }
    else if (key == "sp_flow_period") { if (!num(&sc.sp_flow_period)) return fail("bad sp_flow_period"); }
    else if (key == "sp_action") {
      auto a = action_from_name(val);
      if (!a) return fail("unknown sp_action");
      sc.sp_action = *a;
    }
    else if (key == "attack") {
      auto a = attack_from_name(val);
      if (!a) return fail("unknown attack");
      sc.attack = *a;
    }
    else if (key == "attacker_count") { if (!num(&sc.attacker_count)) return fail("bad attacker_count"); }
    else if (key == "attack_start") { if (!num(&sc.adv.attack_start)) return fail("bad attack_start"); }
    else if (key == "attack_interval") { if (!num(&sc.adv.attack_interval)) return fail("bad attack_interval"); }
    else if (key == "fake_txs") { if (!num(&sc.adv.fake_txs)) return fail("bad fake_txs"); }
    else if (key == "burst_blocks") { if (!num(&sc.adv.burst_blocks)) return fail("bad burst_blocks"); }
    else return fail("unknown key: " + key);
  }
  if (sc.obm_count == 0 || sc.obm_count > sc.overlay_nodes) {
    if (err) *err = "obm_count must be in [1, overlay_nodes]";
    return std::nullopt;
  }
  return sc;
}

std::optional<Scenario> Scenario::load_file(const std::string& path, std::string* err) {
  std::ifstream in(path);
  if (!in) {
    if (err) *err = "cannot open " + path;
    return std::nullopt;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), err);
}

namespace {

crypto::SymmetricKey random_symmetric(crypto::Rng& rng) {
  crypto::SymmetricKey key{};
  std::uniform_int_distribution<int> byte(0, 255);
  for (auto& b : key) b = uint8_t(byte(rng));
  return key;
}

uint64_t device_number(const Scenario& sc, size_t home, size_t slot) {
  return home * sc.devices_per_home + slot + 1;
}

}  // namespace

ObmNode& Sim::obm(size_t active_index) {
  return *engine->node_as<ObmNode>(backbone.at(active_index));
}

MemberNode& Sim::member(NodeId id) { return *engine->node_as<MemberNode>(id); }

HomeManagerNode& Sim::home(size_t index) {
  return *engine->node_as<HomeManagerNode>(homes.at(index));
}

std::vector<NodeId> Sim::honest_obms() const {
  std::vector<NodeId> out;
  for (size_t i = 0; i < sc.obm_count; ++i) {
    NodeId id = backbone[i];
    if (std::find(attackers.begin(), attackers.end(), id) == attackers.end()) out.push_back(id);
  }
  return out;
}

Sim build_sim(const Scenario& sc) {
  if (sc.obm_count == 0 || sc.obm_count > sc.overlay_nodes)
    throw std::invalid_argument("obm_count out of range");
  Sim sim;
  sim.sc = sc;
  crypto::Rng build = crypto::derive_rng(sc.seed, 0xB00Dull);

  // --- node ids: backbone first (promotion order), then leaf members, then devices
  NodeId next = 0;
  for (uint64_t i = 0; i < sc.overlay_nodes; ++i) sim.backbone.push_back(next++);
  for (uint64_t i = 0; i < sc.requester_pairs; ++i) sim.requesters.push_back(next++);
  for (uint64_t i = 0; i < sc.requester_pairs; ++i) sim.responders.push_back(next++);
  for (uint64_t i = 0; i < sc.homes; ++i) sim.homes.push_back(next++);
  if (sc.with_cloud) sim.cloud = next++;
  if (sc.sp_flows > 0 && sc.homes > 0) sim.sp = next++;
  sim.home_devices.resize(sc.homes);
  for (uint64_t h = 0; h < sc.homes; ++h)
    for (uint64_t d = 0; d < sc.devices_per_home; ++d) sim.home_devices[h].push_back(next++);

  std::vector<NodeId> leaf_members = sim.requesters;
  leaf_members.insert(leaf_members.end(), sim.responders.begin(), sim.responders.end());
  leaf_members.insert(leaf_members.end(), sim.homes.begin(), sim.homes.end());
  if (sim.cloud != kNoNode) leaf_members.push_back(sim.cloud);
  if (sim.sp != kNoNode) leaf_members.push_back(sim.sp);

  // --- topology
  Topology topo;
  topo.node_count = next;
  topo.kinds.assign(next, NodeKind::member);
  topo.bandwidth_bytes_per_s = sc.bandwidth;
  for (NodeId b : sim.backbone) topo.kinds[b] = NodeKind::obm;
  for (NodeId h : sim.homes) topo.kinds[h] = NodeKind::home_manager;
  if (sim.cloud != kNoNode) topo.kinds[sim.cloud] = NodeKind::cloud;
  for (auto& devs : sim.home_devices)
    for (NodeId d : devs) topo.kinds[d] = NodeKind::device;

  for (size_t i = 0; i < sim.backbone.size(); ++i)
    for (size_t j = i + 1; j < sim.backbone.size(); ++j)
      topo.add_link(sim.backbone[i], sim.backbone[j], sc.mesh_latency);
  std::uniform_real_distribution<double> uplink(sc.member_link_min, sc.member_link_max);
  for (NodeId m : leaf_members)
    for (NodeId b : sim.backbone) topo.add_link(m, b, uplink(build));
  for (uint64_t h = 0; h < sc.homes; ++h) {
    const auto& devs = sim.home_devices[h];
    for (size_t i = 0; i < devs.size(); ++i) {
      topo.add_link(devs[i], sim.homes[h], sc.device_link);
      for (size_t j = i + 1; j < devs.size(); ++j) topo.add_link(devs[i], devs[j], sc.device_link);
    }
  }
  topo.obm_capable = sim.backbone;
  topo.active_obms.assign(sim.backbone.begin(), sim.backbone.begin() + sc.obm_count);
  for (NodeId m : leaf_members) topo.cluster_of[m] = topo.nearest_obm(m);
  for (uint64_t h = 0; h < sc.homes; ++h)
    for (NodeId d : sim.home_devices[h]) topo.cluster_of[d] = sim.homes[h];
  topo.rebuild_routes();

  sim.engine = std::make_unique<Engine>(topo, sc.seed);
  Engine& eng = *sim.engine;

  // --- identities and genesis material (fixed draw order for reproducibility)
  sim.ca_root = crypto::keygen(build);
  ledger::TrustRoots roots{{sim.ca_root.pk}};
  ledger::BurnLedger burns;

  std::map<NodeId, PublicKey> directory;
  std::vector<crypto::KeyPair> block_keys;
  for (NodeId b : sim.backbone) {
    block_keys.push_back(crypto::keygen(build));
    directory[b] = block_keys.back().pk;
  }

  std::map<NodeId, crypto::KeyPair> identities;
  for (NodeId m : leaf_members) identities[m] = crypto::keygen(build);

  std::vector<GenesisTx> gtxs;
  auto new_writer = [&](bool rotate, LedgerKind kind) {
    ChainWriter w = ChainWriter::start(build, rotate);
    GenesisTx g = ledger::make_genesis(
        kind, w.current, w.committed_next_hash(),
        ledger::CaCredential{ledger::ca_sign(sim.ca_root.sk, w.current.pk)});
    w.bind_genesis(g, build);
    gtxs.push_back(g);
    return w;
  };

  std::vector<ChainWriter> req_writers;
  for (size_t i = 0; i < sim.requesters.size(); ++i)
    req_writers.push_back(new_writer(sc.rotate_requester_keys, LedgerKind::multisig));
  std::vector<ChainWriter> home_store_writers;
  std::vector<ChainWriter> home_anchor_writers;
  for (size_t h = 0; h < sim.homes.size(); ++h) {
    home_store_writers.push_back(new_writer(true, LedgerKind::multisig));
    if (sc.anchor_interval > 0)
      home_anchor_writers.push_back(new_writer(true, LedgerKind::singlesig));
  }
  std::optional<ChainWriter> sp_writer;
  if (sim.sp != kNoNode) sp_writer = new_writer(false, LedgerKind::multisig);

  // --- pre-seeded replica: genesis transactions batched into signed blocks
  ledger::Chain genesis_chain;
  size_t gi = 0;
  while (gi < gtxs.size()) {
    ledger::Block b;
    b.header.prev_block_hash = genesis_chain.tip_hash();
    b.header.generator = sim.backbone[0];
    for (uint64_t k = 0; k < sc.t_max && gi < gtxs.size(); ++k)
      b.txs.push_back(gtxs[gi++]);
    Hash256 body = b.body_hash();
    b.header.generator_sig = crypto::sign(block_keys[0].sk, Bytes(body.begin(), body.end()));
    genesis_chain.append(std::move(b));
  }

  // --- backbone nodes (all OBM-capable; only the first obm_count start active)
  std::map<NodeId, AttackKind> hostile;
  AdversaryConfig adv = sc.adv;
  if (sc.attack != AttackKind::none) {
    uint64_t count = std::min<uint64_t>(sc.attacker_count, sc.obm_count > 1 ? sc.obm_count - 1 : 0);
    if (sc.attack == AttackKind::false_reputation) {
      // one appending colluder plus `count` vouching accomplices
      NodeId colluder = sim.backbone[sc.obm_count - 1];
      hostile[colluder] = AttackKind::appending;
      adv.colluder = colluder;
      uint64_t vouchers = std::min<uint64_t>(count, sc.obm_count - 2);
      for (uint64_t i = 0; i < vouchers; ++i)
        hostile[sim.backbone[sc.obm_count - 2 - i]] = AttackKind::false_reputation;
    } else {
      for (uint64_t i = 0; i < count; ++i)
        hostile[sim.backbone[sc.obm_count - 1 - i]] = sc.attack;
    }
  }

  for (size_t i = 0; i < sim.backbone.size(); ++i) {
    NodeId id = sim.backbone[i];
    ConsensusConfig cc;
    cc.t_max = sc.t_max;
    cc.consensus_period = sc.consensus_period;
    cc.max_waiting = sc.max_waiting;
    cc.vouch = sc.vouch;
    cc.dtm_enabled = sc.dtm_enabled;
    if (!sc.generators.empty() && i < sc.obm_count)
      cc.can_generate = std::find(sc.generators.begin(), sc.generators.end(), i) !=
                        sc.generators.end();
    dtm::DtmConfig dc = sc.dtm;
    dc.t_max = sc.t_max;

    std::unique_ptr<ObmNode> node;
    auto it = hostile.find(id);
    AttackKind kind = it == hostile.end() ? AttackKind::none : it->second;
    switch (kind) {
      case AttackKind::appending:
        node = std::make_unique<AppendingObm>(id, block_keys[i], cc, sc.trust, dc, adv);
        break;
      case AttackKind::burst:
        node = std::make_unique<BurstObm>(id, block_keys[i], cc, sc.trust, dc, adv);
        break;
      case AttackKind::early_fire:
        node = std::make_unique<EarlyFireObm>(id, block_keys[i], cc, sc.trust, dc, adv);
        break;
      case AttackKind::modification:
        node = std::make_unique<ModifyingObm>(id, block_keys[i], cc, sc.trust, dc, adv);
        break;
      case AttackKind::dropping:
        node = std::make_unique<DroppingObm>(id, block_keys[i], cc, sc.trust, dc);
        break;
      case AttackKind::false_reputation:
        node = std::make_unique<FalseRepObm>(id, block_keys[i], cc, sc.trust, dc, adv);
        break;
      case AttackKind::forge_dtm:
        node = std::make_unique<ForgeDtmObm>(id, block_keys[i], cc, sc.trust, dc, adv);
        break;
      case AttackKind::none:
        node = std::make_unique<ObmNode>(id, block_keys[i], cc, sc.trust, dc);
        break;
    }
    if (kind != AttackKind::none) sim.attackers.push_back(id);
    node->set_directory(directory);
    node->set_genesis_rules(roots, burns);
    node->bootstrap(genesis_chain);
    node->set_active(i < sc.obm_count);
    eng.add_node(std::move(node));
  }

  // --- leaf members
  auto head_of = [&](NodeId m) { return eng.topo().cluster_of.at(m); };
  auto key_entries = std::make_shared<std::vector<KeyListEntry>>();
  auto register_requestee = [&](NodeId member, const PublicKey& requestee_pk) {
    KeyListEntry e;
    e.any_requester = true;
    e.requestee = requestee_pk;
    e.member = member;
    key_entries->push_back(e);
  };

  MemberConfig req_mc;
  req_mc.rotate_requester_keys = sc.rotate_requester_keys;
  req_mc.confirm_timeout = sc.confirm_timeout;
  MemberConfig rsp_mc;
  rsp_mc.inbound_rate_limit = sc.inbound_rate_limit;

  for (size_t i = 0; i < sim.requesters.size(); ++i) {
    NodeId id = sim.requesters[i];
    auto m = std::make_unique<MemberNode>(id, identities[id], req_mc);
    m->set_obm(head_of(id));
    m->set_writer(std::move(req_writers[i]));
    ledger::TxMetadata meta;
    meta.action = ActionKind::access;
    meta.target_device = 0;
    m->set_load_target(identities[sim.responders[i]].pk, meta);
    eng.add_node(std::move(m));
  }
  for (size_t i = 0; i < sim.responders.size(); ++i) {
    NodeId id = sim.responders[i];
    auto m = std::make_unique<MemberNode>(id, identities[id], rsp_mc);
    m->set_obm(head_of(id));
    register_requestee(id, identities[id].pk);
    eng.add_node(std::move(m));
  }
  for (size_t h = 0; h < sim.homes.size(); ++h) {
    NodeId id = sim.homes[h];
    MemberConfig mc;
    mc.confirm_timeout = sc.confirm_timeout;
    auto mgr = std::make_unique<HomeManagerNode>(id, identities[id], mc);
    mgr->set_obm(head_of(id));
    mgr->set_writer(std::move(home_store_writers[h]));
    if (sc.anchor_interval > 0)
      mgr->set_anchor(std::move(home_anchor_writers[h]), sc.anchor_interval);
    if (sim.cloud != kNoNode) mgr->set_cloud(identities[sim.cloud].pk, sim.cloud);
    if (sp_writer) {
      ledger::PolicyEntry allow;
      allow.who = ledger::PolicyEntry::Requester::overlay_pk;
      allow.pk = sp_writer->current.pk;
      allow.action = sc.sp_action;
      allow.target_device = ledger::PolicyEntry::kAnyDevice;
      mgr->set_policy({allow});
    }
    register_requestee(id, identities[id].pk);
    eng.add_node(std::move(mgr));
  }
  if (sim.cloud != kNoNode) {
    auto cl = std::make_unique<CloudNode>(sim.cloud, identities[sim.cloud], MemberConfig{});
    cl->set_obm(head_of(sim.cloud));
    for (NodeId h : sim.homes) cl->add_credential(identities[h].pk);
    register_requestee(sim.cloud, identities[sim.cloud].pk);
    eng.add_node(std::move(cl));
  }
  if (sim.sp != kNoNode) {
    MemberConfig mc;
    mc.rotate_requester_keys = false;
    mc.confirm_timeout = sc.confirm_timeout;
    auto m = std::make_unique<MemberNode>(sim.sp, identities[sim.sp], mc);
    m->set_obm(head_of(sim.sp));
    m->set_writer(std::move(*sp_writer));
    ledger::TxMetadata meta;
    meta.action = sc.sp_action;
    meta.target_device = device_number(sc, 0, 0);
    m->set_load_target(identities[sim.homes[0]].pk, meta);
    eng.add_node(std::move(m));
  }

  // --- devices
  std::uniform_int_distribution<uint64_t> dh_secret(2, crypto::DhGroup{}.p - 2);
  for (size_t h = 0; h < sim.homes.size(); ++h) {
    for (size_t d = 0; d < sim.home_devices[h].size(); ++d) {
      NodeId id = sim.home_devices[h][d];
      uint64_t dev_id = device_number(sc, h, d);
      crypto::SymmetricKey key = random_symmetric(build);
      auto dev = std::make_unique<DeviceNode>(id, dev_id, sim.homes[h], key, crypto::DhGroup{},
                                              dh_secret(build));
      if (sc.device_stores > 0)
        dev->set_store_schedule(sc.device_store_period, sc.device_stores);
      HomeDevice hd;
      hd.device_id = dev_id;
      hd.node = id;
      hd.key = key;
      hd.dh_public = dev->dh_public();
      eng.node_as<HomeManagerNode>(sim.homes[h])->add_device(hd);
      eng.add_node(std::move(dev));
    }
  }

  // key lists live at each requestee's current cluster head
  for (const auto& e : *key_entries)
    eng.node_as<ObmNode>(head_of(e.member))->add_keylist(e);

  // --- deterministic request schedule, round-robin over requester pairs
  std::vector<LoadPhase> phases = sc.load;
  std::sort(phases.begin(), phases.end(),
            [](const LoadPhase& a, const LoadPhase& b) { return a.from < b.from; });
  uint64_t tick = 0;
  for (size_t p = 0; p < phases.size() && !sim.requesters.empty(); ++p) {
    double t_end = p + 1 < phases.size() ? phases[p + 1].from : sc.horizon;
    if (phases[p].rate <= 0) continue;
    for (uint64_t k = 0;; ++k) {
      double t = phases[p].from + double(k) / phases[p].rate;
      if (t >= t_end - 1e-12 || t >= sc.horizon) break;
      eng.schedule(sim.requesters[tick % sim.requesters.size()], t,
                   TimerFire{TimerFire::Kind::load_tick, tick});
      ++tick;
    }
  }
  for (uint64_t k = 0; k < sc.sp_flows && sim.sp != kNoNode; ++k)
    eng.schedule(sim.sp, sc.sp_flow_start + double(k) * sc.sp_flow_period,
                 TimerFire{TimerFire::Kind::load_tick, k});

  // --- promotion bootstrap: new OBMs clone a surviving replica, members re-home
  auto leaf_list = std::make_shared<std::vector<NodeId>>(leaf_members);
  bool dtm_on = sc.dtm_enabled;
  eng.on_recluster = [key_entries, leaf_list, dtm_on](Engine& e, uint64_t) {
    Topology& t = e.topo();
    ObmNode* donor = nullptr;
    for (NodeId id : t.active_obms) {
      auto* o = e.node_as<ObmNode>(id);
      if (o->active()) { donor = o; break; }
    }
    for (NodeId id : t.obm_capable) {
      auto* o = e.node_as<ObmNode>(id);
      bool now_active = t.is_active_obm(id);
      if (now_active && !o->active()) {
        if (donor) {
          o->adopt_state(*donor);
          if (dtm_on) {
            double next_at = donor->last_dtm_sample() + donor->config().consensus_period;
            e.schedule(id, std::max(0.0, next_at - e.now()),
                       TimerFire{TimerFire::Kind::dtm_sample, 0});
          }
        }
        o->set_active(true);
      } else if (!now_active && o->active()) {
        o->set_active(false);
      }
    }
    for (NodeId m : *leaf_list) e.node_as<MemberNode>(m)->set_obm(t.cluster_of.at(m));
    for (const auto& entry : *key_entries) {
      for (NodeId id : t.obm_capable) e.node_as<ObmNode>(id)->remove_keylist(entry.requestee);
      e.node_as<ObmNode>(t.cluster_of.at(entry.member))->add_keylist(entry);
    }
  };

  return sim;
}

}  // namespace lsb::sim
