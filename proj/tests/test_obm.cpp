#include "doctest.h"
#include "lsb/scenario.hpp"
#include "lsb/obm.hpp"

#include <set>

using namespace lsb;
using namespace lsb::sim;

namespace {

Scenario parse_or_die(const std::string& text) {
  std::string err;
  auto sc = Scenario::parse(text, &err);
  REQUIRE_MESSAGE(sc.has_value(), err);
  return *sc;
}

// small honest overlay: 3 managers, one requester pair, fast consensus
const char* kSmall = R"(
seed = 11
horizon = 12
overlay_nodes = 3
obm_count = 3
t_max = 4
consensus_period = 1
requester_pairs = 1
load = 0 8
vouch = true
)";

}  // namespace

TEST_CASE("honest managers converge on one replica and reject nothing") {
  Sim sim = build_sim(parse_or_die(kSmall));
  sim.run();
  CHECK_FALSE(sim.engine->routing_failed());

  CHECK(sim.obm(0).chain().blocks().size() > 3);

  ledger::TrustRoots roots;
  roots.roots.push_back(sim.ca_root.pk);
  ledger::BurnLedger burns;

  std::set<std::string> contents;
  for (NodeId id : sim.honest_obms()) {
    ObmNode* o = sim.engine->node_as<ObmNode>(id);
    REQUIRE(o != nullptr);
    contents.insert(crypto::hash_hex(o->chain().content_hash()));
    CHECK(o->counters().blocks_rejected_total() == 0);
    CHECK(o->trust_penalties() == 0);
    CHECK(o->chain().integrity_error(roots, burns) == "");
  }
  CHECK(contents.size() == 1);
}

TEST_CASE("a foreign block walks the generator down the trust ladder") {
  Sim sim = build_sim(parse_or_die(kSmall));
  sim.run();

  ObmNode& observer = sim.obm(0);
  // some other manager produced enough blocks to leave the ladder top
  bool saw_ladder = false;
  for (const auto& rec : observer.verify_log()) {
    if (rec.generator != observer.id() && rec.ptv < 100) saw_ladder = true;
    CHECK(rec.sampled <= rec.block_txs);
    // sampling quota: ceil of ptv percent of the block size
    uint64_t want = (rec.ptv * rec.block_txs + 99) / 100;
    CHECK(rec.sampled == std::min<uint64_t>(want, rec.block_txs));
  }
  CHECK(saw_ladder);

  // first foreign verification of any generator runs at full rate
  std::set<uint64_t> seen;
  for (const auto& rec : observer.verify_log()) {
    if (rec.generator == observer.id()) continue;
    if (seen.insert(rec.generator).second) CHECK(rec.ptv == 100);
  }
}

TEST_CASE("members see their requests confirmed on-chain") {
  Sim sim = build_sim(parse_or_die(kSmall));
  sim.run();

  REQUIRE(sim.requesters.size() == 1);
  MemberNode& req = sim.member(sim.requesters[0]);
  CHECK(req.counters().submitted > 0);
  CHECK(req.counters().completed_back > 0);
  CHECK(req.counters().confirms > 0);
  CHECK(req.counters().timeouts == 0);
  CHECK(req.confirm_latencies().size() == req.counters().confirms);

  MemberNode& rsp = sim.member(sim.responders[0]);
  CHECK(rsp.counters().responded > 0);

  // every confirmed transaction is dual-signed on the shared replica
  const auto& chain = sim.obm(0).chain();
  uint64_t multisig_on_chain = 0;
  for (const auto& b : chain.blocks())
    for (const auto& tx : b.txs)
      if (std::holds_alternative<ledger::MultisigTx>(tx)) {
        CHECK(std::get<ledger::MultisigTx>(tx).requestee_signed);
        multisig_on_chain++;
      }
  CHECK(multisig_on_chain >= req.counters().confirms);
}

TEST_CASE("fixed ptv pins the sampling rate for every verification") {
  std::string text = std::string(kSmall) + "fixed_ptv = 40\nvouch = false\n";
  Sim sim = build_sim(parse_or_die(text));
  sim.run();
  ObmNode& o = sim.obm(1);
  REQUIRE(o.verify_log().size() > 0);
  for (const auto& rec : o.verify_log()) CHECK(rec.ptv == 40);
}

TEST_CASE("vouches spread indirect trust for blocks a manager validated") {
  // only manager 0 generates, so every other manager both verifies its
  // blocks directly and hears the rest of the mesh vouch for them
  std::string text = std::string(kSmall) + "generators = 0\n";
  Sim sim = build_sim(parse_or_die(text));
  sim.run();
  ObmNode& gen = sim.obm(0);
  CHECK(gen.counters().blocks_generated > 0);
  ObmNode& other = sim.obm(2);
  CHECK(other.trust().indirect_evidence(gen.id()) > 0);
  CHECK(other.counters().blocks_generated == 0);
}

TEST_CASE("pool caps a block at t_max transactions") {
  Sim sim = build_sim(parse_or_die(kSmall));
  sim.run();
  for (NodeId id : sim.honest_obms()) {
    ObmNode* o = sim.engine->node_as<ObmNode>(id);
    for (const auto& b : o->chain().blocks())
      CHECK(b.txs.size() <= o->config().t_max);
  }
}

TEST_CASE("waiting bounds derive from the topology at boot") {
  Sim sim = build_sim(parse_or_die(kSmall));
  ObmNode& o = sim.obm(0);
  CHECK(o.config().max_waiting == 0);  // unset before boot
  sim.engine->run(0.0);                // boot only, no traffic yet
  CHECK(o.config().max_waiting > 0);
  CHECK(o.config().max_waiting ==
        doctest::Approx(2 * sim.engine->topo().max_end_to_end()));
}

TEST_CASE("duplicate relays stay off the replica") {
  Sim sim = build_sim(parse_or_die(kSmall));
  sim.run();
  // no transaction lands on the replica twice
  const auto& chain = sim.obm(0).chain();
  std::set<std::string> ids;
  for (const auto& b : chain.blocks())
    for (const auto& tx : b.txs) {
      auto id = crypto::hash_hex(ledger::tx_id_of(tx));
      CHECK(ids.insert(id).second);
    }
}
