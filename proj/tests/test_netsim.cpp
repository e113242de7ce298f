#include "doctest.h"
#include "lsb/netsim.hpp"

#include <tuple>

using namespace lsb;
using namespace lsb::sim;

namespace {

// records every delivery it sees, nothing else
struct Probe : Node {
  std::vector<std::tuple<double, NodeId, std::string>> seen;
  bool started = false;
  int starts = 0;

  explicit Probe(NodeId id, NodeKind kind = NodeKind::obm) : Node(id, kind) {}
  void on_start(Ctx&) override {
    started = true;
    starts++;
  }
  void on_event(Ctx&, const SimEvent& ev) override {
    seen.emplace_back(ev.at, ev.src, message_kind_name(ev.msg));
  }
};

// triangle of obm-capable nodes plus one member hanging off node 0
Topology small_topo() {
  Topology t;
  t.node_count = 4;
  t.kinds = {NodeKind::obm, NodeKind::obm, NodeKind::obm, NodeKind::member};
  t.add_link(0, 1, 0.010);
  t.add_link(1, 2, 0.020);
  t.add_link(0, 2, 0.050);
  t.add_link(0, 3, 0.002);
  t.obm_capable = {0, 1, 2};
  t.active_obms = {0, 1, 2};
  t.cluster_of[3] = 0;
  t.rebuild_routes();
  return t;
}

Engine make_engine(Topology t, uint64_t seed = 1) {
  Engine eng(std::move(t), seed);
  for (NodeId i = 0; i < 4; ++i)
    eng.add_node(std::make_unique<Probe>(i, i < 3 ? NodeKind::obm : NodeKind::member));
  return eng;
}

}  // namespace

TEST_CASE("routes prefer low total latency and members only touch their head") {
  Topology t = small_topo();
  // 0 -> 2 via 1 costs 30ms, the direct link 50ms
  const auto* p = t.path(0, 2);
  REQUIRE(p != nullptr);
  CHECK(*p == std::vector<NodeId>{0, 1, 2});
  CHECK(t.path_latency(0, 2) == doctest::Approx(0.030));

  // member 3 reaches the far obm only through its own cluster head
  const auto* mp = t.path(3, 2);
  REQUIRE(mp != nullptr);
  CHECK(*mp == std::vector<NodeId>{3, 0, 1, 2});
  CHECK(t.max_end_to_end() >= t.path_latency(3, 2));
  CHECK(t.nearest_obm(3) == 0);
  CHECK(t.nearest_obm(3, {0}) != 0);
}

TEST_CASE("engine boots every node exactly once, even across resumed runs") {
  Engine eng = make_engine(small_topo());
  eng.run(1.0);
  for (NodeId i = 0; i < 4; ++i) {
    auto* p = dynamic_cast<Probe*>(eng.node(i));
    REQUIRE(p != nullptr);
    CHECK(p->started);
    CHECK(p->starts == 1);
  }
  eng.run(2.0);
  CHECK(dynamic_cast<Probe*>(eng.node(0))->starts == 1);
  CHECK(eng.now() == 2.0);
}

TEST_CASE("send charges latency plus serialization in call order") {
  Topology t = small_topo();
  t.bandwidth_bytes_per_s = 1000.0;  // 1 byte per millisecond
  Engine eng = make_engine(std::move(t));

  Message m = TxConfirm{};
  size_t sz = message_wire_size(m);
  eng.send(0, 1, m);
  eng.send(0, 1, m);  // queues behind the first copy on 0's uplink
  eng.run(10.0);

  auto* p1 = dynamic_cast<Probe*>(eng.node(1));
  REQUIRE(p1->seen.size() == 2);
  double ser = double(sz) / 1000.0;
  CHECK(std::get<0>(p1->seen[0]) == doctest::Approx(0.010 + ser));
  CHECK(std::get<0>(p1->seen[1]) == doctest::Approx(0.010 + 2 * ser));

  Counter total = eng.packets().total();
  CHECK(total.count == 2);
  CHECK(total.bytes == 2 * sz);
}

TEST_CASE("routed unicast charges every hop and accounts bytes per hop") {
  Engine eng = make_engine(small_topo());
  Message m = TxConfirm{};
  size_t sz = message_wire_size(m);
  eng.route(0, 2, m);  // 0 -> 1 -> 2
  eng.run(1.0);

  auto* mid = dynamic_cast<Probe*>(eng.node(1));
  auto* end = dynamic_cast<Probe*>(eng.node(2));
  CHECK(mid->seen.empty());  // transit hops forward silently
  REQUIRE(end->seen.size() == 1);
  CHECK(std::get<0>(end->seen[0]) > 0.030);  // both link latencies paid
  CHECK(eng.packets().total().count == 2);   // one record per hop
  CHECK(eng.packets().total().bytes == 2 * sz);
}

TEST_CASE("obm broadcast hits every active obm except the source") {
  Engine eng = make_engine(small_topo());
  eng.broadcast_obms(1, TxConfirm{});
  eng.run(1.0);
  CHECK(dynamic_cast<Probe*>(eng.node(0))->seen.size() == 1);
  CHECK(dynamic_cast<Probe*>(eng.node(1))->seen.empty());
  CHECK(dynamic_cast<Probe*>(eng.node(2))->seen.size() == 1);
  CHECK(dynamic_cast<Probe*>(eng.node(3))->seen.empty());
}

TEST_CASE("timers fire at the requested offset and carry their tag") {
  Engine eng = make_engine(small_topo());
  TimerFire tf;
  tf.kind = TimerFire::Kind::generic;
  tf.tag = 42;
  eng.schedule(2, 0.5, tf);
  eng.run(1.0);
  auto* p = dynamic_cast<Probe*>(eng.node(2));
  REQUIRE(p->seen.size() == 1);
  CHECK(std::get<0>(p->seen[0]) == doctest::Approx(0.5));
  CHECK(std::get<2>(p->seen[0]) == "timer");
}

TEST_CASE("events beyond the horizon stay queued for the next run") {
  Engine eng = make_engine(small_topo());
  eng.schedule(0, 5.0, TimerFire{});
  eng.run(1.0);
  CHECK(dynamic_cast<Probe*>(eng.node(0))->seen.empty());
  eng.run(6.0);
  CHECK(dynamic_cast<Probe*>(eng.node(0))->seen.size() == 1);
}

TEST_CASE("identical seeds replay identical delivery schedules") {
  auto trace = [](uint64_t seed) {
    Engine eng = make_engine(small_topo(), seed);
    for (int i = 0; i < 20; ++i) {
      eng.broadcast_obms(i % 3, TxConfirm{});
      eng.route(3, 2, TxConfirm{});
    }
    eng.run(5.0);
    std::vector<std::tuple<double, NodeId, std::string>> all;
    for (NodeId n = 0; n < 4; ++n) {
      auto* p = dynamic_cast<Probe*>(eng.node(n));
      all.insert(all.end(), p->seen.begin(), p->seen.end());
    }
    return all;
  };
  CHECK(trace(7) == trace(7));
}

TEST_CASE("packet ledger aggregates by phase, kind and destination") {
  PacketLedger pl;
  pl.record("block", 1, 100);
  pl.record("block", 1, 100);
  pl.record("tx", 2, 30);
  pl.set_phase("attack");
  pl.record("block", 1, 50);

  CHECK(pl.kind_total("block").count == 3);
  CHECK(pl.kind_total("block").bytes == 250);
  CHECK(pl.total().count == 4);
  CHECK(pl.total().bytes == 280);

  std::string csv = pl.csv();
  CHECK(csv.find("phase,kind,node,count,bytes") == 0);
  CHECK(csv.find("run,block,1,2,200") != std::string::npos);
  CHECK(csv.find("attack,block,1,1,50") != std::string::npos);
}

TEST_CASE("recluster grows the active set and re-homes members") {
  Topology t = small_topo();
  t.active_obms = {0, 1};  // start with two of the three capable nodes
  t.rebuild_routes();
  Engine eng(std::move(t), 3);
  for (NodeId i = 0; i < 4; ++i)
    eng.add_node(std::make_unique<Probe>(i, i < 3 ? NodeKind::obm : NodeKind::member));

  uint64_t cb_m = 0;
  eng.on_recluster = [&](Engine&, uint64_t m) { cb_m = m; };
  eng.recluster(3);
  CHECK(cb_m == 3);
  CHECK(eng.topo().active_obms.size() == 3);
  CHECK(eng.topo().is_active_obm(2));
  CHECK(eng.topo().cluster_of.at(3) == 0);  // nearest head unchanged

  eng.recluster(1);
  CHECK(eng.topo().active_obms.size() == 1);
  CHECK(eng.topo().cluster_of.at(3) == 0);
}
