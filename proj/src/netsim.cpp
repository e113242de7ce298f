#include "lsb/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lsb::sim {

namespace {

size_t tx_size(const ledger::AnyTx& tx) { return ledger::tx_wire_size(tx); }

constexpr size_t kMsgHeader = 16;  // kind tag + routing ids

}  // namespace

const char* message_kind_name(const Message& m) {
  struct V {
    const char* operator()(const TxSubmit&) { return "tx_submit"; }
    const char* operator()(const TxRelay&) { return "tx_relay"; }
    const char* operator()(const TxForward&) { return "tx_forward"; }
    const char* operator()(const TxComplete&) { return "tx_complete"; }
    const char* operator()(const TxConfirm&) { return "tx_confirm"; }
    const char* operator()(const BlockAnnounce&) { return "block_announce"; }
    const char* operator()(const VouchNotice&) { return "vouch"; }
    const char* operator()(const DtmProposal&) { return "dtm_proposal"; }
    const char* operator()(const DtmCosign&) { return "dtm_cosign"; }
    const char* operator()(const KeylistUpdate&) { return "keylist_update"; }
    const char* operator()(const LocalTx&) { return "local_tx"; }
    const char* operator()(const DataPacket&) { return "data"; }
    const char* operator()(const StoreRequest&) { return "store_request"; }
    const char* operator()(const KeyControl&) { return "key_control"; }
    const char* operator()(const TimerFire&) { return "timer"; }
  };
  return std::visit(V{}, m);
}

size_t message_wire_size(const Message& m) {
  struct V {
    size_t operator()(const TxSubmit& x) { return kMsgHeader + tx_size(x.tx); }
    size_t operator()(const TxRelay& x) { return kMsgHeader + tx_size(x.tx) + 8; }
    size_t operator()(const TxForward& x) { return kMsgHeader + x.tx.wire_size() + 8; }
    size_t operator()(const TxComplete& x) { return kMsgHeader + x.tx.wire_size() + 1; }
    size_t operator()(const TxConfirm&) { return kMsgHeader + 32; }
    size_t operator()(const BlockAnnounce& x) { return kMsgHeader + x.block->wire_size(); }
    size_t operator()(const VouchNotice&) { return kMsgHeader + 32 + 8 + 8 + 64; }
    size_t operator()(const DtmProposal& x) {
      return kMsgHeader + 8 + x.action.canonical(0).size() + 8 + 64;
    }
    size_t operator()(const DtmCosign& x) {
      return kMsgHeader + 8 + x.action.canonical(0).size() + 8 + 64;
    }
    size_t operator()(const KeylistUpdate&) { return kMsgHeader + 2 + 32 + 32 + 8; }
    size_t operator()(const LocalTx& x) { return kMsgHeader + 8 + x.ciphertext.size(); }
    size_t operator()(const DataPacket& x) { return kMsgHeader + 8 + x.payload.size() + 32 + 8; }
    size_t operator()(const StoreRequest& x) {
      return kMsgHeader + 32 + x.blob.size() + x.tx.wire_size();
    }
    size_t operator()(const KeyControl&) { return kMsgHeader + 1 + 8 * 4; }
    size_t operator()(const TimerFire&) { return 0; }
  };
  return std::visit(V{}, m);
}

void PacketLedger::record(const char* kind, NodeId dst, size_t bytes) {
  auto& k = by_kind_[kind];
  k.count += 1;
  k.bytes += bytes;
  auto& r = rows_[{phase_, kind, dst}];
  r.count += 1;
  r.bytes += bytes;
}

Counter PacketLedger::total() const {
  Counter t;
  for (auto& [k, c] : by_kind_) {
    t.count += c.count;
    t.bytes += c.bytes;
  }
  return t;
}

Counter PacketLedger::kind_total(const std::string& kind) const {
  auto it = by_kind_.find(kind);
  return it == by_kind_.end() ? Counter{} : it->second;
}

std::string PacketLedger::csv() const {
  std::ostringstream out;
  out << "phase,kind,node,count,bytes\n";
  for (auto& [key, c] : rows_) {
    out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
        << c.count << ',' << c.bytes << '\n';
  }
  return out.str();
}

// --- topology ---

static std::pair<NodeId, NodeId> link_key(NodeId a, NodeId b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

bool Topology::has_link(NodeId a, NodeId b) const {
  return link_latency.count(link_key(a, b)) != 0;
}

double Topology::latency(NodeId a, NodeId b) const {
  auto it = link_latency.find(link_key(a, b));
  if (it == link_latency.end()) throw std::logic_error("no such link");
  return it->second;
}

void Topology::add_link(NodeId a, NodeId b, double seconds) {
  link_latency[link_key(a, b)] = seconds;
}

bool Topology::is_active_obm(NodeId n) const {
  return std::find(active_obms.begin(), active_obms.end(), n) != active_obms.end();
}

void Topology::rebuild_routes() {
  // Allowed directed edges of the two-tier structure.
  const double inf = std::numeric_limits<double>::infinity();
  size_t n = node_count;
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  std::vector<std::vector<NodeId>> via(n, std::vector<NodeId>(n, kNoNode));
  auto allow = [&](NodeId a, NodeId b) {
    if (!has_link(a, b)) return false;
    bool a_obm = is_active_obm(a);
    bool b_obm = is_active_obm(b);
    if (a_obm && b_obm) return true;
    // non-OBM endpoints may only use the edge to their own cluster head or,
    // for home-tier nodes, to the manager/cloud they hang off directly
    auto attached = [&](NodeId x, NodeId y) {
      auto it = cluster_of.find(x);
      return it != cluster_of.end() && it->second == y;
    };
    if (a_obm) return attached(b, a);
    if (b_obm) return attached(a, b);
    return attached(a, b) || attached(b, a);
  };
  for (size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (auto& [key, lat] : link_latency) {
    auto [a, b] = key;
    if (allow(a, b)) {
      if (lat < d[a][b]) d[a][b] = d[b][a] = lat;
    }
  }
  for (size_t k = 0; k < n; ++k)
    for (size_t i = 0; i < n; ++i) {
      if (d[i][k] == inf) continue;
      for (size_t j = 0; j < n; ++j) {
        double alt = d[i][k] + d[k][j];
        if (alt < d[i][j] - 1e-15) {
          d[i][j] = alt;
          via[i][j] = k;
        }
      }
    }
  paths_.clear();
  max_e2e_ = 0;
  std::function<void(NodeId, NodeId, std::vector<NodeId>&)> expand =
      [&](NodeId a, NodeId b, std::vector<NodeId>& out) {
        NodeId k = via[a][b];
        if (k == kNoNode) {
          out.push_back(b);
          return;
        }
        expand(a, k, out);
        expand(k, b, out);
      };
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (i == j || d[i][j] == inf) continue;
      std::vector<NodeId> p{static_cast<NodeId>(i)};
      expand(i, j, p);
      paths_[{i, j}] = std::move(p);
      // the end-to-end bound that consensus timing leans on covers the
      // overlay tier, not device-to-device spans
      if (kinds[i] != NodeKind::device && kinds[j] != NodeKind::device &&
          d[i][j] > max_e2e_)
        max_e2e_ = d[i][j];
    }
}

const std::vector<NodeId>* Topology::path(NodeId from, NodeId to) const {
  auto it = paths_.find({from, to});
  return it == paths_.end() ? nullptr : &it->second;
}

double Topology::path_latency(NodeId from, NodeId to) const {
  auto* p = path(from, to);
  if (!p) return std::numeric_limits<double>::infinity();
  double t = 0;
  for (size_t i = 0; i + 1 < p->size(); ++i) t += latency((*p)[i], (*p)[i + 1]);
  return t;
}

NodeId Topology::nearest_obm(NodeId member, const std::set<NodeId>& exclude) const {
  NodeId best = kNoNode;
  double best_lat = std::numeric_limits<double>::infinity();
  for (NodeId o : active_obms) {
    if (exclude.count(o) || o == member || !has_link(member, o)) continue;
    double lat = latency(member, o);
    if (lat < best_lat || (lat == best_lat && o < best)) {
      best_lat = lat;
      best = o;
    }
  }
  return best;
}

// --- engine ---

Engine::Engine(Topology topo, uint64_t seed) : topo_(std::move(topo)), seed_(seed) {
  topo_.rebuild_routes();
  rngs_.reserve(topo_.node_count);
  for (size_t i = 0; i < topo_.node_count; ++i)
    rngs_.push_back(crypto::derive_rng(seed, 0x1000 + i));
}

void Engine::add_node(std::unique_ptr<Node> n) {
  NodeId id = n->id();
  if (nodes_.size() <= id) nodes_.resize(id + 1);
  nodes_[id] = std::move(n);
}

crypto::Rng& Engine::node_rng(NodeId id) { return rngs_.at(id); }

double Engine::serialize_delay(NodeId src, size_t bytes) {
  // Sender owns one transmit interface; packets leave in FIFO order.
  double start = std::max(now_, tx_busy_until_.count(src) ? tx_busy_until_[src] : 0.0);
  double tx_time = static_cast<double>(bytes) / topo_.bandwidth_bytes_per_s;
  tx_busy_until_[src] = start + tx_time;
  return (start - now_) + tx_time;
}

void Engine::enqueue(SimTime at, NodeId src, NodeId dst, Message msg) {
  queue_.push(SimEvent{at, dst, seq_++, src, std::move(msg)});
}

void Engine::send(NodeId src, NodeId dst, Message msg) {
  if (!topo_.has_link(src, dst)) throw std::logic_error("send without link");
  size_t bytes = message_wire_size(msg);
  double at = now_ + serialize_delay(src, bytes) + topo_.latency(src, dst);
  enqueue(at, src, dst, std::move(msg));
}

void Engine::route(NodeId src, NodeId dst, Message msg) {
  auto* p = topo_.path(src, dst);
  if (!p || p->size() < 2) {
    routing_failed_ = true;
    return;
  }
  uint64_t tid = next_transit_++;
  std::vector<NodeId> remaining(p->begin() + 2, p->end());
  size_t bytes = message_wire_size(msg);
  double at = now_ + serialize_delay(src, bytes) + topo_.latency(src, (*p)[1]);
  transits_[tid] = Transit{msg, std::move(remaining), src};
  SimEvent ev{at, (*p)[1], seq_++, src, std::move(msg)};
  ev.seq |= (tid << 24);  // transit id rides in the high bits of seq
  queue_.push(std::move(ev));
}

void Engine::broadcast_obms(NodeId src, const Message& msg) {
  for (NodeId o : topo_.active_obms) {
    if (o == src) continue;
    send(src, o, msg);
  }
}

void Engine::schedule(NodeId dst, SimTime delay, TimerFire t) {
  enqueue(now_ + delay, kNoNode, dst, t);
}

void Engine::run(SimTime horizon) {
  // nodes boot exactly once, in id order, before the first event drains;
  // later run() calls with a further horizon resume without rebooting
  if (!started_) {
    started_ = true;
    for (NodeId i = 0; i < nodes_.size(); ++i) {
      if (!nodes_[i]) continue;
      Ctx ctx{*this, now_, node_rng(i)};
      nodes_[i]->on_start(ctx);
    }
  }
  while (!queue_.empty()) {
    SimEvent ev = queue_.top();
    if (ev.at > horizon) break;
    queue_.pop();
    now_ = ev.at;
    uint64_t tid = ev.seq >> 24;
    if (tid != 0 && transits_.count(tid)) {
      Transit& tr = transits_[tid];
      packets().record(message_kind_name(ev.msg), ev.dst, message_wire_size(ev.msg));
      if (tr.remaining.empty()) {
        SimEvent final_ev{ev.at, ev.dst, ev.seq, tr.origin, std::move(tr.msg)};
        transits_.erase(tid);
        if (nodes_.size() > final_ev.dst && nodes_[final_ev.dst]) {
          Ctx ctx{*this, now_, node_rng(final_ev.dst)};
          nodes_[final_ev.dst]->on_event(ctx, final_ev);
        }
        continue;
      }
      NodeId next = tr.remaining.front();
      tr.remaining.erase(tr.remaining.begin());
      size_t bytes = message_wire_size(tr.msg);
      double at = now_ + serialize_delay(ev.dst, bytes) + topo_.latency(ev.dst, next);
      SimEvent hop{at, next, seq_++, ev.dst, tr.msg};
      hop.seq |= (tid << 24);
      queue_.push(std::move(hop));
      continue;
    }
    if (!std::holds_alternative<TimerFire>(ev.msg))
      packets().record(message_kind_name(ev.msg), ev.dst, message_wire_size(ev.msg));
    if (nodes_.size() > ev.dst && nodes_[ev.dst]) {
      Ctx ctx{*this, now_, node_rng(ev.dst)};
      nodes_[ev.dst]->on_event(ctx, ev);
    }
  }
  if (now_ < horizon) now_ = horizon;
}

void Engine::recluster(uint64_t new_m) {
  new_m = std::max<uint64_t>(1, std::min<uint64_t>(new_m, topo_.obm_capable.size()));
  std::vector<NodeId> next(topo_.obm_capable.begin(), topo_.obm_capable.begin() + new_m);
  if (next == topo_.active_obms) return;
  topo_.active_obms = next;
  // members (anything clustered to an overlay head) re-home to the nearest
  // surviving OBM; device-tier attachments are untouched
  for (auto& [member, head] : topo_.cluster_of) {
    if (topo_.kinds[member] == NodeKind::device) continue;
    if (topo_.is_active_obm(head) && topo_.has_link(member, head)) continue;
    NodeId nh = topo_.nearest_obm(member);
    if (nh != kNoNode) head = nh;
  }
  topo_.rebuild_routes();
  if (on_recluster) on_recluster(*this, new_m);
}

}  // namespace lsb::sim
