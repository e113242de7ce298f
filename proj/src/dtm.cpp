#include "lsb/dtm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lsb::dtm {

Bytes DtmAction::canonical(uint64_t window_id) const {
  ByteWriter w;
  w.u64(window_id);
  w.u8(uint8_t(kind));
  w.f64(consensus_period);
  w.u64(obm_count);
  return w.take();
}

std::string DtmAction::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::none: os << "none"; break;
    case Kind::set_consensus_period: os << "set_cp=" << consensus_period; break;
    case Kind::recluster: os << "recluster_m=" << obm_count << " cp=" << consensus_period; break;
  }
  return os.str();
}

double compute_alpha(uint64_t generated, uint64_t appended) {
  if (appended == 0) return std::numeric_limits<double>::infinity();
  return double(generated) / double(appended);
}

double round_half_second(double seconds) { return std::round(seconds * 2.0) / 2.0; }

double target_consensus_period(const DtmConfig& cfg, double rate, uint64_t obm_count) {
  return cfg.alpha_mid() * double(cfg.t_max) * double(obm_count) / rate;
}

uint64_t target_obm_count(const DtmConfig& cfg, double rate, uint64_t overlay_nodes) {
  double m = std::ceil(rate * cfg.cp_default / (cfg.alpha_mid() * double(cfg.t_max)));
  if (m < 1) m = 1;
  if (m > double(overlay_nodes)) m = double(overlay_nodes);
  return uint64_t(m);
}

DtmAction evaluate(const DtmConfig& cfg, double alpha, double rate, uint64_t obm_count,
                   uint64_t overlay_nodes) {
  DtmAction act;
  if (rate <= 0) return act;
  if (alpha > cfg.alpha_max) {
    double cp = round_half_second(target_consensus_period(cfg, rate, obm_count));
    if (cp >= cfg.cp_min) {
      act.kind = DtmAction::Kind::set_consensus_period;
      act.consensus_period = cp;
    } else {
      act.kind = DtmAction::Kind::recluster;
      act.consensus_period = cfg.cp_default;
      act.obm_count = target_obm_count(cfg, rate, overlay_nodes);
    }
  } else if (alpha < cfg.alpha_min) {
    double cp = round_half_second(target_consensus_period(cfg, rate, obm_count));
    if (cp <= cfg.cp_max) {
      act.kind = DtmAction::Kind::set_consensus_period;
      act.consensus_period = cp;
    } else {
      act.kind = DtmAction::Kind::recluster;
      act.consensus_period = cfg.cp_default;
      act.obm_count = target_obm_count(cfg, rate, overlay_nodes);
    }
  }
  return act;
}

uint64_t RateWindow::count_in(double from, double to) const {
  auto lo = std::lower_bound(times_.begin(), times_.end(), from);
  auto hi = std::lower_bound(times_.begin(), times_.end(), to);
  return uint64_t(hi - lo);
}

void RateWindow::drop_before(double t) {
  while (!times_.empty() && times_.front() < t) times_.pop_front();
}

double RateWindow::estimate(const DtmConfig& cfg, double t0, double t1) const {
  double from = t0;
  if (cfg.estimator == DtmConfig::Estimator::trailing_window) {
    double w = cfg.trailing_window > 0 ? cfg.trailing_window : (t1 - t0) / 2.0;
    from = std::max(t0, t1 - w);
  }
  double span = t1 - from;
  if (span <= 0) return 0;
  return double(count_in(from, t1)) / span;
}

}  // namespace lsb::dtm
