#pragma once

#include <cstdint>
#include <deque>
#include <string>

#include "lsb/bytes.hpp"

namespace lsb::dtm {

struct DtmConfig {
  double alpha_min = 0.25;
  double alpha_max = 1.0;
  double cp_default = 600.0;
  double cp_min = 0.0;  // 2 * max end-to-end delay, filled from topology
  double cp_max = 600.0;
  uint64_t t_max = 10;
  enum class Estimator { whole_period, trailing_window };
  Estimator estimator = Estimator::trailing_window;
  // Trailing estimation window in seconds; 0 means half the elapsed period.
  double trailing_window = 0.0;

  double alpha_mid() const { return (alpha_min + alpha_max) / 2.0; }
};

// Utilization of one consensus period. `appendable` is the number of
// transactions the consensus admits over the window at full tilt (one block
// of t_max per OBM); measured appends equal it only at saturation, and the
// sub-unity alphas of a lightly loaded network only exist against this
// denominator.
struct UtilizationSample {
  double t = 0;
  uint64_t generated = 0;    // transactions observed during the window
  uint64_t appendable = 0;   // t_max * obm_count block slots
  double alpha = 0;
  double rate = 0;           // estimated aggregate tx/s feeding Eq. fits
};

struct DtmAction {
  enum class Kind : uint8_t { none = 0, set_consensus_period = 1, recluster = 2 };
  Kind kind = Kind::none;
  double consensus_period = 0;
  uint64_t obm_count = 0;

  bool operator==(const DtmAction&) const = default;
  Bytes canonical(uint64_t window_id) const;
  std::string describe() const;
};

double compute_alpha(uint64_t generated, uint64_t appended);
double round_half_second(double seconds);

// Consensus period that brings utilization back to alpha_mid at the measured
// aggregate rate: cp = alpha_mid * t_max * m / rate.
double target_consensus_period(const DtmConfig& cfg, double rate, uint64_t obm_count);
// OBM count that does the same at the default period, clamped to [1, n].
uint64_t target_obm_count(const DtmConfig& cfg, double rate, uint64_t overlay_nodes);

// One step of the adjustment algorithm. In-range alpha returns none; an
// out-of-range alpha prefers retuning the period and falls back to
// recluster + default period when the retune leaves the allowed range.
DtmAction evaluate(const DtmConfig& cfg, double alpha, double rate, uint64_t obm_count,
                   uint64_t overlay_nodes);

// Arrival bookkeeping for rate estimation; times must be fed nondecreasing.
class RateWindow {
 public:
  void record(double t) { times_.push_back(t); }
  uint64_t count_in(double from, double to) const;  // half-open [from, to)
  void drop_before(double t);
  // Aggregate rate per the configured estimator for window [t0, t1).
  double estimate(const DtmConfig& cfg, double t0, double t1) const;

 private:
  std::deque<double> times_;
};

}  // namespace lsb::dtm
