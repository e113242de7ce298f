#include "doctest.h"
#include "lsb/dtm.hpp"

#include <cmath>

using namespace lsb::dtm;

TEST_CASE("alpha is generated over appended, infinite when nothing lands") {
  CHECK(compute_alpha(210, 87) == doctest::Approx(2.4137931));
  CHECK(compute_alpha(50, 200) == doctest::Approx(0.25));
  CHECK(std::isinf(compute_alpha(5, 0)));
  CHECK(compute_alpha(0, 10) == 0.0);
}

TEST_CASE("periods round to the nearest half second") {
  CHECK(round_half_second(2.5390625) == 2.5);
  CHECK(round_half_second(6.7708333) == 7.0);
  CHECK(round_half_second(0.2) == 0.0);
  CHECK(round_half_second(0.26) == 0.5);
  CHECK(round_half_second(600.0) == 600.0);
}

TEST_CASE("target period rebalances utilization to the band midpoint") {
  DtmConfig cfg;  // alpha band [0.25, 1.0], mid 0.625, t_max 10
  CHECK(cfg.alpha_mid() == doctest::Approx(0.625));
  CHECK(target_consensus_period(cfg, 32.0, 13) == doctest::Approx(2.5390625));
  CHECK(target_consensus_period(cfg, 12.0, 13) == doctest::Approx(6.7708333));
}

TEST_CASE("target obm count is the default-period dual, clamped") {
  DtmConfig cfg;
  // 32 tx/s at cp 600 wants far more block slots than 50 nodes can host
  CHECK(target_obm_count(cfg, 32.0, 50) == 50);
  CHECK(target_obm_count(cfg, 1e-9, 50) == 1);
}

TEST_CASE("evaluation leaves in-band utilization alone") {
  DtmConfig cfg;
  CHECK(evaluate(cfg, 0.625, 32.0, 13, 50).kind == DtmAction::Kind::none);
  CHECK(evaluate(cfg, 0.25, 32.0, 13, 50).kind == DtmAction::Kind::none);
  CHECK(evaluate(cfg, 1.0, 32.0, 13, 50).kind == DtmAction::Kind::none);
  CHECK(evaluate(cfg, 2.0, 0.0, 13, 50).kind == DtmAction::Kind::none);  // no rate, no move
}

TEST_CASE("overload shortens the period, underload stretches it") {
  DtmConfig cfg;
  DtmAction hot = evaluate(cfg, 2.0, 32.0, 13, 50);
  CHECK(hot.kind == DtmAction::Kind::set_consensus_period);
  CHECK(hot.consensus_period == 2.5);

  DtmAction cold = evaluate(cfg, 0.1, 12.0, 13, 50);
  CHECK(cold.kind == DtmAction::Kind::set_consensus_period);
  CHECK(cold.consensus_period == 7.0);
}

TEST_CASE("retunes outside the allowed period fall back to recluster") {
  DtmConfig cfg;
  cfg.cp_min = 5.0;
  DtmAction act = evaluate(cfg, 2.0, 32.0, 13, 50);  // wants 2.5, below cp_min
  CHECK(act.kind == DtmAction::Kind::recluster);
  CHECK(act.consensus_period == cfg.cp_default);
  CHECK(act.obm_count == 50);  // demand saturates the overlay

  DtmConfig slow;
  slow.cp_max = 5.0;
  DtmAction low = evaluate(slow, 0.1, 12.0, 13, 50);  // wants 7.0, above cp_max
  CHECK(low.kind == DtmAction::Kind::recluster);
  CHECK(low.obm_count == 50);
}

TEST_CASE("action canonical bytes bind the window id") {
  DtmAction a;
  a.kind = DtmAction::Kind::set_consensus_period;
  a.consensus_period = 2.5;
  DtmAction b = a;
  CHECK(a == b);
  CHECK(a.canonical(1) == b.canonical(1));
  CHECK(a.canonical(1) != a.canonical(2));
  b.consensus_period = 3.0;
  CHECK(a.canonical(1) != b.canonical(1));
  CHECK(a.describe() == "set_cp=2.5");
  CHECK(DtmAction{}.describe() == "none");
}

TEST_CASE("rate window counts half-open intervals and drops old arrivals") {
  RateWindow w;
  for (double t : {1.0, 2.0, 2.5, 3.0, 4.0}) w.record(t);
  CHECK(w.count_in(2.0, 3.0) == 2);  // 2.0 and 2.5; 3.0 excluded
  CHECK(w.count_in(0.0, 10.0) == 5);
  w.drop_before(2.5);
  CHECK(w.count_in(0.0, 10.0) == 3);
}

TEST_CASE("trailing-window estimation sees only the recent rate") {
  DtmConfig cfg;
  cfg.trailing_window = 2.0;
  RateWindow w;
  // quiet for 8s, then 10 arrivals in the final 2s
  for (int i = 0; i < 10; ++i) w.record(8.0 + 0.2 * i);
  CHECK(w.estimate(cfg, 0.0, 10.0) == doctest::Approx(5.0));

  DtmConfig whole;
  whole.estimator = DtmConfig::Estimator::whole_period;
  CHECK(w.estimate(whole, 0.0, 10.0) == doctest::Approx(1.0));
}
