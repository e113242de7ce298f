#pragma once

#include <string>
#include <vector>

#include "lsb/scenario.hpp"

namespace lsb::sim {

double mean(const std::vector<double>& v);
double stddev(const std::vector<double>& v);  // population

// Least-squares line fit; r2 is 1 for a perfect fit, 0 for none.
struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

std::string format_double(double v);  // fixed, 6 decimals

// One row per active OBM with its end-of-run consensus counters.
std::string obm_counters_csv(Sim& sim);
// Per-verifier utilization samples and applied management actions.
std::string dtm_trace_csv(Sim& sim);
// Every accepted-block verification with its sampling ratio.
std::string verify_log_csv(Sim& sim);

bool write_file(const std::string& path, const std::string& content);

}  // namespace lsb::sim
