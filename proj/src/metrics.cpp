#include "lsb/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lsb::sim {

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0;
  double s = 0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0;
  double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size()));
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  if (x.size() != y.size() || x.size() < 2) return f;
  double mx = mean(x), my = mean(y);
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy <= 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string obm_counters_csv(Sim& sim) {
  std::ostringstream out;
  out << "obm,blocks_generated,blocks_accepted,rejected_compliance,rejected_invalid_tx,"
         "rejected_bad_sig,rejected_malformed,stale,duplicate,reorgs,tx_admitted,"
         "tx_forwarded,confirms_sent,penalties,chain_blocks,pool\n";
  for (size_t i = 0; i < sim.sc.obm_count; ++i) {
    ObmNode& o = sim.obm(i);
    const ObmCounters& c = o.counters();
    out << o.id() << ',' << c.blocks_generated << ',' << c.blocks_accepted << ','
        << c.blocks_rejected_compliance << ',' << c.blocks_rejected_invalid_tx << ','
        << c.blocks_rejected_bad_sig << ',' << c.blocks_rejected_malformed << ','
        << c.blocks_stale << ',' << c.blocks_duplicate << ',' << c.reorgs << ','
        << c.tx_admitted << ',' << c.tx_forwarded << ',' << c.confirms_sent << ','
        << o.trust_penalties() << ',' << o.chain().blocks().size() << ',' << o.pool_size()
        << '\n';
  }
  return out.str();
}

std::string dtm_trace_csv(Sim& sim) {
  std::ostringstream out;
  out << "obm,t,generated,appendable,alpha,rate,event\n";
  for (size_t i = 0; i < sim.sc.obm_count; ++i) {
    ObmNode& o = sim.obm(i);
    for (const auto& s : o.dtm_trace())
      out << o.id() << ',' << format_double(s.t) << ',' << s.generated << ',' << s.appendable
          << ',' << format_double(s.alpha) << ',' << format_double(s.rate) << ",sample\n";
    for (const auto& [t, act] : o.dtm_applied())
      out << o.id() << ',' << format_double(t) << ",0,0,0,0," << act.describe() << '\n';
  }
  return out.str();
}

std::string verify_log_csv(Sim& sim) {
  std::ostringstream out;
  out << "verifier,t,generator,ptv,sampled,block_txs,alg1_delta\n";
  for (size_t i = 0; i < sim.sc.obm_count; ++i) {
    ObmNode& o = sim.obm(i);
    for (const auto& r : o.verify_log())
      out << o.id() << ',' << format_double(r.at) << ',' << r.generator << ',' << r.ptv << ','
          << r.sampled << ',' << r.block_txs << ',' << r.alg1_delta << '\n';
  }
  return out.str();
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return bool(out);
}

}  // namespace lsb::sim
