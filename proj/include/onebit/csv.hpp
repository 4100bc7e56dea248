#pragma once

// CSV writers. Doubles use the shortest round-trip representation, so
// re-reading a file reproduces every value exactly.
//
// Sweep schema (header, then detail rows, then summary rows):
//   lambda,n,trial,seed,algorithm,rel_error,fro_error,iterations,final_violation,kappa_v,runtime_ms
// Summary rows put the statistic ("mean" / "median") in the trial
// column and leave seed empty. runtime_ms is empty unless timing is
// requested, and kappa_v is empty when it was not recorded.

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "onebit/experiment.hpp"

namespace onebit {

inline constexpr const char* kSweepHeader =
    "lambda,n,trial,seed,algorithm,rel_error,fro_error,iterations,final_violation,kappa_v,"
    "runtime_ms";

inline std::string format_double(double v) {
  if (std::isnan(v)) return "";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (res.ec != std::errc{}) return "nan";
  return {buf.data(), res.ptr};
}

inline void write_sweep_csv(std::ostream& os, const std::vector<TrialResult>& results,
                            bool timing = false, bool with_summary = true) {
  os << kSweepHeader << '\n';
  auto runtime = [&](double ms) { return timing ? format_double(ms) : std::string(); };
  for (const TrialResult& r : results) {
    for (const std::string algorithm : {kSvpRka, kHsvt}) {
      const AlgorithmOutcome& o = outcome(r, algorithm);
      os << format_double(r.lambda) << ',' << r.n << ',' << r.trial << ',' << r.seed << ','
         << algorithm << ',' << format_double(o.rel_error) << ','
         << format_double(o.fro_error) << ',' << o.iterations << ','
         << format_double(o.final_violation) << ',' << format_double(r.kappa_v) << ','
         << runtime(o.runtime_ms) << '\n';
    }
  }
  if (!with_summary) return;
  for (const SummaryRow& s : summarize(results)) {
    os << format_double(s.lambda) << ',' << s.n << ',' << s.stat << ",," << s.algorithm << ','
       << format_double(s.rel_error) << ',' << format_double(s.fro_error) << ','
       << format_double(s.iterations) << ',' << format_double(s.final_violation) << ','
       << format_double(s.kappa_v) << ',' << runtime(s.runtime_ms) << '\n';
  }
}

inline void write_probe_csv(std::ostream& os, const ProbeReport& report) {
  os << "n,trials,consistent,consistent_fraction,median_distance,max_distance\n";
  for (const ProbeCell& c : report.cells) {
    os << c.n << ',' << c.trials << ',' << c.consistent << ','
       << format_double(c.consistent_fraction) << ','
       << (c.median_distance ? format_double(*c.median_distance) : "") << ','
       << (c.max_distance ? format_double(*c.max_distance) : "") << '\n';
  }
}

inline void write_bound_csv(std::ostream& os, const BoundReport& report) {
  os << "iteration,distance,step_start_distance,pre_projection_distance,bound,non_expansive\n";
  for (const BoundStep& s : report.steps) {
    os << s.iteration << ',' << format_double(s.distance) << ','
       << format_double(s.step_start_distance) << ',' << format_double(s.pre_projection_distance)
       << ',' << format_double(s.bound) << ',' << (s.non_expansive ? 1 : 0) << '\n';
  }
}

// Splits one CSV line on commas (no quoting is ever produced).
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (const char ch : line) {
    if (ch == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.push_back(current);
  return fields;
}

}  // namespace onebit
