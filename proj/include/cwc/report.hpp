#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "cwc/dsl.hpp"
#include "cwc/rates.hpp"
#include "cwc/ssa.hpp"

namespace cwc {

/// Per-replicate CSV: `time,<obs1>,<obs2>,...`, LF line endings.
inline void write_trajectory_csv(std::ostream& os, const std::vector<Observable>& observables,
                                 const Trajectory& traj) {
  std::string out = "time";
  for (const auto& o : observables) out += "," + o.name;
  out += '\n';
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out += format_number(traj.times[i]);
    for (auto v : traj.rows[i]) {
      out += ',';
      out += std::to_string(v);
    }
    out += '\n';
  }
  os << out;
}

struct AggregateRow {
  double time = 0.0;
  std::vector<double> mean;
  std::vector<double> sd;  // sample standard deviation; 0 with fewer than two values
  std::uint64_t replicates = 0;
};

/// Mean and sample standard deviation per grid point, over the replicates
/// that reached that grid point. Returns nothing for event-log trajectories
/// since their time points are not shared.
inline std::vector<AggregateRow> aggregate(const std::vector<Trajectory>& runs, std::size_t observables) {
  std::vector<AggregateRow> out;
  std::size_t longest = 0;
  for (const auto& r : runs) longest = std::max(longest, r.times.size());
  for (std::size_t i = 0; i < longest; ++i) {
    AggregateRow row;
    row.mean.assign(observables, 0.0);
    row.sd.assign(observables, 0.0);
    std::vector<const std::vector<std::uint64_t>*> sample;
    for (const auto& r : runs) {
      if (i < r.times.size()) {
        row.time = r.times[i];
        sample.push_back(&r.rows[i]);
      }
    }
    row.replicates = sample.size();
    for (std::size_t k = 0; k < observables; ++k) {
      double sum = 0.0;
      for (const auto* s : sample) sum += static_cast<double>((*s)[k]);
      const double mean = sum / static_cast<double>(sample.size());
      double ss = 0.0;
      for (const auto* s : sample) {
        double d = static_cast<double>((*s)[k]) - mean;
        ss += d * d;
      }
      row.mean[k] = mean;
      row.sd[k] = sample.size() > 1 ? std::sqrt(ss / static_cast<double>(sample.size() - 1)) : 0.0;
    }
    out.push_back(std::move(row));
  }
  return out;
}

/// Aggregate CSV: `time,<obs>_mean,<obs>_sd,...`.
inline void write_aggregate_csv(std::ostream& os, const std::vector<Observable>& observables,
                                const std::vector<AggregateRow>& rows) {
  std::string out = "time";
  for (const auto& o : observables) out += "," + o.name + "_mean," + o.name + "_sd";
  out += '\n';
  for (const auto& r : rows) {
    out += format_number(r.time);
    for (std::size_t k = 0; k < observables.size(); ++k) {
      out += ',' + format_number(r.mean[k]);
      out += ',' + format_number(r.sd[k]);
    }
    out += '\n';
  }
  os << out;
}

/// Time average of observable `k` over grid points with time in [from, to].
inline double time_average(const Trajectory& traj, std::size_t k, double from, double to) {
  double sum = 0.0;
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (traj.times[i] < from || traj.times[i] > to) continue;
    sum += static_cast<double>(traj.rows[i][k]);
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace cwc
