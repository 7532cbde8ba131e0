// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sixdma/baselines.hpp"
#include "sixdma/scenario.hpp"

namespace sixdma::bench {

enum class SweepAxis {
  PowerDbm,
  MovableSpanLambda,
  RotHalfRangeDeg,
  PathsPerUser,
  NumUsers,
};

std::string axis_name(SweepAxis axis);
SweepAxis axis_from_name(const std::string& name);  // throws std::invalid_argument

struct SweepSpec {
  SweepAxis axis = SweepAxis::PowerDbm;
  std::vector<double> values;                 // strictly increasing
  std::vector<baselines::SchemeId> schemes;   // empty selects all schemes
  int trials = 1;
  std::uint64_t seed = 1;
  bool nested_init = true;
  int jobs = 1;
  bool collect_traces = false;  // keeps trial-0 convergence traces
};

struct ResultRow {
  baselines::SchemeId scheme;
  double value = 0.0;
  int trial = 0;
  double init_sum_rate = 0.0;
  double sum_rate = 0.0;
  int iterations = 0;
  std::string termination;
  double wall_seconds = 0.0;  // only surfaces in the opt-in timings file
};

struct TraceRecord {
  std::string name;
  std::vector<fp::IterRecord> records;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::PowerDbm;
  std::vector<ResultRow> rows;  // deterministic (scheme, value, trial) order
  std::vector<TraceRecord> traces;
};

// Copy of base with one field replaced by the axis value.  The two count
// axes require integral values.
scenario::SimConfig apply_axis(const scenario::SimConfig& base, SweepAxis axis, double value);

// Monte Carlo sweep.  Trials run in parallel under spec.jobs; within a trial
// the axis values run in ascending order so each scheme can offer its
// previous solution as a warm-start candidate wherever the scenario is
// unchanged by the axis (power, span, rotation range).  Rows are emitted in
// (scheme, value, trial) order regardless of scheduling.
SweepResult run_sweep(const SweepSpec& spec, const scenario::SimConfig& base);

// "%.12g", plain '.' decimal point.
std::string format_double(double v);

void write_results_csv(std::ostream& out, const SweepResult& res);
void write_aggregate_csv(std::ostream& out, const SweepResult& res);
void write_timings_csv(std::ostream& out, const SweepResult& res);
void write_trace_csv(std::ostream& out, const std::vector<fp::IterRecord>& trace);

}  // namespace sixdma::bench
