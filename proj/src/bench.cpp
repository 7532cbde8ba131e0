// SPDX-License-Identifier: Apache-2.0
#include "sixdma/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace sixdma::bench {

namespace {

struct AxisEntry {
  SweepAxis axis;
  const char* name;
};

constexpr AxisEntry kAxes[] = {
    {SweepAxis::PowerDbm, "power_dbm"},
    {SweepAxis::MovableSpanLambda, "movable_span_lambda"},
    {SweepAxis::RotHalfRangeDeg, "rot_half_range_deg"},
    {SweepAxis::PathsPerUser, "paths_per_user"},
    {SweepAxis::NumUsers, "num_users"},
};

int axis_int(SweepAxis axis, double value) {
  const double r = std::round(value);
  if (std::abs(value - r) > 1e-9 || r < 1.0)
    throw std::invalid_argument("axis " + axis_name(axis) +
                                " needs a positive integer, got " + format_double(value));
  return static_cast<int>(r);
}

// The scenario draws depend on the axis only through the user and path
// counts; for the other axes every value sees identical channels.
bool axis_keeps_scenario(SweepAxis axis) {
  return axis == SweepAxis::PowerDbm || axis == SweepAxis::MovableSpanLambda ||
         axis == SweepAxis::RotHalfRangeDeg;
}

std::string sanitize_value(double v) {
  std::string s = format_double(v);
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
  }
  return s;
}

}  // namespace

std::string axis_name(SweepAxis axis) {
  for (const auto& e : kAxes)
    if (e.axis == axis) return e.name;
  throw std::invalid_argument("unknown sweep axis");
}

SweepAxis axis_from_name(const std::string& name) {
  for (const auto& e : kAxes)
    if (name == e.name) return e.axis;
  throw std::invalid_argument("unknown sweep axis '" + name + "'");
}

scenario::SimConfig apply_axis(const scenario::SimConfig& base, SweepAxis axis, double value) {
  scenario::SimConfig cfg = base;
  switch (axis) {
    case SweepAxis::PowerDbm:
      cfg.power_dbm = value;
      break;
    case SweepAxis::MovableSpanLambda:
      cfg.movable_span_lambda = value;
      break;
    case SweepAxis::RotHalfRangeDeg:
      cfg.rot_half_range_deg = value;
      break;
    case SweepAxis::PathsPerUser:
      cfg.paths_per_user = axis_int(axis, value);
      break;
    case SweepAxis::NumUsers:
      cfg.num_users = axis_int(axis, value);
      break;
  }
  return cfg;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

SweepResult run_sweep(const SweepSpec& spec, const scenario::SimConfig& base) {
  if (spec.values.empty()) throw std::invalid_argument("sweep needs at least one value");
  for (size_t i = 1; i < spec.values.size(); ++i)
    if (!(spec.values[i] > spec.values[i - 1]))
      throw std::invalid_argument("sweep values must be strictly increasing");
  if (spec.trials < 1) throw std::invalid_argument("sweep needs at least one trial");
  if (spec.jobs < 1) throw std::invalid_argument("jobs must be positive");

  const std::vector<baselines::SchemeId> schemes =
      spec.schemes.empty()
          ? std::vector<baselines::SchemeId>(baselines::kAllSchemes.begin(),
                                             baselines::kAllSchemes.end())
          : spec.schemes;
  const size_t n_values = spec.values.size();

  // Per-value setup is shared read-only across trial threads.
  struct ValueSetup {
    scenario::SimConfig cfg;
    geometry::ArrayGeometry geom;
    std::vector<geometry::Pose> init_poses;
    fp::SolveOptions opts;
  };
  const double span_hint =
      spec.axis == SweepAxis::MovableSpanLambda ? spec.values.back() : 0.0;
  std::vector<ValueSetup> setups;
  setups.reserve(n_values);
  for (double value : spec.values) {
    ValueSetup s{apply_axis(base, spec.axis, value), {}, {}, {}};
    s.geom = scenario::default_geometry(s.cfg, span_hint);
    s.init_poses = scenario::center_poses(s.geom);
    s.opts = scenario::make_solve_options(s.cfg);
    setups.push_back(std::move(s));
  }

  // slot(trial, value, scheme) storage, filled by the owning trial's thread.
  std::vector<ResultRow> slots(static_cast<size_t>(spec.trials) * n_values * schemes.size());
  auto slot = [&](int trial, size_t vi, size_t si) -> ResultRow& {
    return slots[(static_cast<size_t>(trial) * n_values + vi) * schemes.size() + si];
  };
  std::vector<TraceRecord> traces;

  auto run_trial_chain = [&](int trial) {
    std::map<baselines::SchemeId, fp::WarmStart> carried;
    for (size_t vi = 0; vi < n_values; ++vi) {
      const ValueSetup& s = setups[vi];
      Rng rng = Rng::stream(spec.seed, static_cast<std::uint64_t>(trial));
      const channel::PathSet paths = scenario::build_scenario(s.cfg, rng);

      const auto out = baselines::run_trial(s.geom, paths, s.opts, s.init_poses, schemes,
                                            spec.nested_init, carried);

      for (size_t si = 0; si < schemes.size(); ++si) {
        const auto& rep = out.reports.at(schemes[si]);
        ResultRow& row = slot(trial, vi, si);
        row.scheme = schemes[si];
        row.value = spec.values[vi];
        row.trial = trial;
        row.init_sum_rate = rep.initial_sum_rate;
        row.sum_rate = rep.reported_sum_rate();
        row.iterations = rep.iterations();
        row.termination = rep.termination;
        row.wall_seconds = out.wall_seconds.at(schemes[si]);
      }
      if (spec.collect_traces && trial == 0) {
        for (size_t si = 0; si < schemes.size(); ++si) {
          const auto& rep = out.reports.at(schemes[si]);
          traces.push_back({"trace_" + baselines::scheme_name(schemes[si]) + "_" +
                                axis_name(spec.axis) + "_" + sanitize_value(spec.values[vi]),
                            rep.trace});
        }
      }

      carried.clear();
      if (axis_keeps_scenario(spec.axis)) {
        for (const auto& [id, rep] : out.reports)
          carried[id] = fp::WarmStart{rep.final_poses, rep.final_bf};
      }
    }
  };

  const int jobs = std::min(spec.jobs, spec.trials);
  if (jobs <= 1) {
    for (int t = 0; t < spec.trials; ++t) run_trial_chain(t);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&, j] {
        for (int t = j; t < spec.trials; t += jobs) run_trial_chain(t);
      });
    for (auto& th : pool) th.join();
  }

  SweepResult res;
  res.axis = spec.axis;
  res.rows.reserve(slots.size());
  for (size_t si = 0; si < schemes.size(); ++si)
    for (size_t vi = 0; vi < n_values; ++vi)
      for (int t = 0; t < spec.trials; ++t) res.rows.push_back(slot(t, vi, si));
  std::sort(traces.begin(), traces.end(),
            [](const TraceRecord& a, const TraceRecord& b) { return a.name < b.name; });
  res.traces = std::move(traces);
  return res;
}

void write_results_csv(std::ostream& out, const SweepResult& res) {
  out << "scheme,axis,value,trial,init_sum_rate_bpshz,sum_rate_bpshz,iterations,termination\n";
  const std::string axis = axis_name(res.axis);
  for (const auto& r : res.rows)
    out << baselines::scheme_name(r.scheme) << ',' << axis << ',' << format_double(r.value)
        << ',' << r.trial << ',' << format_double(r.init_sum_rate) << ','
        << format_double(r.sum_rate) << ',' << r.iterations << ',' << r.termination << '\n';
}

void write_aggregate_csv(std::ostream& out, const SweepResult& res) {
  out << "scheme,axis,value,trials,mean_sum_rate_bpshz,stderr_sum_rate_bpshz\n";
  const std::string axis = axis_name(res.axis);
  size_t i = 0;
  while (i < res.rows.size()) {
    size_t j = i;
    double sum = 0.0;
    while (j < res.rows.size() && res.rows[j].scheme == res.rows[i].scheme &&
           res.rows[j].value == res.rows[i].value) {
      sum += res.rows[j].sum_rate;
      ++j;
    }
    const double n = static_cast<double>(j - i);
    const double mean = sum / n;
    double ss = 0.0;
    for (size_t k = i; k < j; ++k)
      ss += (res.rows[k].sum_rate - mean) * (res.rows[k].sum_rate - mean);
    const double stderr_mean = n > 1.0 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    out << baselines::scheme_name(res.rows[i].scheme) << ',' << axis << ','
        << format_double(res.rows[i].value) << ',' << static_cast<int>(n) << ','
        << format_double(mean) << ',' << format_double(stderr_mean) << '\n';
    i = j;
  }
}

void write_timings_csv(std::ostream& out, const SweepResult& res) {
  out << "scheme,axis,value,trial,wall_seconds\n";
  const std::string axis = axis_name(res.axis);
  for (const auto& r : res.rows)
    out << baselines::scheme_name(r.scheme) << ',' << axis << ',' << format_double(r.value)
        << ',' << r.trial << ',' << format_double(r.wall_seconds) << '\n';
}

void write_trace_csv(std::ostream& out, const std::vector<fp::IterRecord>& trace) {
  out << "iteration,sum_rate_bpshz,fp_objective\n";
  for (size_t i = 0; i < trace.size(); ++i)
    out << (i + 1) << ',' << format_double(trace[i].sum_rate) << ','
        << format_double(trace[i].fp_obj) << '\n';
}

}  // namespace sixdma::bench
