#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "migbatchsim/engine.hpp"

namespace migbatchsim {

// One completed request's full timeline plus batch membership.
struct TraceRecord {
  std::int64_t id = 0;
  SimTime arrival = 0;
  SimTime preproc_start = 0;
  SimTime preproc_done = 0;
  SimTime batch_dispatched = 0;
  SimTime exec_start = 0;
  SimTime exec_done = 0;
  int bucket = 0;
  std::int64_t batch_id = 0;
  int batch_size = 0;

  void check_ordering() const;  // throws std::logic_error on a broken timeline
};

// Nearest-rank percentile: the ceil(p/100 * N)-th smallest sample.
double percentile(std::vector<double> samples, double p);

struct LatencyBreakdown {
  double preprocessing_us = 0.0;       // preproc_done - arrival
  double batching_us = 0.0;            // batch_dispatched - preproc_done
  double execution_queueing_us = 0.0;  // exec_start - batch_dispatched
  double execution_us = 0.0;           // exec_done - exec_start
};

struct PriceModel {
  double capex_usd = 0.0;
  double power_kw = 0.0;
  double time_hours = 0.0;
  double elec_usd_per_kwh = 0.139;
};

// Queries served per dollar of ownership over the pricing horizon:
// qps * T / (CAPEX + P * T * elec).
double cost_efficiency(double qps, const PriceModel& price);

struct SimReport {
  std::int64_t arrivals = 0;
  std::int64_t completed = 0;
  std::int64_t in_flight = 0;
  std::int64_t measured = 0;  // completions inside the steady-state window
  double qps = 0.0;
  double p50_us = 0.0;
  double p95_us = 0.0;
  double p99_us = 0.0;
  double mean_latency_us = 0.0;
  LatencyBreakdown breakdown;
  std::map<std::string, double> utilization;
  SimTime window_start_us = 0;
  SimTime window_end_us = 0;
  std::optional<double> cost_efficiency;

  nlohmann::json to_json() const;
};

// Aggregates completed-request traces over the steady-state window
// [warmup_fraction * window_end, window_end], keyed on completion time.
SimReport build_report(const std::vector<TraceRecord>& traces, SimTime window_end, double warmup_fraction,
                       const std::map<std::string, double>& utilization, std::int64_t arrivals,
                       std::int64_t in_flight, const std::optional<PriceModel>& price);

void write_request_trace_csv(const std::string& path, const std::vector<TraceRecord>& traces);

}  // namespace migbatchsim
