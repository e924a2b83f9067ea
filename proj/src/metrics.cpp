#include "migbatchsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace migbatchsim {

void TraceRecord::check_ordering() const {
  bool ok = arrival <= preproc_start && preproc_start <= preproc_done && preproc_done <= batch_dispatched &&
            batch_dispatched <= exec_start && exec_start <= exec_done;
  if (!ok) throw std::logic_error("trace record " + std::to_string(id) + ": timestamps out of order");
}

double percentile(std::vector<double> samples, double p) {
  if (samples.empty()) throw std::invalid_argument("percentile: no samples");
  if (!(p > 0.0) || p > 100.0) throw std::invalid_argument("percentile: p must be in (0, 100]");
  std::sort(samples.begin(), samples.end());
  std::size_t rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(samples.size())));
  if (rank == 0) rank = 1;
  return samples[rank - 1];
}

double cost_efficiency(double qps, const PriceModel& price) {
  if (qps < 0.0) throw std::invalid_argument("cost: qps must be non-negative");
  if (!(price.capex_usd >= 0.0)) throw std::invalid_argument("cost: capex_usd must be non-negative");
  if (!(price.power_kw >= 0.0)) throw std::invalid_argument("cost: power_kw must be non-negative");
  if (!(price.time_hours > 0.0)) throw std::invalid_argument("cost: time_hours must be positive");
  if (!(price.elec_usd_per_kwh >= 0.0)) throw std::invalid_argument("cost: elec_usd_per_kwh must be non-negative");
  double total_cost = price.capex_usd + price.power_kw * price.time_hours * price.elec_usd_per_kwh;
  if (!(total_cost > 0.0)) throw std::invalid_argument("cost: total cost must be positive");
  return qps * price.time_hours / total_cost;
}

nlohmann::json SimReport::to_json() const {
  nlohmann::json j;
  j["counts"] = {{"arrivals", arrivals}, {"completed", completed}, {"in_flight", in_flight}, {"measured", measured}};
  j["qps"] = qps;
  j["latency_us"] = {{"mean", mean_latency_us}, {"p50", p50_us}, {"p95", p95_us}, {"p99", p99_us}};
  j["breakdown_us"] = {{"preprocessing", breakdown.preprocessing_us},
                       {"batching", breakdown.batching_us},
                       {"execution_queueing", breakdown.execution_queueing_us},
                       {"execution", breakdown.execution_us}};
  j["utilization"] = utilization;
  j["window_us"] = {{"start", window_start_us}, {"end", window_end_us}};
  if (cost_efficiency) j["cost_efficiency"] = *cost_efficiency;
  return j;
}

SimReport build_report(const std::vector<TraceRecord>& traces, SimTime window_end, double warmup_fraction,
                       const std::map<std::string, double>& utilization, std::int64_t arrivals,
                       std::int64_t in_flight, const std::optional<PriceModel>& price) {
  if (window_end <= 0) throw std::invalid_argument("report: window_end must be positive");
  if (warmup_fraction < 0.0 || warmup_fraction >= 1.0) {
    throw std::invalid_argument("report: warmup_fraction must be in [0, 1)");
  }
  SimReport report;
  report.arrivals = arrivals;
  report.completed = static_cast<std::int64_t>(traces.size());
  report.in_flight = in_flight;
  report.window_start_us = static_cast<SimTime>(std::llround(warmup_fraction * static_cast<double>(window_end)));
  report.window_end_us = window_end;
  report.utilization = utilization;

  std::vector<double> latencies;
  std::int64_t sum_pre = 0;
  std::int64_t sum_batch = 0;
  std::int64_t sum_queue = 0;
  std::int64_t sum_exec = 0;
  std::int64_t sum_total = 0;
  for (const TraceRecord& r : traces) {
    r.check_ordering();
    if (r.exec_done < report.window_start_us || r.exec_done > window_end) continue;
    latencies.push_back(static_cast<double>(r.exec_done - r.arrival));
    sum_pre += r.preproc_done - r.arrival;
    sum_batch += r.batch_dispatched - r.preproc_done;
    sum_queue += r.exec_start - r.batch_dispatched;
    sum_exec += r.exec_done - r.exec_start;
    sum_total += r.exec_done - r.arrival;
  }
  if (latencies.empty()) throw std::runtime_error("report: empty steady-state window");
  report.measured = static_cast<std::int64_t>(latencies.size());
  double window_s = seconds_from_us(window_end - report.window_start_us);
  report.qps = static_cast<double>(report.measured) / window_s;
  report.p50_us = percentile(latencies, 50.0);
  report.p95_us = percentile(latencies, 95.0);
  report.p99_us = percentile(latencies, 99.0);
  double n = static_cast<double>(report.measured);
  report.mean_latency_us = static_cast<double>(sum_total) / n;
  report.breakdown.preprocessing_us = static_cast<double>(sum_pre) / n;
  report.breakdown.batching_us = static_cast<double>(sum_batch) / n;
  report.breakdown.execution_queueing_us = static_cast<double>(sum_queue) / n;
  report.breakdown.execution_us = static_cast<double>(sum_exec) / n;
  if (price) report.cost_efficiency = cost_efficiency(report.qps, *price);
  return report;
}

void write_request_trace_csv(const std::string& path, const std::vector<TraceRecord>& traces) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "id,arrival_us,preproc_done_us,dispatched_us,exec_start_us,exec_done_us,bucket,batch_size\n";
  for (const TraceRecord& r : traces) {
    out << r.id << ',' << r.arrival << ',' << r.preproc_done << ',' << r.batch_dispatched << ',' << r.exec_start
        << ',' << r.exec_done << ',' << r.bucket << ',' << r.batch_size << '\n';
  }
}

}  // namespace migbatchsim
