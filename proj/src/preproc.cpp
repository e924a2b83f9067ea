#include "migbatchsim/preproc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace migbatchsim {

double FunctionalUnitSpec::latency_us(double length_s) const {
  if (!(length_s > 0.0)) throw std::invalid_argument("unit " + name + ": length must be positive");
  return base_us * std::pow(length_s, length_exponent);
}

std::vector<double> CuSpec::stage_latencies_us(double length_s) const {
  std::vector<double> out;
  out.reserve(units.size());
  for (const FunctionalUnitSpec& u : units) out.push_back(u.latency_us(length_s));
  return out;
}

double CuSpec::total_latency_us(double length_s) const {
  double total = 0.0;
  for (const FunctionalUnitSpec& u : units) total += u.latency_us(length_s);
  return total;
}

void CuSpec::validate() const {
  if (units.empty()) throw std::invalid_argument("cu " + name + ": needs at least one unit");
  for (const FunctionalUnitSpec& u : units) {
    if (!(u.base_us > 0.0)) throw std::invalid_argument("cu " + name + ": unit " + u.name + ": base_us must be positive");
    if (u.length_exponent < 0.0) {
      throw std::invalid_argument("cu " + name + ": unit " + u.name + ": length_exponent must be non-negative");
    }
  }
}

void DpuSpec::validate() const {
  if (groups.empty()) throw std::invalid_argument("dpu: needs at least one cu group");
  if (transfer_overhead_us < 0.0) throw std::invalid_argument("dpu: transfer_overhead_us must be non-negative");
  for (const CuGroup& g : groups) {
    g.cu.validate();
    if (g.count < 1) throw std::invalid_argument("dpu: cu " + g.cu.name + ": count must be >= 1");
  }
}

double CpuPoolSpec::service_us(double length_s) const {
  if (!(length_s > 0.0)) throw std::invalid_argument("cpu pool: length must be positive");
  return service_base_us * std::pow(length_s, length_exponent);
}

double CpuPoolSpec::occupancy_us(double length_s) const { return service_us(length_s) / efficiency_cap; }

void CpuPoolSpec::validate() const {
  if (workers < 1) throw std::invalid_argument("cpu pool: workers must be >= 1");
  if (!(service_base_us > 0.0)) throw std::invalid_argument("cpu pool: service_base_us must be positive");
  if (length_exponent < 0.0) throw std::invalid_argument("cpu pool: length_exponent must be non-negative");
  if (!(efficiency_cap > 0.0) || efficiency_cap > 1.0) {
    throw std::invalid_argument("cpu pool: efficiency_cap must be in (0, 1]");
  }
}

std::vector<SimTime> pipeline_completions(const std::vector<std::vector<double>>& stage_us,
                                          const std::vector<SimTime>& ready) {
  if (stage_us.size() != ready.size()) throw std::invalid_argument("pipeline: stage rows and ready times differ");
  if (stage_us.empty()) return {};
  std::size_t stages = stage_us.front().size();
  if (stages == 0) throw std::invalid_argument("pipeline: needs at least one stage");
  std::vector<double> stage_free(stages, 0.0);
  std::vector<SimTime> done(stage_us.size());
  for (std::size_t i = 0; i < stage_us.size(); ++i) {
    if (stage_us[i].size() != stages) throw std::invalid_argument("pipeline: ragged stage matrix");
    if (i > 0 && ready[i] < ready[i - 1]) throw std::invalid_argument("pipeline: ready times must be non-decreasing");
    double t = static_cast<double>(ready[i]);
    for (std::size_t j = 0; j < stages; ++j) {
      double start = std::max(t, stage_free[j]);
      t = start + stage_us[i][j];
      stage_free[j] = t;
    }
    done[i] = static_cast<SimTime>(std::llround(t));
  }
  return done;
}

std::vector<SimTime> serial_completions(const std::vector<double>& total_us, const std::vector<SimTime>& ready) {
  if (total_us.size() != ready.size()) throw std::invalid_argument("serial: totals and ready times differ");
  std::vector<SimTime> done(total_us.size());
  double free_at = 0.0;
  for (std::size_t i = 0; i < total_us.size(); ++i) {
    if (i > 0 && ready[i] < ready[i - 1]) throw std::invalid_argument("serial: ready times must be non-decreasing");
    double start = std::max(static_cast<double>(ready[i]), free_at);
    free_at = start + total_us[i];
    done[i] = static_cast<SimTime>(std::llround(free_at));
  }
  return done;
}

std::vector<SimTime> cu_completions(const CuSpec& cu, const std::vector<double>& lengths_s,
                                    const std::vector<SimTime>& ready) {
  cu.validate();
  if (lengths_s.size() != ready.size()) throw std::invalid_argument("cu: lengths and ready times differ");
  if (cu.pipelined) {
    std::vector<std::vector<double>> stage_us;
    stage_us.reserve(lengths_s.size());
    for (double len : lengths_s) stage_us.push_back(cu.stage_latencies_us(len));
    return pipeline_completions(stage_us, ready);
  }
  std::vector<double> totals;
  totals.reserve(lengths_s.size());
  for (double len : lengths_s) totals.push_back(cu.total_latency_us(len));
  return serial_completions(totals, ready);
}

DpuState::DpuState(DpuSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  groups_.resize(spec_.groups.size());
  for (std::size_t g = 0; g < spec_.groups.size(); ++g) {
    const DpuSpec::CuGroup& group = spec_.groups[g];
    std::size_t stages = group.cu.pipelined ? group.cu.units.size() : 1;
    groups_[g].instances.assign(static_cast<std::size_t>(group.count), Instance{std::vector<double>(stages, 0.0)});
  }
}

void DpuState::set_window(SimTime start, SimTime end) {
  if (start < 0 || end < start) throw std::invalid_argument("dpu: bad accounting window");
  window_start_us_ = static_cast<double>(start);
  window_end_us_ = static_cast<double>(end);
  window_set_ = true;
}

void DpuState::accumulate(double start_us, double done_us) {
  if (!window_set_) return;
  double lo = std::max(start_us, window_start_us_);
  double hi = std::min(done_us, window_end_us_);
  if (hi > lo) productive_us_ += hi - lo;
}

SimTime DpuState::dispatch(double length_s, SimTime ready) {
  if (ready < last_ready_) throw std::logic_error("dpu: dispatch out of ready order");
  last_ready_ = ready;
  double t = static_cast<double>(ready);
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const CuSpec& cu = spec_.groups[g].cu;
    std::vector<Instance>& instances = groups_[g].instances;
    // Least-loaded instance: earliest first-stage availability, ties by index.
    std::size_t pick = 0;
    for (std::size_t i = 1; i < instances.size(); ++i) {
      if (instances[i].stage_free_us[0] < instances[pick].stage_free_us[0]) pick = i;
    }
    Instance& inst = instances[pick];
    if (cu.pipelined) {
      std::vector<double> stages = cu.stage_latencies_us(length_s);
      for (std::size_t j = 0; j < stages.size(); ++j) {
        double start = std::max(t, inst.stage_free_us[j]);
        t = start + stages[j];
        inst.stage_free_us[j] = t;
        accumulate(start, t);
      }
    } else {
      double start = std::max(t, inst.stage_free_us[0]);
      t = start + cu.total_latency_us(length_s);
      inst.stage_free_us[0] = t;
      accumulate(start, t);
    }
  }
  return static_cast<SimTime>(std::llround(t + spec_.transfer_overhead_us));
}

int DpuState::stage_server_count() const {
  int servers = 0;
  for (const DpuSpec::CuGroup& g : spec_.groups) {
    servers += g.count * (g.cu.pipelined ? static_cast<int>(g.cu.units.size()) : 1);
  }
  return servers;
}

double DpuState::productive_us() const { return productive_us_; }

CpuPoolState::CpuPoolState(CpuPoolSpec spec) : spec_(spec) { spec_.validate(); }

void CpuPoolState::set_window(SimTime start, SimTime end) {
  if (start < 0 || end < start) throw std::invalid_argument("cpu pool: bad accounting window");
  window_start_us_ = static_cast<double>(start);
  window_end_us_ = static_cast<double>(end);
  window_set_ = true;
}

CpuPoolState::Started CpuPoolState::start_request(std::int64_t id, double length_s, SimTime now) {
  ++busy_;
  double service = spec_.service_us(length_s);
  if (window_set_) {
    // Productive time is the service portion at the head of the occupancy.
    double lo = std::max(static_cast<double>(now), window_start_us_);
    double hi = std::min(static_cast<double>(now) + service, window_end_us_);
    if (hi > lo) productive_us_ += hi - lo;
  }
  Started s;
  s.id = id;
  s.length_s = length_s;
  s.start = now;
  s.done = now + static_cast<SimTime>(std::llround(spec_.occupancy_us(length_s)));
  return s;
}

std::optional<CpuPoolState::Started> CpuPoolState::on_arrival(std::int64_t id, double length_s, SimTime now) {
  if (busy_ < spec_.workers) return start_request(id, length_s, now);
  queue_.emplace_back(id, length_s);
  return std::nullopt;
}

std::optional<CpuPoolState::Started> CpuPoolState::on_service_done(SimTime now) {
  if (busy_ <= 0) throw std::logic_error("cpu pool: completion with no busy worker");
  --busy_;
  if (queue_.empty()) return std::nullopt;
  auto [id, length] = queue_.front();
  queue_.pop_front();
  return start_request(id, length, now);
}

}  // namespace migbatchsim
