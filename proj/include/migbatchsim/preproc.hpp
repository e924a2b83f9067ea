#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "migbatchsim/engine.hpp"

namespace migbatchsim {

// Latency model base_us * length_s^exponent; exponent 0 gives the constant
// per-item cost of fixed-size image stages, exponent 1 scales with audio
// duration.
struct FunctionalUnitSpec {
  std::string name;
  double base_us = 0.0;
  double length_exponent = 0.0;

  double latency_us(double length_s) const;
};

// One compute-unit type. A pipelined CU overlaps consecutive requests across
// its functional units (flow shop); a non-pipelined CU is occupied by a single
// request end to end — its units stream samples of that one request, so
// cross-request overlap inside the CU is impossible.
struct CuSpec {
  std::string name;
  std::vector<FunctionalUnitSpec> units;
  bool pipelined = true;

  std::vector<double> stage_latencies_us(double length_s) const;
  double total_latency_us(double length_s) const;
  void validate() const;
};

// A DPU is an ordered chain of CU groups; every request traverses the groups
// in order, picking one instance per group.
struct DpuSpec {
  struct CuGroup {
    CuSpec cu;
    int count = 1;
  };
  std::vector<CuGroup> groups;
  double transfer_overhead_us = 50.0;

  void validate() const;
};

struct CpuPoolSpec {
  int workers = 1;
  double service_base_us = 0.0;
  double length_exponent = 0.0;
  double efficiency_cap = 1.0;  // long-run utilization ceiling, (0, 1]

  double service_us(double length_s) const;
  double occupancy_us(double length_s) const;  // service inflated by the cap
  void validate() const;
};

// FIFO flow shop: stage_us[i][j] is request i's latency on stage j. Ready
// times must be non-decreasing (arrival order). Completion of request i is
// C[i][last] with C[i][j] = max(C[i][j-1], C[i-1][j]) + stage_us[i][j].
std::vector<SimTime> pipeline_completions(const std::vector<std::vector<double>>& stage_us,
                                          const std::vector<SimTime>& ready);

// Single serial server per request stream: completion i is
// max(ready[i], completion[i-1]) + total_us[i].
std::vector<SimTime> serial_completions(const std::vector<double>& total_us,
                                        const std::vector<SimTime>& ready);

// Completions through one CU instance (no transfer overhead applied).
std::vector<SimTime> cu_completions(const CuSpec& cu, const std::vector<double>& lengths_s,
                                    const std::vector<SimTime>& ready);

// Incremental DPU state. Requests are dispatched in ready order; the whole
// chain (instance choices and completion) resolves at dispatch, so a single
// PreprocDone event per request suffices.
class DpuState {
 public:
  explicit DpuState(DpuSpec spec);

  // Window for productive-time accounting (utilization reporting).
  void set_window(SimTime start, SimTime end);

  // Returns the PreprocDone time: chain completion plus transfer overhead.
  SimTime dispatch(double length_s, SimTime ready);

  int stage_server_count() const;
  double productive_us() const;
  const DpuSpec& spec() const { return spec_; }

 private:
  struct Instance {
    std::vector<double> stage_free_us;  // pipelined: per unit; serial: size 1
  };
  struct Group {
    std::vector<Instance> instances;
  };

  void accumulate(double start_us, double done_us);

  DpuSpec spec_;
  std::vector<Group> groups_;
  SimTime last_ready_ = 0;
  double window_start_us_ = 0.0;
  double window_end_us_ = 0.0;
  bool window_set_ = false;
  double productive_us_ = 0.0;
};

// Worker pool with an efficiency ceiling: a request occupies its worker for
// service/efficiency_cap, of which only the service part counts as productive
// time, so long-run utilization never exceeds the cap.
class CpuPoolState {
 public:
  explicit CpuPoolState(CpuPoolSpec spec);

  void set_window(SimTime start, SimTime end);

  struct Started {
    std::int64_t id = 0;
    double length_s = 0.0;
    SimTime start = 0;
    SimTime done = 0;
  };

  // If a worker is free the request starts immediately and its completion is
  // returned; otherwise it queues FIFO and nothing is returned.
  std::optional<Started> on_arrival(std::int64_t id, double length_s, SimTime now);

  // Frees one worker (its request's service completed at `now`) and starts the
  // oldest waiter, if any.
  std::optional<Started> on_service_done(SimTime now);

  int busy_workers() const { return busy_; }
  std::size_t queued() const { return queue_.size(); }
  double productive_us() const { return productive_us_; }
  const CpuPoolSpec& spec() const { return spec_; }

 private:
  Started start_request(std::int64_t id, double length_s, SimTime now);

  CpuPoolSpec spec_;
  int busy_ = 0;
  std::deque<std::pair<std::int64_t, double>> queue_;  // (id, length)
  double window_start_us_ = 0.0;
  double window_end_us_ = 0.0;
  bool window_set_ = false;
  double productive_us_ = 0.0;
};

}  // namespace migbatchsim
