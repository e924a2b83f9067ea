#include <algorithm>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "migbatchsim/preproc.hpp"
#include "oracles.hpp"

using namespace migbatchsim;

namespace {

CuSpec serial_cu(std::vector<double> bases, double exponent = 0.0) {
  CuSpec cu;
  cu.name = "serial";
  cu.pipelined = false;
  for (std::size_t i = 0; i < bases.size(); ++i) {
    cu.units.push_back(FunctionalUnitSpec{"u" + std::to_string(i), bases[i], exponent});
  }
  return cu;
}

DpuSpec chain_of_serial(std::vector<std::vector<double>> groups, double transfer_us) {
  DpuSpec dpu;
  dpu.transfer_overhead_us = transfer_us;
  for (auto& bases : groups) {
    DpuSpec::CuGroup g;
    g.cu = serial_cu(bases);
    g.count = 1;
    dpu.groups.push_back(std::move(g));
  }
  return dpu;
}

}  // namespace

TEST_CASE("functional unit latency scales as base * length^exponent") {
  FunctionalUnitSpec constant{"resize", 400.0, 0.0};
  CHECK(constant.latency_us(1.0) == doctest::Approx(400.0));
  CHECK(constant.latency_us(12.0) == doctest::Approx(400.0));
  FunctionalUnitSpec linear{"mel", 340.0, 1.0};
  CHECK(linear.latency_us(2.5) == doctest::Approx(850.0));
  CHECK_THROWS_AS(linear.latency_us(0.0), std::invalid_argument);
  CHECK_THROWS_AS(linear.latency_us(-1.0), std::invalid_argument);
}

TEST_CASE("one cpu worker serializes two simultaneous 10ms requests") {
  CpuPoolSpec spec;
  spec.workers = 1;
  spec.service_base_us = 10000.0;
  spec.efficiency_cap = 1.0;
  CpuPoolState pool(spec);
  pool.set_window(0, 1'000'000);
  auto first = pool.on_arrival(0, 1.0, 0);
  REQUIRE(first.has_value());
  CHECK(first->done == 10000);
  auto second = pool.on_arrival(1, 1.0, 0);
  CHECK_FALSE(second.has_value());
  CHECK(pool.queued() == 1);
  auto started = pool.on_service_done(10000);
  REQUIRE(started.has_value());
  CHECK(started->id == 1);
  CHECK(started->start == 10000);
  CHECK(started->done == 20000);
}

TEST_CASE("k simultaneous requests on M workers finish in ceil(k/M) rounds") {
  const int M = 3;
  const int k = 8;
  const SimTime t = 10000;
  CpuPoolSpec spec;
  spec.workers = M;
  spec.service_base_us = static_cast<double>(t);
  spec.efficiency_cap = 1.0;
  CpuPoolState pool(spec);
  pool.set_window(0, 10'000'000);
  std::vector<SimTime> done_times;
  std::vector<SimTime> running;
  for (int i = 0; i < k; ++i) {
    auto started = pool.on_arrival(i, 1.0, 0);
    if (started) running.push_back(started->done);
  }
  while (!running.empty()) {
    std::sort(running.begin(), running.end());
    SimTime now = running.front();
    running.erase(running.begin());
    done_times.push_back(now);
    auto next = pool.on_service_done(now);
    if (next) running.push_back(next->done);
  }
  REQUIRE(done_times.size() == static_cast<std::size_t>(k));
  SimTime makespan = *std::max_element(done_times.begin(), done_times.end());
  CHECK(makespan == ((k + M - 1) / M) * t);
}

TEST_CASE("efficiency cap limits sustained throughput and productive utilization") {
  // cap 0.9: each 9ms service occupies its worker 10ms, so 2 workers carry
  // exactly 0.9 * M / t = 200 qps and productive utilization is exactly 0.9.
  const int M = 2;
  CpuPoolSpec spec;
  spec.workers = M;
  spec.service_base_us = 9000.0;
  spec.efficiency_cap = 0.9;
  CpuPoolState pool(spec);
  const int k = 40;
  pool.set_window(0, 10'000'000);
  std::vector<SimTime> running;
  std::vector<SimTime> all_done;
  for (int i = 0; i < k; ++i) {
    auto started = pool.on_arrival(i, 1.0, 0);
    if (started) running.push_back(started->done);
  }
  while (!running.empty()) {
    std::sort(running.begin(), running.end());
    SimTime now = running.front();
    running.erase(running.begin());
    all_done.push_back(now);
    auto next = pool.on_service_done(now);
    if (next) running.push_back(next->done);
  }
  SimTime makespan = all_done.back();
  CHECK(makespan == (k / M) * 10000);  // occupancy 10ms each
  double qps = static_cast<double>(k) / seconds_from_us(makespan);
  CHECK(qps == doctest::Approx(0.9 * M / 0.009).epsilon(1e-9));
  double utilization = pool.productive_us() / (static_cast<double>(M) * static_cast<double>(makespan));
  CHECK(utilization == doctest::Approx(0.9));
}

TEST_CASE("cpu pool spec validation") {
  CpuPoolSpec spec;
  spec.workers = 2;
  spec.service_base_us = 100.0;
  spec.efficiency_cap = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.efficiency_cap = 1.5;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.efficiency_cap = 1.0;
  spec.workers = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("pipelined stages {2,3,1,2}ms give completions 8ms and 11ms") {
  std::vector<std::vector<double>> stages(2, {2000.0, 3000.0, 1000.0, 2000.0});
  std::vector<SimTime> done = pipeline_completions(stages, {0, 0});
  REQUIRE(done.size() == 2);
  CHECK(done[0] == 8000);
  CHECK(done[1] == 11000);
}

TEST_CASE("equal-stage pipeline completes k requests in (#stages + k - 1) * s") {
  const double s = 500.0;
  for (int num_stages : {1, 3, 5}) {
    for (int k : {1, 2, 7}) {
      std::vector<std::vector<double>> stages(k, std::vector<double>(num_stages, s));
      std::vector<SimTime> done = pipeline_completions(stages, std::vector<SimTime>(k, 0));
      CHECK(done.back() == static_cast<SimTime>((num_stages + k - 1) * s));
    }
  }
}

TEST_CASE("flow shop matches brute-force tick simulation") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng() % 6);
    int stages = 1 + static_cast<int>(rng() % 4);
    std::vector<std::vector<double>> d(n, std::vector<double>(stages));
    std::vector<std::vector<std::int64_t>> di(n, std::vector<std::int64_t>(stages));
    std::vector<SimTime> ready(n, 0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < stages; ++j) {
        di[i][j] = 1 + static_cast<std::int64_t>(rng() % 20);
        d[i][j] = static_cast<double>(di[i][j]);
      }
      ready[i] = static_cast<SimTime>(rng() % 30);
    }
    std::sort(ready.begin(), ready.end());
    std::vector<SimTime> fast = pipeline_completions(d, ready);
    std::vector<SimTime> slow = oracles::flow_shop_brute(di, ready);
    REQUIRE(fast == slow);
  }
}

TEST_CASE("audio split: resample+mel then normalize beats the monolithic unit") {
  // Two requests at t=0; first CU takes a, second takes b. Split completions
  // are {a+b, a+max(a,b)+b}; the monolithic serial unit gives {a+b, 2(a+b)}.
  const double a = 4000.0, b = 2000.0;
  DpuSpec split = chain_of_serial({{a}, {b}}, 0.0);
  DpuState split_state(split);
  CHECK(split_state.dispatch(1.0, 0) == 6000);
  CHECK(split_state.dispatch(1.0, 0) == 10000);
  DpuSpec mono = chain_of_serial({{a, b}}, 0.0);
  DpuState mono_state(mono);
  CHECK(mono_state.dispatch(1.0, 0) == 6000);
  CHECK(mono_state.dispatch(1.0, 0) == 12000);
}

TEST_CASE("degenerate second stage makes split and monolithic identical") {
  const double a = 4000.0, b = 0.0;
  std::vector<std::vector<double>> split_stages(3, {a, b});
  std::vector<SimTime> ready{0, 0, 0};
  std::vector<SimTime> split_done = pipeline_completions(split_stages, ready);
  std::vector<SimTime> mono_done = serial_completions({a + b, a + b, a + b}, ready);
  CHECK(split_done == mono_done);
}

TEST_CASE("balanced split halves steady-state spacing versus monolithic") {
  const double s = 3000.0;
  const int k = 6;
  std::vector<SimTime> ready(k, 0);
  std::vector<std::vector<double>> split_stages(k, {s, s});
  std::vector<SimTime> split_done = pipeline_completions(split_stages, ready);
  std::vector<SimTime> mono_done = serial_completions(std::vector<double>(k, 2 * s), ready);
  CHECK(split_done.back() == static_cast<SimTime>((k + 1) * s));
  CHECK(mono_done.back() == static_cast<SimTime>(2 * k * s));
}

TEST_CASE("split never loses to monolithic on any request") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    double a = 1.0 + static_cast<double>(rng() % 10000);
    double b = 1.0 + static_cast<double>(rng() % 10000);
    int k = 1 + static_cast<int>(rng() % 5);
    std::vector<SimTime> ready(k);
    for (int i = 0; i < k; ++i) ready[i] = static_cast<SimTime>(rng() % 5000);
    std::sort(ready.begin(), ready.end());
    std::vector<std::vector<double>> split_stages(k, {a, b});
    std::vector<SimTime> split_done = pipeline_completions(split_stages, ready);
    std::vector<SimTime> mono_done = serial_completions(std::vector<double>(k, a + b), ready);
    for (int i = 0; i < k; ++i) REQUIRE(split_done[i] <= mono_done[i]);
  }
}

TEST_CASE("two instances of one cu type absorb simultaneous requests in parallel") {
  DpuSpec dpu;
  dpu.transfer_overhead_us = 50.0;
  DpuSpec::CuGroup g;
  g.cu.name = "vision";
  g.cu.pipelined = true;
  g.cu.units = {FunctionalUnitSpec{"s0", 3000.0, 0.0}, FunctionalUnitSpec{"s1", 5000.0, 0.0}};
  g.count = 2;
  dpu.groups.push_back(g);
  DpuState state(dpu);
  CHECK(state.dispatch(1.0, 0) == 8050);
  CHECK(state.dispatch(1.0, 0) == 8050);
  CHECK(state.stage_server_count() == 4);
}

TEST_CASE("zero transfer overhead returns the raw chain completion") {
  DpuSpec with_overhead = chain_of_serial({{1000.0, 2000.0}}, 50.0);
  DpuSpec without = chain_of_serial({{1000.0, 2000.0}}, 0.0);
  DpuState a(with_overhead), b(without);
  CHECK(a.dispatch(1.0, 0) == 3050);
  CHECK(b.dispatch(1.0, 0) == 3000);
}

TEST_CASE("single request latency is the sum of all stages plus overhead") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    DpuSpec dpu;
    dpu.transfer_overhead_us = static_cast<double>(rng() % 100);
    double expected = dpu.transfer_overhead_us;
    int n_groups = 1 + static_cast<int>(rng() % 3);
    for (int gi = 0; gi < n_groups; ++gi) {
      DpuSpec::CuGroup g;
      g.cu.pipelined = (rng() % 2) == 0;
      g.cu.name = "g" + std::to_string(gi);
      g.count = 1 + static_cast<int>(rng() % 3);
      int units = 1 + static_cast<int>(rng() % 4);
      for (int u = 0; u < units; ++u) {
        double base = 1.0 + static_cast<double>(rng() % 2000);
        g.cu.units.push_back(FunctionalUnitSpec{"u", base, 0.0});
        expected += base;
      }
      dpu.groups.push_back(g);
    }
    DpuState state(dpu);
    CHECK(state.dispatch(1.0, 0) == static_cast<SimTime>(std::llround(expected)));
  }
}

TEST_CASE("dpu dispatch enforces ready order") {
  DpuSpec dpu = chain_of_serial({{1000.0}}, 0.0);
  DpuState state(dpu);
  state.dispatch(1.0, 100);
  CHECK_THROWS_AS(state.dispatch(1.0, 50), std::logic_error);
}

TEST_CASE("cu_completions matches the underlying schedules") {
  CuSpec pipelined;
  pipelined.name = "p";
  pipelined.pipelined = true;
  pipelined.units = {FunctionalUnitSpec{"a", 2000.0, 0.0}, FunctionalUnitSpec{"b", 3000.0, 0.0}};
  std::vector<SimTime> ready{0, 1000, 1500};
  std::vector<double> lengths{1.0, 1.0, 1.0};
  std::vector<std::vector<double>> stages(3, {2000.0, 3000.0});
  CHECK(cu_completions(pipelined, lengths, ready) == pipeline_completions(stages, ready));

  CuSpec serial = serial_cu({2000.0, 3000.0});
  CHECK(cu_completions(serial, lengths, ready) == serial_completions({5000.0, 5000.0, 5000.0}, ready));
}

TEST_CASE("spec validation rejects empty or non-positive configurations") {
  CuSpec cu;
  cu.name = "empty";
  CHECK_THROWS_AS(cu.validate(), std::invalid_argument);
  cu.units.push_back(FunctionalUnitSpec{"u", 0.0, 0.0});
  CHECK_THROWS_AS(cu.validate(), std::invalid_argument);
  DpuSpec dpu;
  CHECK_THROWS_AS(dpu.validate(), std::invalid_argument);
}
