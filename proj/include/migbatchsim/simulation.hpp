#pragma once

#include <memory>
#include <string>
#include <vector>

#include "migbatchsim/batching.hpp"
#include "migbatchsim/config.hpp"
#include "migbatchsim/metrics.hpp"
#include "migbatchsim/server.hpp"

namespace migbatchsim {

// Pipeline occupancy at shutdown, for conservation checks.
struct FinalCounts {
  std::int64_t preproc_queued = 0;
  std::int64_t preproc_in_service = 0;
  std::int64_t batcher_pending = 0;
  std::int64_t exec_ready = 0;     // requests inside undispatched ready batches
  std::int64_t exec_running = 0;   // requests inside executing batches
};

struct RunResult {
  SimReport report;
  BatchingPolicy policy;
  std::vector<TraceRecord> traces;  // completed requests, sorted by id
  std::vector<DispatchRecord> dispatches;
  std::vector<std::string> event_trace;  // populated when an event trace is requested
  FinalCounts final_counts;
};

// Runs one scenario end to end. `force_event_trace` collects the event trace
// even when no output path is configured.
RunResult run_scenario(const ScenarioConfig& cfg, bool force_event_trace = false);

// Writes whichever outputs the config names, relative paths under out_dir.
void write_outputs(const RunResult& result, const OutputConfig& outputs, const std::string& out_dir);

void write_dispatch_csv(const std::string& path, const std::vector<DispatchRecord>& records);
void write_event_trace(const std::string& path, const std::vector<std::string>& lines);

struct SweepRow {
  std::vector<nlohmann::json> axis_values;
  SimReport report;
};

struct SweepResult {
  std::vector<std::string> axis_params;
  std::vector<SweepRow> rows;
};

// Expands the config's sweep axes (cartesian product, first axis outermost)
// and runs every combination; `parallelism` > 1 runs combinations on worker
// threads without affecting results.
SweepResult run_sweep(const ScenarioConfig& base, int parallelism = 1);

void write_sweep_csv(const std::string& path, const SweepResult& result);

}  // namespace migbatchsim
