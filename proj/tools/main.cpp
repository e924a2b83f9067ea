#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "migbatchsim/config.hpp"
#include "migbatchsim/simulation.hpp"

namespace {

using namespace migbatchsim;

ScenarioConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
  ScenarioConfig cfg = ScenarioConfig::load(path);
  if (seed) cfg.sim.seed = *seed;
  return cfg;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out_dir,
            bool request_trace) {
  ScenarioConfig cfg = load_config(config_path, seed);
  if (request_trace && cfg.outputs.request_trace.empty()) cfg.outputs.request_trace = "requests.csv";
  if (cfg.outputs.report.empty()) cfg.outputs.report = "report.json";
  RunResult result = run_scenario(cfg);
  write_outputs(result, cfg.outputs, out_dir);
  const SimReport& r = result.report;
  std::printf("requests: %lld arrived, %lld completed, %lld in flight\n", static_cast<long long>(r.arrivals),
              static_cast<long long>(r.completed), static_cast<long long>(r.in_flight));
  std::printf("steady state: %.3f qps over [%.3fs, %.3fs]\n", r.qps, seconds_from_us(r.window_start_us),
              seconds_from_us(r.window_end_us));
  std::printf("latency: p50 %.3f ms, p95 %.3f ms, p99 %.3f ms\n", r.p50_us / 1000.0, r.p95_us / 1000.0,
              r.p99_us / 1000.0);
  std::printf("breakdown: preprocessing %.3f ms, batching %.3f ms, exec queueing %.3f ms, execution %.3f ms\n",
              r.breakdown.preprocessing_us / 1000.0, r.breakdown.batching_us / 1000.0,
              r.breakdown.execution_queueing_us / 1000.0, r.breakdown.execution_us / 1000.0);
  for (const auto& [name, value] : r.utilization) std::printf("utilization %s: %.4f\n", name.c_str(), value);
  if (r.cost_efficiency) std::printf("cost efficiency: %.6f queries/$\n", *r.cost_efficiency);
  return 0;
}

int cmd_sweep(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out_dir,
              int parallel) {
  ScenarioConfig cfg = load_config(config_path, seed);
  SweepResult result = run_sweep(cfg, parallel);
  std::filesystem::path out = out_dir.empty() ? "sweep.csv" : std::filesystem::path(out_dir) / "sweep.csv";
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  write_sweep_csv(out.string(), result);
  std::printf("%zu runs written to %s\n", result.rows.size(), out.string().c_str());
  return 0;
}

int cmd_tune(const std::string& profile_path, const std::string& model, int vgpus, int gpc, int dram_gb,
             double bucket_width, double delta, const std::string& out_path) {
  VGpuShape shape;
  shape.gpc = gpc;
  shape.dram_gb = dram_gb;
  MigConfig mig;
  mig.vgpu_count = vgpus;
  mig.shape = shape;
  mig.validate();
  ModelProfile profile = ModelProfile::load_csv(profile_path, model, shape);
  BatchingPolicy policy = build_batching_policy(profile, mig, bucket_width, delta);
  std::printf("model %s on %s\n", profile.model_name().c_str(), shape.notation(vgpus).c_str());
  for (int b = 0; b < policy.bucket_count(); ++b) {
    double lo = b * policy.bucket_width_s;
    double hi = (b + 1) * policy.bucket_width_s;
    std::printf("bucket %d [%.2fs, %.2fs): Batch_max %d\n", b, lo, hi, policy.batch_max[static_cast<std::size_t>(b)]);
  }
  std::printf("Tail_knee %.3f ms, Time_queue %.3f ms\n", static_cast<double>(policy.tail_knee_us) / 1000.0,
              static_cast<double>(policy.time_queue_us) / 1000.0);
  if (!out_path.empty()) {
    if (std::filesystem::path(out_path).has_parent_path()) {
      std::filesystem::create_directories(std::filesystem::path(out_path).parent_path());
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << policy_to_json(policy).dump(2) << '\n';
    std::printf("policy written to %s\n", out_path.c_str());
  }
  return 0;
}

int cmd_trace_dump(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out_path) {
  ScenarioConfig cfg = load_config(config_path, seed);
  RunResult result = run_scenario(cfg, /*force_event_trace=*/true);
  if (out_path.empty()) {
    std::printf("time_us,kind,payload_id\n");
    for (const std::string& line : result.event_trace) std::printf("%s\n", line.c_str());
  } else {
    if (std::filesystem::path(out_path).has_parent_path()) {
      std::filesystem::create_directories(std::filesystem::path(out_path).parent_path());
    }
    write_event_trace(out_path, result.event_trace);
    std::printf("%zu events written to %s\n", result.event_trace.size(), out_path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIG inference-server batching simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  bool request_trace = false;
  int parallel = 1;

  CLI::App* run = app.add_subcommand("run", "run one scenario and report steady-state metrics");
  run->add_option("--config", config_path, "scenario config JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--out", out_dir, "directory for output files (default: current directory)");
  run->add_flag("--trace", request_trace, "write the per-request trace CSV even if the config omits it");

  CLI::App* sweep = app.add_subcommand("sweep", "run the config's sweep axes and write sweep.csv");
  sweep->add_option("--config", config_path, "scenario config JSON with a sweep section")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--seed", seed, "override the scenario seed");
  sweep->add_option("--out", out_dir, "directory for sweep.csv");
  sweep->add_option("--parallel", parallel, "worker threads for sweep runs")->check(CLI::PositiveNumber);

  std::string profile_path;
  std::string model = "model";
  int vgpus = 7;
  int gpc = 1;
  int dram_gb = 5;
  double bucket_width = 2.5;
  double delta = 0.05;
  CLI::App* tune = app.add_subcommand("tune", "derive a batching policy from a profiling table");
  tune->add_option("--profile", profile_path, "profile CSV (batch,length_s,latency_us)")
      ->required()
      ->check(CLI::ExistingFile);
  tune->add_option("--model", model, "model name for log messages");
  tune->add_option("--vgpus", vgpus, "number of vGPU instances");
  tune->add_option("--gpc", gpc, "GPCs per vGPU");
  tune->add_option("--dram-gb", dram_gb, "DRAM GB per vGPU");
  tune->add_option("--bucket-width", bucket_width, "bucket width in seconds");
  tune->add_option("--delta", delta, "knee threshold");
  tune->add_option("--out", out_path, "write the policy JSON here");

  CLI::App* trace_dump = app.add_subcommand("trace-dump", "run a scenario and dump the full event trace");
  trace_dump->add_option("--config", config_path, "scenario config JSON")->required()->check(CLI::ExistingFile);
  trace_dump->add_option("--seed", seed, "override the scenario seed");
  trace_dump->add_option("--out", out_path, "event trace file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, seed, out_dir, request_trace);
    if (sweep->parsed()) return cmd_sweep(config_path, seed, out_dir, parallel);
    if (tune->parsed()) return cmd_tune(profile_path, model, vgpus, gpc, dram_gb, bucket_width, delta, out_path);
    if (trace_dump->parsed()) return cmd_trace_dump(config_path, seed, out_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
