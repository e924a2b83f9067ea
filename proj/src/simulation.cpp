#include "migbatchsim/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "migbatchsim/log.hpp"
#include "migbatchsim/preproc.hpp"
#include "migbatchsim/workload.hpp"

namespace migbatchsim {

namespace {

// Per-request batch membership, filled at dispatch time.
struct BatchTag {
  int bucket = -1;
  std::int64_t batch_id = -1;
  int batch_size = 0;
};

InputSpec make_input(const InputConfig& input) {
  if (input.kind == "fixed_image") return FixedImageInput{input.sentinel_length_s};
  if (input.kind == "constant_audio") return ConstantAudioInput{input.length_s};
  VariableAudioInput var;
  var.distribution = load_length_histogram(input.histogram);
  return var;
}

BatchingPolicy resolve_policy(const ScenarioConfig& cfg, const ModelProfile& profile) {
  switch (cfg.policy.mode) {
    case PolicyConfig::Mode::Auto:
      return build_batching_policy(profile, cfg.mig, cfg.policy.bucket_width_s, cfg.policy.knee_delta);
    case PolicyConfig::Mode::Explicit: {
      BatchingPolicy policy = cfg.policy.explicit_policy;
      policy.validate();
      return policy;
    }
    case PolicyConfig::Mode::File:
      return load_policy_file(cfg.policy.path);
  }
  throw std::logic_error("unreachable policy mode");
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, bool force_event_trace) {
  cfg.validate();
  ModelProfile profile = ModelProfile::load_csv(cfg.profile.path, cfg.profile.model, cfg.mig.shape);
  BatchingPolicy policy = resolve_policy(cfg, profile);

  TrafficSpec traffic;
  traffic.rate_qps = cfg.traffic.rate_qps;
  traffic.duration = us_from_seconds(cfg.sim.duration_s);
  traffic.seed = cfg.sim.seed;
  traffic.input = make_input(cfg.traffic.input);
  std::vector<Request> requests = generate_arrivals(traffic);

  SimTime duration = traffic.duration;
  SimTime warmup_end = static_cast<SimTime>(std::llround(cfg.sim.warmup_fraction * static_cast<double>(duration)));

  EventLoop loop;
  RunResult result;
  result.policy = policy;

  bool collect_trace = force_event_trace || !cfg.outputs.event_trace.empty();
  if (collect_trace) {
    loop.set_trace_sink([&result](const Event& ev) {
      char line[64];
      std::snprintf(line, sizeof(line), "%lld,%s,%lld", static_cast<long long>(ev.time), to_string(ev.kind),
                    static_cast<long long>(ev.payload));
      result.event_trace.emplace_back(line);
    });
  }

  std::unique_ptr<CpuPoolState> cpu;
  std::unique_ptr<DpuState> dpu;
  if (cfg.preproc.cpu) {
    cpu = std::make_unique<CpuPoolState>(*cfg.preproc.cpu);
    cpu->set_window(warmup_end, duration);
  } else {
    dpu = std::make_unique<DpuState>(*cfg.preproc.dpu);
    dpu->set_window(warmup_end, duration);
  }

  std::vector<BatchTag> tags(requests.size());
  std::int64_t preproc_started = 0;
  std::int64_t preproc_completed = 0;

  ExecStage exec(
      cfg.mig.vgpu_count, &profile, &loop,
      [&requests](const Batch& batch, SimTime start, SimTime done) {
        for (std::int64_t id : batch.member_ids) {
          requests[static_cast<std::size_t>(id)].t.exec_start = start;
          requests[static_cast<std::size_t>(id)].t.exec_done = done;
        }
      },
      [&requests, &tags, &result, &policy](const Batch& batch, SimTime, SimTime) {
        for (std::int64_t id : batch.member_ids) {
          const Request& r = requests[static_cast<std::size_t>(id)];
          const BatchTag& tag = tags[static_cast<std::size_t>(id)];
          TraceRecord rec;
          rec.id = r.id;
          rec.arrival = r.arrival;
          rec.preproc_start = r.t.preproc_start;
          rec.preproc_done = r.t.preproc_done;
          rec.batch_dispatched = r.t.batch_dispatched;
          rec.exec_start = r.t.exec_start;
          rec.exec_done = r.t.exec_done;
          rec.bucket = policy.bucket_for(r.input_length_s);
          rec.batch_id = tag.batch_id;
          rec.batch_size = tag.batch_size;
          rec.check_ordering();
          result.traces.push_back(rec);
        }
      });
  exec.vgpus().set_mark(warmup_end);

  BucketScheduler scheduler(policy, &loop, [&requests, &tags, &exec](Batch&& batch) {
    for (std::int64_t id : batch.member_ids) {
      requests[static_cast<std::size_t>(id)].t.batch_dispatched = batch.dispatch_time;
      tags[static_cast<std::size_t>(id)] = BatchTag{batch.bucket, batch.id, batch.size()};
    }
    SimTime now = batch.dispatch_time;
    exec.offer(std::move(batch), now);
  });

  loop.set_handler(EventKind::Arrival, [&](const Event& ev) {
    Request& r = requests[static_cast<std::size_t>(ev.payload)];
    if (cpu) {
      auto started = cpu->on_arrival(r.id, r.input_length_s, ev.time);
      if (started) {
        r.t.preproc_start = started->start;
        ++preproc_started;
        loop.schedule(started->done, EventKind::PreprocDone, started->id);
      }
    } else {
      r.t.preproc_start = ev.time;
      ++preproc_started;
      SimTime done = dpu->dispatch(r.input_length_s, ev.time);
      loop.schedule(done, EventKind::PreprocDone, r.id);
    }
  });

  loop.set_handler(EventKind::PreprocDone, [&](const Event& ev) {
    Request& r = requests[static_cast<std::size_t>(ev.payload)];
    r.t.preproc_done = ev.time;
    ++preproc_completed;
    if (cpu) {
      auto next = cpu->on_service_done(ev.time);
      if (next) {
        requests[static_cast<std::size_t>(next->id)].t.preproc_start = next->start;
        ++preproc_started;
        loop.schedule(next->done, EventKind::PreprocDone, next->id);
      }
    }
    scheduler.enqueue(r.id, r.input_length_s, ev.time);
  });

  loop.set_handler(EventKind::BatchTimerFired, [&scheduler](const Event& ev) { scheduler.on_timer(ev); });
  loop.set_handler(EventKind::ExecDone, [&exec](const Event& ev) { exec.on_exec_done(ev); });
  loop.set_handler(EventKind::Shutdown, [&loop](const Event&) { loop.request_stop(); });

  for (const Request& r : requests) loop.schedule(r.arrival, EventKind::Arrival, r.id);
  loop.schedule(duration, EventKind::Shutdown, 0);
  loop.run_until(duration);

  result.dispatches = scheduler.dispatch_log();
  std::sort(result.traces.begin(), result.traces.end(),
            [](const TraceRecord& a, const TraceRecord& b) { return a.id < b.id; });

  result.final_counts.preproc_queued = cpu ? static_cast<std::int64_t>(cpu->queued()) : 0;
  result.final_counts.preproc_in_service = preproc_started - preproc_completed;
  result.final_counts.batcher_pending = scheduler.pending_total();
  std::int64_t completed = static_cast<std::int64_t>(result.traces.size());
  std::int64_t arrivals = static_cast<std::int64_t>(requests.size());
  result.final_counts.exec_ready = exec.ready_members();
  result.final_counts.exec_running = exec.in_flight_members();

  std::map<std::string, double> utilization;
  double window_us = static_cast<double>(duration - warmup_end);
  utilization["vgpu"] = exec.vgpus().busy_integral_since_mark_us(duration) /
                        (static_cast<double>(cfg.mig.vgpu_count) * window_us);
  if (cpu) {
    utilization["preproc"] = cpu->productive_us() / (static_cast<double>(cfg.preproc.cpu->workers) * window_us);
  } else {
    utilization["preproc"] = dpu->productive_us() / (static_cast<double>(dpu->stage_server_count()) * window_us);
  }

  result.report = build_report(result.traces, duration, cfg.sim.warmup_fraction, utilization, arrivals,
                               arrivals - completed, cfg.price);
  return result;
}

void write_dispatch_csv(const std::string& path, const std::vector<DispatchRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "dispatch_time_us,bucket,batch_size,longest_len_s,trigger\n";
  char buf[160];
  for (const DispatchRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%lld,%d,%d,%.6f,%s\n", static_cast<long long>(r.dispatch_time_us), r.bucket,
                  r.batch_size, r.longest_len_s, to_string(r.trigger));
    out << buf;
  }
}

void write_event_trace(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "time_us,kind,payload_id\n";
  for (const std::string& line : lines) out << line << '\n';
}

void write_outputs(const RunResult& result, const OutputConfig& outputs, const std::string& out_dir) {
  auto resolve = [&out_dir](const std::string& p) {
    std::filesystem::path fp(p);
    if (fp.is_absolute() || out_dir.empty()) return fp;
    return std::filesystem::path(out_dir) / fp;
  };
  auto ensure_parent = [](const std::filesystem::path& p) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  };
  if (!outputs.report.empty()) {
    std::filesystem::path p = resolve(outputs.report);
    ensure_parent(p);
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << result.report.to_json().dump(2) << '\n';
  }
  if (!outputs.request_trace.empty()) {
    std::filesystem::path p = resolve(outputs.request_trace);
    ensure_parent(p);
    write_request_trace_csv(p.string(), result.traces);
  }
  if (!outputs.dispatch_trace.empty()) {
    std::filesystem::path p = resolve(outputs.dispatch_trace);
    ensure_parent(p);
    write_dispatch_csv(p.string(), result.dispatches);
  }
  if (!outputs.event_trace.empty()) {
    std::filesystem::path p = resolve(outputs.event_trace);
    ensure_parent(p);
    write_event_trace(p.string(), result.event_trace);
  }
}

SweepResult run_sweep(const ScenarioConfig& base, int parallelism) {
  if (!base.sweep) throw std::invalid_argument("sweep: config has no sweep section");
  if (parallelism < 1) parallelism = 1;
  nlohmann::json base_json = base.to_json();
  const std::vector<SweepAxis>& axes = base.sweep->axes;

  SweepResult result;
  for (const SweepAxis& axis : axes) {
    result.axis_params.push_back(axis.param);
    nlohmann::json::json_pointer ptr(axis.param);
    if (!base_json.contains(ptr)) {
      throw std::invalid_argument("sweep: axis param " + axis.param + " does not exist in the config");
    }
  }

  std::vector<std::vector<nlohmann::json>> combos;
  if (axes.size() == 1) {
    for (const nlohmann::json& v : axes[0].values) combos.push_back({v});
  } else {
    for (const nlohmann::json& v0 : axes[0].values) {
      for (const nlohmann::json& v1 : axes[1].values) combos.push_back({v0, v1});
    }
  }

  std::vector<ScenarioConfig> configs;
  configs.reserve(combos.size());
  for (const std::vector<nlohmann::json>& combo : combos) {
    nlohmann::json j = base_json;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      j[nlohmann::json::json_pointer(axes[a].param)] = combo[a];
    }
    j.erase("sweep");
    j["outputs"] = nlohmann::json::object();  // sub-runs write no files
    configs.push_back(ScenarioConfig::from_json(j));
  }

  result.rows.resize(combos.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      RunResult run = run_scenario(configs[i]);
      result.rows[i].axis_values = combos[i];
      result.rows[i].report = run.report;
    }
  };
  if (parallelism == 1 || configs.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    int n = std::min<int>(parallelism, static_cast<int>(configs.size()));
    threads.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  return result;
}

void write_sweep_csv(const std::string& path, const SweepResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const std::string& param : result.axis_params) {
    std::string label = param;
    if (!label.empty() && label.front() == '/') label.erase(0, 1);
    std::replace(label.begin(), label.end(), '/', '.');
    out << label << ',';
  }
  out << "qps,p50_us,p95_us,p99_us,utilization_vgpu,utilization_preproc,measured,cost_efficiency\n";
  char buf[240];
  for (const SweepRow& row : result.rows) {
    for (const nlohmann::json& v : row.axis_values) out << v.dump() << ',';
    auto util = [&row](const char* key) {
      auto it = row.report.utilization.find(key);
      return it == row.report.utilization.end() ? 0.0 : it->second;
    };
    std::snprintf(buf, sizeof(buf), "%.6f,%.3f,%.3f,%.3f,%.6f,%.6f,%lld,", row.report.qps, row.report.p50_us,
                  row.report.p95_us, row.report.p99_us, util("vgpu"), util("preproc"),
                  static_cast<long long>(row.report.measured));
    out << buf;
    if (row.report.cost_efficiency) {
      std::snprintf(buf, sizeof(buf), "%.9f", *row.report.cost_efficiency);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace migbatchsim
