#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>
#include <vector>

#include "migbatchsim/batching.hpp"
#include "migbatchsim/engine.hpp"
#include "migbatchsim/tuning.hpp"

namespace migbatchsim {

// Pool of identical vGPU instances executing dispatched batches. Batches wait
// FIFO in a ready queue; an idle vGPU (lowest index first) picks the head and
// runs it for the profiled latency of (batch size, longest member length).
class ExecStage {
 public:
  // on_assign fires when a batch starts executing, on_done when it finishes;
  // both receive the batch plus its execution interval.
  ExecStage(int vgpu_count, const ModelProfile* profile, EventLoop* loop,
            std::function<void(const Batch&, SimTime, SimTime)> on_assign,
            std::function<void(const Batch&, SimTime, SimTime)> on_done);

  void offer(Batch&& batch, SimTime now);
  void on_exec_done(const Event& ev);

  Resource& vgpus() { return vgpus_; }
  std::size_t ready_depth() const { return ready_.size(); }
  std::int64_t in_flight() const { return static_cast<std::int64_t>(running_.size()); }
  std::int64_t in_flight_members() const;
  std::int64_t ready_members() const;
  std::int64_t batches_executed() const { return batches_executed_; }

 private:
  struct Running {
    Batch batch;
    int vgpu = -1;
    SimTime exec_start = 0;
    SimTime exec_done = 0;
  };

  void try_assign(SimTime now);

  const ModelProfile* profile_ = nullptr;
  EventLoop* loop_ = nullptr;
  std::function<void(const Batch&, SimTime, SimTime)> on_assign_;
  std::function<void(const Batch&, SimTime, SimTime)> on_done_;
  Resource vgpus_;
  std::vector<bool> vgpu_busy_;
  std::deque<Batch> ready_;
  std::unordered_map<std::int64_t, Running> running_;  // keyed by batch id
  std::int64_t batches_executed_ = 0;
};

}  // namespace migbatchsim
