#include "migbatchsim/server.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace migbatchsim {

ExecStage::ExecStage(int vgpu_count, const ModelProfile* profile, EventLoop* loop,
                     std::function<void(const Batch&, SimTime, SimTime)> on_assign,
                     std::function<void(const Batch&, SimTime, SimTime)> on_done)
    : profile_(profile),
      loop_(loop),
      on_assign_(std::move(on_assign)),
      on_done_(std::move(on_done)),
      vgpus_("vgpu", vgpu_count),
      vgpu_busy_(static_cast<std::size_t>(vgpu_count), false) {
  if (profile_ == nullptr) throw std::invalid_argument("exec: profile required");
  if (loop_ == nullptr) throw std::invalid_argument("exec: event loop required");
}

void ExecStage::offer(Batch&& batch, SimTime now) {
  if (batch.member_ids.empty()) throw std::invalid_argument("exec: empty batch");
  ready_.push_back(std::move(batch));
  try_assign(now);
}

void ExecStage::try_assign(SimTime now) {
  while (!ready_.empty() && vgpus_.busy() < vgpus_.capacity()) {
    int vgpu = -1;
    for (std::size_t i = 0; i < vgpu_busy_.size(); ++i) {
      if (!vgpu_busy_[i]) {
        vgpu = static_cast<int>(i);
        break;
      }
    }
    if (vgpu < 0) throw std::logic_error("exec: busy count disagrees with slot flags");
    Running run;
    run.batch = std::move(ready_.front());
    ready_.pop_front();
    run.vgpu = vgpu;
    run.exec_start = now;
    double latency = profile_->exec_latency_us(static_cast<double>(run.batch.size()), run.batch.longest_length_s);
    run.exec_done = now + static_cast<SimTime>(std::llround(latency));
    vgpu_busy_[static_cast<std::size_t>(vgpu)] = true;
    vgpus_.acquire(now);
    loop_->schedule(run.exec_done, EventKind::ExecDone, run.batch.id);
    if (on_assign_) on_assign_(run.batch, run.exec_start, run.exec_done);
    running_.emplace(run.batch.id, std::move(run));
  }
}

std::int64_t ExecStage::in_flight_members() const {
  std::int64_t total = 0;
  for (const auto& [id, run] : running_) total += run.batch.size();
  return total;
}

std::int64_t ExecStage::ready_members() const {
  std::int64_t total = 0;
  for (const Batch& b : ready_) total += b.size();
  return total;
}

void ExecStage::on_exec_done(const Event& ev) {
  auto it = running_.find(ev.payload);
  if (it == running_.end()) throw std::logic_error("exec: completion for unknown batch");
  Running run = std::move(it->second);
  running_.erase(it);
  if (run.exec_done != ev.time) throw std::logic_error("exec: completion at unexpected time");
  vgpu_busy_[static_cast<std::size_t>(run.vgpu)] = false;
  vgpus_.release(ev.time);
  ++batches_executed_;
  if (on_done_) on_done_(run.batch, run.exec_start, run.exec_done);
  try_assign(ev.time);
}

}  // namespace migbatchsim
