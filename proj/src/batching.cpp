#include "migbatchsim/batching.hpp"

#include <algorithm>
#include <stdexcept>

#include "migbatchsim/log.hpp"

namespace migbatchsim {

const char* to_string(DispatchTrigger trigger) {
  return trigger == DispatchTrigger::Size ? "size" : "timeout";
}

BucketScheduler::BucketScheduler(BatchingPolicy policy, EventLoop* loop, std::function<void(Batch&&)> on_dispatch)
    : policy_(std::move(policy)), loop_(loop), on_dispatch_(std::move(on_dispatch)) {
  policy_.validate();
  if (loop_ == nullptr) throw std::invalid_argument("scheduler: event loop required");
  if (!on_dispatch_) throw std::invalid_argument("scheduler: dispatch callback required");
  buckets_.resize(static_cast<std::size_t>(policy_.bucket_count()));
}

int BucketScheduler::cap_for_longest(double longest_s) const {
  return policy_.batch_max[static_cast<std::size_t>(policy_.bucket_for(longest_s))];
}

void BucketScheduler::enqueue(std::int64_t request_id, double length_s, SimTime ready) {
  int raw = static_cast<int>(length_s / policy_.bucket_width_s);
  int bucket = policy_.bucket_for(length_s);
  if (raw >= policy_.bucket_count()) {
    MBS_WARN("request %lld length %.3fs beyond last bucket edge, clamped to bucket %d",
             static_cast<long long>(request_id), length_s, bucket);
  }
  BucketState& state = buckets_[static_cast<std::size_t>(bucket)];
  if (!state.pending.empty() && ready < state.pending.back().ready) {
    throw std::logic_error("scheduler: enqueue not in ready order");
  }
  state.pending.push_back(PendingEntry{request_id, length_s, ready});
  poll_dispatch(ready);
  sync_timers(ready);
}

void BucketScheduler::on_timer(const Event& ev) {
  int bucket = static_cast<int>(ev.payload);
  if (bucket < 0 || bucket >= policy_.bucket_count()) throw std::logic_error("scheduler: timer for unknown bucket");
  BucketState& state = buckets_[static_cast<std::size_t>(bucket)];
  // A timer is live only if it matches the bucket's currently armed deadline;
  // anything else was superseded by a dispatch or merge.
  if (!state.armed_deadline || *state.armed_deadline != ev.time) return;
  state.armed_deadline.reset();
  poll_dispatch(ev.time);
  sync_timers(ev.time);
}

void BucketScheduler::poll_dispatch(SimTime now) {
  // Size triggers first (they never merge), then expired timeouts; both
  // sweeps walk buckets in ascending order for determinism.
  for (int b = 0; b < policy_.bucket_count(); ++b) {
    while (bucket_pending(b) >= static_cast<std::size_t>(policy_.batch_max[static_cast<std::size_t>(b)])) {
      dispatch_size(b, now);
    }
  }
  for (int b = 0; b < policy_.bucket_count(); ++b) {
    const BucketState& state = buckets_[static_cast<std::size_t>(b)];
    if (!state.pending.empty() && state.pending.front().ready + policy_.time_queue_us <= now) {
      dispatch_timeout(b, now);
    }
  }
}

void BucketScheduler::dispatch_size(int bucket, SimTime now) {
  BucketState& state = buckets_[static_cast<std::size_t>(bucket)];
  Batch batch;
  batch.id = next_batch_id_++;
  batch.dispatch_time = now;
  batch.bucket = bucket;
  batch.trigger = DispatchTrigger::Size;
  int take = policy_.batch_max[static_cast<std::size_t>(bucket)];
  for (int i = 0; i < take; ++i) {
    const PendingEntry& e = state.pending.front();
    batch.member_ids.push_back(e.id);
    batch.longest_length_s = std::max(batch.longest_length_s, e.length_s);
    state.pending.pop_front();
  }
  finalize(std::move(batch));
}

void BucketScheduler::dispatch_timeout(int bucket, SimTime now) {
  BucketState& state = buckets_[static_cast<std::size_t>(bucket)];
  Batch batch;
  batch.id = next_batch_id_++;
  batch.dispatch_time = now;
  batch.bucket = bucket;
  batch.trigger = DispatchTrigger::Timeout;
  std::size_t cap = static_cast<std::size_t>(policy_.batch_max[static_cast<std::size_t>(bucket)]);
  while (!state.pending.empty() && batch.member_ids.size() < cap) {
    const PendingEntry& e = state.pending.front();
    batch.member_ids.push_back(e.id);
    batch.longest_length_s = std::max(batch.longest_length_s, e.length_s);
    state.pending.pop_front();
  }
  merge_fill(batch, bucket);
  finalize(std::move(batch));
}

void BucketScheduler::merge_fill(Batch& batch, int origin) {
  int cap = cap_for_longest(batch.longest_length_s);
  bool up_blocked = false;
  int n = policy_.bucket_count();
  for (int d = 1; d < n && batch.size() < cap; ++d) {
    int lo = origin - d;
    if (lo >= 0) {
      std::deque<PendingEntry>& q = buckets_[static_cast<std::size_t>(lo)].pending;
      // Shorter neighbors can never shrink the cap: the longest member stays.
      while (batch.size() < cap && !q.empty()) {
        const PendingEntry& cand = q.front();
        batch.member_ids.push_back(cand.id);
        batch.longest_length_s = std::max(batch.longest_length_s, cand.length_s);
        q.pop_front();
      }
    }
    int hi = origin + d;
    if (hi < n && !up_blocked) {
      std::deque<PendingEntry>& q = buckets_[static_cast<std::size_t>(hi)].pending;
      while (batch.size() < cap && !q.empty()) {
        const PendingEntry& cand = q.front();
        double hyp_longest = std::max(batch.longest_length_s, cand.length_s);
        int hyp_cap = cap_for_longest(hyp_longest);
        if (batch.size() + 1 > hyp_cap) {
          // Admitting the candidate would overrun the cap its own length
          // imposes; stop pulling upward altogether.
          up_blocked = true;
          break;
        }
        batch.member_ids.push_back(cand.id);
        batch.longest_length_s = hyp_longest;
        cap = hyp_cap;
        q.pop_front();
      }
    }
  }
}

void BucketScheduler::finalize(Batch&& batch) {
  if (batch.member_ids.empty()) throw std::logic_error("scheduler: empty batch");
  if (batch.size() > cap_for_longest(batch.longest_length_s)) {
    throw std::logic_error("scheduler: batch exceeds Batch_max of its longest member");
  }
  DispatchRecord rec;
  rec.dispatch_time_us = batch.dispatch_time;
  rec.bucket = batch.bucket;
  rec.batch_size = batch.size();
  rec.longest_len_s = batch.longest_length_s;
  rec.trigger = batch.trigger;
  dispatch_log_.push_back(rec);
  on_dispatch_(std::move(batch));
}

void BucketScheduler::sync_timers(SimTime now) {
  for (int b = 0; b < policy_.bucket_count(); ++b) {
    BucketState& state = buckets_[static_cast<std::size_t>(b)];
    if (state.pending.empty()) {
      state.armed_deadline.reset();
      continue;
    }
    SimTime desired = state.pending.front().ready + policy_.time_queue_us;
    if (desired <= now) throw std::logic_error("scheduler: expired bucket survived poll_dispatch");
    if (state.armed_deadline && *state.armed_deadline == desired) continue;
    // The timer tracks the oldest pending request; superseded timer events
    // are recognized by deadline mismatch when they fire.
    state.armed_deadline = desired;
    loop_->schedule(desired, EventKind::BatchTimerFired, b);
  }
}

std::int64_t BucketScheduler::pending_total() const {
  std::int64_t total = 0;
  for (const BucketState& s : buckets_) total += static_cast<std::int64_t>(s.pending.size());
  return total;
}

std::size_t BucketScheduler::bucket_pending(int bucket) const {
  return buckets_[static_cast<std::size_t>(bucket)].pending.size();
}

std::optional<SimTime> BucketScheduler::armed_deadline(int bucket) const {
  return buckets_[static_cast<std::size_t>(bucket)].armed_deadline;
}

}  // namespace migbatchsim
