#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "migbatchsim/engine.hpp"
#include "migbatchsim/tuning.hpp"

namespace migbatchsim {

enum class DispatchTrigger { Size, Timeout };

const char* to_string(DispatchTrigger trigger);

struct Batch {
  std::int64_t id = 0;
  std::vector<std::int64_t> member_ids;
  double longest_length_s = 0.0;
  SimTime dispatch_time = 0;
  int bucket = 0;  // originating bucket
  DispatchTrigger trigger = DispatchTrigger::Size;

  int size() const { return static_cast<int>(member_ids.size()); }
};

struct DispatchRecord {
  SimTime dispatch_time_us = 0;
  int bucket = 0;
  int batch_size = 0;
  double longest_len_s = 0.0;
  DispatchTrigger trigger = DispatchTrigger::Size;
};

// Length-bucketized dynamic batcher. Each bucket accumulates preprocessed
// requests; a batch leaves when the bucket reaches its Batch_max (size
// trigger) or the oldest member has waited Time_queue (timeout trigger).
// Timeout batches top up from neighbor buckets, nearest first, as long as the
// batch stays within the Batch_max of the bucket of its longest member.
class BucketScheduler {
 public:
  BucketScheduler(BatchingPolicy policy, EventLoop* loop, std::function<void(Batch&&)> on_dispatch);

  // `ready` must equal the loop's current time (the PreprocDone instant).
  void enqueue(std::int64_t request_id, double length_s, SimTime ready);

  void on_timer(const Event& ev);

  const BatchingPolicy& policy() const { return policy_; }
  const std::vector<DispatchRecord>& dispatch_log() const { return dispatch_log_; }
  std::int64_t pending_total() const;
  std::size_t bucket_pending(int bucket) const;
  std::optional<SimTime> armed_deadline(int bucket) const;

 private:
  struct PendingEntry {
    std::int64_t id = 0;
    double length_s = 0.0;
    SimTime ready = 0;
  };

  struct BucketState {
    std::deque<PendingEntry> pending;  // ready times non-decreasing
    std::optional<SimTime> armed_deadline;
  };

  void poll_dispatch(SimTime now);
  void dispatch_size(int bucket, SimTime now);
  void dispatch_timeout(int bucket, SimTime now);
  void merge_fill(Batch& batch, int origin);
  void finalize(Batch&& batch);
  void sync_timers(SimTime now);
  int cap_for_longest(double longest_s) const;

  BatchingPolicy policy_;
  EventLoop* loop_ = nullptr;
  std::function<void(Batch&&)> on_dispatch_;
  std::vector<BucketState> buckets_;
  std::vector<DispatchRecord> dispatch_log_;
  std::int64_t next_batch_id_ = 0;
};

}  // namespace migbatchsim
