#pragma once

#include <string>
#include <vector>

#include "migbatchsim/engine.hpp"

namespace migbatchsim {

// GPU partition shape of one virtual GPU: "1g.5gb" etc. On a 7-GPC device at
// most 7 GPCs can be handed out in total.
struct VGpuShape {
  int gpc = 1;
  int dram_gb = 5;

  std::string notation(int vgpu_count) const;  // e.g. "1g.5gb(7x)"
};

struct MigConfig {
  int vgpu_count = 7;
  VGpuShape shape;

  void validate() const;  // throws std::invalid_argument
};

// Offline profiling table: execution latency of one vGPU per (batch size,
// input length) cell, measured under saturated feed. Lookup between grid
// points is bilinear; outside the grid it clamps with a warning.
class ModelProfile {
 public:
  ModelProfile(std::string model_name, VGpuShape shape, std::vector<int> batches,
               std::vector<double> lengths_s, std::vector<double> latency_us_row_major);

  static ModelProfile load_csv(const std::string& path, std::string model_name, VGpuShape shape);

  double exec_latency_us(double batch, double length_s) const;

  const std::string& model_name() const { return model_name_; }
  const VGpuShape& shape() const { return shape_; }
  const std::vector<int>& batch_grid() const { return batches_; }
  const std::vector<double>& length_grid() const { return lengths_s_; }
  double max_length_s() const { return lengths_s_.back(); }

 private:
  double cell(std::size_t bi, std::size_t li) const { return latency_us_[bi * lengths_s_.size() + li]; }
  void validate() const;

  std::string model_name_;
  VGpuShape shape_;
  std::vector<int> batches_;
  std::vector<double> lengths_s_;
  std::vector<double> latency_us_;  // row-major [batch][length]
};

struct CurvePoint {
  int batch = 0;
  double throughput_qps = 0.0;  // per vGPU under saturated feed: B / latency
  double p95_latency_us = 0.0;  // saturated-feed tail == batch latency
};

using Curve = std::vector<CurvePoint>;

// Saturated-feed throughput/tail curve for one input length over the given
// ascending batch sizes.
Curve sweep_curve(const ModelProfile& profile, double length_s, const std::vector<int>& batch_sizes);

// Knee: smallest profiled batch whose successor improves throughput by no
// more than delta (ties toward the smaller batch); the largest profiled batch
// if gains never diminish.
int find_batch_knee(const Curve& curve, double delta = 0.05);

double tail_at_knee(const Curve& curve, int knee_batch);

// Queueing budget per bucket: Tail_knee divided evenly across the vGPUs that
// serve the model in parallel.
SimTime derive_time_queue_us(double tail_knee_us, int vgpu_count);

struct BatchingPolicy {
  double bucket_width_s = 2.5;
  std::vector<int> batch_max;  // per bucket, non-increasing
  SimTime time_queue_us = 0;
  SimTime tail_knee_us = 0;

  int bucket_count() const { return static_cast<int>(batch_max.size()); }
  // Clamped floor(length / width); lengths past the last edge land in the
  // last bucket.
  int bucket_for(double length_s) const;
  void validate() const;
};

// Derives the full policy from a profile: one bucket per width-sized length
// band (upper band edge as the representative length, clamped to the profiled
// maximum), per-bucket Batch_max at the knee, Tail_knee as the median of
// per-bucket tails, Time_queue = Tail_knee / vgpu_count.
BatchingPolicy build_batching_policy(const ModelProfile& profile, const MigConfig& mig,
                                     double bucket_width_s = 2.5, double knee_delta = 0.05);

}  // namespace migbatchsim
