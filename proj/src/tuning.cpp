#include "migbatchsim/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "migbatchsim/csv.hpp"
#include "migbatchsim/log.hpp"

namespace migbatchsim {

std::string VGpuShape::notation(int vgpu_count) const {
  return std::to_string(gpc) + "g." + std::to_string(dram_gb) + "gb(" + std::to_string(vgpu_count) + "x)";
}

void MigConfig::validate() const {
  if (shape.gpc < 1 || shape.gpc > 7) throw std::invalid_argument("mig: vgpu_gpc must be in [1, 7]");
  if (shape.dram_gb < 1) throw std::invalid_argument("mig: vgpu_dram_gb must be >= 1");
  if (vgpu_count < 1 || vgpu_count > 7) throw std::invalid_argument("mig: vgpu_count must be in [1, 7]");
  if (vgpu_count * shape.gpc > 7) {
    throw std::invalid_argument("mig: " + shape.notation(vgpu_count) + " exceeds the 7 GPCs of one device");
  }
}

ModelProfile::ModelProfile(std::string model_name, VGpuShape shape, std::vector<int> batches,
                           std::vector<double> lengths_s, std::vector<double> latency_us_row_major)
    : model_name_(std::move(model_name)),
      shape_(shape),
      batches_(std::move(batches)),
      lengths_s_(std::move(lengths_s)),
      latency_us_(std::move(latency_us_row_major)) {
  validate();
}

void ModelProfile::validate() const {
  if (batches_.empty() || lengths_s_.empty()) throw std::invalid_argument("profile: empty grid");
  for (std::size_t i = 0; i < batches_.size(); ++i) {
    if (batches_[i] < 1) throw std::invalid_argument("profile: batch sizes must be >= 1");
    if (i > 0 && batches_[i] <= batches_[i - 1]) throw std::invalid_argument("profile: batch grid not ascending");
  }
  for (std::size_t i = 0; i < lengths_s_.size(); ++i) {
    if (!(lengths_s_[i] > 0.0)) throw std::invalid_argument("profile: lengths must be positive");
    if (i > 0 && lengths_s_[i] <= lengths_s_[i - 1]) throw std::invalid_argument("profile: length grid not ascending");
  }
  if (latency_us_.size() != batches_.size() * lengths_s_.size()) {
    throw std::invalid_argument("profile: latency table size does not match grid");
  }
  for (std::size_t bi = 0; bi < batches_.size(); ++bi) {
    for (std::size_t li = 0; li < lengths_s_.size(); ++li) {
      double v = cell(bi, li);
      if (!(v > 0.0)) {
        throw std::invalid_argument("profile: non-positive latency at batch=" + std::to_string(batches_[bi]) +
                                    " length=" + std::to_string(lengths_s_[li]));
      }
      if (bi > 0 && v < cell(bi - 1, li)) {
        throw std::invalid_argument("profile: latency not monotone in batch at batch=" +
                                    std::to_string(batches_[bi]) + " length=" + std::to_string(lengths_s_[li]));
      }
      if (li > 0 && v < cell(bi, li - 1)) {
        throw std::invalid_argument("profile: latency not monotone in length at batch=" +
                                    std::to_string(batches_[bi]) + " length=" + std::to_string(lengths_s_[li]));
      }
    }
  }
}

ModelProfile ModelProfile::load_csv(const std::string& path, std::string model_name, VGpuShape shape) {
  std::vector<csv::Row> rows = csv::load(path, "batch,length_s,latency_us");
  std::map<std::pair<long long, double>, double> cells;
  std::vector<int> batches;
  std::vector<double> lengths;
  for (const csv::Row& row : rows) {
    if (row.fields.size() != 3) {
      throw std::runtime_error(path + ":" + std::to_string(row.line) + ": expected 3 fields, got " +
                               std::to_string(row.fields.size()));
    }
    long long batch = csv::parse_int(path, row, 0);
    double length = csv::parse_double(path, row, 1);
    double latency = csv::parse_double(path, row, 2);
    if (batch < 1) throw std::runtime_error(path + ":" + std::to_string(row.line) + ": batch must be >= 1");
    auto key = std::make_pair(batch, length);
    if (cells.count(key) != 0) {
      throw std::runtime_error(path + ":" + std::to_string(row.line) + ": duplicate cell batch=" +
                               std::to_string(batch) + " length_s=" + std::to_string(length));
    }
    cells[key] = latency;
    if (std::find(batches.begin(), batches.end(), static_cast<int>(batch)) == batches.end()) {
      batches.push_back(static_cast<int>(batch));
    }
    if (std::find(lengths.begin(), lengths.end(), length) == lengths.end()) lengths.push_back(length);
  }
  if (cells.empty()) throw std::runtime_error(path + ": no profile rows");
  std::sort(batches.begin(), batches.end());
  std::sort(lengths.begin(), lengths.end());
  std::vector<double> table;
  table.reserve(batches.size() * lengths.size());
  for (int b : batches) {
    for (double l : lengths) {
      auto it = cells.find(std::make_pair(static_cast<long long>(b), l));
      if (it == cells.end()) {
        throw std::runtime_error(path + ": missing cell batch=" + std::to_string(b) + " length_s=" +
                                 std::to_string(l) + " (grid must be rectangular)");
      }
      table.push_back(it->second);
    }
  }
  return ModelProfile(std::move(model_name), shape, std::move(batches), std::move(lengths), std::move(table));
}

namespace {

// Index of the grid segment [i, i+1] bracketing v, plus interpolation weight.
template <typename T>
std::pair<std::size_t, double> bracket(const std::vector<T>& grid, double v) {
  if (grid.size() == 1) return {0, 0.0};
  auto it = std::upper_bound(grid.begin(), grid.end(), static_cast<T>(v));
  std::size_t hi = static_cast<std::size_t>(it - grid.begin());
  if (hi == 0) return {0, 0.0};
  if (hi >= grid.size()) hi = grid.size() - 1;
  std::size_t lo = hi - 1;
  double g0 = static_cast<double>(grid[lo]);
  double g1 = static_cast<double>(grid[hi]);
  double w = (v - g0) / (g1 - g0);
  if (w < 0.0) w = 0.0;
  if (w > 1.0) w = 1.0;
  return {lo, w};
}

}  // namespace

double ModelProfile::exec_latency_us(double batch, double length_s) const {
  if (!(batch > 0.0)) throw std::invalid_argument("profile: batch must be positive");
  if (!(length_s > 0.0)) throw std::invalid_argument("profile: length must be positive");
  double b = batch;
  double l = length_s;
  if (b < batches_.front() || b > batches_.back()) {
    double clamped = std::clamp(b, static_cast<double>(batches_.front()), static_cast<double>(batches_.back()));
    MBS_WARN("profile %s: batch %.3f outside grid [%d, %d], clamping", model_name_.c_str(), b, batches_.front(),
             batches_.back());
    b = clamped;
  }
  if (l < lengths_s_.front() || l > lengths_s_.back()) {
    double clamped = std::clamp(l, lengths_s_.front(), lengths_s_.back());
    MBS_WARN("profile %s: length %.3f outside grid [%.3f, %.3f], clamping", model_name_.c_str(), l,
             lengths_s_.front(), lengths_s_.back());
    l = clamped;
  }
  auto [bi, bw] = bracket(batches_, b);
  auto [li, lw] = bracket(lengths_s_, l);
  std::size_t bi1 = std::min(bi + 1, batches_.size() - 1);
  std::size_t li1 = std::min(li + 1, lengths_s_.size() - 1);
  double v00 = cell(bi, li);
  double v01 = cell(bi, li1);
  double v10 = cell(bi1, li);
  double v11 = cell(bi1, li1);
  double v0 = v00 + (v01 - v00) * lw;
  double v1 = v10 + (v11 - v10) * lw;
  return v0 + (v1 - v0) * bw;
}

Curve sweep_curve(const ModelProfile& profile, double length_s, const std::vector<int>& batch_sizes) {
  if (batch_sizes.empty()) throw std::invalid_argument("sweep: no batch sizes");
  for (std::size_t i = 1; i < batch_sizes.size(); ++i) {
    if (batch_sizes[i] <= batch_sizes[i - 1]) throw std::invalid_argument("sweep: batch sizes must be ascending");
  }
  Curve curve;
  curve.reserve(batch_sizes.size());
  for (int b : batch_sizes) {
    if (b < 1) throw std::invalid_argument("sweep: batch sizes must be >= 1");
    double latency = profile.exec_latency_us(static_cast<double>(b), length_s);
    CurvePoint p;
    p.batch = b;
    p.throughput_qps = static_cast<double>(b) / (latency * 1e-6);
    p.p95_latency_us = latency;  // under saturated feed every batch runs full
    curve.push_back(p);
  }
  return curve;
}

int find_batch_knee(const Curve& curve, double delta) {
  if (curve.size() < 2) throw std::invalid_argument("knee: curve needs at least two points");
  if (!(delta > 0.0) || delta >= 1.0) throw std::invalid_argument("knee: delta must be in (0, 1)");
  for (const CurvePoint& p : curve) {
    if (!(p.throughput_qps > 0.0)) throw std::invalid_argument("knee: throughput must be positive");
  }
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    if (curve[i + 1].throughput_qps <= (1.0 + delta) * curve[i].throughput_qps) return curve[i].batch;
  }
  return curve.back().batch;
}

double tail_at_knee(const Curve& curve, int knee_batch) {
  for (const CurvePoint& p : curve) {
    if (p.batch == knee_batch) return p.p95_latency_us;
  }
  throw std::invalid_argument("knee: batch " + std::to_string(knee_batch) + " not in curve");
}

SimTime derive_time_queue_us(double tail_knee_us, int vgpu_count) {
  if (!(tail_knee_us > 0.0)) throw std::invalid_argument("time_queue: tail_knee_us must be positive");
  if (vgpu_count < 1) throw std::invalid_argument("time_queue: vgpu_count must be >= 1");
  return static_cast<SimTime>(std::llround(tail_knee_us / static_cast<double>(vgpu_count)));
}

int BatchingPolicy::bucket_for(double length_s) const {
  if (!(length_s > 0.0)) throw std::invalid_argument("policy: length must be positive");
  if (!(bucket_width_s > 0.0)) throw std::invalid_argument("policy: bucket_width_s must be positive");
  int idx = static_cast<int>(std::floor(length_s / bucket_width_s));
  if (idx >= bucket_count()) idx = bucket_count() - 1;
  if (idx < 0) idx = 0;
  return idx;
}

void BatchingPolicy::validate() const {
  if (!(bucket_width_s > 0.0)) throw std::invalid_argument("policy: bucket_width_s must be positive");
  if (batch_max.empty()) throw std::invalid_argument("policy: batch_max must not be empty");
  for (std::size_t i = 0; i < batch_max.size(); ++i) {
    if (batch_max[i] < 1) throw std::invalid_argument("policy: batch_max must be >= 1");
    if (i > 0 && batch_max[i] > batch_max[i - 1]) {
      throw std::invalid_argument("policy: batch_max must be non-increasing with bucket index");
    }
  }
  if (time_queue_us <= 0) throw std::invalid_argument("policy: time_queue_us must be positive");
  if (tail_knee_us <= 0) throw std::invalid_argument("policy: tail_knee_us must be positive");
}

BatchingPolicy build_batching_policy(const ModelProfile& profile, const MigConfig& mig, double bucket_width_s,
                                     double knee_delta) {
  mig.validate();
  if (!(bucket_width_s > 0.0)) throw std::invalid_argument("policy: bucket_width_s must be positive");
  BatchingPolicy policy;
  policy.bucket_width_s = bucket_width_s;
  double max_len = profile.max_length_s();
  int buckets = 1;
  if (profile.length_grid().size() > 1) {
    buckets = static_cast<int>(std::ceil(max_len / bucket_width_s - 1e-9));
    if (buckets < 1) buckets = 1;
  }
  std::vector<double> tails;
  for (int b = 0; b < buckets; ++b) {
    // Representative length: the bucket's upper edge, clamped to the grid.
    double rep = std::min((static_cast<double>(b) + 1.0) * bucket_width_s, max_len);
    Curve curve = sweep_curve(profile, rep, profile.batch_grid());
    int knee = find_batch_knee(curve, knee_delta);
    policy.batch_max.push_back(knee);
    tails.push_back(tail_at_knee(curve, knee));
  }
  std::vector<double> sorted_tails = tails;
  std::sort(sorted_tails.begin(), sorted_tails.end());
  std::size_t n = sorted_tails.size();
  double tail_median = (n % 2 == 1) ? sorted_tails[n / 2] : 0.5 * (sorted_tails[n / 2 - 1] + sorted_tails[n / 2]);
  policy.tail_knee_us = static_cast<SimTime>(std::llround(tail_median));
  policy.time_queue_us = derive_time_queue_us(tail_median, mig.vgpu_count);
  policy.validate();
  return policy;
}

}  // namespace migbatchsim
