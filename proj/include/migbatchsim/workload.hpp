#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "migbatchsim/engine.hpp"

namespace migbatchsim {

// Per-request stage timestamps, filled in as the request moves through the
// pipeline; -1 marks a stage not reached.
struct StageTimes {
  SimTime preproc_start = -1;
  SimTime preproc_done = -1;
  SimTime batch_dispatched = -1;
  SimTime exec_start = -1;
  SimTime exec_done = -1;
};

// One single-input inference query.
struct Request {
  std::int64_t id = 0;
  SimTime arrival = 0;
  double input_length_s = 0.0;
  StageTimes t;
};

struct LengthBin {
  double low_s = 0.0;
  double high_s = 0.0;
  double probability = 0.0;
};

// Empirical input-length histogram. Sampling picks a bin by probability, then
// a uniform offset within the bin.
struct LengthDistribution {
  std::vector<LengthBin> bins;

  void validate() const;  // throws std::invalid_argument
  double min_length_s() const;
  double max_length_s() const;
  double sample(std::mt19937_64& rng) const;
};

// Loads `low_s,high_s,count` rows; counts are normalized to probabilities.
LengthDistribution load_length_histogram(const std::string& path);

// Fixed-size image inputs carry a sentinel length so bucketing degenerates to
// a single bucket.
struct FixedImageInput {
  double sentinel_length_s = 1.0;
};

struct ConstantAudioInput {
  double length_s = 2.5;
};

struct VariableAudioInput {
  LengthDistribution distribution;
};

using InputSpec = std::variant<FixedImageInput, ConstantAudioInput, VariableAudioInput>;

struct TrafficSpec {
  double rate_qps = 0.0;
  SimTime duration = 0;
  std::uint64_t seed = 0;
  InputSpec input = FixedImageInput{};
};

// Uniform double in [0, 1) from the top 53 bits; keeps streams identical
// across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Exponential interarrival gap in seconds for the given rate.
inline double exponential_gap_s(std::mt19937_64& rng, double rate_qps) {
  return -std::log(1.0 - uniform01(rng)) / rate_qps;
}

// All arrivals in [0, duration), Poisson process at rate_qps, lengths drawn
// per the input spec. Ids are assigned in arrival order starting at 0.
std::vector<Request> generate_arrivals(const TrafficSpec& spec);

}  // namespace migbatchsim
