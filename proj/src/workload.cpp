#include "migbatchsim/workload.hpp"

#include <cmath>
#include <stdexcept>

#include "migbatchsim/csv.hpp"

namespace migbatchsim {

void LengthDistribution::validate() const {
  if (bins.empty()) throw std::invalid_argument("length histogram: no bins");
  double total = 0.0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const LengthBin& b = bins[i];
    if (!(b.low_s >= 0.0)) throw std::invalid_argument("length histogram: bin " + std::to_string(i) + " has negative low edge");
    if (!(b.high_s > b.low_s)) throw std::invalid_argument("length histogram: bin " + std::to_string(i) + " has high <= low");
    if (!(b.probability >= 0.0)) throw std::invalid_argument("length histogram: bin " + std::to_string(i) + " has negative mass");
    if (i > 0 && b.low_s < bins[i - 1].high_s) {
      throw std::invalid_argument("length histogram: bin " + std::to_string(i) + " overlaps or is out of order");
    }
    total += b.probability;
  }
  if (!(total > 0.0)) throw std::invalid_argument("length histogram: zero total mass");
}

double LengthDistribution::min_length_s() const {
  if (bins.empty()) throw std::invalid_argument("length histogram: no bins");
  return bins.front().low_s;
}

double LengthDistribution::max_length_s() const {
  if (bins.empty()) throw std::invalid_argument("length histogram: no bins");
  return bins.back().high_s;
}

double LengthDistribution::sample(std::mt19937_64& rng) const {
  double u = uniform01(rng);
  double cum = 0.0;
  std::size_t pick = bins.size() - 1;  // guard against fp shortfall in the sum
  for (std::size_t i = 0; i < bins.size(); ++i) {
    cum += bins[i].probability;
    if (u < cum) {
      pick = i;
      break;
    }
  }
  const LengthBin& b = bins[pick];
  return b.low_s + uniform01(rng) * (b.high_s - b.low_s);
}

LengthDistribution load_length_histogram(const std::string& path) {
  std::vector<csv::Row> rows = csv::load(path, "low_s,high_s,count");
  LengthDistribution dist;
  double total = 0.0;
  for (const csv::Row& row : rows) {
    if (row.fields.size() != 3) {
      throw std::runtime_error(path + ":" + std::to_string(row.line) + ": expected 3 fields, got " +
                               std::to_string(row.fields.size()));
    }
    LengthBin bin;
    bin.low_s = csv::parse_double(path, row, 0);
    bin.high_s = csv::parse_double(path, row, 1);
    bin.probability = csv::parse_double(path, row, 2);  // raw count for now
    if (bin.probability < 0.0) throw std::runtime_error(path + ":" + std::to_string(row.line) + ": negative count");
    if (!(bin.high_s > bin.low_s)) {
      throw std::runtime_error(path + ":" + std::to_string(row.line) + ": high_s must exceed low_s");
    }
    if (!dist.bins.empty() && bin.low_s < dist.bins.back().high_s) {
      throw std::runtime_error(path + ":" + std::to_string(row.line) + ": bins overlap or are out of order");
    }
    total += bin.probability;
    dist.bins.push_back(bin);
  }
  if (dist.bins.empty()) throw std::runtime_error(path + ": no bins");
  if (!(total > 0.0)) throw std::runtime_error(path + ": zero total mass");
  for (LengthBin& bin : dist.bins) bin.probability /= total;
  dist.validate();
  return dist;
}

std::vector<Request> generate_arrivals(const TrafficSpec& spec) {
  if (!(spec.rate_qps > 0.0)) throw std::invalid_argument("traffic: rate_qps must be positive");
  if (spec.duration <= 0) throw std::invalid_argument("traffic: duration must be positive");
  if (const auto* v = std::get_if<VariableAudioInput>(&spec.input)) v->distribution.validate();

  std::mt19937_64 rng(spec.seed);
  std::vector<Request> requests;
  double t_us = 0.0;
  std::int64_t next_id = 0;
  for (;;) {
    t_us += exponential_gap_s(rng, spec.rate_qps) * 1e6;
    SimTime arrival = static_cast<SimTime>(std::llround(t_us));
    if (arrival >= spec.duration) break;
    Request req;
    req.id = next_id++;
    req.arrival = arrival;
    if (const auto* fixed = std::get_if<FixedImageInput>(&spec.input)) {
      req.input_length_s = fixed->sentinel_length_s;
    } else if (const auto* constant = std::get_if<ConstantAudioInput>(&spec.input)) {
      req.input_length_s = constant->length_s;
    } else {
      req.input_length_s = std::get<VariableAudioInput>(spec.input).distribution.sample(rng);
    }
    requests.push_back(req);
  }
  return requests;
}

}  // namespace migbatchsim
