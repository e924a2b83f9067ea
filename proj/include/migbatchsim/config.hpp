#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "migbatchsim/metrics.hpp"
#include "migbatchsim/preproc.hpp"
#include "migbatchsim/tuning.hpp"

namespace migbatchsim {

struct InputConfig {
  std::string kind = "fixed_image";  // fixed_image | constant_audio | variable_audio
  double sentinel_length_s = 1.0;    // fixed_image
  double length_s = 2.5;             // constant_audio
  std::string histogram = "";        // variable_audio: CSV path
};

struct TrafficConfig {
  double rate_qps = 0.0;
  InputConfig input;
};

struct PreprocConfig {
  std::optional<CpuPoolSpec> cpu;
  std::optional<DpuSpec> dpu;
};

struct ProfileConfig {
  std::string path;
  std::string model = "model";
};

struct PolicyConfig {
  enum class Mode { Auto, Explicit, File };
  Mode mode = Mode::Auto;
  double bucket_width_s = 2.5;  // auto
  double knee_delta = 0.05;     // auto
  BatchingPolicy explicit_policy;  // explicit
  std::string path;                // file
};

struct SimConfig {
  double duration_s = 0.0;
  std::uint64_t seed = 0;
  double warmup_fraction = 0.1;
};

struct OutputConfig {
  std::string report;          // empty = skip
  std::string request_trace;   // empty = skip
  std::string dispatch_trace;  // empty = skip
  std::string event_trace;     // empty = skip
};

struct SweepAxis {
  std::string param;  // JSON pointer into the scenario config, e.g. /mig/vgpu_count
  std::vector<nlohmann::json> values;
};

struct SweepConfig {
  std::vector<SweepAxis> axes;  // one or two
};

struct ScenarioConfig {
  TrafficConfig traffic;
  MigConfig mig;
  PreprocConfig preproc;
  ProfileConfig profile;
  PolicyConfig policy;
  SimConfig sim;
  OutputConfig outputs;
  std::optional<PriceModel> price;
  std::optional<SweepConfig> sweep;

  static ScenarioConfig from_json(const nlohmann::json& j);
  // Loads the file and resolves relative input paths (profile, histogram,
  // policy file) against its parent directory.
  static ScenarioConfig load(const std::string& path);
  nlohmann::json to_json() const;
  void validate() const;  // throws std::invalid_argument naming the field path
};

// Serialized policy file: {bucket_width_s, batch_max, time_queue_us, tail_knee_us}.
nlohmann::json policy_to_json(const BatchingPolicy& policy);
BatchingPolicy policy_from_json(const nlohmann::json& j);
BatchingPolicy load_policy_file(const std::string& path);

}  // namespace migbatchsim
