#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "migbatchsim/config.hpp"

using namespace migbatchsim;
using nlohmann::json;

namespace {

json minimal_config() {
  return json{
      {"traffic", {{"rate_qps", 500.0}, {"input", {{"kind", "fixed_image"}}}}},
      {"mig", {{"vgpu_count", 7}}},
      {"preproc", {{"cpu", {{"workers", 4}, {"service_base_us", 2000.0}}}}},
      {"profile", {{"path", "/tmp/profile.csv"}}},
      {"policy", {{"mode", "auto"}}},
      {"sim", {{"duration_s", 5.0}}},
  };
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << content;
}

}  // namespace

TEST_CASE("minimal config parses with documented defaults") {
  ScenarioConfig cfg = ScenarioConfig::from_json(minimal_config());
  CHECK(cfg.traffic.rate_qps == 500.0);
  CHECK(cfg.traffic.input.kind == "fixed_image");
  CHECK(cfg.traffic.input.sentinel_length_s == 1.0);
  CHECK(cfg.mig.vgpu_count == 7);
  CHECK(cfg.mig.shape.gpc == 1);
  CHECK(cfg.mig.shape.dram_gb == 5);
  REQUIRE(cfg.preproc.cpu.has_value());
  CHECK(!cfg.preproc.dpu.has_value());
  CHECK(cfg.preproc.cpu->workers == 4);
  CHECK(cfg.preproc.cpu->length_exponent == 0.0);
  CHECK(cfg.preproc.cpu->efficiency_cap == 0.9);
  CHECK(cfg.profile.model == "model");
  CHECK(cfg.policy.mode == PolicyConfig::Mode::Auto);
  CHECK(cfg.policy.bucket_width_s == 2.5);
  CHECK(cfg.policy.knee_delta == 0.05);
  CHECK(cfg.sim.duration_s == 5.0);
  CHECK(cfg.sim.seed == 0);
  CHECK(cfg.sim.warmup_fraction == 0.1);
  CHECK(!cfg.price.has_value());
  CHECK(!cfg.sweep.has_value());
}

TEST_CASE("dpu backend parses groups, units, and defaults") {
  json j = minimal_config();
  j["preproc"] = {{"dpu",
                   {{"cu_types",
                     json::array({{{"name", "decode_cu"},
                                   {"count", 3},
                                   {"units", json::array({{{"name", "decode"}, {"base_us", 800.0}},
                                                          {{"base_us", 400.0}, {"length_exponent", 1.0}}})}},
                                  {{"pipelined", false},
                                   {"units", json::array({{{"base_us", 100.0}}})}}})}}}};
  ScenarioConfig cfg = ScenarioConfig::from_json(j);
  REQUIRE(cfg.preproc.dpu.has_value());
  const DpuSpec& dpu = *cfg.preproc.dpu;
  CHECK(dpu.transfer_overhead_us == 50.0);  // default
  REQUIRE(dpu.groups.size() == 2);
  CHECK(dpu.groups[0].cu.name == "decode_cu");
  CHECK(dpu.groups[0].cu.pipelined);  // default
  CHECK(dpu.groups[0].count == 3);
  REQUIRE(dpu.groups[0].cu.units.size() == 2);
  CHECK(dpu.groups[0].cu.units[0].name == "decode");
  CHECK(dpu.groups[0].cu.units[0].base_us == 800.0);
  CHECK(dpu.groups[0].cu.units[1].name == "unit1");  // default name from index
  CHECK(dpu.groups[0].cu.units[1].length_exponent == 1.0);
  CHECK(dpu.groups[1].cu.name == "cu1");
  CHECK(!dpu.groups[1].cu.pipelined);
  CHECK(dpu.groups[1].count == 1);
}

TEST_CASE("config json round-trips through to_json and from_json") {
  json j = minimal_config();
  j["traffic"]["input"] = {{"kind", "variable_audio"}, {"histogram", "/tmp/hist.csv"}};
  j["sim"]["seed"] = 1234;
  j["sim"]["warmup_fraction"] = 0.25;
  j["price"] = {{"capex_usd", 10000.0}, {"power_kw", 0.4}, {"time_hours", 8760.0}};
  j["sweep"] = {{"axes", json::array({{{"param", "/traffic/rate_qps"}, {"values", {100, 200}}}})}};
  j["outputs"] = {{"report", "report.json"}};
  ScenarioConfig cfg = ScenarioConfig::from_json(j);
  CHECK(cfg.price->elec_usd_per_kwh == 0.139);  // default applied
  ScenarioConfig again = ScenarioConfig::from_json(cfg.to_json());
  CHECK(cfg.to_json() == again.to_json());
  CHECK(again.traffic.input.histogram == "/tmp/hist.csv");
  CHECK(again.sim.seed == 1234);
  CHECK(again.outputs.report == "report.json");
  REQUIRE(again.sweep.has_value());
  REQUIRE(again.sweep->axes.size() == 1);
  CHECK(again.sweep->axes[0].param == "/traffic/rate_qps");
  CHECK(again.sweep->axes[0].values.size() == 2);
}

TEST_CASE("explicit policy mode embeds the full policy inline") {
  json j = minimal_config();
  j["policy"] = {{"mode", "explicit"},
                 {"bucket_width_s", 2.5},
                 {"batch_max", {32, 16, 8}},
                 {"time_queue_us", 5000},
                 {"tail_knee_us", 35000}};
  ScenarioConfig cfg = ScenarioConfig::from_json(j);
  CHECK(cfg.policy.mode == PolicyConfig::Mode::Explicit);
  CHECK(cfg.policy.explicit_policy.bucket_width_s == 2.5);
  CHECK(cfg.policy.explicit_policy.batch_max == std::vector<int>{32, 16, 8});
  CHECK(cfg.policy.explicit_policy.time_queue_us == 5000);
  CHECK(cfg.policy.explicit_policy.tail_knee_us == 35000);
  ScenarioConfig again = ScenarioConfig::from_json(cfg.to_json());
  CHECK(again.policy.explicit_policy.batch_max == cfg.policy.explicit_policy.batch_max);
}

TEST_CASE("config errors name the offending field path") {
  json j = minimal_config();
  j.erase("traffic");
  CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j), "config: /traffic: missing", std::invalid_argument);

  j = minimal_config();
  j["traffic"]["rate_qps"] = "fast";
  CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j), "config: /traffic/rate_qps: must be a number",
                       std::invalid_argument);

  j = minimal_config();
  j["traffic"]["rate_qps"] = -5.0;
  CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j), "config: /traffic/rate_qps: must be positive",
                       std::invalid_argument);

  j = minimal_config();
  j["traffic"]["input"]["kind"] = "video";
  CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j), "config: /traffic/input/kind: unknown input kind 'video'",
                       std::invalid_argument);

  j = minimal_config();
  j["sim"]["seed"] = 1.5;
  CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j), "config: /sim/seed: must be an integer", std::invalid_argument);

  j = minimal_config();
  j["sim"]["warmup_fraction"] = 1.0;
  CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j), "config: /sim/warmup_fraction: must be in [0, 1)",
                       std::invalid_argument);

  j = minimal_config();
  j["policy"]["knee_delta"] = 1.5;
  CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j), "config: /policy/knee_delta: must be in (0, 1)",
                       std::invalid_argument);

  j = minimal_config();
  j["mig"]["vgpu_count"] = 0;
  CHECK_THROWS_WITH(ScenarioConfig::from_json(j), doctest::Contains("config: /mig"));
}

TEST_CASE("exactly one preprocessing backend must be configured") {
  json j = minimal_config();
  j["preproc"] = json::object();
  CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j), "config: /preproc: exactly one of cpu or dpu must be configured",
                       std::invalid_argument);

  j = minimal_config();
  j["preproc"]["dpu"] = {{"cu_types", json::array({{{"units", json::array({{{"base_us", 100.0}}})}}})}};
  CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j), "config: /preproc: exactly one of cpu or dpu must be configured",
                       std::invalid_argument);
}

TEST_CASE("unknown policy mode lists the accepted modes") {
  json j = minimal_config();
  j["policy"]["mode"] = "magic";
  CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j), "config: /policy/mode: unknown mode 'magic' (auto|explicit|file)",
                       std::invalid_argument);
}

TEST_CASE("sweep axes are validated as json pointers, at most two") {
  json j = minimal_config();
  j["sweep"] = {{"axes", json::array({{{"param", "traffic.rate_qps"}, {"values", {1, 2}}}})}};
  CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j),
                       "config: /sweep/axes/0/param: must be a JSON pointer starting with /", std::invalid_argument);

  j = minimal_config();
  json axis = {{"param", "/traffic/rate_qps"}, {"values", {1}}};
  j["sweep"] = {{"axes", json::array({axis, axis, axis})}};
  CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j), "config: /sweep/axes: must have one or two axes",
                       std::invalid_argument);

  j = minimal_config();
  j["sweep"] = {{"axes", json::array({{{"param", "/traffic/rate_qps"}, {"values", json::array()}}})}};
  CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j), "config: /sweep/axes/0/values: must be a non-empty array",
                       std::invalid_argument);
}

TEST_CASE("policy file round-trips and validates") {
  BatchingPolicy policy;
  policy.bucket_width_s = 2.5;
  policy.batch_max = {32, 16, 8, 4};
  policy.time_queue_us = 5000;
  policy.tail_knee_us = 35000;
  json j = policy_to_json(policy);
  CHECK(j["bucket_width_s"] == 2.5);
  CHECK(j["batch_max"] == json({32, 16, 8, 4}));
  BatchingPolicy back = policy_from_json(j);
  CHECK(back.bucket_width_s == policy.bucket_width_s);
  CHECK(back.batch_max == policy.batch_max);
  CHECK(back.time_queue_us == policy.time_queue_us);
  CHECK(back.tail_knee_us == policy.tail_knee_us);

  std::string path = "/tmp/mbs_policy_test.json";
  write_file(path, j.dump(2));
  BatchingPolicy loaded = load_policy_file(path);
  CHECK(loaded.batch_max == policy.batch_max);
  CHECK(loaded.time_queue_us == 5000);
  std::remove(path.c_str());
}

TEST_CASE("policy file parsing rejects malformed content") {
  json missing = {{"bucket_width_s", 2.5}, {"time_queue_us", 5000}, {"tail_knee_us", 35000}};
  CHECK_THROWS_WITH_AS(policy_from_json(missing), "config: policy/batch_max: missing", std::invalid_argument);

  json empty_bm = missing;
  empty_bm["batch_max"] = json::array();
  CHECK_THROWS_WITH_AS(policy_from_json(empty_bm), "config: policy/batch_max: must be a non-empty array",
                       std::invalid_argument);

  // Increasing caps violate the policy's own invariant.
  json increasing = missing;
  increasing["batch_max"] = {8, 16};
  CHECK_THROWS_AS(policy_from_json(increasing), std::invalid_argument);

  CHECK_THROWS_AS(load_policy_file("/tmp/definitely_not_here_mbs.json"), std::runtime_error);
  std::string bad_path = "/tmp/mbs_policy_bad.json";
  write_file(bad_path, "{not json");
  CHECK_THROWS_WITH(load_policy_file(bad_path), doctest::Contains(bad_path.c_str()));
  std::remove(bad_path.c_str());
}

TEST_CASE("load resolves relative paths against the config directory") {
  std::filesystem::create_directories("/tmp/mbs_cfg_dir");
  json j = minimal_config();
  j["profile"]["path"] = "profiles/p.csv";
  j["traffic"]["input"] = {{"kind", "variable_audio"}, {"histogram", "lengths.csv"}};
  j["policy"] = {{"mode", "file"}, {"path", "policy.json"}};
  std::string cfg_path = "/tmp/mbs_cfg_dir/scenario.json";
  write_file(cfg_path, j.dump(2));
  ScenarioConfig cfg = ScenarioConfig::load(cfg_path);
  CHECK(cfg.profile.path == "/tmp/mbs_cfg_dir/profiles/p.csv");
  CHECK(cfg.traffic.input.histogram == "/tmp/mbs_cfg_dir/lengths.csv");
  CHECK(cfg.policy.path == "/tmp/mbs_cfg_dir/policy.json");
  std::remove(cfg_path.c_str());

  // Absolute paths pass through untouched.
  j["profile"]["path"] = "/abs/p.csv";
  j["traffic"]["input"] = {{"kind", "fixed_image"}};
  j["policy"] = {{"mode", "auto"}};
  write_file(cfg_path, j.dump(2));
  ScenarioConfig abs_cfg = ScenarioConfig::load(cfg_path);
  CHECK(abs_cfg.profile.path == "/abs/p.csv");
  std::remove(cfg_path.c_str());
}

TEST_CASE("load reports missing or malformed config files") {
  CHECK_THROWS_WITH(ScenarioConfig::load("/tmp/no_such_mbs_config.json"),
                    doctest::Contains("cannot open /tmp/no_such_mbs_config.json"));
  std::string path = "/tmp/mbs_cfg_broken.json";
  write_file(path, "{\"traffic\": ");
  CHECK_THROWS_WITH(ScenarioConfig::load(path), doctest::Contains(path.c_str()));
  std::remove(path.c_str());
}

TEST_CASE("shipped scenario configs load and reference existing data files") {
  std::string dir = MBS_SOURCE_DIR "/data/configs";
  for (const char* name : {"vision_dpu.json", "vision_cpu.json", "audio_dpu.json", "ablation_base.json",
                           "ablation_dpu_static.json", "ablation_full.json"}) {
    ScenarioConfig cfg = ScenarioConfig::load(dir + "/" + name);
    CHECK(std::filesystem::exists(cfg.profile.path));
    if (!cfg.traffic.input.histogram.empty()) CHECK(std::filesystem::exists(cfg.traffic.input.histogram));
  }
  ScenarioConfig vision = ScenarioConfig::load(dir + "/vision_dpu.json");
  CHECK(vision.traffic.rate_qps == 1000.0);
  CHECK(vision.mig.vgpu_count == 7);
  CHECK(vision.preproc.dpu.has_value());
  CHECK(vision.price.has_value());
  ScenarioConfig sweep = ScenarioConfig::load(dir + "/sweep_rate.json");
  REQUIRE(sweep.sweep.has_value());
  CHECK(sweep.sweep->axes[0].param == "/traffic/rate_qps");
}
