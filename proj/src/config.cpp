#include "migbatchsim/config.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace migbatchsim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: " + path + ": " + what);
}

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "/" + key, "missing");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "must be a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "must be an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "must be a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "must be a boolean");
  return j.get<bool>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& path) {
  if (!j.is_object() || j.find(key) == j.end()) return fallback;
  return as_number(j.at(key), path + "/" + key);
}

int int_or(const json& j, const char* key, int fallback, const std::string& path) {
  if (!j.is_object() || j.find(key) == j.end()) return fallback;
  return as_int(j.at(key), path + "/" + key);
}

std::string string_or(const json& j, const char* key, const std::string& fallback, const std::string& path) {
  if (!j.is_object() || j.find(key) == j.end()) return fallback;
  return as_string(j.at(key), path + "/" + key);
}

InputConfig parse_input(const json& j, const std::string& path) {
  InputConfig input;
  input.kind = as_string(require(j, "kind", path), path + "/kind");
  if (input.kind == "fixed_image") {
    input.sentinel_length_s = number_or(j, "sentinel_length_s", 1.0, path);
  } else if (input.kind == "constant_audio") {
    input.length_s = as_number(require(j, "length_s", path), path + "/length_s");
  } else if (input.kind == "variable_audio") {
    input.histogram = as_string(require(j, "histogram", path), path + "/histogram");
  } else {
    fail(path + "/kind", "unknown input kind '" + input.kind + "'");
  }
  return input;
}

CpuPoolSpec parse_cpu(const json& j, const std::string& path) {
  CpuPoolSpec cpu;
  cpu.workers = as_int(require(j, "workers", path), path + "/workers");
  cpu.service_base_us = as_number(require(j, "service_base_us", path), path + "/service_base_us");
  cpu.length_exponent = number_or(j, "length_exponent", 0.0, path);
  cpu.efficiency_cap = number_or(j, "efficiency_cap", 0.9, path);
  return cpu;
}

DpuSpec parse_dpu(const json& j, const std::string& path) {
  DpuSpec dpu;
  dpu.transfer_overhead_us = number_or(j, "transfer_overhead_us", 50.0, path);
  const json& types = require(j, "cu_types", path);
  if (!types.is_array()) fail(path + "/cu_types", "must be an array");
  for (std::size_t i = 0; i < types.size(); ++i) {
    std::string tpath = path + "/cu_types/" + std::to_string(i);
    const json& t = types[i];
    DpuSpec::CuGroup group;
    group.cu.name = string_or(t, "name", "cu" + std::to_string(i), tpath);
    group.cu.pipelined = t.contains("pipelined") ? as_bool(t.at("pipelined"), tpath + "/pipelined") : true;
    group.count = int_or(t, "count", 1, tpath);
    const json& units = require(t, "units", tpath);
    if (!units.is_array()) fail(tpath + "/units", "must be an array");
    for (std::size_t u = 0; u < units.size(); ++u) {
      std::string upath = tpath + "/units/" + std::to_string(u);
      FunctionalUnitSpec unit;
      unit.name = string_or(units[u], "name", "unit" + std::to_string(u), upath);
      unit.base_us = as_number(require(units[u], "base_us", upath), upath + "/base_us");
      unit.length_exponent = number_or(units[u], "length_exponent", 0.0, upath);
      group.cu.units.push_back(std::move(unit));
    }
    dpu.groups.push_back(std::move(group));
  }
  return dpu;
}

json input_to_json(const InputConfig& input) {
  json j;
  j["kind"] = input.kind;
  if (input.kind == "fixed_image") j["sentinel_length_s"] = input.sentinel_length_s;
  if (input.kind == "constant_audio") j["length_s"] = input.length_s;
  if (input.kind == "variable_audio") j["histogram"] = input.histogram;
  return j;
}

}  // namespace

nlohmann::json policy_to_json(const BatchingPolicy& policy) {
  json j;
  j["bucket_width_s"] = policy.bucket_width_s;
  j["batch_max"] = policy.batch_max;
  j["time_queue_us"] = policy.time_queue_us;
  j["tail_knee_us"] = policy.tail_knee_us;
  return j;
}

BatchingPolicy policy_from_json(const nlohmann::json& j) {
  BatchingPolicy policy;
  policy.bucket_width_s = as_number(require(j, "bucket_width_s", "policy"), "policy/bucket_width_s");
  const json& bm = require(j, "batch_max", "policy");
  if (!bm.is_array() || bm.empty()) fail("policy/batch_max", "must be a non-empty array");
  for (std::size_t i = 0; i < bm.size(); ++i) {
    policy.batch_max.push_back(as_int(bm[i], "policy/batch_max/" + std::to_string(i)));
  }
  policy.time_queue_us = static_cast<SimTime>(as_number(require(j, "time_queue_us", "policy"), "policy/time_queue_us"));
  policy.tail_knee_us = static_cast<SimTime>(as_number(require(j, "tail_knee_us", "policy"), "policy/tail_knee_us"));
  policy.validate();
  return policy;
}

BatchingPolicy load_policy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return policy_from_json(j);
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  ScenarioConfig cfg;
  const json& traffic = require(j, "traffic", "");
  cfg.traffic.rate_qps = as_number(require(traffic, "rate_qps", "/traffic"), "/traffic/rate_qps");
  cfg.traffic.input = parse_input(require(traffic, "input", "/traffic"), "/traffic/input");

  const json& mig = require(j, "mig", "");
  cfg.mig.vgpu_count = as_int(require(mig, "vgpu_count", "/mig"), "/mig/vgpu_count");
  cfg.mig.shape.gpc = int_or(mig, "vgpu_gpc", 1, "/mig");
  cfg.mig.shape.dram_gb = int_or(mig, "vgpu_dram_gb", 5, "/mig");

  const json& preproc = require(j, "preproc", "");
  if (preproc.contains("cpu")) cfg.preproc.cpu = parse_cpu(preproc.at("cpu"), "/preproc/cpu");
  if (preproc.contains("dpu")) cfg.preproc.dpu = parse_dpu(preproc.at("dpu"), "/preproc/dpu");

  const json& profile = require(j, "profile", "");
  cfg.profile.path = as_string(require(profile, "path", "/profile"), "/profile/path");
  cfg.profile.model = string_or(profile, "model", "model", "/profile");

  const json& policy = require(j, "policy", "");
  std::string mode = as_string(require(policy, "mode", "/policy"), "/policy/mode");
  if (mode == "auto") {
    cfg.policy.mode = PolicyConfig::Mode::Auto;
    cfg.policy.bucket_width_s = number_or(policy, "bucket_width_s", 2.5, "/policy");
    cfg.policy.knee_delta = number_or(policy, "knee_delta", 0.05, "/policy");
  } else if (mode == "explicit") {
    cfg.policy.mode = PolicyConfig::Mode::Explicit;
    cfg.policy.explicit_policy = policy_from_json(policy);
  } else if (mode == "file") {
    cfg.policy.mode = PolicyConfig::Mode::File;
    cfg.policy.path = as_string(require(policy, "path", "/policy"), "/policy/path");
  } else {
    fail("/policy/mode", "unknown mode '" + mode + "' (auto|explicit|file)");
  }

  const json& sim = require(j, "sim", "");
  cfg.sim.duration_s = as_number(require(sim, "duration_s", "/sim"), "/sim/duration_s");
  if (sim.contains("seed")) {
    const json& seed = sim.at("seed");
    if (!seed.is_number_integer() && !seed.is_number_unsigned()) fail("/sim/seed", "must be an integer");
    cfg.sim.seed = seed.get<std::uint64_t>();
  }
  cfg.sim.warmup_fraction = number_or(sim, "warmup_fraction", 0.1, "/sim");

  if (j.contains("outputs")) {
    const json& outputs = j.at("outputs");
    cfg.outputs.report = string_or(outputs, "report", "", "/outputs");
    cfg.outputs.request_trace = string_or(outputs, "request_trace", "", "/outputs");
    cfg.outputs.dispatch_trace = string_or(outputs, "dispatch_trace", "", "/outputs");
    cfg.outputs.event_trace = string_or(outputs, "event_trace", "", "/outputs");
  }

  if (j.contains("price")) {
    const json& price = j.at("price");
    PriceModel model;
    model.capex_usd = as_number(require(price, "capex_usd", "/price"), "/price/capex_usd");
    model.power_kw = as_number(require(price, "power_kw", "/price"), "/price/power_kw");
    model.time_hours = as_number(require(price, "time_hours", "/price"), "/price/time_hours");
    model.elec_usd_per_kwh = number_or(price, "elec_usd_per_kwh", 0.139, "/price");
    cfg.price = model;
  }

  if (j.contains("sweep")) {
    const json& sweep = j.at("sweep");
    SweepConfig sc;
    const json& axes = require(sweep, "axes", "/sweep");
    if (!axes.is_array()) fail("/sweep/axes", "must be an array");
    for (std::size_t i = 0; i < axes.size(); ++i) {
      std::string apath = "/sweep/axes/" + std::to_string(i);
      SweepAxis axis;
      axis.param = as_string(require(axes[i], "param", apath), apath + "/param");
      const json& values = require(axes[i], "values", apath);
      if (!values.is_array() || values.empty()) fail(apath + "/values", "must be a non-empty array");
      for (const json& v : values) axis.values.push_back(v);
      sc.axes.push_back(std::move(axis));
    }
    cfg.sweep = std::move(sc);
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  ScenarioConfig cfg = from_json(j);
  std::filesystem::path dir = std::filesystem::path(path).parent_path();
  auto resolve = [&dir](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (dir / p).string();
  };
  resolve(cfg.profile.path);
  resolve(cfg.traffic.input.histogram);
  resolve(cfg.policy.path);
  return cfg;
}

nlohmann::json ScenarioConfig::to_json() const {
  json j;
  j["traffic"] = {{"rate_qps", traffic.rate_qps}, {"input", input_to_json(traffic.input)}};
  j["mig"] = {{"vgpu_count", mig.vgpu_count}, {"vgpu_gpc", mig.shape.gpc}, {"vgpu_dram_gb", mig.shape.dram_gb}};
  json preproc_j = json::object();
  if (preproc.cpu) {
    preproc_j["cpu"] = {{"workers", preproc.cpu->workers},
                        {"service_base_us", preproc.cpu->service_base_us},
                        {"length_exponent", preproc.cpu->length_exponent},
                        {"efficiency_cap", preproc.cpu->efficiency_cap}};
  }
  if (preproc.dpu) {
    json types = json::array();
    for (const DpuSpec::CuGroup& g : preproc.dpu->groups) {
      json units = json::array();
      for (const FunctionalUnitSpec& u : g.cu.units) {
        units.push_back({{"name", u.name}, {"base_us", u.base_us}, {"length_exponent", u.length_exponent}});
      }
      types.push_back(
          {{"name", g.cu.name}, {"pipelined", g.cu.pipelined}, {"count", g.count}, {"units", std::move(units)}});
    }
    preproc_j["dpu"] = {{"transfer_overhead_us", preproc.dpu->transfer_overhead_us}, {"cu_types", std::move(types)}};
  }
  j["preproc"] = std::move(preproc_j);
  j["profile"] = {{"path", profile.path}, {"model", profile.model}};
  json policy_j;
  switch (policy.mode) {
    case PolicyConfig::Mode::Auto:
      policy_j = {{"mode", "auto"}, {"bucket_width_s", policy.bucket_width_s}, {"knee_delta", policy.knee_delta}};
      break;
    case PolicyConfig::Mode::Explicit:
      policy_j = policy_to_json(policy.explicit_policy);
      policy_j["mode"] = "explicit";
      break;
    case PolicyConfig::Mode::File:
      policy_j = {{"mode", "file"}, {"path", policy.path}};
      break;
  }
  j["policy"] = std::move(policy_j);
  j["sim"] = {{"duration_s", sim.duration_s}, {"seed", sim.seed}, {"warmup_fraction", sim.warmup_fraction}};
  json outputs_j = json::object();
  if (!outputs.report.empty()) outputs_j["report"] = outputs.report;
  if (!outputs.request_trace.empty()) outputs_j["request_trace"] = outputs.request_trace;
  if (!outputs.dispatch_trace.empty()) outputs_j["dispatch_trace"] = outputs.dispatch_trace;
  if (!outputs.event_trace.empty()) outputs_j["event_trace"] = outputs.event_trace;
  j["outputs"] = std::move(outputs_j);
  if (price) {
    j["price"] = {{"capex_usd", price->capex_usd},
                  {"power_kw", price->power_kw},
                  {"time_hours", price->time_hours},
                  {"elec_usd_per_kwh", price->elec_usd_per_kwh}};
  }
  if (sweep) {
    json axes = json::array();
    for (const SweepAxis& axis : sweep->axes) {
      json values = json::array();
      for (const json& v : axis.values) values.push_back(v);
      axes.push_back({{"param", axis.param}, {"values", std::move(values)}});
    }
    j["sweep"] = {{"axes", std::move(axes)}};
  }
  return j;
}

void ScenarioConfig::validate() const {
  if (!(traffic.rate_qps > 0.0)) fail("/traffic/rate_qps", "must be positive");
  if (traffic.input.kind == "fixed_image" && !(traffic.input.sentinel_length_s > 0.0)) {
    fail("/traffic/input/sentinel_length_s", "must be positive");
  }
  if (traffic.input.kind == "constant_audio" && !(traffic.input.length_s > 0.0)) {
    fail("/traffic/input/length_s", "must be positive");
  }
  if (traffic.input.kind == "variable_audio" && traffic.input.histogram.empty()) {
    fail("/traffic/input/histogram", "must be a file path");
  }
  try {
    mig.validate();
  } catch (const std::invalid_argument& e) {
    fail("/mig", e.what());
  }
  int backends = (preproc.cpu ? 1 : 0) + (preproc.dpu ? 1 : 0);
  if (backends != 1) fail("/preproc", "exactly one of cpu or dpu must be configured");
  try {
    if (preproc.cpu) preproc.cpu->validate();
    if (preproc.dpu) preproc.dpu->validate();
  } catch (const std::invalid_argument& e) {
    fail("/preproc", e.what());
  }
  if (profile.path.empty()) fail("/profile/path", "must be a file path");
  if (policy.mode == PolicyConfig::Mode::Auto) {
    if (!(policy.bucket_width_s > 0.0)) fail("/policy/bucket_width_s", "must be positive");
    if (!(policy.knee_delta > 0.0) || policy.knee_delta >= 1.0) fail("/policy/knee_delta", "must be in (0, 1)");
  }
  if (policy.mode == PolicyConfig::Mode::File && policy.path.empty()) fail("/policy/path", "must be a file path");
  if (!(sim.duration_s > 0.0)) fail("/sim/duration_s", "must be positive");
  if (sim.warmup_fraction < 0.0 || sim.warmup_fraction >= 1.0) fail("/sim/warmup_fraction", "must be in [0, 1)");
  if (sweep) {
    if (sweep->axes.empty() || sweep->axes.size() > 2) fail("/sweep/axes", "must have one or two axes");
    for (std::size_t i = 0; i < sweep->axes.size(); ++i) {
      if (sweep->axes[i].param.empty() || sweep->axes[i].param.front() != '/') {
        fail("/sweep/axes/" + std::to_string(i) + "/param", "must be a JSON pointer starting with /");
      }
    }
  }
}

}  // namespace migbatchsim
