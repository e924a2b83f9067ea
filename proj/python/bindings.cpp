#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "migbatchsim/config.hpp"
#include "migbatchsim/metrics.hpp"
#include "migbatchsim/preproc.hpp"
#include "migbatchsim/simulation.hpp"
#include "migbatchsim/tuning.hpp"

namespace py = pybind11;
using namespace migbatchsim;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  py::module_ json_mod = py::module_::import("json");
  return json_mod.attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(migbatchsim, m) {
  m.doc() = "MIG inference-server batching simulator";
  m.attr("__version__") = "1.0.0";

  py::class_<VGpuShape>(m, "VGpuShape")
      .def(py::init([](int gpc, int dram_gb) {
             VGpuShape s;
             s.gpc = gpc;
             s.dram_gb = dram_gb;
             return s;
           }),
           py::arg("gpc") = 1, py::arg("dram_gb") = 5)
      .def_readwrite("gpc", &VGpuShape::gpc)
      .def_readwrite("dram_gb", &VGpuShape::dram_gb)
      .def("notation", &VGpuShape::notation, py::arg("vgpu_count"));

  py::class_<ModelProfile>(m, "ModelProfile")
      .def("exec_latency_us", &ModelProfile::exec_latency_us, py::arg("batch"), py::arg("length_s"))
      .def_property_readonly("batch_grid", &ModelProfile::batch_grid)
      .def_property_readonly("length_grid", &ModelProfile::length_grid)
      .def_property_readonly("model_name", &ModelProfile::model_name)
      .def_property_readonly("max_length_s", &ModelProfile::max_length_s);

  py::class_<CurvePoint>(m, "CurvePoint")
      .def(py::init([](int batch, double throughput_qps, double p95_latency_us) {
             CurvePoint p;
             p.batch = batch;
             p.throughput_qps = throughput_qps;
             p.p95_latency_us = p95_latency_us;
             return p;
           }),
           py::arg("batch"), py::arg("throughput_qps"), py::arg("p95_latency_us"))
      .def_readonly("batch", &CurvePoint::batch)
      .def_readonly("throughput_qps", &CurvePoint::throughput_qps)
      .def_readonly("p95_latency_us", &CurvePoint::p95_latency_us)
      .def("__repr__", [](const CurvePoint& p) {
        return "CurvePoint(batch=" + std::to_string(p.batch) + ", qps=" + std::to_string(p.throughput_qps) +
               ", p95_us=" + std::to_string(p.p95_latency_us) + ")";
      });

  m.def(
      "load_profile",
      [](const std::string& path, const std::string& model, int gpc, int dram_gb) {
        VGpuShape shape;
        shape.gpc = gpc;
        shape.dram_gb = dram_gb;
        return ModelProfile::load_csv(path, model, shape);
      },
      py::arg("path"), py::arg("model") = "model", py::arg("gpc") = 1, py::arg("dram_gb") = 5);

  m.def("sweep_curve", &sweep_curve, py::arg("profile"), py::arg("length_s"), py::arg("batch_sizes"));
  m.def("find_batch_knee", &find_batch_knee, py::arg("curve"), py::arg("delta") = 0.05);
  m.def("tail_at_knee", &tail_at_knee, py::arg("curve"), py::arg("knee_batch"));
  m.def("derive_time_queue_us", &derive_time_queue_us, py::arg("tail_knee_us"), py::arg("vgpu_count"));

  m.def(
      "build_policy",
      [](const ModelProfile& profile, int vgpu_count, double bucket_width_s, double knee_delta) {
        MigConfig mig;
        mig.vgpu_count = vgpu_count;
        mig.shape = profile.shape();
        BatchingPolicy policy = build_batching_policy(profile, mig, bucket_width_s, knee_delta);
        return json_to_py(policy_to_json(policy));
      },
      py::arg("profile"), py::arg("vgpu_count"), py::arg("bucket_width_s") = 2.5, py::arg("knee_delta") = 0.05);

  m.def(
      "bucket_index",
      [](double length_s, double width_s, int bucket_count) {
        BatchingPolicy policy;
        policy.bucket_width_s = width_s;
        policy.batch_max.assign(static_cast<std::size_t>(bucket_count), 1);
        policy.time_queue_us = 1;
        policy.tail_knee_us = 1;
        return policy.bucket_for(length_s);
      },
      py::arg("length_s"), py::arg("width_s"), py::arg("bucket_count"));

  m.def("percentile", &percentile, py::arg("samples"), py::arg("p"));
  m.def("pipeline_completions", &pipeline_completions, py::arg("stage_us"), py::arg("ready"));
  m.def("serial_completions", &serial_completions, py::arg("total_us"), py::arg("ready"));

  m.def(
      "cost_efficiency",
      [](double qps, double capex_usd, double power_kw, double time_hours, double elec_usd_per_kwh) {
        PriceModel price;
        price.capex_usd = capex_usd;
        price.power_kw = power_kw;
        price.time_hours = time_hours;
        price.elec_usd_per_kwh = elec_usd_per_kwh;
        return cost_efficiency(qps, price);
      },
      py::arg("qps"), py::arg("capex_usd"), py::arg("power_kw"), py::arg("time_hours"),
      py::arg("elec_usd_per_kwh") = 0.139);

  m.def(
      "run_scenario",
      [](const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<std::string> out_dir) {
        ScenarioConfig cfg = ScenarioConfig::load(config_path);
        if (seed) cfg.sim.seed = *seed;
        RunResult result = run_scenario(cfg);
        if (out_dir) write_outputs(result, cfg.outputs, *out_dir);
        py::dict out;
        out["report"] = json_to_py(result.report.to_json());
        out["policy"] = json_to_py(policy_to_json(result.policy));
        out["dispatch_count"] = result.dispatches.size();
        return out;
      },
      py::arg("config_path"), py::arg("seed") = py::none(), py::arg("out_dir") = py::none());
}
