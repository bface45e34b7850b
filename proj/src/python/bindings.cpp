#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "hpcserve/bench.hpp"
#include "hpcserve/cli.hpp"
#include "hpcserve/error.hpp"
#include "hpcserve/orchestrate.hpp"
#include "hpcserve/planner.hpp"
#include "hpcserve/profiles.hpp"
#include "hpcserve/render.hpp"
#include "hpcserve/report.hpp"

namespace py = pybind11;
using namespace hpcserve;

namespace {

// Strings in, strings out: Python callers pass file paths and read back
// text or plain records.
RenderedArtifact render_deploy(const DeploymentSpec& spec, const Plan& plan, const SiteProfile& site,
                               const ModelCatalog& catalog, const std::string& runtime) {
  if (runtime == "podman") return render_deploy_podman(spec, plan, site);
  if (runtime == "apptainer") return render_deploy_apptainer(spec, plan, site);
  if (runtime == "helm" || runtime == "kubernetes")
    return render_helm_values(spec, plan, site, catalog.at(spec.model));
  throw ValidationError("runtime", "expected podman, apptainer or helm, got '" + runtime + "'");
}

}  // namespace

PYBIND11_MODULE(_hpcserve, m) {
  m.doc() = "Deployment planning, rendering and benchmark reporting for containerized inference";

  // Kept alive by the module attribute.
  static py::handle error_type = py::exception<Error>(m, "Error").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("kind") = std::string(kind_name(e.kind()));
      exc.attr("exit_code") = exit_code(e.kind());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<ModelCatalogEntry>(m, "ModelCatalogEntry")
      .def_readonly("id", &ModelCatalogEntry::id)
      .def_readonly("weight_size_gib", &ModelCatalogEntry::weight_size_gib)
      .def_readonly("default_context_len", &ModelCatalogEntry::default_context_len)
      .def_readonly("served_name", &ModelCatalogEntry::served_name);

  py::class_<ModelCatalog>(m, "ModelCatalog")
      .def_readonly("entries", &ModelCatalog::entries)
      .def("at", &ModelCatalog::at, py::return_value_policy::reference_internal)
      .def("to_yaml", [](const ModelCatalog& c) { return to_yaml(c); });

  py::class_<DeploymentSpec>(m, "DeploymentSpec")
      .def_readonly("model", &DeploymentSpec::model)
      .def_readonly("max_model_len", &DeploymentSpec::max_model_len)
      .def_readonly("tensor_parallel_size", &DeploymentSpec::tensor_parallel_size)
      .def_readonly("port", &DeploymentSpec::port)
      .def_readonly("extra_engine_args", &DeploymentSpec::extra_engine_args)
      .def("to_yaml", [](const DeploymentSpec& s) { return to_yaml(s); });

  py::class_<SiteProfile>(m, "SiteProfile")
      .def(py::init<>())
      .def_readonly("name", &SiteProfile::name)
      .def_readonly("registry_prefix", &SiteProfile::registry_prefix)
      .def("to_yaml", [](const SiteProfile& s) { return to_yaml(s); });

  py::class_<PlatformProfile>(m, "PlatformProfile")
      .def_readonly("name", &PlatformProfile::name)
      .def_readonly("gpus_per_node", &PlatformProfile::gpus_per_node)
      .def_readonly("gpu_memory_gib", &PlatformProfile::gpu_memory_gib)
      .def("to_yaml", [](const PlatformProfile& p) { return to_yaml(p); });

  py::class_<Plan>(m, "Plan")
      .def_readonly("tensor_parallel_size", &Plan::tensor_parallel_size)
      .def_readonly("pipeline_parallel_size", &Plan::pipeline_parallel_size)
      .def_readonly("total_gpus", &Plan::total_gpus)
      .def_readonly("weight_shard_per_gpu_gib", &Plan::weight_shard_per_gpu_gib)
      .def_readonly("kvcache_budget_per_gpu_gib", &Plan::kvcache_budget_per_gpu_gib)
      .def_readonly("image", &Plan::image)
      .def_readonly("feasible", &Plan::feasible)
      .def_readonly("reason", &Plan::reason)
      .def("to_yaml", [](const Plan& p) { return to_yaml(p); });

  py::class_<BenchPoint>(m, "BenchPoint")
      .def(py::init<>())
      .def_readwrite("concurrency", &BenchPoint::concurrency)
      .def_readwrite("output_token_throughput", &BenchPoint::output_token_throughput)
      .def_readwrite("request_throughput", &BenchPoint::request_throughput)
      .def_readwrite("mean_ttft_ms", &BenchPoint::mean_ttft_ms)
      .def_readwrite("p99_ttft_ms", &BenchPoint::p99_ttft_ms)
      .def_readwrite("mean_tpot_ms", &BenchPoint::mean_tpot_ms)
      .def_readwrite("duration_s", &BenchPoint::duration_s)
      .def_property(
          "status", [](const BenchPoint& p) { return std::string(to_string(p.status)); },
          [](BenchPoint& p, const std::string& s) { p.status = parse_point_status(s); })
      .def("__eq__", [](const BenchPoint& a, const BenchPoint& b) { return a == b; });

  py::class_<BenchSeries>(m, "BenchSeries")
      .def(py::init<>())
      .def_readwrite("label", &BenchSeries::label)
      .def_readwrite("points", &BenchSeries::points)
      .def_readwrite("query_count", &BenchSeries::query_count)
      .def("to_yaml", [](const BenchSeries& s) { return to_yaml(s); })
      .def("__eq__", [](const BenchSeries& a, const BenchSeries& b) { return a == b; });

  py::class_<ComparisonSummary>(m, "ComparisonSummary")
      .def_readonly("label_a", &ComparisonSummary::label_a)
      .def_readonly("label_b", &ComparisonSummary::label_b)
      .def_readonly("batch1_ratio", &ComparisonSummary::batch1_ratio)
      .def_readonly("peak_ratio", &ComparisonSummary::peak_ratio)
      .def_readonly("warnings", &ComparisonSummary::warnings)
      .def("__str__", [](const ComparisonSummary& c) { return format_comparison(c); });

  m.def("load_catalog", &load_catalog, py::arg("path"));
  m.def("load_site_profile", &load_site_profile, py::arg("path"));
  m.def("load_platform_profile", &load_platform_profile, py::arg("path"));
  m.def("resolve_spec", &resolve_spec, py::arg("path"), py::arg("catalog"),
        py::arg("overrides") = std::vector<std::string>{});

  m.def(
      "plan",
      [](const DeploymentSpec& spec, const ModelCatalog& catalog, const PlatformProfile& platform,
         const SiteProfile& site, double kvcache_floor_gib) {
        PlannerOptions opts;
        opts.kvcache_floor_gib = kvcache_floor_gib;
        return plan(spec, catalog.at(spec.model), platform, site, opts);
      },
      py::arg("spec"), py::arg("catalog"), py::arg("platform"), py::arg("site") = SiteProfile{},
      py::arg("kvcache_floor_gib") = 8.0);
  m.def("min_gpus",
        [](const ModelCatalogEntry& entry, const PlatformProfile& platform) { return min_gpus(entry, platform); });

  m.def(
      "render_deploy",
      [](const DeploymentSpec& spec, const Plan& plan, const SiteProfile& site, const ModelCatalog& catalog,
         const std::string& runtime) { return render_deploy(spec, plan, site, catalog, runtime).content; },
      py::arg("spec"), py::arg("plan"), py::arg("site"), py::arg("catalog"), py::arg("runtime") = "podman");
  m.def(
      "render_fetch",
      [](const ModelCatalogEntry& entry, const SiteProfile& site) { return render_fetch(entry, site).content; },
      py::arg("entry"), py::arg("site"));
  m.def(
      "render_push",
      [](const ModelCatalogEntry& entry, const SiteProfile& site) { return render_push(entry, site).content; },
      py::arg("entry"), py::arg("site"));
  m.def(
      "render_query",
      [](const std::string& url, const std::string& served_name, const std::string& prompt, double temperature) {
        QueryRequest q;
        q.endpoint_url = url;
        q.served_name = served_name;
        q.prompt = prompt;
        q.temperature = temperature;
        return render_query(q).content;
      },
      py::arg("url"), py::arg("served_name"), py::arg("prompt"), py::arg("temperature") = 0.7);
  m.def(
      "render_ray_job",
      [](const DeploymentSpec& spec, const Plan& plan, const PlatformProfile& platform, const SiteProfile& site) {
        return render_ray_job(spec, plan, platform, site).full_script;
      },
      py::arg("spec"), py::arg("plan"), py::arg("platform"), py::arg("site"));

  m.def("sweep_concurrencies", &sweep_concurrencies, py::arg("lo") = 1, py::arg("hi") = 1024);
  m.def("parse_bench_output", &parse_bench_output, py::arg("raw"));
  m.def("load_series", &load_series, py::arg("path"));
  m.def("parse_series", &parse_series, py::arg("yaml"));
  m.def("emit_plot_data", &emit_plot_data, py::arg("series"));
  m.def("parse_plot_data", &parse_plot_data, py::arg("text"));
  m.def("compare", &compare, py::arg("a"), py::arg("b"));
  m.def("summarize", &summarize, py::arg("series"));

  m.def(
      "main",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "hpcserve");
        std::ostringstream out, err;
        SystemProcessRunner runner;
        CliContext ctx{out, err, runner};
        int code = 0;
        {
          py::gil_scoped_release release;
          code = dispatch(args, ctx);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line with args; returns (exit_code, stdout, stderr).");
}
