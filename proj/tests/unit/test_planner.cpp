#include <doctest.h>

#include "hpcserve/error.hpp"
#include "hpcserve/planner.hpp"
#include "planner_oracle.hpp"
#include "random_configs.hpp"

using namespace hpcserve;

namespace {

PlatformProfile shape(int gpus, double mem, Accelerator accel = Accelerator::cuda) {
  PlatformProfile p;
  p.name = "p" + std::to_string(gpus) + "x" + std::to_string(static_cast<int>(mem));
  p.accelerator = accel;
  p.gpus_per_node = gpus;
  p.gpu_memory_gib = mem;
  p.available_runtimes = {Runtime::podman, Runtime::apptainer};
  return p;
}

ModelCatalogEntry model(double weight, std::string id = "m/m") {
  ModelCatalogEntry e;
  e.id = std::move(id);
  e.upstream_repo_url = "https://huggingface.co/" + e.id;
  e.weight_size_gib = weight;
  e.default_context_len = 1 << 20;
  e.served_name = e.id;
  return e;
}

DeploymentSpec spec_for(const ModelCatalogEntry& e) {
  DeploymentSpec s;
  s.model = e.id;
  s.image_by_accelerator = {{Accelerator::cuda, "vllm/vllm-openai:v0.9.1"},
                            {Accelerator::rocm, "rocm/vllm:rocm6.4.1_vllm_0.9.1_20250702"}};
  s.max_model_len = 4096;
  return s;
}

}  // namespace

TEST_CASE("min_gpus edge cases") {
  CHECK(min_gpus(model(1), shape(4, 80)) == 1);
  CHECK(min_gpus(model(216), shape(4, 80)) == 4);
  CHECK(min_gpus(model(108), shape(2, 94)) == 2);
  // 1024/16 + 8 == 72 == 80 * 0.9 exactly.
  CHECK(min_gpus(model(1024), shape(4, 80)) == 16);
  CHECK_THROWS_AS(min_gpus(model(1e9), shape(4, 80)), Error);
  CHECK_THROWS_AS(min_gpus(model(0), shape(4, 80)), ValidationError);
}

TEST_CASE("plan follows whole-node tensor parallel and the fewest nodes") {
  const SiteProfile site;
  const auto scout = model(216);
  const auto p = plan(spec_for(scout), scout, shape(4, 80), site);
  CHECK(p.feasible);
  CHECK(p.tensor_parallel_size == 4);
  CHECK(p.pipeline_parallel_size == 1);
  CHECK(p.weight_shard_per_gpu_gib == doctest::Approx(54));
  CHECK(p.kvcache_budget_per_gpu_gib == doctest::Approx(18));
  CHECK(p.image == "vllm/vllm-openai:v0.9.1");

  const auto big = model(1024);
  const auto q = plan(spec_for(big), big, shape(4, 80), site);
  CHECK(q.feasible);
  CHECK(q.tensor_parallel_size == 4);
  CHECK(q.pipeline_parallel_size == 4);
  CHECK(q.total_gpus == 16);
}

TEST_CASE("explicit tensor_parallel_size is honored") {
  const SiteProfile site;
  const auto quant = model(108);
  auto spec = spec_for(quant);
  spec.tensor_parallel_size = 2;
  const auto p = plan(spec, quant, shape(4, 80), site);
  CHECK(p.feasible);
  CHECK(p.tensor_parallel_size == 2);
  CHECK(p.pipeline_parallel_size == 1);

  spec.tensor_parallel_size = 8;
  const auto too_wide = plan(spec, quant, shape(4, 80), site);
  CHECK_FALSE(too_wide.feasible);
  CHECK(too_wide.reason.find("gpus_per_node") != std::string::npos);
  CHECK_THROWS_AS(require_feasible(too_wide), Error);

  spec.tensor_parallel_size = 1;
  const auto big = model(1024);
  spec.model = big.id;
  const auto pp = plan(spec, big, shape(4, 80), site);
  CHECK_FALSE(pp.feasible);
}

TEST_CASE("plan reports capacity infeasibility and throws on configuration errors") {
  SiteProfile site;
  const auto huge = model(100000);
  const auto p = plan(spec_for(huge), huge, shape(4, 80), site);
  CHECK_FALSE(p.feasible);
  CHECK_FALSE(p.reason.empty());
  try {
    require_feasible(p);
    FAIL("expected InfeasiblePlan");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::infeasible_plan);
    CHECK(exit_code(e.kind()) == 3);
  }

  auto spec = spec_for(model(10));
  spec.image_by_accelerator.erase(Accelerator::rocm);
  try {
    plan(spec, model(10), shape(4, 120, Accelerator::rocm), site);
    FAIL("expected ImageMissing");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::image_missing);
  }

  site.registry_prefix = "registry.site.gov/";
  const auto prefixed = plan(spec_for(model(10)), model(10), shape(4, 80), site);
  CHECK(prefixed.image == "registry.site.gov/vllm/vllm-openai:v0.9.1");
}

TEST_CASE("plan matches the exhaustive oracle on a dense grid") {
  const SiteProfile site;
  for (double weight : {0.5, 1.0, 7.0, 30.0, 54.0, 108.0, 216.0, 400.0, 1024.0, 2500.0, 6000.0}) {
    const auto e = model(weight);
    for (int gpus = 1; gpus <= 8; ++gpus) {
      for (double mem : {40.0, 80.0, 94.0, 120.0}) {
        const auto platform = shape(gpus, mem);
        const auto got = plan(spec_for(e), e, platform, site);
        const auto want = testsupport::oracle_plan({weight, gpus, mem});
        CAPTURE(weight);
        CAPTURE(gpus);
        CAPTURE(mem);
        REQUIRE(got.feasible == want.has_value());
        if (!want) continue;
        CHECK(got.tensor_parallel_size == want->tp);
        CHECK(got.pipeline_parallel_size == want->pp);
        CHECK(got.weight_shard_per_gpu_gib == doctest::Approx(want->shard_gib));
      }
    }
  }
}

TEST_CASE("min_gpus is monotone in weight and memory") {
  testsupport::Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const double w1 = testsupport::uniform_real(rng, 0.1, 3000);
    const double w2 = w1 + testsupport::uniform_real(rng, 0, 500);
    const double m1 = testsupport::uniform_int(rng, 16, 192);
    const double m2 = m1 + testsupport::uniform_int(rng, 0, 64);
    PlannerOptions opts;
    opts.max_gpus = 1 << 16;
    const auto g = [&](double w, double m) { return min_gpus(model(w), shape(8, m), opts); };
    CHECK(g(w1, m1) <= g(w2, m1));
    CHECK(g(w1, m2) <= g(w1, m1));
  }
}

TEST_CASE("plan invariants over random inputs") {
  testsupport::Rng rng(99);
  const SiteProfile site;
  for (int i = 0; i < 1000; ++i) {
    const auto e = model(testsupport::random_gib(rng));
    const auto platform = shape(testsupport::uniform_int(rng, 1, 8), testsupport::uniform_int(rng, 16, 192));
    const auto p = plan(spec_for(e), e, platform, site);
    if (!p.feasible) continue;
    CHECK(p.total_gpus == p.tensor_parallel_size * p.pipeline_parallel_size);
    CHECK(p.tensor_parallel_size <= platform.gpus_per_node);
    CHECK(p.kvcache_budget_per_gpu_gib >= 8.0 - 1e-9);
    CHECK(p.weight_shard_per_gpu_gib + p.kvcache_budget_per_gpu_gib ==
          doctest::Approx(platform.gpu_memory_gib * platform.gpu_memory_utilization));
  }
}

TEST_CASE("plan yaml and table") {
  const SiteProfile site;
  const auto scout = model(216);
  const auto p = plan(spec_for(scout), scout, shape(4, 80), site);
  const auto yaml = to_yaml(p);
  CHECK(yaml.find("tensor_parallel_size: 4") != std::string::npos);
  CHECK(yaml.find("weight_shard_per_gpu_gib: 54") != std::string::npos);
  const auto table = format_plan_table(p, spec_for(scout), shape(4, 80));
  CHECK(table.find("tp=4 pp=1 gpus=4 weights=54 GiB/GPU") != std::string::npos);
}
