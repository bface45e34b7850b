#include "hpcserve/planner.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <sstream>

#include "hpcserve/error.hpp"

namespace hpcserve {

namespace {

// Absorbs rounding in weight / gpus + floor <= memory * utilization so that
// exact fits (1024 GiB over 16 x 80 GiB at 0.90) are accepted.
constexpr double kFitTolerance = 1e-9;

int largest_power_of_two_at_most(int n) {
  int p = 1;
  while (p * 2 <= n) p *= 2;
  return p;
}

std::string gib(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Plan infeasible(Plan p, std::string reason) {
  p.feasible = false;
  p.reason = std::move(reason);
  return p;
}

}  // namespace

double usable_memory_gib(const PlatformProfile& platform) {
  return platform.gpu_memory_gib * platform.gpu_memory_utilization;
}

bool fits(double weight_size_gib, int gpus, const PlatformProfile& platform,
          const PlannerOptions& options) {
  if (gpus < 1) return false;
  return weight_size_gib / gpus + options.kvcache_floor_gib <=
         usable_memory_gib(platform) + kFitTolerance;
}

int min_gpus(const ModelCatalogEntry& entry, const PlatformProfile& platform,
             const PlannerOptions& options) {
  if (!(entry.weight_size_gib > 0.0))
    throw ValidationError("weight_size_gib", "must be > 0");
  for (int g = 1; g <= options.max_gpus; g *= 2) {
    if (fits(entry.weight_size_gib, g, platform, options)) return g;
  }
  throw Error(ErrorKind::infeasible_plan,
              entry.id + " (" + gib(entry.weight_size_gib) + " GiB) does not fit on " +
                  std::to_string(options.max_gpus) + " GPUs of " + gib(platform.gpu_memory_gib) +
                  " GiB with a " + gib(options.kvcache_floor_gib) + " GiB kv cache floor");
}

std::string resolve_image(const DeploymentSpec& spec, const PlatformProfile& platform,
                          const SiteProfile& site) {
  const auto it = spec.image_by_accelerator.find(platform.accelerator);
  if (it == spec.image_by_accelerator.end())
    throw Error(ErrorKind::image_missing,
                "no " + std::string(to_string(platform.accelerator)) + " image for " + spec.model +
                    " (platform " + platform.name + ")");
  return site.registry_prefix + it->second;
}

Plan plan(const DeploymentSpec& spec, const ModelCatalogEntry& entry,
          const PlatformProfile& platform, const SiteProfile& site,
          const PlannerOptions& options) {
  if (entry.id != spec.model)
    throw ValidationError("model", "catalog entry " + entry.id + " does not match spec model " +
                                       spec.model);
  validate_pairing(site, platform);

  Plan p;
  p.accelerator = platform.accelerator;
  p.image = resolve_image(spec, platform, site);
  const double weight = entry.weight_size_gib;

  if (spec.tensor_parallel_size) {
    const int tp = *spec.tensor_parallel_size;
    p.tensor_parallel_size = tp;
    p.pipeline_parallel_size = 1;
    p.total_gpus = tp;
    p.weight_shard_per_gpu_gib = weight / tp;
    p.kvcache_budget_per_gpu_gib = usable_memory_gib(platform) - p.weight_shard_per_gpu_gib;
    if (tp > platform.gpus_per_node)
      return infeasible(p, "tensor_parallel_size " + std::to_string(tp) +
                               " exceeds gpus_per_node " +
                               std::to_string(platform.gpus_per_node));
    int pp = 1;
    while (pp <= options.max_nodes && !fits(weight, tp * pp, platform, options)) pp *= 2;
    if (pp > options.max_nodes) {
      return infeasible(p, "tensor_parallel_size " + std::to_string(tp) +
                               " needs more than max_nodes " +
                               std::to_string(options.max_nodes) + " nodes to fit " +
                               gib(weight) + " GiB");
    }
    p.pipeline_parallel_size = pp;
  } else {
    const int tp = largest_power_of_two_at_most(platform.gpus_per_node);
    p.tensor_parallel_size = tp;
    p.pipeline_parallel_size = 1;
    int needed = 0;
    try {
      needed = min_gpus(entry, platform, options);
    } catch (const Error& e) {
      p.total_gpus = tp;
      p.weight_shard_per_gpu_gib = weight / tp;
      p.kvcache_budget_per_gpu_gib = usable_memory_gib(platform) - p.weight_shard_per_gpu_gib;
      return infeasible(p, e.what());
    }
    const int pp = needed > tp ? needed / tp : 1;
    p.pipeline_parallel_size = pp;
    if (pp > options.max_nodes) {
      p.total_gpus = tp * pp;
      p.weight_shard_per_gpu_gib = weight / p.total_gpus;
      p.kvcache_budget_per_gpu_gib = usable_memory_gib(platform) - p.weight_shard_per_gpu_gib;
      return infeasible(p, "needs " + std::to_string(needed) + " GPUs = " + std::to_string(pp) +
                               " nodes of " + std::to_string(tp) + ", above max_nodes " +
                               std::to_string(options.max_nodes));
    }
  }

  p.total_gpus = p.tensor_parallel_size * p.pipeline_parallel_size;
  p.weight_shard_per_gpu_gib = weight / p.total_gpus;
  p.kvcache_budget_per_gpu_gib = usable_memory_gib(platform) - p.weight_shard_per_gpu_gib;
  p.feasible = true;
  return p;
}

void require_feasible(const Plan& plan) {
  if (!plan.feasible) throw Error(ErrorKind::infeasible_plan, "infeasible plan: " + plan.reason);
}

std::string to_yaml(const Plan& plan) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "tensor_parallel_size" << YAML::Value << plan.tensor_parallel_size;
  out << YAML::Key << "pipeline_parallel_size" << YAML::Value << plan.pipeline_parallel_size;
  out << YAML::Key << "total_gpus" << YAML::Value << plan.total_gpus;
  out << YAML::Key << "weight_shard_per_gpu_gib" << YAML::Value
      << format_number(plan.weight_shard_per_gpu_gib);
  out << YAML::Key << "kvcache_budget_per_gpu_gib" << YAML::Value
      << format_number(plan.kvcache_budget_per_gpu_gib);
  out << YAML::Key << "image" << YAML::Value << plan.image;
  out << YAML::Key << "accelerator" << YAML::Value << std::string(to_string(plan.accelerator));
  out << YAML::Key << "feasible" << YAML::Value << plan.feasible;
  if (!plan.feasible) out << YAML::Key << "reason" << YAML::Value << plan.reason;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string format_plan_table(const Plan& plan, const DeploymentSpec& spec,
                              const PlatformProfile& platform) {
  std::ostringstream os;
  auto row = [&os](std::string_view k, const std::string& v) {
    os << k;
    for (std::size_t i = k.size(); i < 22; ++i) os << ' ';
    os << v << '\n';
  };
  row("model", spec.model);
  row("platform", platform.name + " (" + std::string(to_string(platform.accelerator)) + ", " +
                      std::to_string(platform.gpus_per_node) + " x " +
                      gib(platform.gpu_memory_gib) + " GiB, util " +
                      gib(platform.gpu_memory_utilization) + ")");
  row("tensor_parallel_size", std::to_string(plan.tensor_parallel_size));
  row("pipeline_parallel", std::to_string(plan.pipeline_parallel_size));
  row("total_gpus", std::to_string(plan.total_gpus));
  row("weights/GPU", gib(plan.weight_shard_per_gpu_gib) + " GiB");
  row("kvcache/GPU", gib(plan.kvcache_budget_per_gpu_gib) + " GiB");
  row("image", plan.image);
  row("feasible", plan.feasible ? "yes" : "no: " + plan.reason);
  os << "tp=" << plan.tensor_parallel_size << " pp=" << plan.pipeline_parallel_size
     << " gpus=" << plan.total_gpus << " weights=" << gib(plan.weight_shard_per_gpu_gib)
     << " GiB/GPU kvcache=" << gib(plan.kvcache_budget_per_gpu_gib) << " GiB/GPU\n";
  return os.str();
}

}  // namespace hpcserve
