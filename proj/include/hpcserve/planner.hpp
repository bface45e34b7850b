#pragma once

#include <string>

#include "hpcserve/profiles.hpp"

namespace hpcserve {

struct PlannerOptions {
  // Minimum per-GPU memory left for the kv cache once weights are loaded.
  double kvcache_floor_gib = 8.0;
  // Largest GPU count min_gpus() will consider.
  int max_gpus = 1024;
  // Largest node count (pipeline parallel size) plan() will consider.
  int max_nodes = 8;
};

struct Plan {
  int tensor_parallel_size = 0;
  int pipeline_parallel_size = 0;
  int total_gpus = 0;
  double weight_shard_per_gpu_gib = 0.0;
  double kvcache_budget_per_gpu_gib = 0.0;
  // Registry prefix + accelerator-matched image.
  std::string image;
  Accelerator accelerator = Accelerator::cuda;
  bool feasible = false;
  // Names the limiting constraint when !feasible.
  std::string reason;

  bool operator==(const Plan&) const = default;
};

// Usable engine memory per GPU: gpu_memory * utilization.
double usable_memory_gib(const PlatformProfile& platform);

// Whether `gpus` GPUs hold the weights with at least the kv cache floor left.
bool fits(double weight_size_gib, int gpus, const PlatformProfile& platform,
          const PlannerOptions& options = {});

// Smallest power-of-two GPU count that fits the model. Throws InfeasiblePlan
// when nothing up to options.max_gpus fits.
int min_gpus(const ModelCatalogEntry& entry, const PlatformProfile& platform,
             const PlannerOptions& options = {});

// Resolves the image for the platform's accelerator. Throws ImageMissing.
std::string resolve_image(const DeploymentSpec& spec, const PlatformProfile& platform,
                          const SiteProfile& site);

// Tensor parallel within a node, pipeline parallel across nodes. Picks the
// fewest nodes, then the most GPUs per node. Capacity infeasibility comes
// back as feasible=false with a reason; configuration errors throw.
Plan plan(const DeploymentSpec& spec, const ModelCatalogEntry& entry,
          const PlatformProfile& platform, const SiteProfile& site,
          const PlannerOptions& options = {});

// Throws InfeasiblePlan carrying plan.reason when !plan.feasible.
void require_feasible(const Plan& plan);

std::string to_yaml(const Plan& plan);
// Human-readable table for the CLI.
std::string format_plan_table(const Plan& plan, const DeploymentSpec& spec,
                              const PlatformProfile& platform);

}  // namespace hpcserve
