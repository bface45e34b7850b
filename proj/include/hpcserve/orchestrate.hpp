#pragma once

// Multi-node launch assets: a batch script that starts one engine container
// per node as a Ray head or worker, waits for the cluster to form, then
// starts the server inside the head container.

#include <chrono>
#include <string>

#include "hpcserve/planner.hpp"
#include "hpcserve/profiles.hpp"
#include "hpcserve/render.hpp"

namespace hpcserve {

struct JobScript {
  Scheduler scheduler = Scheduler::slurm;
  int nodes = 0;
  std::string head_launch;
  std::string worker_launch;
  std::string full_script;
  std::string container_image;
  std::string runtime_args;
};

struct RayJobOptions {
  std::string job_name = "vllm-ray";
  std::chrono::seconds poll_interval{10};
  std::chrono::seconds cluster_timeout{600};
  std::string run_cluster_script = "run-cluster.sh";
  // Name run-cluster.sh gives the per-node container.
  std::string container_name = "vllm-ray";
};

JobScript render_ray_job(const DeploymentSpec& spec, const Plan& plan,
                         const PlatformProfile& platform, const SiteProfile& site,
                         const RayJobOptions& options = {});

// `podman exec` into the head container running the multi-node serve.
RenderedArtifact render_head_exec(const DeploymentSpec& spec, const Plan& plan,
                                  const RayJobOptions& options = {});

// Body of run-cluster.sh:
//   run-cluster.sh --head <ip> | --worker <head-ip>  <image> [podman args...]
// Starts the node's container with `ray start` as the entrypoint.
std::string render_run_cluster_script(const PlatformProfile& platform,
                                      const RayJobOptions& options = {});

}  // namespace hpcserve
