#include "hpcserve/orchestrate.hpp"

#include "hpcserve/error.hpp"
#include "hpcserve/shell.hpp"

namespace hpcserve {

namespace {

void require_multi_node(const Plan& plan) {
  require_feasible(plan);
  if (plan.pipeline_parallel_size < 2)
    throw Error(ErrorKind::single_node_plan,
                "plan fits on one node; use a single-node deploy instead");
}

std::string podman_args(const DeploymentSpec& spec) {
  std::string out;
  for (const auto& e : engine_env(spec.mode)) out += "-e " + e.name + "=" + e.value + " ";
  out += "--volume=" + spec.models_dir + ":/vllm-workspace/models ";
  out += "--workdir=/vllm-workspace/models";
  return out;
}

struct SchedulerSyntax {
  std::string directive;
  std::string host_list;
  std::string run_on_head;
  std::string run_workers;
  std::string node_count_var;
};

SchedulerSyntax syntax_for(Scheduler scheduler) {
  if (scheduler == Scheduler::slurm) {
    return {"#SBATCH",
            "nodes_array=($(scontrol show hostnames \"$SLURM_JOB_NODELIST\"))",
            "srun --nodes=1 --ntasks=1 -w $head_node",
            "srun -n $num_workers --nodes=$num_workers \\\n--ntasks-per-node=1 --exclude $head_node",
            "SLURM_JOB_NUM_NODES"};
  }
  return {"#flux:",
          "nodes_array=($(flux hostlist --expand --delimiter=' ' local))",
          "flux run --nodes=1 --ntasks=1 --requires=host:$head_node",
          "flux run --ntasks=$num_workers --nodes=$num_workers \\\n--tasks-per-node=1 --requires=-host:$head_node",
          "FLUX_JOB_NNODES"};
}

// Extra step on the head node while the Ray steps are still running.
std::string head_step(Scheduler scheduler) {
  return scheduler == Scheduler::slurm ? "srun --overlap --nodes=1 --ntasks=1 -w \"$head_node\""
                                       : "flux run --nodes=1 --ntasks=1 --requires=host:$head_node";
}

}  // namespace

JobScript render_ray_job(const DeploymentSpec& spec, const Plan& plan,
                         const PlatformProfile& platform, const SiteProfile& site,
                         const RayJobOptions& options) {
  (void)site;
  require_multi_node(plan);
  if (platform.scheduler != Scheduler::slurm && platform.scheduler != Scheduler::flux)
    throw Error(ErrorKind::unsupported_scheduler,
                "multi-node jobs need slurm or flux; platform " + platform.name + " uses " +
                    std::string(to_string(platform.scheduler)));

  const SchedulerSyntax syn = syntax_for(platform.scheduler);
  JobScript job;
  job.scheduler = platform.scheduler;
  job.nodes = plan.pipeline_parallel_size;
  job.container_image = plan.image;
  job.runtime_args = podman_args(spec);

  job.head_launch = "echo \"STARTING RAY HEAD on $head_node\"\n" + syn.run_on_head + " \\\n" +
                    options.run_cluster_script + " --head $head_node_ip \\\n" +
                    "$CONTAINER_IMAGE $PODMAN_ARGS &\n";
  job.worker_launch = "echo \"STARTING $num_workers RAY WORKERS\"\n" + syn.run_workers + " \\\n" +
                      options.run_cluster_script + " --worker $head_node_ip \\\n" +
                      "$CONTAINER_IMAGE $PODMAN_ARGS &\n";

  const std::string nodes = std::to_string(job.nodes);
  const std::string interval = std::to_string(options.poll_interval.count());
  const std::string timeout = std::to_string(options.cluster_timeout.count());
  const std::string alive_check =
      "python3 -c \"import ray, sys; ray.init(address='auto'); "
      "sys.exit(0 if sum(n['Alive'] for n in ray.nodes()) >= " +
      nodes + " else 1)\"";

  std::string s;
  s += "#!/bin/bash\n";
  s += syn.directive + " --job-name=" + options.job_name + "\n";
  s += syn.directive + " --nodes=" + nodes + "\n";
  s += syn.directive + " --exclusive\n";
  s += "\n";
  s += "CONTAINER_IMAGE=" + shell_quote(job.container_image) + "\n";
  s += "PODMAN_ARGS=" + double_quote(job.runtime_args) + "\n";
  s += "\n";
  s += syn.host_list + "\n";
  s += "head_node=${nodes_array[0]}\n";
  s += "head_node_ip=$(" + syn.run_on_head + " hostname --ip-address | awk '{print $1}')\n";
  s += "\n";
  s += "# Start Ray Cluster\n";
  s += "# " + options.run_cluster_script + " spawns vLLM with Podman\n";
  s += "\n";
  s += job.head_launch;
  s += "\n";
  s += "num_workers=$(( $" + syn.node_count_var + " - 1 ))\n";
  s += "\n";
  s += job.worker_launch;
  s += "\n";
  s += "# Wait for Ray cluster to start, then spawn vLLM\n";
  s += "deadline=$(( SECONDS + " + timeout + " ))\n";
  s += "until " + head_step(platform.scheduler) + " \\\n";
  s += "    podman exec " + options.container_name + " " + alive_check + " >/dev/null 2>&1; do\n";
  s += "  if (( SECONDS >= deadline )); then\n";
  s += "    echo \"Ray cluster did not reach " + nodes + " nodes within " + timeout + " s\" >&2\n";
  s += "    exit 1\n";
  s += "  fi\n";
  s += "  sleep " + interval + "\n";
  s += "done\n";
  s += "\n";
  s += head_step(platform.scheduler) + " \\\n";
  s += render_head_exec(spec, plan, options).content;
  s += "\n";
  s += "wait\n";
  job.full_script = s;
  return job;
}

RenderedArtifact render_head_exec(const DeploymentSpec& spec, const Plan& plan,
                                  const RayJobOptions& options) {
  require_multi_node(plan);
  std::vector<std::string> lines = {"podman exec " + options.container_name + " vllm serve"};
  for (const auto& arg : engine_args(spec, plan)) lines.push_back(shell_quote(arg));
  RenderedArtifact a;
  a.kind = ArtifactKind::shell_command;
  a.target = Target::podman;
  a.content = join_continued(lines);
  a.provenance = "orchestrate/head-exec";
  a.program = "podman";
  return a;
}

std::string render_run_cluster_script(const PlatformProfile& platform,
                                      const RayJobOptions& options) {
  const std::string devices = platform.accelerator == Accelerator::cuda
                                  ? "--device nvidia.com/gpu=all"
                                  : "--device /dev/kfd --device /dev/dri";
  std::string s;
  s += "#!/bin/bash\n";
  s += "# " + options.run_cluster_script + " --head <node-ip> | --worker <head-ip> <image> [podman args...]\n";
  s += "# Runs one engine container on this node as a Ray head or worker.\n";
  s += "set -euo pipefail\n";
  s += "\n";
  s += "if [ $# -lt 3 ]; then\n";
  s += "  echo \"usage: $0 --head <ip> | --worker <head-ip> <image> [podman args...]\" >&2\n";
  s += "  exit 2\n";
  s += "fi\n";
  s += "\n";
  s += "role=$1\n";
  s += "addr=$2\n";
  s += "image=$3\n";
  s += "shift 3\n";
  s += "\n";
  s += "case \"$role\" in\n";
  s += "  --head) ray_cmd=\"ray start --block --head --node-ip-address=${addr} --port=6379\" ;;\n";
  s += "  --worker) ray_cmd=\"ray start --block --address=${addr}:6379\" ;;\n";
  s += "  *) echo \"unknown role: $role\" >&2; exit 2 ;;\n";
  s += "esac\n";
  s += "\n";
  s += "exec podman run --rm --name=" + options.container_name + " \\\n";
  s += "  --network=host --ipc=host \\\n";
  s += "  " + devices + " \\\n";
  s += "  --entrypoint=/bin/bash \\\n";
  s += "  \"$@\" \\\n";
  s += "  \"$image\" -c \"$ray_cmd\"\n";
  return s;
}

}  // namespace hpcserve
