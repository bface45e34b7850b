#pragma once

// Runtime-specific deployment artifacts rendered from (spec, plan, site,
// platform). Templates live in code so the committed goldens stay
// authoritative; every renderer is deterministic.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hpcserve/planner.hpp"
#include "hpcserve/profiles.hpp"

namespace hpcserve {

enum class ArtifactKind { shell_command, script, manifest };
enum class Target { podman, apptainer, helm, awscli, git, curl, ssh, nginx };

std::string_view to_string(ArtifactKind kind);
std::string_view to_string(Target target);

struct EnvVar {
  std::string name;
  std::string value;

  bool operator==(const EnvVar&) const = default;
};

struct RenderedArtifact {
  ArtifactKind kind = ArtifactKind::shell_command;
  Target target = Target::podman;
  std::string content;
  // Environment the command sets, in emission order. Names are unique.
  std::vector<EnvVar> env;
  // Template that produced the artifact.
  std::string provenance;
  // Executable the content starts with; empty for manifests.
  std::string program;
};

// Serving-engine environment for a mode. Offline yields the full nine
// variable set; online drops the *_OFFLINE flags and telemetry disables.
std::vector<EnvVar> engine_env(Mode mode);
std::vector<EnvVar> offline_env_set();

// Engine arguments following `serve`: the model, parallel sizes, context
// cap, then spec.extra_engine_args in order. Pipeline parallel is only
// emitted for multi-node plans.
std::vector<std::string> engine_args(const DeploymentSpec& spec, const Plan& plan);

struct ImageRef {
  std::string repository;
  std::string tag;
};
ImageRef split_image(std::string_view image);

// `<name>-<accel>.sif`, name being the last repository component up to its
// first '-' (vllm/vllm-openai -> vllm-cuda.sif).
std::string derive_sif_path(std::string_view image, Accelerator accelerator);

struct FetchCredentials {
  std::string user_env = "USER";
  std::string token_env = "TOKEN";
};

// Raw flags appended before the image on the runtime command line.
struct RuntimeExtras {
  std::vector<std::string> flags;
};

RenderedArtifact render_fetch(const ModelCatalogEntry& entry, const SiteProfile& site,
                              const FetchCredentials& credentials = {});
RenderedArtifact render_push(const ModelCatalogEntry& entry, const SiteProfile& site);
RenderedArtifact render_deploy_podman(const DeploymentSpec& spec, const Plan& plan,
                                      const SiteProfile& site, const RuntimeExtras& extras = {});
RenderedArtifact render_deploy_apptainer(const DeploymentSpec& spec, const Plan& plan,
                                         const SiteProfile& site,
                                         const RuntimeExtras& extras = {});
// Values document for the upstream vLLM Helm chart. Single node only.
RenderedArtifact render_helm_values(const DeploymentSpec& spec, const Plan& plan,
                                    const SiteProfile& site, const ModelCatalogEntry& entry);

struct QueryRequest {
  std::string endpoint_url;
  std::string served_name;
  std::string prompt;
  std::string api_key_env = "VLLM_API_KEY";
  double temperature = 0.7;
};
RenderedArtifact render_query(const QueryRequest& request);

RenderedArtifact render_tunnel(int local_port, std::string_view compute_host, int remote_port,
                               std::string_view login_host);
RenderedArtifact render_cal_proxy(int external_port, std::string_view compute_host,
                                  int service_port);

struct BenchRequest {
  std::string base_url;
  int concurrency = 1;
  std::string dataset_name = "sharegpt";
  std::string dataset_path = "./datasets/ShareGPT_V3_unfiltered_cleaned_split.json";
  // Host directories; models defaults to spec.models_dir.
  std::optional<std::string> models_dir;
  std::string datasets_dir = "/datasets";
  int query_count = 1000;
  // Benchmark script inside the image; defaults by accelerator.
  std::optional<std::string> script_path;
  std::vector<std::string> extra_args;
};
RenderedArtifact render_bench(const BenchRequest& request, const DeploymentSpec& spec,
                              const SiteProfile& site, const PlatformProfile& platform);

// Host part of an http(s) URL. Throws ValidationError when malformed.
std::string url_host(std::string_view url);
void validate_port(int port, std::string_view field);

}  // namespace hpcserve
