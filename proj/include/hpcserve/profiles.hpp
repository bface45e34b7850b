#pragma once

// Declarative data model: model catalog, deployment specs, site and platform
// profiles. All four are loaded from YAML, validated on load, and can be
// written back with the matching to_yaml() serializer.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hpcserve {

enum class Quantization { none, w4a16, other };
enum class Accelerator { cuda, rocm };
enum class Mode { offline, online };
enum class Runtime { podman, apptainer, kubernetes };
enum class Scheduler { slurm, flux, kubernetes, none };
enum class Ingress { ssh_tunnel, cal_proxy, k8s_ingress };

std::string_view to_string(Quantization v);
std::string_view to_string(Accelerator v);
std::string_view to_string(Mode v);
std::string_view to_string(Runtime v);
std::string_view to_string(Scheduler v);
std::string_view to_string(Ingress v);

// Throw ValidationError naming `field` on unknown text.
Accelerator parse_accelerator(std::string_view text, std::string_view field = "accelerator");
Mode parse_mode(std::string_view text, std::string_view field = "mode");
Runtime parse_runtime(std::string_view text, std::string_view field = "runtime");
Scheduler parse_scheduler(std::string_view text, std::string_view field = "scheduler");
Ingress parse_ingress(std::string_view text, std::string_view field = "ingress");

struct ModelCatalogEntry {
  std::string id;
  std::string upstream_repo_url;
  // Total serialized weights as loaded for serving. Declared, not derived
  // from parameter count.
  double weight_size_gib = 0.0;
  Quantization quantization = Quantization::none;
  // Free-form label when quantization == other.
  std::string quantization_label;
  std::int64_t default_context_len = 1;
  std::string served_name;
  std::string notes;

  bool operator==(const ModelCatalogEntry&) const = default;
};

struct ModelCatalog {
  std::vector<ModelCatalogEntry> entries;

  const ModelCatalogEntry* find(std::string_view id) const;
  // Throws UnknownModel.
  const ModelCatalogEntry& at(std::string_view id) const;

  bool operator==(const ModelCatalog&) const = default;
};

struct DeploymentSpec {
  std::string model;
  std::map<Accelerator, std::string> image_by_accelerator;
  Mode mode = Mode::offline;
  std::int64_t max_model_len = 0;
  std::optional<int> tensor_parallel_size;
  int port = 8000;
  std::vector<std::string> extra_engine_args;
  std::string models_dir = "./models";
  // Apptainer image file; derived from the image reference when absent.
  std::optional<std::string> sif_path;

  bool operator==(const DeploymentSpec&) const = default;
};

struct SiteProfile {
  std::string name = "default";
  // Either empty or ending in '/'.
  std::string registry_prefix;
  std::string s3_endpoint_url;
  std::string s3_bucket;
  bool s3_checksum_workaround = true;
  int s3_max_attempts = 10;
  // Names of environment variables holding S3 credentials. Never values.
  std::string s3_access_key_env = "S3_ID";
  std::string s3_secret_key_env = "S3_SECRET";
  std::optional<std::string> ca_cert_path;
  bool ca_cert_required = false;
  std::vector<std::string> proxy_exclusions;
  Runtime preferred_runtime = Runtime::podman;
  // Host directory holding model repositories for fetch/push.
  std::string models_dir = "./models";

  bool operator==(const SiteProfile&) const = default;
};

struct PlatformProfile {
  std::string name;
  Accelerator accelerator = Accelerator::cuda;
  int gpus_per_node = 1;
  double gpu_memory_gib = 0.0;
  Scheduler scheduler = Scheduler::none;
  std::set<Runtime> available_runtimes;
  std::set<Ingress> ingress_modes;
  std::optional<std::string> login_host;
  double gpu_memory_utilization = 0.90;

  bool operator==(const PlatformProfile&) const = default;
};

// Each validate() throws ValidationError naming the field and the broken
// invariant.
void validate(const ModelCatalogEntry& entry);
void validate(const ModelCatalog& catalog);
void validate(const DeploymentSpec& spec, const ModelCatalog& catalog);
void validate(const SiteProfile& site);
void validate(const PlatformProfile& platform);
// Paired-profile invariant: the site's preferred runtime must be available.
void validate_pairing(const SiteProfile& site, const PlatformProfile& platform);

// Loaders parse YAML text (ParseError carries the line), apply defaults, and
// validate.
ModelCatalog parse_catalog(std::string_view yaml);
SiteProfile parse_site_profile(std::string_view yaml);
PlatformProfile parse_platform_profile(std::string_view yaml);

ModelCatalog load_catalog(const std::filesystem::path& path);
SiteProfile load_site_profile(const std::filesystem::path& path);
PlatformProfile load_platform_profile(const std::filesystem::path& path);

// Precedence: overrides > file > catalog default. Override keys are field
// names, dotted for nested maps (e.g. "images.cuda=...").
DeploymentSpec parse_spec(std::string_view yaml, const ModelCatalog& catalog,
                          const std::vector<std::string>& overrides = {});
DeploymentSpec resolve_spec(const std::filesystem::path& spec_path,
                            const ModelCatalog& catalog,
                            const std::vector<std::string>& overrides = {});

std::string to_yaml(const ModelCatalog& catalog);
std::string to_yaml(const DeploymentSpec& spec);
std::string to_yaml(const SiteProfile& site);
std::string to_yaml(const PlatformProfile& platform);

// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace hpcserve
