#pragma once

// Random valid configurations for property tests. Strings deliberately
// include characters that need quoting in YAML and in shell.

#include <random>
#include <string>
#include <vector>

#include "hpcserve/bench.hpp"
#include "hpcserve/planner.hpp"
#include "hpcserve/profiles.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}
inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}
inline bool coin(Rng& rng) { return uniform_int(rng, 0, 1) == 1; }

template <class T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(items.size()) - 1))];
}

inline std::string random_token(Rng& rng, int min_len = 1, int max_len = 12) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789-_.";
  std::string s;
  const int n = uniform_int(rng, min_len, max_len);
  for (int i = 0; i < n; ++i) s += alphabet[static_cast<std::size_t>(uniform_int(rng, 0, 25))];
  return s;
}

// Free text with YAML and shell metacharacters.
inline std::string random_text(Rng& rng) {
  static const std::vector<std::string> pieces = {
      "alpha", " ", ": ", "#", "'", "\"", "$HOME", "{x}", "[1, 2]", "yes", "null", "-", "*", "&a",
      "!tag", "%", "@", "\\", "tab\there", "0x1F", "1e3", "~", "`cmd`", ","};
  std::string s;
  const int n = uniform_int(rng, 0, 6);
  for (int i = 0; i < n; ++i) s += pick(rng, pieces);
  return s;
}

inline double random_gib(Rng& rng) {
  // Quarter-GiB resolution keeps the values exact in binary and in text.
  return uniform_int(rng, 1, 8000) / 4.0;
}

inline hpcserve::ModelCatalogEntry random_entry(Rng& rng, int index) {
  hpcserve::ModelCatalogEntry e;
  e.id = "org-" + random_token(rng, 1, 6) + "/model-" + std::to_string(index);
  e.upstream_repo_url = "https://huggingface.co/" + e.id;
  e.weight_size_gib = random_gib(rng);
  switch (uniform_int(rng, 0, 2)) {
    case 0: e.quantization = hpcserve::Quantization::none; break;
    case 1: e.quantization = hpcserve::Quantization::w4a16; break;
    default:
      e.quantization = hpcserve::Quantization::other;
      e.quantization_label = "fp8-" + random_token(rng, 1, 4);
  }
  e.default_context_len = uniform_int(rng, 1, 1 << 24);
  e.served_name = coin(rng) ? e.id : "served-" + random_token(rng);
  e.notes = random_text(rng);
  return e;
}

inline hpcserve::ModelCatalog random_catalog(Rng& rng) {
  hpcserve::ModelCatalog c;
  const int n = uniform_int(rng, 1, 5);
  for (int i = 0; i < n; ++i) c.entries.push_back(random_entry(rng, i));
  return c;
}

inline std::string random_extra_arg(Rng& rng) {
  static const std::vector<std::string> args = {
      "--override-generation-config={\"attn_temperature_tuning\": true}",
      "--enforce-eager",
      "--gpu-memory-utilization=0.85",
      "--chat-template=./it's here.jinja",
      "--served-model-name=a b",
      "--download-dir=$HOME/cache",
      "--limit-mm-per-prompt={\"image\": 2}",
      "--quantization=fp8",
  };
  return pick(rng, args);
}

inline hpcserve::DeploymentSpec random_spec(Rng& rng, const hpcserve::ModelCatalog& catalog) {
  hpcserve::DeploymentSpec s;
  const auto& entry = pick(rng, catalog.entries);
  s.model = entry.id;
  const int images = uniform_int(rng, 1, 3);
  if (images & 1)
    s.image_by_accelerator[hpcserve::Accelerator::cuda] = "vllm/vllm-openai:v0." + std::to_string(uniform_int(rng, 5, 12)) + ".1";
  if (images & 2)
    s.image_by_accelerator[hpcserve::Accelerator::rocm] = "rocm/vllm:rocm6.4.1_vllm_0.9." + std::to_string(uniform_int(rng, 0, 3));
  s.mode = coin(rng) ? hpcserve::Mode::offline : hpcserve::Mode::online;
  s.max_model_len = uniform_int(rng, 1, static_cast<int>(entry.default_context_len));
  if (coin(rng)) s.tensor_parallel_size = 1 << uniform_int(rng, 0, 3);
  s.port = coin(rng) ? 8000 : uniform_int(rng, 1024, 65535);
  const int extras = uniform_int(rng, 0, 3);
  for (int i = 0; i < extras; ++i) s.extra_engine_args.push_back(random_extra_arg(rng));
  s.models_dir = pick(rng, std::vector<std::string>{"./models", "/models", "/scratch/u1/models", "./my models"});
  if (coin(rng)) s.sif_path = "images/" + random_token(rng) + ".sif";
  return s;
}

inline hpcserve::SiteProfile random_site(Rng& rng) {
  hpcserve::SiteProfile s;
  s.name = "site-" + random_token(rng);
  s.registry_prefix = coin(rng) ? "" : "registry." + random_token(rng, 1, 5) + ".gov/";
  s.s3_endpoint_url = "https://s3." + random_token(rng, 1, 6) + ".gov";
  s.s3_bucket = pick(rng, std::vector<std::string>{"huggingface.co", "models", "hf-mirror"});
  s.s3_checksum_workaround = coin(rng);
  s.s3_max_attempts = uniform_int(rng, 1, 20);
  s.s3_access_key_env = coin(rng) ? "S3_ID" : "AWS_KEY_" + std::to_string(uniform_int(rng, 0, 9));
  s.s3_secret_key_env = coin(rng) ? "S3_SECRET" : "AWS_SECRET_" + std::to_string(uniform_int(rng, 0, 9));
  if (coin(rng)) s.ca_cert_path = "./" + random_token(rng) + ".pem";
  s.ca_cert_required = s.ca_cert_path && coin(rng);
  const int excl = uniform_int(rng, 0, 3);
  for (int i = 0; i < excl; ++i) s.proxy_exclusions.push_back("." + random_token(rng, 1, 6) + ".gov");
  s.preferred_runtime = coin(rng) ? hpcserve::Runtime::podman : hpcserve::Runtime::apptainer;
  s.models_dir = coin(rng) ? "./models" : "/projects/" + random_token(rng);
  return s;
}

inline hpcserve::PlatformProfile random_platform(Rng& rng) {
  hpcserve::PlatformProfile p;
  p.name = "plat-" + random_token(rng);
  p.accelerator = coin(rng) ? hpcserve::Accelerator::cuda : hpcserve::Accelerator::rocm;
  p.gpus_per_node = uniform_int(rng, 1, 8);
  p.gpu_memory_gib = uniform_int(rng, 16, 192);
  p.scheduler = pick(rng, std::vector<hpcserve::Scheduler>{hpcserve::Scheduler::slurm, hpcserve::Scheduler::flux,
                                                           hpcserve::Scheduler::none});
  p.available_runtimes = {hpcserve::Runtime::podman, hpcserve::Runtime::apptainer};
  if (coin(rng)) p.ingress_modes.insert(hpcserve::Ingress::ssh_tunnel);
  if (coin(rng)) p.ingress_modes.insert(hpcserve::Ingress::cal_proxy);
  if (coin(rng)) p.login_host = random_token(rng) + "-login";
  p.gpu_memory_utilization = uniform_int(rng, 50, 95) / 100.0;
  return p;
}

inline hpcserve::BenchPoint random_point(Rng& rng, int concurrency) {
  hpcserve::BenchPoint p;
  p.concurrency = concurrency;
  p.status = pick(rng, std::vector<hpcserve::PointStatus>{hpcserve::PointStatus::ok, hpcserve::PointStatus::ok,
                                                          hpcserve::PointStatus::crashed,
                                                          hpcserve::PointStatus::timeout});
  if (p.status == hpcserve::PointStatus::ok) {
    p.output_token_throughput = uniform_real(rng, 0.1, 20000);
    p.request_throughput = uniform_real(rng, 0.001, 100);
    p.mean_ttft_ms = uniform_real(rng, 1, 1e5);
    p.p99_ttft_ms = p.mean_ttft_ms * uniform_real(rng, 1, 10);
    p.mean_tpot_ms = uniform_real(rng, 1, 500);
  }
  p.duration_s = uniform_real(rng, 1, 3600);
  p.raw_ref = "raw/point-" + std::to_string(concurrency) + ".log";
  return p;
}

inline hpcserve::BenchSeries random_series(Rng& rng) {
  hpcserve::BenchSeries s;
  s.label = pick(rng, std::vector<std::string>{"hops-1", "eldorado run 2", "goodall:a", "x'y", "405b #3"});
  const int lo_exp = uniform_int(rng, 0, 5);
  const int hi_exp = uniform_int(rng, lo_exp, 10);
  for (int e = lo_exp; e <= hi_exp; ++e) s.points.push_back(random_point(rng, 1 << e));
  s.spec_fingerprint = coin(rng) ? "" : "0123456789abcdef";
  s.query_count = uniform_int(rng, 1, 5000);
  s.dataset_id = pick(rng, std::vector<std::string>{"sharegpt", "random", "custom"});
  return s;
}

}  // namespace testsupport
