#include "hpcserve/render.hpp"

#include <json.hpp>

#include <charconv>
#include <unordered_set>

#include "hpcserve/error.hpp"
#include "hpcserve/shell.hpp"

namespace hpcserve {

namespace {

constexpr std::string_view kContainerModels = "/vllm-workspace/models";

void check_env_unique(const std::vector<EnvVar>& env) {
  std::unordered_set<std::string> seen;
  for (const auto& e : env) {
    if (!seen.insert(e.name).second)
      throw ValidationError("env", "duplicate variable " + e.name);
  }
}

void check_deployable(const Plan& plan) {
  require_feasible(plan);
  if (plan.pipeline_parallel_size > 1)
    throw Error(ErrorKind::multi_node_unsupported,
                "plan spans " + std::to_string(plan.pipeline_parallel_size) +
                    " nodes; use the multi-node job script instead");
}

std::string env_line(const EnvVar& e) { return "-e " + double_quote(e.name + "=" + e.value); }

std::string json_string(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

std::string json_number(double v) {
  std::string s = format_number(v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void check_host(std::string_view host, std::string_view field) {
  if (host.empty()) throw ValidationError(std::string(field), "must be non-empty");
  for (char c : host) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_'))
      throw ValidationError(std::string(field), "invalid host name '" + std::string(host) + "'");
  }
}

std::string gpu_resource(Accelerator a) {
  return a == Accelerator::cuda ? "nvidia.com/gpu" : "amd.com/gpu";
}

// Engine flags use underscores on the command line and dashes in Helm
// values; both spellings are accepted by the engine.
std::string dashed_flag(std::string_view arg) {
  std::string out(arg);
  if (out.rfind("--", 0) != 0) return out;
  const auto end = out.find('=');
  for (std::size_t i = 2; i < std::min(end, out.size()); ++i) {
    if (out[i] == '_') out[i] = '-';
  }
  return out;
}

}  // namespace

std::string_view to_string(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::shell_command: return "command";
    case ArtifactKind::script: return "script";
    case ArtifactKind::manifest: return "manifest";
  }
  return "?";
}

std::string_view to_string(Target target) {
  switch (target) {
    case Target::podman: return "podman";
    case Target::apptainer: return "apptainer";
    case Target::helm: return "helm";
    case Target::awscli: return "awscli";
    case Target::git: return "git";
    case Target::curl: return "curl";
    case Target::ssh: return "ssh";
    case Target::nginx: return "nginx";
  }
  return "?";
}

std::vector<EnvVar> offline_env_set() {
  return {
      {"OMP_NUM_THREADS", "1"},       {"HF_HUB_ENABLE_HF_TRANSFER", "0"},
      {"HF_HUB_DISABLE_TELEMETRY", "1"}, {"VLLM_NO_USAGE_STATS", "1"},
      {"DO_NOT_TRACK", "1"},          {"HF_DATASETS_OFFLINE", "1"},
      {"TRANSFORMERS_OFFLINE", "1"},  {"HF_HUB_OFFLINE", "1"},
      {"VLLM_DISABLE_COMPILE_CACHE", "1"},
  };
}

std::vector<EnvVar> engine_env(Mode mode) {
  if (mode == Mode::offline) return offline_env_set();
  return {
      {"OMP_NUM_THREADS", "1"},
      {"HF_HUB_ENABLE_HF_TRANSFER", "0"},
      {"VLLM_DISABLE_COMPILE_CACHE", "1"},
  };
}

std::vector<std::string> engine_args(const DeploymentSpec& spec, const Plan& plan) {
  std::vector<std::string> args;
  args.push_back(spec.model);
  args.push_back("--tensor_parallel_size=" + std::to_string(plan.tensor_parallel_size));
  if (plan.pipeline_parallel_size > 1)
    args.push_back("--pipeline_parallel_size=" + std::to_string(plan.pipeline_parallel_size));
  args.push_back("--disable-log-requests");
  args.push_back("--max-model-len=" + std::to_string(spec.max_model_len));
  if (spec.port != 8000) args.push_back("--port=" + std::to_string(spec.port));
  for (const auto& a : spec.extra_engine_args) args.push_back(a);
  return args;
}

ImageRef split_image(std::string_view image) {
  const auto at = image.find('@');
  if (at != std::string_view::npos)
    return {std::string(image.substr(0, at)), std::string(image.substr(at + 1))};
  const auto slash = image.rfind('/');
  const auto colon = image.rfind(':');
  if (colon != std::string_view::npos && (slash == std::string_view::npos || colon > slash))
    return {std::string(image.substr(0, colon)), std::string(image.substr(colon + 1))};
  return {std::string(image), "latest"};
}

std::string derive_sif_path(std::string_view image, Accelerator accelerator) {
  const std::string repo = split_image(image).repository;
  const auto slash = repo.rfind('/');
  std::string name = slash == std::string::npos ? repo : repo.substr(slash + 1);
  if (const auto dash = name.find('-'); dash != std::string::npos && dash > 0)
    name = name.substr(0, dash);
  return name + "-" + std::string(to_string(accelerator)) + ".sif";
}

void validate_port(int port, std::string_view field) {
  if (port < 1 || port > 65535)
    throw ValidationError(std::string(field), "port must be in [1, 65535], got " +
                                                  std::to_string(port));
}

std::string url_host(std::string_view url) {
  std::string_view rest;
  if (url.rfind("http://", 0) == 0) {
    rest = url.substr(7);
  } else if (url.rfind("https://", 0) == 0) {
    rest = url.substr(8);
  } else {
    throw ValidationError("url", "expected http(s)://host[:port], got '" + std::string(url) + "'");
  }
  const auto end = rest.find_first_of(":/");
  const std::string host(rest.substr(0, end));
  if (host.empty()) throw ValidationError("url", "missing host in '" + std::string(url) + "'");
  if (end != std::string_view::npos && rest[end] == ':') {
    const auto port_end = rest.find('/', end);
    const auto port_text = rest.substr(end + 1, port_end - end - 1);
    int port = 0;
    const auto [p, ec] =
        std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc() || p != port_text.data() + port_text.size())
      throw ValidationError("url", "invalid port in '" + std::string(url) + "'");
    validate_port(port, "url");
  }
  return host;
}

RenderedArtifact render_fetch(const ModelCatalogEntry& entry, const SiteProfile& site,
                              const FetchCredentials& credentials) {
  const std::string& url = entry.upstream_repo_url;
  const auto scheme_end = url.find("://");
  if (url.empty() || scheme_end == std::string::npos)
    throw ValidationError("upstream_repo_url", "must be an absolute URL for " + entry.id);
  if (!is_env_name(credentials.user_env) || !is_env_name(credentials.token_env))
    throw ValidationError("credentials", "token names must be environment variable names");
  if (!site.ca_cert_path && site.ca_cert_required)
    throw Error(ErrorKind::missing_cert, "site " + site.name + " requires ca_cert_path");

  const std::string authed = url.substr(0, scheme_end + 3) + "${" + credentials.user_env +
                             "}:${" + credentials.token_env + "}@" + url.substr(scheme_end + 3);
  std::vector<std::string> lines = {"podman run"};
  if (site.ca_cert_path) lines.push_back("--volume " + shell_quote(*site.ca_cert_path + ":/etc/ssl/cert.pem"));
  lines.push_back("--volume " + shell_quote(site.models_dir + ":/git/models"));
  lines.push_back("--workdir /git/models");
  lines.push_back("alpine/git clone");
  lines.push_back(quote_expanding(authed));

  RenderedArtifact a;
  a.kind = ArtifactKind::shell_command;
  a.target = Target::git;
  a.content = join_continued(lines);
  a.provenance = "fetch/git-clone";
  a.program = "podman";
  return a;
}

RenderedArtifact render_push(const ModelCatalogEntry& entry, const SiteProfile& site) {
  if (site.s3_endpoint_url.empty())
    throw ValidationError("s3_endpoint_url", "required to push models");
  if (site.s3_bucket.empty()) throw ValidationError("s3_bucket", "required to push models");
  if (!is_env_name(site.s3_access_key_env) || !is_env_name(site.s3_secret_key_env))
    throw ValidationError("s3_access_key_env", "must name environment variables");

  RenderedArtifact a;
  a.env = {
      {"AWS_ACCESS_KEY_ID", "${" + site.s3_access_key_env + "}"},
      {"AWS_SECRET_ACCESS_KEY", "${" + site.s3_secret_key_env + "}"},
      {"AWS_ENDPOINT_URL", site.s3_endpoint_url},
  };
  if (site.s3_checksum_workaround) a.env.push_back({"AWS_REQUEST_CHECKSUM_CALCULATION", "when_required"});
  a.env.push_back({"AWS_MAX_ATTEMPTS", std::to_string(site.s3_max_attempts)});

  std::vector<std::string> lines = {"podman run"};
  for (const auto& e : a.env) lines.push_back("-e " + quote_expanding(e.name + "=" + e.value));
  lines.push_back("--volume " + shell_quote(site.models_dir + ":/aws/models"));
  lines.push_back("amazon/aws-cli s3 sync");
  lines.push_back(shell_quote("./models/" + entry.id));
  lines.push_back(shell_quote("s3://" + site.s3_bucket + "/" + entry.id));
  lines.push_back("--exclude \".git*\"");

  a.kind = ArtifactKind::shell_command;
  a.target = Target::awscli;
  a.content = join_continued(lines);
  a.provenance = "push/s3-sync";
  a.program = "podman";
  return a;
}

RenderedArtifact render_deploy_podman(const DeploymentSpec& spec, const Plan& plan,
                                      const SiteProfile& site, const RuntimeExtras& extras) {
  (void)site;
  check_deployable(plan);
  RenderedArtifact a;
  a.env = engine_env(spec.mode);
  check_env_unique(a.env);

  std::vector<std::string> lines = {"podman run", "--rm", "--name=vllm", "--network=host",
                                    "--ipc=host", "--entrypoint=vllm"};
  if (plan.accelerator == Accelerator::cuda) {
    lines.push_back("--device nvidia.com/gpu=all");
  } else {
    lines.push_back("--device /dev/kfd --device /dev/dri");
  }
  for (const auto& e : a.env) lines.push_back(env_line(e));
  lines.push_back("--volume=" + shell_quote(spec.models_dir + ":" + std::string(kContainerModels)));
  lines.push_back("--workdir=" + std::string(kContainerModels));
  for (const auto& f : extras.flags) lines.push_back(f);
  lines.push_back(shell_quote(plan.image) + " serve");
  for (const auto& arg : engine_args(spec, plan)) lines.push_back(shell_quote(arg));

  a.kind = ArtifactKind::shell_command;
  a.target = Target::podman;
  a.content = join_continued(lines);
  a.provenance = "deploy/podman";
  a.program = "podman";
  return a;
}

RenderedArtifact render_deploy_apptainer(const DeploymentSpec& spec, const Plan& plan,
                                         const SiteProfile& site, const RuntimeExtras& extras) {
  (void)site;
  check_deployable(plan);
  RenderedArtifact a;
  a.env.push_back({"HF_HOME", "/root/.cache/huggingface"});
  for (auto& e : engine_env(spec.mode)) a.env.push_back(std::move(e));
  check_env_unique(a.env);

  // Apptainer runs as the caller with $HOME mapped in; the engine image
  // expects an isolated root environment.
  std::vector<std::string> lines = {"apptainer exec", "--fakeroot", "--writable-tmpfs",
                                    "--cleanenv", "--no-home"};
  lines.push_back(plan.accelerator == Accelerator::cuda ? "--nv" : "--rocm");
  for (const auto& e : a.env) lines.push_back(env_line(e));
  lines.push_back("--bind " + shell_quote(spec.models_dir + ":" + std::string(kContainerModels)));
  lines.push_back("--cwd " + std::string(kContainerModels));
  for (const auto& f : extras.flags) lines.push_back(f);
  const std::string sif = spec.sif_path ? *spec.sif_path : derive_sif_path(plan.image, plan.accelerator);
  lines.push_back(shell_quote(sif) + " vllm serve");
  for (const auto& arg : engine_args(spec, plan)) lines.push_back(shell_quote(arg));

  a.kind = ArtifactKind::shell_command;
  a.target = Target::apptainer;
  a.content = join_continued(lines);
  a.provenance = "deploy/apptainer";
  a.program = "apptainer";
  return a;
}

RenderedArtifact render_helm_values(const DeploymentSpec& spec, const Plan& plan,
                                    const SiteProfile& site, const ModelCatalogEntry& entry) {
  (void)site;
  require_feasible(plan);
  if (plan.pipeline_parallel_size != 1)
    throw Error(ErrorKind::multi_node_unsupported,
                "Helm deployment covers single-node plans only (pipeline_parallel_size=" +
                    std::to_string(plan.pipeline_parallel_size) + ")");

  RenderedArtifact a;
  a.env = {{"HOME", "/data"}, {"HF_HOME", "/data"}, {"HF_HUB_DISABLE_TELEMETRY", "1"}};
  for (auto& e : engine_env(spec.mode)) {
    if (e.name != "HF_HUB_DISABLE_TELEMETRY") a.env.push_back(std::move(e));
  }
  check_env_unique(a.env);

  const ImageRef ref = split_image(plan.image);
  const auto args = engine_args(spec, plan);
  std::vector<std::string> command_lines = {
      "\"vllm\", \"serve\", \"/data/\",",
      "\"--host\", \"0.0.0.0\", \"--port\", " + json_string(std::to_string(spec.port)) + ",",
      "\"--served-model-name\", " + json_string(entry.served_name) + ",",
  };
  // args[0] is the model path, replaced by /data/ above; --port is explicit.
  std::vector<std::string> flags;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i].rfind("--port=", 0) == 0) continue;
    flags.push_back(json_string(dashed_flag(args[i])));
  }
  for (std::size_t i = 0; i < flags.size(); ++i)
    command_lines.push_back(flags[i] + (i + 1 < flags.size() ? "," : ""));
  if (flags.empty()) command_lines.back().pop_back();

  std::string doc;
  doc += "# -- vLLM Image configuration\n";
  doc += "image:\n";
  doc += "  # -- Container image name\n";
  doc += "  repository: " + json_string(ref.repository) + "\n\n";
  doc += "  # -- Container tag / vLLM version\n";
  doc += "  tag: " + json_string(ref.tag) + "\n\n";
  doc += "  # -- Container launch command\n";
  doc += "  command: [" + command_lines.front() + "\n";
  for (std::size_t i = 1; i < command_lines.size(); ++i) doc += "            " + command_lines[i] + "\n";
  doc += "            ]\n\n";
  doc += "# -- Environment variables\n";
  doc += "env:\n";
  for (const auto& e : a.env) {
    doc += "  - name: " + e.name + "\n";
    doc += "    value: " + json_string(e.value) + "\n";
  }
  doc += "\n# -- Container port\n";
  doc += "containerPort: " + std::to_string(spec.port) + "\n";
  doc += "\n# -- Resource configuration\n";
  doc += "resources:\n";
  for (const char* section : {"requests", "limits"}) {
    doc += std::string("  ") + section + ":\n";
    doc += "    " + gpu_resource(plan.accelerator) + ": " +
           std::to_string(plan.tensor_parallel_size) + "\n";
  }

  a.kind = ArtifactKind::manifest;
  a.target = Target::helm;
  a.content = doc;
  a.provenance = "deploy/helm-values";
  return a;
}

RenderedArtifact render_query(const QueryRequest& request) {
  url_host(request.endpoint_url);
  if (request.prompt.empty())
    throw ValidationError("prompt", "message content must be non-empty");
  if (request.served_name.empty()) throw ValidationError("model", "served name must be non-empty");
  if (!request.api_key_env.empty() && !is_env_name(request.api_key_env))
    throw ValidationError("api_key_env", "must be an environment variable name");

  std::string url = request.endpoint_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const std::string path = "/v1/chat/completions";
  if (url.size() < path.size() || url.compare(url.size() - path.size(), path.size(), path) != 0)
    url += path;

  std::string body = "{\n";
  body += "  \"model\": " + json_string(request.served_name) + ",\n";
  body += "  \"messages\": [{\"role\": \"user\", \"content\": " + json_string(request.prompt) + "}],\n";
  body += "  \"temperature\": " + json_number(request.temperature) + "\n";
  body += "}";

  std::vector<std::string> lines = {"curl " + shell_quote(url),
                                    "-H \"Content-Type: application/json\""};
  if (!request.api_key_env.empty())
    lines.push_back("-H " + double_quote("Authorization: Bearer ${" + request.api_key_env + "}"));
  std::string quoted_body = "'";
  for (char c : body) {
    if (c == '\'') {
      quoted_body += "'\\''";
    } else {
      quoted_body += c;
    }
  }
  quoted_body += "'";
  lines.push_back("-d " + quoted_body);

  RenderedArtifact a;
  a.kind = ArtifactKind::shell_command;
  a.target = Target::curl;
  a.content = join_continued(lines);
  a.provenance = "access/chat-completions";
  a.program = "curl";
  return a;
}

RenderedArtifact render_tunnel(int local_port, std::string_view compute_host, int remote_port,
                               std::string_view login_host) {
  validate_port(local_port, "local_port");
  validate_port(remote_port, "remote_port");
  check_host(compute_host, "compute_host");
  check_host(login_host, "login_host");
  RenderedArtifact a;
  a.kind = ArtifactKind::shell_command;
  a.target = Target::ssh;
  a.content = "ssh -L " + std::to_string(local_port) + ":" + std::string(compute_host) + ":" +
              std::to_string(remote_port) + " -N -f " + std::string(login_host) + "\n";
  a.provenance = "access/ssh-tunnel";
  a.program = "ssh";
  return a;
}

RenderedArtifact render_cal_proxy(int external_port, std::string_view compute_host,
                                  int service_port) {
  validate_port(external_port, "external_port");
  validate_port(service_port, "service_port");
  check_host(compute_host, "compute_host");
  std::string upstream = "cal_";
  for (char c : compute_host) upstream += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  upstream += "_" + std::to_string(service_port);

  std::string s;
  s += "# Compute-as-Login reverse proxy for a service on a compute node.\n";
  s += "upstream " + upstream + " {\n";
  s += "    server " + std::string(compute_host) + ":" + std::to_string(service_port) + ";\n";
  s += "}\n\n";
  s += "server {\n";
  s += "    listen " + std::to_string(external_port) + ";\n";
  s += "    location / {\n";
  s += "        proxy_pass http://" + upstream + ";\n";
  s += "        proxy_http_version 1.1;\n";
  s += "        proxy_set_header Host $host;\n";
  s += "        proxy_set_header X-Forwarded-For $proxy_add_x_forwarded_for;\n";
  s += "        proxy_buffering off;\n";
  s += "        proxy_read_timeout 3600s;\n";
  s += "    }\n";
  s += "}\n";

  RenderedArtifact a;
  a.kind = ArtifactKind::manifest;
  a.target = Target::nginx;
  a.content = s;
  a.provenance = "access/cal-proxy";
  return a;
}

RenderedArtifact render_bench(const BenchRequest& request, const DeploymentSpec& spec,
                              const SiteProfile& site, const PlatformProfile& platform) {
  if (request.concurrency < 1) throw ValidationError("concurrency", "must be >= 1");
  if (request.query_count < 1) throw ValidationError("query_count", "must be >= 1");
  const std::string host = url_host(request.base_url);
  const std::string image = resolve_image(spec, platform, site);
  const std::string script =
      request.script_path ? *request.script_path
                          : platform.accelerator == Accelerator::rocm
                                ? "/app/vllm/benchmarks/benchmark_serving.py"
                                : "/vllm-workspace/benchmarks/benchmark_serving.py";
  const std::string models_dir = request.models_dir ? *request.models_dir : spec.models_dir;

  std::string no_proxy = "${no_proxy}";
  for (const auto& h : site.proxy_exclusions) no_proxy += "," + h;
  no_proxy += "," + host;

  RenderedArtifact a;
  a.env = {{"no_proxy", no_proxy}};

  // Inner command for bash -c; continuation lines are removed by the shell
  // inside double quotes.
  std::vector<std::string> inner = {
      "python3 " + shell_quote(script),
      "--backend openai-chat",
      "--endpoint /v1/chat/completions",
      "--base-url " + shell_quote(request.base_url),
      "--dataset-name=" + shell_quote(request.dataset_name),
      "--dataset-path=" + shell_quote(request.dataset_path),
      "--model " + shell_quote(spec.model),
  };
  if (request.query_count != 1000) inner.push_back("--num-prompts " + std::to_string(request.query_count));
  for (const auto& x : request.extra_args) inner.push_back(shell_quote(x));
  inner.push_back("--max-concurrency " + std::to_string(request.concurrency));
  std::string inner_text = join_continued(inner);
  inner_text.pop_back();
  std::string escaped;
  for (char c : inner_text) {
    if (c == '"' || c == '`' || c == '$') escaped += '\\';
    escaped += c;
  }

  std::vector<std::string> lines = {"podman run",
                                    "--rm",
                                    "--name=vllm-bench",
                                    "--network=host",
                                    "--ipc=host",
                                    "-e " + double_quote("no_proxy=" + no_proxy),
                                    "--entrypoint=\"/bin/bash\"",
                                    "--volume " + double_quote(models_dir + ":" + std::string(kContainerModels)),
                                    "--volume " + double_quote(request.datasets_dir + ":" +
                                                               std::string(kContainerModels) + "/datasets"),
                                    "--workdir=\"" + std::string(kContainerModels) + "\"",
                                    shell_quote(image),
                                    "-c \"" + escaped + "\""};

  a.kind = ArtifactKind::shell_command;
  a.target = Target::podman;
  a.content = join_continued(lines);
  a.provenance = "bench/serving-benchmark";
  a.program = "podman";
  return a;
}

}  // namespace hpcserve
