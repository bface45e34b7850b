#include "hpcserve/profiles.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "hpcserve/error.hpp"

namespace hpcserve {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, std::string_view field,
                const std::array<Enum, N>& values) {
  for (Enum v : values) {
    if (to_string(v) == text) return v;
  }
  std::string allowed;
  for (Enum v : values) {
    if (!allowed.empty()) allowed += ", ";
    allowed += to_string(v);
  }
  throw ValidationError(std::string(field), "unknown value '" + std::string(text) +
                                                "' (expected one of: " + allowed + ")");
}

int line_of(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  return mark.is_null() ? 0 : mark.line + 1;
}

[[noreturn]] void type_error(const YAML::Node& node, std::string_view field,
                             std::string_view expected) {
  const int line = line_of(node);
  std::string msg = std::string(field) + ": expected " + std::string(expected);
  if (line > 0) msg += " at line " + std::to_string(line);
  throw ParseError(msg, line);
}

YAML::Node parse_yaml(std::string_view text) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.what(), e.mark.is_null() ? 0 : e.mark.line + 1);
  }
}

void require_map(const YAML::Node& node, std::string_view what) {
  if (!node.IsMap()) type_error(node, what, "a mapping");
}

void reject_unknown_keys(const YAML::Node& node, std::string_view what,
                         std::initializer_list<std::string_view> known) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ParseError(std::string(what) + ": unknown key '" + key + "' at line " +
                           std::to_string(line_of(kv.first)),
                       line_of(kv.first));
    }
  }
}

std::string get_string(const YAML::Node& node, std::string_view field) {
  if (node.IsNull()) return {};
  if (!node.IsScalar()) type_error(node, field, "a string");
  return node.as<std::string>();
}

template <typename Int>
Int get_int(const YAML::Node& node, std::string_view field) {
  if (!node.IsScalar()) type_error(node, field, "an integer");
  try {
    return node.as<Int>();
  } catch (const YAML::Exception&) {
    type_error(node, field, "an integer");
  }
}

double get_double(const YAML::Node& node, std::string_view field) {
  if (!node.IsScalar()) type_error(node, field, "a number");
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    type_error(node, field, "a number");
  }
}

bool get_bool(const YAML::Node& node, std::string_view field) {
  if (!node.IsScalar()) type_error(node, field, "a boolean");
  try {
    return node.as<bool>();
  } catch (const YAML::Exception&) {
    type_error(node, field, "a boolean");
  }
}

std::vector<std::string> get_string_list(const YAML::Node& node, std::string_view field) {
  std::vector<std::string> out;
  if (!node || node.IsNull()) return out;
  if (!node.IsSequence()) type_error(node, field, "a list of strings");
  for (const auto& item : node) out.push_back(get_string(item, field));
  return out;
}

// Plain scalars that YAML would read back as something other than the
// same string need quoting.
bool needs_quotes(const std::string& s) {
  if (s.empty()) return true;
  static const std::unordered_set<std::string> reserved = {
      "~",   "null", "Null", "NULL", "true", "True", "TRUE",  "false", "False",
      "FALSE", "yes", "Yes", "YES",  "no",   "No",   "NO",    "on",    "On",
      "ON",  "off",  "Off",  "OFF",  "y",    "Y",    "n",     "N"};
  if (reserved.count(s)) return true;
  if (std::isspace(static_cast<unsigned char>(s.front())) ||
      std::isspace(static_cast<unsigned char>(s.back())))
    return true;
  double d = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ec == std::errc() && ptr == s.data() + s.size()) return true;
  return false;
}

void emit_string(YAML::Emitter& out, const std::string& s) {
  if (needs_quotes(s)) {
    out << YAML::DoubleQuoted << s;
  } else {
    out << s;
  }
}

void emit_kv(YAML::Emitter& out, std::string_view key, const std::string& value) {
  out << YAML::Key << std::string(key) << YAML::Value;
  emit_string(out, value);
}

void emit_number(YAML::Emitter& out, std::string_view key, double value) {
  out << YAML::Key << std::string(key) << YAML::Value << format_number(value);
}

void emit_list(YAML::Emitter& out, std::string_view key,
               const std::vector<std::string>& values) {
  out << YAML::Key << std::string(key) << YAML::Value << YAML::BeginSeq;
  for (const auto& v : values) emit_string(out, v);
  out << YAML::EndSeq;
}

std::string quantization_text(const ModelCatalogEntry& e) {
  return e.quantization == Quantization::other ? e.quantization_label
                                               : std::string(to_string(e.quantization));
}

ModelCatalogEntry decode_entry(const YAML::Node& node) {
  require_map(node, "models[]");
  reject_unknown_keys(node, "models[]",
                      {"id", "upstream_repo_url", "weight_size_gib", "quantization",
                       "default_context_len", "served_name", "notes"});
  ModelCatalogEntry e;
  e.id = get_string(node["id"], "id");
  e.upstream_repo_url = get_string(node["upstream_repo_url"], "upstream_repo_url");
  if (node["weight_size_gib"]) e.weight_size_gib = get_double(node["weight_size_gib"], "weight_size_gib");
  if (node["quantization"]) {
    const auto q = get_string(node["quantization"], "quantization");
    if (q == "none" || q.empty()) {
      e.quantization = Quantization::none;
    } else if (q == "w4a16") {
      e.quantization = Quantization::w4a16;
    } else {
      e.quantization = Quantization::other;
      e.quantization_label = q;
    }
  }
  if (node["default_context_len"])
    e.default_context_len = get_int<std::int64_t>(node["default_context_len"], "default_context_len");
  e.served_name = node["served_name"] ? get_string(node["served_name"], "served_name") : e.id;
  if (node["notes"]) e.notes = get_string(node["notes"], "notes");
  return e;
}

void set_path(YAML::Node& root, const std::string& dotted, const YAML::Node& value) {
  YAML::Node cur;
  cur.reset(root);
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot - start);
    if (part.empty()) throw ValidationError("override", "empty key segment in '" + dotted + "'");
    if (dot == std::string::npos) {
      cur[part] = value;
      return;
    }
    YAML::Node next = cur[part];
    if (!next.IsDefined() || next.IsNull()) {
      cur[part] = YAML::Node(YAML::NodeType::Map);
      next.reset(cur[part]);
    } else if (!next.IsMap()) {
      throw ValidationError("override", "'" + part + "' in '" + dotted + "' is not a mapping");
    }
    cur.reset(next);
    start = dot + 1;
  }
}

YAML::Node override_value(const std::string& text) {
  try {
    YAML::Node v = YAML::Load(text);
    if (v.IsScalar() || v.IsSequence()) return v;
  } catch (const YAML::Exception&) {
  }
  return YAML::Node(text);
}

constexpr std::array<std::string_view, 9> kSpecKeys = {
    "model", "images", "mode", "max_model_len", "tensor_parallel_size",
    "port",  "extra_engine_args", "models_dir", "sif_path"};

}  // namespace

std::string_view to_string(Quantization v) {
  switch (v) {
    case Quantization::none: return "none";
    case Quantization::w4a16: return "w4a16";
    case Quantization::other: return "other";
  }
  return "?";
}

std::string_view to_string(Accelerator v) {
  return v == Accelerator::cuda ? "cuda" : "rocm";
}

std::string_view to_string(Mode v) { return v == Mode::offline ? "offline" : "online"; }

std::string_view to_string(Runtime v) {
  switch (v) {
    case Runtime::podman: return "podman";
    case Runtime::apptainer: return "apptainer";
    case Runtime::kubernetes: return "kubernetes";
  }
  return "?";
}

std::string_view to_string(Scheduler v) {
  switch (v) {
    case Scheduler::slurm: return "slurm";
    case Scheduler::flux: return "flux";
    case Scheduler::kubernetes: return "kubernetes";
    case Scheduler::none: return "none";
  }
  return "?";
}

std::string_view to_string(Ingress v) {
  switch (v) {
    case Ingress::ssh_tunnel: return "ssh_tunnel";
    case Ingress::cal_proxy: return "cal_proxy";
    case Ingress::k8s_ingress: return "k8s_ingress";
  }
  return "?";
}

Accelerator parse_accelerator(std::string_view text, std::string_view field) {
  return parse_enum(text, field, std::array{Accelerator::cuda, Accelerator::rocm});
}
Mode parse_mode(std::string_view text, std::string_view field) {
  return parse_enum(text, field, std::array{Mode::offline, Mode::online});
}
Runtime parse_runtime(std::string_view text, std::string_view field) {
  return parse_enum(text, field,
                    std::array{Runtime::podman, Runtime::apptainer, Runtime::kubernetes});
}
Scheduler parse_scheduler(std::string_view text, std::string_view field) {
  return parse_enum(text, field, std::array{Scheduler::slurm, Scheduler::flux,
                                            Scheduler::kubernetes, Scheduler::none});
}
Ingress parse_ingress(std::string_view text, std::string_view field) {
  return parse_enum(text, field,
                    std::array{Ingress::ssh_tunnel, Ingress::cal_proxy, Ingress::k8s_ingress});
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  std::string s(buf.data(), ptr);
  return s;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const ModelCatalogEntry* ModelCatalog::find(std::string_view id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

const ModelCatalogEntry& ModelCatalog::at(std::string_view id) const {
  if (const auto* e = find(id)) return *e;
  throw Error(ErrorKind::unknown_model, "unknown model '" + std::string(id) + "'");
}

void validate(const ModelCatalogEntry& entry) {
  const std::string where = "models[" + entry.id + "]";
  if (entry.id.empty()) throw ValidationError("models[].id", "must be non-empty");
  if (!(entry.weight_size_gib > 0.0) || !std::isfinite(entry.weight_size_gib))
    throw ValidationError(where + ".weight_size_gib", "must be > 0");
  if (entry.default_context_len < 1)
    throw ValidationError(where + ".default_context_len", "must be >= 1");
  if (entry.quantization == Quantization::other && entry.quantization_label.empty())
    throw ValidationError(where + ".quantization", "label required for other");
}

void validate(const ModelCatalog& catalog) {
  std::unordered_set<std::string> seen;
  for (const auto& e : catalog.entries) {
    validate(e);
    if (!seen.insert(e.id).second)
      throw ValidationError("models[" + e.id + "].id", "duplicate id '" + e.id + "'");
  }
}

void validate(const DeploymentSpec& spec, const ModelCatalog& catalog) {
  const auto& entry = catalog.at(spec.model);
  if (spec.image_by_accelerator.empty())
    throw ValidationError("images", "must name at least one accelerator image");
  for (const auto& [accel, image] : spec.image_by_accelerator) {
    if (image.empty())
      throw ValidationError("images." + std::string(to_string(accel)), "must be non-empty");
  }
  if (spec.max_model_len < 1) throw ValidationError("max_model_len", "must be >= 1");
  if (spec.max_model_len > entry.default_context_len)
    throw ValidationError("max_model_len",
                          "exceeds model context length " +
                              std::to_string(entry.default_context_len) + " (got " +
                              std::to_string(spec.max_model_len) + ")");
  if (spec.tensor_parallel_size && *spec.tensor_parallel_size < 1)
    throw ValidationError("tensor_parallel_size", "must be a positive integer");
  if (spec.port < 1 || spec.port > 65535)
    throw ValidationError("port", "must be in [1, 65535]");
  if (spec.models_dir.empty()) throw ValidationError("models_dir", "must be non-empty");
}

void validate(const SiteProfile& site) {
  if (!site.registry_prefix.empty() && site.registry_prefix.back() != '/')
    throw ValidationError("registry_prefix", "must be empty or end with '/'");
  if (site.s3_max_attempts < 1) throw ValidationError("s3_max_attempts", "must be >= 1");
  if (site.models_dir.empty()) throw ValidationError("models_dir", "must be non-empty");
}

void validate(const PlatformProfile& platform) {
  if (platform.name.empty()) throw ValidationError("name", "must be non-empty");
  if (platform.gpus_per_node < 1) throw ValidationError("gpus_per_node", "must be >= 1");
  if (!(platform.gpu_memory_gib > 0.0) || !std::isfinite(platform.gpu_memory_gib))
    throw ValidationError("gpu_memory_gib", "must be > 0");
  if (!(platform.gpu_memory_utilization > 0.0) || platform.gpu_memory_utilization > 1.0)
    throw ValidationError("gpu_memory_utilization", "must be in (0, 1]");
}

void validate_pairing(const SiteProfile& site, const PlatformProfile& platform) {
  if (!platform.available_runtimes.count(site.preferred_runtime))
    throw ValidationError("preferred_runtime",
                          std::string(to_string(site.preferred_runtime)) +
                              " is not available on platform " + platform.name);
}

ModelCatalog parse_catalog(std::string_view yaml) {
  const YAML::Node root = parse_yaml(yaml);
  ModelCatalog catalog;
  if (root.IsNull()) return catalog;
  require_map(root, "catalog");
  reject_unknown_keys(root, "catalog", {"models"});
  const YAML::Node models = root["models"];
  if (models && !models.IsNull()) {
    if (!models.IsSequence()) type_error(models, "models", "a list");
    for (const auto& item : models) catalog.entries.push_back(decode_entry(item));
  }
  validate(catalog);
  return catalog;
}

SiteProfile parse_site_profile(std::string_view yaml) {
  const YAML::Node root = parse_yaml(yaml);
  SiteProfile s;
  if (root.IsNull()) {
    validate(s);
    return s;
  }
  require_map(root, "site");
  reject_unknown_keys(root, "site",
                      {"name", "registry_prefix", "s3_endpoint_url", "s3_bucket",
                       "s3_checksum_workaround", "s3_max_attempts", "s3_access_key_env",
                       "s3_secret_key_env", "ca_cert_path", "ca_cert_required",
                       "proxy_exclusions", "preferred_runtime", "models_dir"});
  if (root["name"]) s.name = get_string(root["name"], "name");
  if (root["registry_prefix"]) s.registry_prefix = get_string(root["registry_prefix"], "registry_prefix");
  if (root["s3_endpoint_url"]) s.s3_endpoint_url = get_string(root["s3_endpoint_url"], "s3_endpoint_url");
  if (root["s3_bucket"]) s.s3_bucket = get_string(root["s3_bucket"], "s3_bucket");
  if (root["s3_checksum_workaround"])
    s.s3_checksum_workaround = get_bool(root["s3_checksum_workaround"], "s3_checksum_workaround");
  if (root["s3_max_attempts"]) s.s3_max_attempts = get_int<int>(root["s3_max_attempts"], "s3_max_attempts");
  if (root["s3_access_key_env"])
    s.s3_access_key_env = get_string(root["s3_access_key_env"], "s3_access_key_env");
  if (root["s3_secret_key_env"])
    s.s3_secret_key_env = get_string(root["s3_secret_key_env"], "s3_secret_key_env");
  if (root["ca_cert_path"] && !root["ca_cert_path"].IsNull())
    s.ca_cert_path = get_string(root["ca_cert_path"], "ca_cert_path");
  if (root["ca_cert_required"]) s.ca_cert_required = get_bool(root["ca_cert_required"], "ca_cert_required");
  if (root["proxy_exclusions"]) s.proxy_exclusions = get_string_list(root["proxy_exclusions"], "proxy_exclusions");
  if (root["preferred_runtime"])
    s.preferred_runtime = parse_runtime(get_string(root["preferred_runtime"], "preferred_runtime"),
                                        "preferred_runtime");
  if (root["models_dir"]) s.models_dir = get_string(root["models_dir"], "models_dir");
  validate(s);
  return s;
}

PlatformProfile parse_platform_profile(std::string_view yaml) {
  const YAML::Node root = parse_yaml(yaml);
  require_map(root, "platform");
  reject_unknown_keys(root, "platform",
                      {"name", "accelerator", "gpus_per_node", "gpu_memory_gib", "scheduler",
                       "runtimes", "ingress", "login_host", "gpu_memory_utilization"});
  PlatformProfile p;
  p.name = get_string(root["name"], "name");
  if (root["accelerator"])
    p.accelerator = parse_accelerator(get_string(root["accelerator"], "accelerator"));
  if (root["gpus_per_node"]) p.gpus_per_node = get_int<int>(root["gpus_per_node"], "gpus_per_node");
  if (root["gpu_memory_gib"]) p.gpu_memory_gib = get_double(root["gpu_memory_gib"], "gpu_memory_gib");
  if (root["scheduler"]) p.scheduler = parse_scheduler(get_string(root["scheduler"], "scheduler"));
  for (const auto& r : get_string_list(root["runtimes"], "runtimes"))
    p.available_runtimes.insert(parse_runtime(r, "runtimes"));
  for (const auto& i : get_string_list(root["ingress"], "ingress"))
    p.ingress_modes.insert(parse_ingress(i, "ingress"));
  if (root["login_host"] && !root["login_host"].IsNull())
    p.login_host = get_string(root["login_host"], "login_host");
  if (root["gpu_memory_utilization"])
    p.gpu_memory_utilization = get_double(root["gpu_memory_utilization"], "gpu_memory_utilization");
  validate(p);
  return p;
}

DeploymentSpec parse_spec(std::string_view yaml, const ModelCatalog& catalog,
                          const std::vector<std::string>& overrides) {
  YAML::Node root = parse_yaml(yaml);
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  require_map(root, "spec");

  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ValidationError("override", "expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string top = key.substr(0, key.find('.'));
    if (std::find(kSpecKeys.begin(), kSpecKeys.end(), top) == kSpecKeys.end())
      throw ValidationError("override", "unknown key '" + key + "'");
    set_path(root, key, override_value(item.substr(eq + 1)));
  }

  reject_unknown_keys(root, "spec",
                      {"model", "images", "mode", "max_model_len", "tensor_parallel_size",
                       "port", "extra_engine_args", "models_dir", "sif_path"});
  DeploymentSpec spec;
  spec.model = get_string(root["model"], "model");
  if (spec.model.empty()) throw ValidationError("model", "must name a catalog entry");
  const auto& entry = catalog.at(spec.model);

  if (const YAML::Node images = root["images"]; images && !images.IsNull()) {
    require_map(images, "images");
    for (const auto& kv : images) {
      const auto accel = parse_accelerator(kv.first.as<std::string>(), "images");
      spec.image_by_accelerator[accel] = get_string(kv.second, "images");
    }
  }
  if (root["mode"]) spec.mode = parse_mode(get_string(root["mode"], "mode"));
  spec.max_model_len = root["max_model_len"]
                           ? get_int<std::int64_t>(root["max_model_len"], "max_model_len")
                           : entry.default_context_len;
  if (root["tensor_parallel_size"] && !root["tensor_parallel_size"].IsNull())
    spec.tensor_parallel_size = get_int<int>(root["tensor_parallel_size"], "tensor_parallel_size");
  if (root["port"]) spec.port = get_int<int>(root["port"], "port");
  if (root["extra_engine_args"])
    spec.extra_engine_args = get_string_list(root["extra_engine_args"], "extra_engine_args");
  if (root["models_dir"]) spec.models_dir = get_string(root["models_dir"], "models_dir");
  if (root["sif_path"] && !root["sif_path"].IsNull())
    spec.sif_path = get_string(root["sif_path"], "sif_path");

  validate(spec, catalog);
  return spec;
}

ModelCatalog load_catalog(const std::filesystem::path& path) {
  return parse_catalog(read_text_file(path));
}

SiteProfile load_site_profile(const std::filesystem::path& path) {
  return parse_site_profile(read_text_file(path));
}

PlatformProfile load_platform_profile(const std::filesystem::path& path) {
  return parse_platform_profile(read_text_file(path));
}

DeploymentSpec resolve_spec(const std::filesystem::path& spec_path, const ModelCatalog& catalog,
                            const std::vector<std::string>& overrides) {
  return parse_spec(read_text_file(spec_path), catalog, overrides);
}

std::string to_yaml(const ModelCatalog& catalog) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "models" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : catalog.entries) {
    out << YAML::BeginMap;
    emit_kv(out, "id", e.id);
    emit_kv(out, "upstream_repo_url", e.upstream_repo_url);
    emit_number(out, "weight_size_gib", e.weight_size_gib);
    emit_kv(out, "quantization", quantization_text(e));
    out << YAML::Key << "default_context_len" << YAML::Value << e.default_context_len;
    emit_kv(out, "served_name", e.served_name);
    emit_kv(out, "notes", e.notes);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string to_yaml(const DeploymentSpec& spec) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  emit_kv(out, "model", spec.model);
  out << YAML::Key << "images" << YAML::Value << YAML::BeginMap;
  for (const auto& [accel, image] : spec.image_by_accelerator)
    emit_kv(out, to_string(accel), image);
  out << YAML::EndMap;
  emit_kv(out, "mode", std::string(to_string(spec.mode)));
  out << YAML::Key << "max_model_len" << YAML::Value << spec.max_model_len;
  if (spec.tensor_parallel_size)
    out << YAML::Key << "tensor_parallel_size" << YAML::Value << *spec.tensor_parallel_size;
  out << YAML::Key << "port" << YAML::Value << spec.port;
  emit_list(out, "extra_engine_args", spec.extra_engine_args);
  emit_kv(out, "models_dir", spec.models_dir);
  if (spec.sif_path) emit_kv(out, "sif_path", *spec.sif_path);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string to_yaml(const SiteProfile& site) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  emit_kv(out, "name", site.name);
  emit_kv(out, "registry_prefix", site.registry_prefix);
  emit_kv(out, "s3_endpoint_url", site.s3_endpoint_url);
  emit_kv(out, "s3_bucket", site.s3_bucket);
  out << YAML::Key << "s3_checksum_workaround" << YAML::Value << site.s3_checksum_workaround;
  out << YAML::Key << "s3_max_attempts" << YAML::Value << site.s3_max_attempts;
  emit_kv(out, "s3_access_key_env", site.s3_access_key_env);
  emit_kv(out, "s3_secret_key_env", site.s3_secret_key_env);
  if (site.ca_cert_path) emit_kv(out, "ca_cert_path", *site.ca_cert_path);
  out << YAML::Key << "ca_cert_required" << YAML::Value << site.ca_cert_required;
  emit_list(out, "proxy_exclusions", site.proxy_exclusions);
  emit_kv(out, "preferred_runtime", std::string(to_string(site.preferred_runtime)));
  emit_kv(out, "models_dir", site.models_dir);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string to_yaml(const PlatformProfile& platform) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  emit_kv(out, "name", platform.name);
  emit_kv(out, "accelerator", std::string(to_string(platform.accelerator)));
  out << YAML::Key << "gpus_per_node" << YAML::Value << platform.gpus_per_node;
  emit_number(out, "gpu_memory_gib", platform.gpu_memory_gib);
  emit_kv(out, "scheduler", std::string(to_string(platform.scheduler)));
  std::vector<std::string> runtimes;
  for (auto r : platform.available_runtimes) runtimes.emplace_back(to_string(r));
  emit_list(out, "runtimes", runtimes);
  std::vector<std::string> ingress;
  for (auto i : platform.ingress_modes) ingress.emplace_back(to_string(i));
  emit_list(out, "ingress", ingress);
  if (platform.login_host) emit_kv(out, "login_host", *platform.login_host);
  emit_number(out, "gpu_memory_utilization", platform.gpu_memory_utilization);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace hpcserve
