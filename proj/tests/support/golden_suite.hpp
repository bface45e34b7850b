#pragma once

// Renders the canonical tuple and pairs each artifact with its committed
// golden after placeholder substitution.

#include <filesystem>
#include <string>
#include <vector>

#include "hpcserve/planner.hpp"
#include "hpcserve/profiles.hpp"
#include "hpcserve/render.hpp"
#include "shell_words.hpp"

namespace testsupport {

struct GoldenCase {
  std::string name;
  std::string rendered;
  std::string golden;
  // Golden covers only the beginning of the rendered artifact.
  bool prefix = false;

  bool matches() const {
    const auto r = normalize_ws(rendered);
    const auto g = normalize_ws(golden);
    return prefix ? r.rfind(g, 0) == 0 : r == g;
  }
};

inline std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = text.find(from, pos)) != std::string::npos; pos += to.size())
    text.replace(pos, from.size(), to);
  return text;
}

inline std::vector<GoldenCase> golden_cases() {
  namespace fs = std::filesystem;
  using namespace hpcserve;
  const fs::path root(HPCSERVE_SOURCE_DIR);
  const fs::path golden_dir(HPCSERVE_GOLDEN_DIR);
  const auto catalog = load_catalog(root / "configs/catalog.yaml");
  const auto site = load_site_profile(root / "configs/sites/default.yaml");
  const auto hops = load_platform_profile(root / "configs/platforms/hops.yaml");
  const auto eldorado = load_platform_profile(root / "configs/platforms/eldorado.yaml");
  const auto spec = resolve_spec(root / "configs/specs/scout.yaml", catalog);
  const auto& entry = catalog.at(spec.model);
  const auto p = plan(spec, entry, hops, site);

  const std::string base_url = "http://eldorado-node07:8000";
  const int batch = 16;
  BenchRequest bench;
  bench.base_url = base_url;
  bench.concurrency = batch;
  bench.models_dir = "/models";

  QueryRequest query;
  query.endpoint_url = "http://localhost:8000";
  query.served_name = entry.served_name;
  query.prompt = "How long to get from Earth to Mars?";

  auto golden = [&](const std::string& file) {
    std::string g = read_text_file(golden_dir / file);
    g = replace_all(g, "$MODEL", spec.model);
    g = replace_all(g, "${LOCAL_S3_SERVICE}", site.s3_endpoint_url);
    g = replace_all(g, "${LOCAL_REGISTRY}", site.registry_prefix);
    g = replace_all(g, "${REG}", site.registry_prefix);
    g = replace_all(g, "${TARGET_SERVER}", url_host(base_url));
    g = replace_all(g, "${BASE_URL}", base_url);
    g = replace_all(g, "${batch_size}", std::to_string(batch));
    return g;
  };

  return {
      {"fetch", render_fetch(entry, site).content, golden("fetch.golden")},
      {"push", render_push(entry, site).content, golden("push.golden")},
      {"deploy_podman", render_deploy_podman(spec, p, site).content, golden("deploy_podman.golden")},
      {"deploy_apptainer", render_deploy_apptainer(spec, p, site).content,
       golden("deploy_apptainer.golden")},
      {"helm_values", render_helm_values(spec, p, site, entry).content, golden("helm_values.golden"),
       true},
      {"query", render_query(query).content, golden("query.golden")},
      {"bench_rocm", render_bench(bench, spec, site, eldorado).content, golden("bench_rocm.golden")},
  };
}

}  // namespace testsupport
