#include "hpcserve/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>

#include "hpcserve/bench.hpp"
#include "hpcserve/error.hpp"
#include "hpcserve/orchestrate.hpp"
#include "hpcserve/planner.hpp"
#include "hpcserve/profiles.hpp"
#include "hpcserve/render.hpp"
#include "hpcserve/report.hpp"
#include "hpcserve/shell.hpp"

namespace hpcserve {

namespace fs = std::filesystem;

namespace {

// Flags shared by every subcommand.
struct Common {
  std::string catalog;
  std::string spec;
  std::string site;
  std::string platform;
  std::vector<std::string> overrides;
  bool dry_run = false;
  std::string runtime_bin;
  std::string out;
  std::string model;

  ModelCatalog load_catalog_or_throw() const {
    if (catalog.empty()) throw ValidationError("--catalog", "required");
    return load_catalog(catalog);
  }
  DeploymentSpec load_spec(const ModelCatalog& cat) const {
    if (spec.empty()) throw ValidationError("--spec", "required");
    return resolve_spec(spec, cat, overrides);
  }
  PlatformProfile load_platform() const {
    if (platform.empty()) throw ValidationError("--platform", "required");
    return load_platform_profile(platform);
  }
  // Without --site, the built-in defaults apply with a runtime the platform
  // actually offers.
  SiteProfile load_site(const PlatformProfile* p = nullptr) const {
    if (!site.empty()) return load_site_profile(site);
    SiteProfile s;
    if (p && !p->available_runtimes.empty() && !p->available_runtimes.count(s.preferred_runtime))
      s.preferred_runtime = *p->available_runtimes.begin();
    return s;
  }
  const ModelCatalogEntry& entry(const ModelCatalog& cat) const {
    if (!model.empty()) return cat.at(model);
    return cat.at(load_spec(cat).model);
  }
  std::optional<std::string> bin() const {
    return runtime_bin.empty() ? std::nullopt : std::optional<std::string>(runtime_bin);
  }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--catalog", c.catalog, "Model catalog file");
  sub->add_option("--spec", c.spec, "Deployment spec file");
  sub->add_option("--site", c.site, "Site profile file");
  sub->add_option("--platform", c.platform, "Platform profile file");
  sub->add_option("--set", c.overrides, "Spec override key=value (repeatable)");
  sub->add_flag("--dry-run", c.dry_run, "Print artifacts without running anything");
  sub->add_option("--runtime-bin", c.runtime_bin, "Executable to use instead of the PATH lookup");
  sub->add_option("--out", c.out, "Output file or directory");
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("--out", "cannot write " + path.string());
  f << text;
}

// Prints or runs an artifact according to --dry-run.
void emit_or_run(const RenderedArtifact& a, const Common& c, CliContext& ctx,
                 std::chrono::duration<double> timeout = std::chrono::duration<double>(0)) {
  if (c.dry_run || a.program.empty()) {
    ctx.out << a.content;
    return;
  }
  ExecOptions opts;
  opts.binary_override = c.bin();
  opts.timeout = timeout;
  opts.stream = &ctx.out;
  execute(ctx.runner, a, opts);
}

std::string as_script(const RenderedArtifact& a) {
  return "#!/bin/bash\nset -euo pipefail\n\n" + a.content;
}

Runtime runtime_from_flag(const std::string& flag, const SiteProfile& site) {
  if (flag.empty()) return site.preferred_runtime;
  if (flag == "helm") return Runtime::kubernetes;
  return parse_runtime(flag, "--runtime");
}

struct Planned {
  ModelCatalog catalog;
  DeploymentSpec spec;
  PlatformProfile platform;
  SiteProfile site;
  Plan plan;
};

Planned load_and_plan(const Common& c, const PlannerOptions& popts = {}) {
  Planned p;
  p.catalog = c.load_catalog_or_throw();
  p.spec = c.load_spec(p.catalog);
  p.platform = c.load_platform();
  p.site = c.load_site(&p.platform);
  p.plan = plan(p.spec, p.catalog.at(p.spec.model), p.platform, p.site, popts);
  return p;
}

RenderedArtifact render_single_node(const Planned& p, Runtime runtime) {
  switch (runtime) {
    case Runtime::podman: return render_deploy_podman(p.spec, p.plan, p.site);
    case Runtime::apptainer: return render_deploy_apptainer(p.spec, p.plan, p.site);
    case Runtime::kubernetes:
      return render_helm_values(p.spec, p.plan, p.site, p.catalog.at(p.spec.model));
  }
  throw ValidationError("--runtime", "unsupported runtime");
}

}  // namespace

std::string error_record(std::string_view kind, int code, std::string_view message) {
  nlohmann::ordered_json rec;
  rec["error"] = std::string(kind);
  rec["exit_code"] = code;
  rec["message"] = std::string(message);
  return rec.dump();
}

int dispatch(const std::vector<std::string>& argv, CliContext& ctx) {
  CLI::App app{"Deploy and benchmark containerized inference services across HPC and Kubernetes",
               "hpcserve"};
  app.require_subcommand(1);
  Common c;

  auto* fetch = app.add_subcommand("fetch", "Clone a model repository with a containerized git");
  add_common(fetch, c);
  fetch->add_option("--model", c.model, "Catalog id (defaults to the spec's model)");
  FetchCredentials creds;
  fetch->add_option("--user-env", creds.user_env, "Variable holding the hub user name");
  fetch->add_option("--token-env", creds.token_env, "Variable holding the hub token");

  auto* push = app.add_subcommand("push", "Sync a downloaded model into the site object store");
  add_common(push, c);
  push->add_option("--model", c.model, "Catalog id (defaults to the spec's model)");

  PlannerOptions popts;
  std::string plan_format = "table";
  auto* plan_cmd = app.add_subcommand("plan", "Choose the GPU layout and memory budget");
  add_common(plan_cmd, c);
  plan_cmd->add_option("--kvcache-floor", popts.kvcache_floor_gib, "Minimum kv cache GiB per GPU");
  plan_cmd->add_option("--max-nodes", popts.max_nodes, "Largest node count to consider");
  plan_cmd->add_option("--format", plan_format, "table or yaml")->check(CLI::IsMember({"table", "yaml"}));

  std::string runtime_flag;
  std::string emit = "command";
  auto* render = app.add_subcommand("render", "Render the single-node deployment artifact");
  add_common(render, c);
  render->add_option("--runtime", runtime_flag, "podman, apptainer or helm")
      ->check(CLI::IsMember({"podman", "apptainer", "helm", "kubernetes"}));
  render->add_option("--emit", emit, "command, script or manifest")
      ->check(CLI::IsMember({"command", "script", "manifest"}));

  bool multi_node = false;
  bool submit = false;
  std::string release = "vllm";
  std::string chart = "./chart-helm";
  auto* deploy = app.add_subcommand("deploy", "Render and launch a deployment");
  add_common(deploy, c);
  deploy->add_option("--runtime", runtime_flag, "podman, apptainer or helm")
      ->check(CLI::IsMember({"podman", "apptainer", "helm", "kubernetes"}));
  deploy->add_flag("--multi-node", multi_node, "Emit the Ray job script and head exec command");
  deploy->add_flag("--submit", submit, "Submit the multi-node job script to the scheduler");
  deploy->add_option("--release", release, "Helm release name");
  deploy->add_option("--chart", chart, "Helm chart reference");

  std::string tunnel_mode = "ssh";
  int local_port = 8000, remote_port = 8000, external_port = 8443;
  std::string compute_host, login_host;
  auto* tunnel = app.add_subcommand("tunnel", "Reach a service on a compute node");
  add_common(tunnel, c);
  tunnel->add_option("--mode", tunnel_mode, "ssh or cal-proxy")->check(CLI::IsMember({"ssh", "cal-proxy"}));
  tunnel->add_option("--local-port", local_port);
  tunnel->add_option("--remote-port", remote_port, "Service port on the compute node");
  tunnel->add_option("--external-port", external_port, "Proxy listen port (cal-proxy)");
  tunnel->add_option("--compute-host", compute_host)->required();
  tunnel->add_option("--login-host", login_host, "Defaults to the platform login host");

  QueryRequest query_req;
  query_req.endpoint_url = "http://localhost:8000";
  auto* query = app.add_subcommand("query", "Send one chat-completions request");
  add_common(query, c);
  query->add_option("--url", query_req.endpoint_url);
  query->add_option("--model", c.model, "Catalog id (defaults to the spec's model)");
  query->add_option("--prompt", query_req.prompt)->required();
  query->add_option("--temperature", query_req.temperature);
  query->add_option("--api-key-env", query_req.api_key_env);

  SweepOptions sweep;
  int lo = 1, hi = 1024;
  double per_point_timeout_s = 3600, probe_timeout_s = 45 * 60, probe_interval_s = 15;
  std::string label;
  std::string models_dir;
  auto* bench = app.add_subcommand("bench", "Run a powers-of-two concurrency sweep");
  add_common(bench, c);
  bench->add_option("--base-url", sweep.request.base_url)->required();
  bench->add_option("--lo", lo);
  bench->add_option("--hi", hi);
  bench->add_option("--label", label)->required();
  bench->add_option("--per-point-timeout", per_point_timeout_s, "Seconds");
  bench->add_option("--probe-timeout", probe_timeout_s, "Seconds");
  bench->add_option("--probe-interval", probe_interval_s, "Seconds");
  bench->add_option("--dataset-path", sweep.request.dataset_path);
  bench->add_option("--datasets-dir", sweep.request.datasets_dir);
  bench->add_option("--models-dir", models_dir);
  bench->add_option("--num-prompts", sweep.request.query_count);
  bench->add_flag("--skip-probe", sweep.skip_probe);

  std::vector<std::string> data_dirs;
  bool emit_plot = false;
  std::vector<std::string> compare_labels;
  auto* report = app.add_subcommand("report", "Tabulate, compare and export sweep results");
  add_common(report, c);
  report->add_option("--data", data_dirs, "Sweep result directories or series files")->required();
  report->add_flag("--emit-plot-data", emit_plot);
  report->add_option("--compare", compare_labels, "Two series labels")->expected(2);

  std::vector<const char*> raw;
  for (const auto& a : argv) raw.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::CallForHelp&) {
    ctx.out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    ctx.out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      ctx.out << app.help();
      return 0;
    }
    ctx.err << error_record("ValidationError", 2, e.what()) << '\n';
    return 2;
  }

  try {
    if (fetch->parsed()) {
      const auto cat = c.load_catalog_or_throw();
      emit_or_run(render_fetch(c.entry(cat), c.load_site(), creds), c, ctx);
    } else if (push->parsed()) {
      const auto cat = c.load_catalog_or_throw();
      emit_or_run(render_push(c.entry(cat), c.load_site()), c, ctx);
    } else if (plan_cmd->parsed()) {
      const Planned p = load_and_plan(c, popts);
      const std::string doc = to_yaml(p.plan);
      ctx.out << (plan_format == "yaml" ? doc : format_plan_table(p.plan, p.spec, p.platform));
      if (!c.out.empty()) write_file(c.out, doc);
      require_feasible(p.plan);
    } else if (render->parsed()) {
      const Planned p = load_and_plan(c);
      const Runtime rt = runtime_from_flag(runtime_flag, p.site);
      const RenderedArtifact a = render_single_node(p, rt);
      if ((emit == "manifest") != (a.kind == ArtifactKind::manifest))
        throw ValidationError("--emit", emit + " is not available for runtime " +
                                            std::string(to_string(rt)));
      const std::string text = emit == "script" ? as_script(a) : a.content;
      if (c.out.empty()) {
        ctx.out << text;
      } else {
        write_file(c.out, text);
      }
    } else if (deploy->parsed()) {
      const Planned p = load_and_plan(c);
      require_feasible(p.plan);
      if (multi_node || p.plan.pipeline_parallel_size > 1) {
        if (!multi_node)
          throw Error(ErrorKind::multi_node_unsupported,
                      "plan needs " + std::to_string(p.plan.pipeline_parallel_size) +
                          " nodes; rerun with --multi-node");
        const JobScript job = render_ray_job(p.spec, p.plan, p.platform, p.site);
        const RenderedArtifact head = render_head_exec(p.spec, p.plan);
        const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
        if (c.dry_run && c.out.empty()) {
          ctx.out << job.full_script << "\n# head exec\n" << head.content;
          return 0;
        }
        write_file(dir / "job.sh", job.full_script);
        write_file(dir / "run-cluster.sh", render_run_cluster_script(p.platform));
        write_file(dir / "head-exec.sh", as_script(head));
        fs::permissions(dir / "run-cluster.sh", fs::perms::owner_exec | fs::perms::group_exec,
                        fs::perm_options::add);
        ctx.out << "wrote " << (dir / "job.sh").string() << ", " << (dir / "run-cluster.sh").string()
                << ", " << (dir / "head-exec.sh").string() << '\n';
        if (submit && !c.dry_run) {
          RenderedArtifact sub;
          sub.program = job.scheduler == Scheduler::slurm ? "sbatch" : "flux";
          sub.content = sub.program + (job.scheduler == Scheduler::flux ? " batch " : " ") +
                        shell_quote((dir / "job.sh").string()) + "\n";
          sub.provenance = "orchestrate/submit";
          emit_or_run(sub, c, ctx);
        }
      } else {
        const Runtime rt = runtime_from_flag(runtime_flag, p.site);
        const RenderedArtifact a = render_single_node(p, rt);
        if (rt != Runtime::kubernetes) {
          emit_or_run(a, c, ctx);
        } else {
          const fs::path values = c.out.empty() ? fs::path("values.yaml") : fs::path(c.out);
          if (c.dry_run) {
            ctx.out << a.content;
          } else {
            write_file(values, a.content);
            RenderedArtifact install;
            install.program = "helm";
            install.content = "helm upgrade --install " + shell_quote(release) + " " +
                              shell_quote(chart) + " -f " + shell_quote(values.string()) + "\n";
            install.provenance = "deploy/helm-install";
            emit_or_run(install, c, ctx);
          }
        }
      }
    } else if (tunnel->parsed()) {
      if (tunnel_mode == "cal-proxy") {
        const RenderedArtifact a = render_cal_proxy(external_port, compute_host, remote_port);
        if (c.out.empty()) {
          ctx.out << a.content;
        } else {
          write_file(c.out, a.content);
        }
      } else {
        if (login_host.empty() && !c.platform.empty()) {
          if (auto lh = c.load_platform().login_host) login_host = *lh;
        }
        if (login_host.empty()) throw ValidationError("--login-host", "required (no platform login_host)");
        emit_or_run(render_tunnel(local_port, compute_host, remote_port, login_host), c, ctx);
      }
    } else if (query->parsed()) {
      const auto cat = c.load_catalog_or_throw();
      query_req.served_name = c.entry(cat).served_name;
      emit_or_run(render_query(query_req), c, ctx);
    } else if (bench->parsed()) {
      const Planned p = load_and_plan(c);
      sweep.label = label;
      sweep.concurrencies = sweep_concurrencies(lo, hi);
      sweep.per_point_timeout = std::chrono::duration<double>(per_point_timeout_s);
      sweep.probe.timeout = std::chrono::duration<double>(probe_timeout_s);
      sweep.probe.interval = std::chrono::duration<double>(probe_interval_s);
      if (!models_dir.empty()) sweep.request.models_dir = models_dir;
      sweep.runtime_bin = c.bin();
      if (c.dry_run) {
        for (int conc : sweep.concurrencies) {
          BenchRequest r = sweep.request;
          r.concurrency = conc;
          ctx.out << render_bench(r, p.spec, p.site, p.platform).content;
        }
        return 0;
      }
      sweep.out_dir = c.out.empty() ? fs::path("bench") / label : fs::path(c.out);
      sweep.log = &ctx.err;
      const BenchSeries series = run_sweep(sweep, p.spec, p.plan, p.site, p.platform, ctx.runner);
      ctx.out << summarize({series});
    } else if (report->parsed()) {
      std::vector<BenchSeries> all;
      for (const auto& d : data_dirs) all.push_back(load_series(d));
      ctx.out << summarize(all);
      const fs::path dir = c.out.empty() ? fs::path("report") : fs::path(c.out);
      if (emit_plot) {
        for (const auto& s : all) {
          const fs::path file = dir / (s.label + ".dat");
          write_file(file, emit_plot_data(s));
          ctx.out << "wrote " << file.string() << '\n';
        }
      }
      if (!compare_labels.empty()) {
        auto find = [&](const std::string& l) -> const BenchSeries& {
          for (const auto& s : all) {
            if (s.label == l) return s;
          }
          throw ValidationError("--compare", "no loaded series labelled '" + l + "'");
        };
        const auto summary = compare(find(compare_labels[0]), find(compare_labels[1]));
        const std::string text = format_comparison(summary);
        ctx.out << text;
        write_file(dir / ("compare-" + compare_labels[0] + "-vs-" + compare_labels[1] + ".txt"), text);
      }
    }
  } catch (const Error& e) {
    ctx.err << error_record(kind_name(e.kind()), exit_code(e.kind()), e.what()) << '\n';
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    ctx.err << error_record("ValidationError", 2, e.what()) << '\n';
    return 2;
  }
  return 0;
}

}  // namespace hpcserve
