#pragma once

// Concurrency-sweep benchmarking against an OpenAI-compatible endpoint. The
// driver runs the serving engine's own benchmark client once per
// concurrency level, one at a time, and keeps going when a point fails.

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hpcserve/execute.hpp"
#include "hpcserve/planner.hpp"
#include "hpcserve/profiles.hpp"
#include "hpcserve/render.hpp"

namespace hpcserve {

enum class PointStatus { ok, crashed, timeout };

std::string_view to_string(PointStatus status);
PointStatus parse_point_status(std::string_view text);

struct BenchPoint {
  int concurrency = 1;
  double output_token_throughput = 0.0;  // tokens/s
  double request_throughput = 0.0;       // requests/s
  double mean_ttft_ms = 0.0;
  double p99_ttft_ms = 0.0;
  double mean_tpot_ms = 0.0;
  double duration_s = 0.0;
  PointStatus status = PointStatus::ok;
  std::string raw_ref;

  bool operator==(const BenchPoint&) const = default;
};

struct BenchSeries {
  std::string label;
  std::vector<BenchPoint> points;
  std::string spec_fingerprint;
  int query_count = 1000;
  std::string dataset_id = "sharegpt";

  bool operator==(const BenchSeries&) const = default;
};

// Throws ValidationError on a broken point or series invariant.
void validate(const BenchPoint& point);
void validate(const BenchSeries& series);

// Powers of two in [lo, hi], ascending. Throws InvalidRange when lo < 1,
// hi < lo, or the range holds no power of two.
std::vector<int> sweep_concurrencies(int lo = 1, int hi = 1024);

struct ProbeOptions {
  std::chrono::duration<double> timeout = std::chrono::minutes(45);
  std::chrono::duration<double> interval = std::chrono::seconds(15);
  std::string path = "/v1/models";
};

struct ProbeResult {
  int attempts = 0;
  std::chrono::duration<double> elapsed{0};
};

// Polls GET <endpoint><path> until a 2xx response. Throws TimeoutError.
ProbeResult probe_ready(const std::string& endpoint_url, const ProbeOptions& options = {});

// Accepts the benchmark client's printed summary block or its JSON result
// file. Fills the metric fields and, when present, the concurrency. Throws
// UnparseableOutput naming the first missing mandatory field.
BenchPoint parse_bench_output(std::string_view raw);

// JSON result document in the benchmark client's key names, plus status and
// raw_ref. parse_bench_output() reads it back.
std::string to_result_json(const BenchPoint& point);

// FNV-1a over the canonical spec, plan, and image text.
std::string spec_fingerprint(const DeploymentSpec& spec, const Plan& plan);

struct SweepOptions {
  std::string label;
  std::vector<int> concurrencies = sweep_concurrencies(1, 1024);
  std::chrono::duration<double> per_point_timeout = std::chrono::minutes(60);
  std::filesystem::path out_dir;
  BenchRequest request;
  std::optional<std::string> runtime_bin;
  ProbeOptions probe;
  bool skip_probe = false;
  std::ostream* log = nullptr;
};

// Sequential sweep. Failed or timed-out points are recorded and the sweep
// continues. Raw output goes to <out_dir>/raw/point-<N>.log and the series
// to <out_dir>/series.yaml. Throws TargetUnavailable when the readiness
// probe fails before the first point.
BenchSeries run_sweep(const SweepOptions& options, const DeploymentSpec& spec,
                      const Plan& plan, const SiteProfile& site,
                      const PlatformProfile& platform, ProcessRunner& runner);

std::string to_yaml(const BenchSeries& series);
BenchSeries parse_series(std::string_view yaml);
BenchSeries load_series(const std::filesystem::path& path);

}  // namespace hpcserve
