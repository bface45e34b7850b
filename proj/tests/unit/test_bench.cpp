#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <functional>
#include <fstream>

#include "hpcserve/bench.hpp"
#include "hpcserve/error.hpp"
#include "mock_endpoint.hpp"
#include "random_configs.hpp"

using namespace hpcserve;

namespace {

const std::filesystem::path kFixtures(HPCSERVE_FIXTURES_DIR);
const std::filesystem::path kConfigs = std::filesystem::path(HPCSERVE_SOURCE_DIR) / "configs";

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::parse;
}

struct SweepFixture {
  ModelCatalog catalog = load_catalog(kConfigs / "catalog.yaml");
  SiteProfile site = load_site_profile(kConfigs / "sites/default.yaml");
  PlatformProfile hops = load_platform_profile(kConfigs / "platforms/hops.yaml");
  DeploymentSpec spec = resolve_spec(kConfigs / "specs/scout.yaml", catalog);
  Plan p = plan(spec, catalog.at(spec.model), hops, site);
  std::filesystem::path out = std::filesystem::temp_directory_path() /
                              ("hpcserve-sweep-" + std::to_string(::getpid()));

  SweepOptions options(const std::string& url) {
    SweepOptions o;
    o.label = "hops-run1";
    o.request.base_url = url;
    o.runtime_bin = (kFixtures / "fake_runtime.sh").string();
    o.out_dir = out;
    o.probe.interval = std::chrono::milliseconds(20);
    o.probe.timeout = std::chrono::seconds(5);
    o.per_point_timeout = std::chrono::seconds(20);
    return o;
  }
  ~SweepFixture() { std::filesystem::remove_all(out); }
};

}  // namespace

TEST_CASE("sweep grid") {
  const std::vector<int> full = {1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
  CHECK(sweep_concurrencies() == full);
  CHECK(sweep_concurrencies(3, 20) == std::vector<int>{4, 8, 16});
  CHECK(sweep_concurrencies(16, 16) == std::vector<int>{16});
  CHECK(kind_of([] { sweep_concurrencies(0, 4); }) == ErrorKind::invalid_range);
  CHECK(kind_of([] { sweep_concurrencies(8, 4); }) == ErrorKind::invalid_range);
  CHECK(kind_of([] { sweep_concurrencies(5, 7); }) == ErrorKind::invalid_range);
}

TEST_CASE("sweep grid properties over random bounds") {
  testsupport::Rng rng(3);
  for (int i = 0; i < 5000; ++i) {
    const int lo = testsupport::uniform_int(rng, 1, 5000);
    const int hi = testsupport::uniform_int(rng, lo, 100000);
    std::vector<int> want;
    for (long long p = 1; p <= hi; p *= 2) {
      if (p >= lo) want.push_back(static_cast<int>(p));
    }
    if (want.empty()) {
      CHECK(kind_of([&] { sweep_concurrencies(lo, hi); }) == ErrorKind::invalid_range);
      continue;
    }
    const auto got = sweep_concurrencies(lo, hi);
    CHECK(got == want);
  }
}

TEST_CASE("parses the printed summary block") {
  const auto p = parse_bench_output(read_text_file(kFixtures / "vllm_summary.txt"));
  CHECK(p.concurrency == 16);
  CHECK(p.duration_s == doctest::Approx(201.27));
  CHECK(p.request_throughput == doctest::Approx(4.97));
  CHECK(p.output_token_throughput == doctest::Approx(984.77));
  CHECK(p.mean_ttft_ms == doctest::Approx(112.48));
  CHECK(p.p99_ttft_ms == doctest::Approx(402.66));
  CHECK(p.mean_tpot_ms == doctest::Approx(15.42));
}

TEST_CASE("parses the JSON result file") {
  const auto p = parse_bench_output(read_text_file(kFixtures / "vllm_result.json"));
  CHECK(p.concurrency == 64);
  CHECK(p.output_token_throughput == doctest::Approx(2646.2));
  CHECK(p.mean_tpot_ms == doctest::Approx(22.8));
}

TEST_CASE("missing mandatory fields name the first one absent") {
  std::string text = read_text_file(kFixtures / "vllm_summary.txt");
  const auto cut = text.find("Output token throughput");
  text.erase(cut, text.find('\n', cut) - cut + 1);
  try {
    parse_bench_output(text);
    FAIL("expected UnparseableOutput");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unparseable_output);
    CHECK(std::string(e.what()).find("Output token throughput (tok/s)") != std::string::npos);
  }
  CHECK(kind_of([] { parse_bench_output(""); }) == ErrorKind::unparseable_output);
  CHECK(kind_of([] { parse_bench_output("Traceback (most recent call last):\n"); }) ==
        ErrorKind::unparseable_output);
  CHECK(kind_of([] { parse_bench_output("{\"duration\": 1}"); }) == ErrorKind::unparseable_output);
}

TEST_CASE("bench point and series round-trips over random inputs") {
  testsupport::Rng rng(1234);
  for (int i = 0; i < 500; ++i) {
    const auto p = testsupport::random_point(rng, 1 << testsupport::uniform_int(rng, 0, 10));
    CHECK(parse_bench_output(to_result_json(p)) == p);
    const auto s = testsupport::random_series(rng);
    CHECK(parse_series(to_yaml(s)) == s);
  }
}

TEST_CASE("validation rejects broken points") {
  BenchPoint p;
  p.concurrency = 0;
  CHECK_THROWS_AS(validate(p), ValidationError);
  p.concurrency = 4;
  p.output_token_throughput = -1;
  CHECK_THROWS_AS(validate(p), ValidationError);
  BenchSeries s;
  s.label = "x";
  s.points = {BenchPoint{}, BenchPoint{}};
  CHECK_THROWS_AS(validate(s), ValidationError);
}

TEST_CASE("readiness probe waits for the endpoint") {
  testsupport::MockEndpoint endpoint(3);
  ProbeOptions opts;
  opts.interval = std::chrono::milliseconds(10);
  opts.timeout = std::chrono::seconds(5);
  const auto r = probe_ready(endpoint.url(), opts);
  CHECK(r.attempts == 4);
}

TEST_CASE("readiness probe times out") {
  testsupport::MockEndpoint endpoint(1000000);
  ProbeOptions opts;
  opts.interval = std::chrono::milliseconds(20);
  opts.timeout = std::chrono::milliseconds(200);
  CHECK_THROWS_AS(probe_ready(endpoint.url(), opts), TimeoutError);
  CHECK(endpoint.probes() >= 2);
}

TEST_CASE("sweep continues past a crashed point and records artifacts") {
  SweepFixture f;
  testsupport::MockEndpoint endpoint;
  ::setenv("FAIL_AT", "8", 1);
  auto opts = f.options(endpoint.url());
  opts.concurrencies = sweep_concurrencies(1, 32);
  SystemProcessRunner runner;
  const auto s = run_sweep(opts, f.spec, f.p, f.site, f.hops, runner);
  ::unsetenv("FAIL_AT");
  REQUIRE(s.points.size() == 6);
  for (const auto& p : s.points) {
    CAPTURE(p.concurrency);
    CHECK(p.status == (p.concurrency == 8 ? PointStatus::crashed : PointStatus::ok));
  }
  CHECK(s.points[0].output_token_throughput == doctest::Approx(100.0 / (1 + 1 / 256.0)).epsilon(1e-4));
  CHECK(std::filesystem::exists(f.out / "raw/point-8.log"));
  CHECK(read_text_file(f.out / "raw/point-8.log").find("illegal memory access") != std::string::npos);
  CHECK(load_series(f.out) == s);
  CHECK(s.spec_fingerprint == spec_fingerprint(f.spec, f.p));
}

TEST_CASE("sweep marks hung points as timeouts") {
  SweepFixture f;
  ::setenv("HANG_AT", "2", 1);
  auto opts = f.options("http://127.0.0.1:9");
  opts.skip_probe = true;
  opts.concurrencies = {1, 2, 4};
  opts.per_point_timeout = std::chrono::milliseconds(500);
  SystemProcessRunner runner;
  const auto s = run_sweep(opts, f.spec, f.p, f.site, f.hops, runner);
  ::unsetenv("HANG_AT");
  REQUIRE(s.points.size() == 3);
  CHECK(s.points[0].status == PointStatus::ok);
  CHECK(s.points[1].status == PointStatus::timeout);
  CHECK(s.points[2].status == PointStatus::ok);
}

TEST_CASE("sweep refuses to start against an unreachable endpoint") {
  SweepFixture f;
  auto opts = f.options("http://127.0.0.1:9");
  opts.probe.timeout = std::chrono::milliseconds(100);
  SystemProcessRunner runner;
  CHECK(kind_of([&] { run_sweep(opts, f.spec, f.p, f.site, f.hops, runner); }) ==
        ErrorKind::target_unavailable);
  CHECK_FALSE(std::filesystem::exists(f.out / "series.yaml"));
}
