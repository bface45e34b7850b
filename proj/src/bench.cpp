#include "hpcserve/bench.hpp"

#include <httplib.h>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <thread>

#include "hpcserve/error.hpp"

namespace hpcserve {

namespace {

struct MetricKey {
  std::string_view summary_label;
  std::string_view json_key;
  double BenchPoint::*field;
};

// Mandatory metrics in the order they are reported missing.
constexpr std::array<MetricKey, 6> kMetrics = {{
    {"Benchmark duration (s)", "duration", &BenchPoint::duration_s},
    {"Request throughput (req/s)", "request_throughput", &BenchPoint::request_throughput},
    {"Output token throughput (tok/s)", "output_throughput", &BenchPoint::output_token_throughput},
    {"Mean TTFT (ms)", "mean_ttft_ms", &BenchPoint::mean_ttft_ms},
    {"P99 TTFT (ms)", "p99_ttft_ms", &BenchPoint::p99_ttft_ms},
    {"Mean TPOT (ms)", "mean_tpot_ms", &BenchPoint::mean_tpot_ms},
}};

[[noreturn]] void unparseable(std::string_view field) {
  throw Error(ErrorKind::unparseable_output,
              "benchmark output missing mandatory field '" + std::string(field) + "'");
}

BenchPoint parse_json_result(std::string_view raw) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::unparseable_output, std::string("invalid result file: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::unparseable_output, "result file is not an object");
  BenchPoint p;
  if (auto it = doc.find("status"); it != doc.end() && it->is_string())
    p.status = parse_point_status(it->get<std::string>());
  for (const auto& m : kMetrics) {
    auto it = doc.find(std::string(m.json_key));
    if (it == doc.end() || !it->is_number()) {
      if (p.status != PointStatus::ok) continue;
      unparseable(m.json_key);
    }
    p.*(m.field) = it->get<double>();
  }
  if (auto it = doc.find("max_concurrency"); it != doc.end() && it->is_number_integer())
    p.concurrency = it->get<int>();
  if (auto it = doc.find("raw_ref"); it != doc.end() && it->is_string())
    p.raw_ref = it->get<std::string>();
  return p;
}

BenchPoint parse_summary(std::string_view raw) {
  static const std::regex line_re(R"(^\s*([^:]+?):\s+(\S+)\s*$)");
  std::map<std::string, std::string, std::less<>> values;
  std::istringstream in{std::string(raw)};
  std::string line;
  while (std::getline(in, line)) {
    std::smatch m;
    if (std::regex_match(line, m, line_re)) values[m[1].str()] = m[2].str();
  }
  BenchPoint p;
  for (const auto& metric : kMetrics) {
    const auto it = values.find(metric.summary_label);
    if (it == values.end()) unparseable(metric.summary_label);
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0') unparseable(metric.summary_label);
    p.*(metric.field) = v;
  }
  if (const auto it = values.find("Maximum request concurrency"); it != values.end())
    p.concurrency = std::atoi(it->second.c_str());
  return p;
}

std::string write_raw(const std::filesystem::path& out_dir, int concurrency,
                      const std::string& command, const std::string& output) {
  const std::string rel = "raw/point-" + std::to_string(concurrency) + ".log";
  std::filesystem::create_directories(out_dir / "raw");
  std::ofstream(out_dir / rel, std::ios::binary) << output;
  std::ofstream(out_dir / ("raw/point-" + std::to_string(concurrency) + ".cmd"), std::ios::binary)
      << command;
  return rel;
}

void write_series(const std::filesystem::path& out_dir, const BenchSeries& series) {
  std::filesystem::create_directories(out_dir);
  std::ofstream(out_dir / "series.yaml", std::ios::binary) << to_yaml(series);
}

// Absent metrics read as 0 so hand-written series may carry throughput only.
double node_double(const YAML::Node& n, std::string_view field) {
  if (!n) return 0.0;
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    throw ParseError(std::string(field) + ": expected a number", n.Mark().line + 1);
  }
}

}  // namespace

std::string_view to_string(PointStatus status) {
  switch (status) {
    case PointStatus::ok: return "ok";
    case PointStatus::crashed: return "crashed";
    case PointStatus::timeout: return "timeout";
  }
  return "?";
}

PointStatus parse_point_status(std::string_view text) {
  if (text == "ok") return PointStatus::ok;
  if (text == "crashed") return PointStatus::crashed;
  if (text == "timeout") return PointStatus::timeout;
  throw ValidationError("status", "unknown point status '" + std::string(text) + "'");
}

void validate(const BenchPoint& point) {
  if (point.concurrency < 1) throw ValidationError("concurrency", "must be >= 1");
  if (point.status == PointStatus::ok) {
    if (!(point.output_token_throughput > 0.0) || !std::isfinite(point.output_token_throughput))
      throw ValidationError("output_token_throughput", "ok points need a positive finite value");
    for (double v : {point.request_throughput, point.mean_ttft_ms, point.p99_ttft_ms,
                     point.mean_tpot_ms, point.duration_s}) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ValidationError("metrics", "must be finite and >= 0");
    }
  }
}

void validate(const BenchSeries& series) {
  for (std::size_t i = 0; i < series.points.size(); ++i) {
    validate(series.points[i]);
    if (i > 0 && series.points[i].concurrency <= series.points[i - 1].concurrency)
      throw ValidationError("points", "concurrency must be strictly increasing");
  }
}

std::vector<int> sweep_concurrencies(int lo, int hi) {
  if (lo < 1 || hi < lo)
    throw Error(ErrorKind::invalid_range, "invalid sweep range [" + std::to_string(lo) + ", " +
                                              std::to_string(hi) + "]");
  std::vector<int> out;
  for (long long p = 1; p <= hi; p *= 2) {
    if (p >= lo) out.push_back(static_cast<int>(p));
  }
  if (out.empty())
    throw Error(ErrorKind::invalid_range, "no power of two in [" + std::to_string(lo) + ", " +
                                              std::to_string(hi) + "]");
  return out;
}

ProbeResult probe_ready(const std::string& endpoint_url, const ProbeOptions& options) {
  url_host(endpoint_url);
  std::string base = endpoint_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  if (const auto scheme = base.find("://"); scheme != std::string::npos) {
    if (const auto path = base.find('/', scheme + 3); path != std::string::npos) base.resize(path);
  }

  httplib::Client client(base);
  const auto connect = std::min(options.interval, std::chrono::duration<double>(5.0));
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(connect));
  client.set_read_timeout(std::chrono::seconds(10));

  const auto start = std::chrono::steady_clock::now();
  ProbeResult result;
  while (true) {
    ++result.attempts;
    if (auto res = client.Get(options.path); res && res->status >= 200 && res->status < 300) {
      result.elapsed = std::chrono::steady_clock::now() - start;
      return result;
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;
    if (elapsed + options.interval > options.timeout) {
      const std::chrono::duration<double> secs = elapsed;
      throw TimeoutError(endpoint_url + " not ready after " + std::to_string(result.attempts) +
                             " probes (" + std::to_string(secs.count()) + " s)",
                         secs);
    }
    std::this_thread::sleep_for(options.interval);
  }
}

BenchPoint parse_bench_output(std::string_view raw) {
  const auto first = raw.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) unparseable(kMetrics.front().summary_label);
  if (raw[first] == '{') return parse_json_result(raw.substr(first));
  return parse_summary(raw);
}

std::string to_result_json(const BenchPoint& point) {
  nlohmann::ordered_json doc;
  doc["max_concurrency"] = point.concurrency;
  doc["status"] = std::string(to_string(point.status));
  for (const auto& m : kMetrics) doc[std::string(m.json_key)] = point.*(m.field);
  doc["raw_ref"] = point.raw_ref;
  return doc.dump(2) + "\n";
}

std::string spec_fingerprint(const DeploymentSpec& spec, const Plan& plan) {
  const std::string text = to_yaml(spec) + "---\n" + to_yaml(plan);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

BenchSeries run_sweep(const SweepOptions& options, const DeploymentSpec& spec, const Plan& plan,
                      const SiteProfile& site, const PlatformProfile& platform,
                      ProcessRunner& runner) {
  for (std::size_t i = 0; i < options.concurrencies.size(); ++i) {
    if (options.concurrencies[i] < 1 ||
        (i > 0 && options.concurrencies[i] <= options.concurrencies[i - 1]))
      throw Error(ErrorKind::invalid_range, "sweep must be strictly increasing and >= 1");
  }
  if (!options.skip_probe) {
    try {
      probe_ready(options.request.base_url, options.probe);
    } catch (const TimeoutError& e) {
      throw Error(ErrorKind::target_unavailable, e.what());
    }
  }

  BenchSeries series;
  series.label = options.label;
  series.spec_fingerprint = spec_fingerprint(spec, plan);
  series.query_count = options.request.query_count;
  series.dataset_id = options.request.dataset_name;

  for (int c : options.concurrencies) {
    BenchRequest req = options.request;
    req.concurrency = c;
    const RenderedArtifact artifact = render_bench(req, spec, site, platform);

    ExecOptions exec;
    exec.binary_override = options.runtime_bin;
    exec.timeout = options.per_point_timeout;
    if (options.log) *options.log << "[bench] " << series.label << " concurrency " << c << "\n";
    const ExecResult r = runner.run(artifact, exec);

    BenchPoint point;
    if (r.timed_out) {
      point.status = PointStatus::timeout;
    } else if (r.exit_code != 0) {
      point.status = PointStatus::crashed;
    } else {
      try {
        point = parse_bench_output(r.output);
        point.status = PointStatus::ok;
        point.concurrency = c;
        validate(point);
      } catch (const Error&) {
        point = BenchPoint{};
        point.status = PointStatus::crashed;
      }
    }
    point.concurrency = c;
    point.duration_s = point.status == PointStatus::ok ? point.duration_s : r.elapsed.count();
    if (!options.out_dir.empty()) point.raw_ref = write_raw(options.out_dir, c, artifact.content, r.output);
    if (options.log)
      *options.log << "[bench]   -> " << to_string(point.status) << "\n";
    series.points.push_back(point);
    if (!options.out_dir.empty()) write_series(options.out_dir, series);
  }
  return series;
}

std::string to_yaml(const BenchSeries& series) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "label" << YAML::Value << YAML::DoubleQuoted << series.label;
  out << YAML::Key << "spec_fingerprint" << YAML::Value << YAML::DoubleQuoted << series.spec_fingerprint;
  out << YAML::Key << "query_count" << YAML::Value << series.query_count;
  out << YAML::Key << "dataset_id" << YAML::Value << YAML::DoubleQuoted << series.dataset_id;
  out << YAML::Key << "points" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : series.points) {
    out << YAML::BeginMap;
    out << YAML::Key << "concurrency" << YAML::Value << p.concurrency;
    out << YAML::Key << "status" << YAML::Value << std::string(to_string(p.status));
    out << YAML::Key << "output_token_throughput" << YAML::Value << format_number(p.output_token_throughput);
    out << YAML::Key << "request_throughput" << YAML::Value << format_number(p.request_throughput);
    out << YAML::Key << "mean_ttft_ms" << YAML::Value << format_number(p.mean_ttft_ms);
    out << YAML::Key << "p99_ttft_ms" << YAML::Value << format_number(p.p99_ttft_ms);
    out << YAML::Key << "mean_tpot_ms" << YAML::Value << format_number(p.mean_tpot_ms);
    out << YAML::Key << "duration_s" << YAML::Value << format_number(p.duration_s);
    out << YAML::Key << "raw_ref" << YAML::Value << YAML::DoubleQuoted << p.raw_ref;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

BenchSeries parse_series(std::string_view yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.what(), e.mark.line + 1);
  }
  if (!root.IsMap()) throw ParseError("series: expected a mapping", 0);
  BenchSeries s;
  try {
    s.label = root["label"].as<std::string>("");
    s.spec_fingerprint = root["spec_fingerprint"].as<std::string>("");
    s.query_count = root["query_count"].as<int>(1000);
    s.dataset_id = root["dataset_id"].as<std::string>("sharegpt");
    for (const auto& n : root["points"]) {
      BenchPoint p;
      if (!n["concurrency"]) throw ParseError("series: point without concurrency", n.Mark().line + 1);
      p.concurrency = n["concurrency"].as<int>();
      p.status = parse_point_status(n["status"].as<std::string>("ok"));
      p.output_token_throughput = node_double(n["output_token_throughput"], "output_token_throughput");
      p.request_throughput = node_double(n["request_throughput"], "request_throughput");
      p.mean_ttft_ms = node_double(n["mean_ttft_ms"], "mean_ttft_ms");
      p.p99_ttft_ms = node_double(n["p99_ttft_ms"], "p99_ttft_ms");
      p.mean_tpot_ms = node_double(n["mean_tpot_ms"], "mean_tpot_ms");
      p.duration_s = node_double(n["duration_s"], "duration_s");
      p.raw_ref = n["raw_ref"].as<std::string>("");
      s.points.push_back(p);
    }
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("series: ") + e.what(), e.mark.is_null() ? 0 : e.mark.line + 1);
  }
  validate(s);
  return s;
}

BenchSeries load_series(const std::filesystem::path& path) {
  const auto file = std::filesystem::is_directory(path) ? path / "series.yaml" : path;
  return parse_series(read_text_file(file));
}

}  // namespace hpcserve
