#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "hpcserve/render.hpp"

namespace hpcserve {

struct ExecOptions {
  // Replaces the artifact's program; a bare name is searched on PATH.
  std::optional<std::string> binary_override;
  // Zero means no watchdog.
  std::chrono::duration<double> timeout{0};
  // Live copy of the child's combined stdout/stderr.
  std::ostream* stream = nullptr;
};

struct ExecResult {
  int exit_code = 0;
  bool timed_out = false;
  std::string output;
  std::chrono::duration<double> elapsed{0};
  std::filesystem::path binary;
};

// Spawns artifacts. The CLI and the sweep driver only talk to this
// interface, so tests can swap in counting or scripted doubles.
class ProcessRunner {
 public:
  virtual ~ProcessRunner() = default;
  // Throws BinaryNotFound; other failures are reported in the result.
  virtual ExecResult run(const RenderedArtifact& artifact, const ExecOptions& options) = 0;
};

class SystemProcessRunner final : public ProcessRunner {
 public:
  ExecResult run(const RenderedArtifact& artifact, const ExecOptions& options) override;
};

std::optional<std::filesystem::path> find_on_path(std::string_view name);

// Runs through `runner` and converts failures into errors: NonZeroExit
// (code propagated) and Timeout.
ExecResult execute(ProcessRunner& runner, const RenderedArtifact& artifact,
                   const ExecOptions& options);

}  // namespace hpcserve
