#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "hpcserve/execute.hpp"

namespace hpcserve {

struct CliContext {
  std::ostream& out;
  std::ostream& err;
  ProcessRunner& runner;
};

// Routes argv (program name first) to a subcommand. Exit codes: 0 success,
// 2 validation, 3 infeasible plan, 4 external process failure, 5 timeout.
// Failures also print one JSON error record line on ctx.err. With
// --dry-run nothing is spawned.
int dispatch(const std::vector<std::string>& argv, CliContext& ctx);

// {"error":"<Kind>","exit_code":N,"message":"..."}
std::string error_record(std::string_view kind, int code, std::string_view message);

}  // namespace hpcserve
