#include "hpcserve/error.hpp"

namespace hpcserve {

std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "ParseError";
    case ErrorKind::validation: return "ValidationError";
    case ErrorKind::unknown_model: return "UnknownModel";
    case ErrorKind::image_missing: return "ImageMissing";
    case ErrorKind::missing_cert: return "MissingCert";
    case ErrorKind::infeasible_plan: return "InfeasiblePlan";
    case ErrorKind::multi_node_unsupported: return "MultiNodeUnsupported";
    case ErrorKind::single_node_plan: return "SingleNodePlan";
    case ErrorKind::unsupported_scheduler: return "UnsupportedScheduler";
    case ErrorKind::invalid_range: return "InvalidRange";
    case ErrorKind::unparseable_output: return "UnparseableOutput";
    case ErrorKind::empty_series: return "EmptySeries";
    case ErrorKind::no_common_points: return "NoCommonPoints";
    case ErrorKind::binary_not_found: return "BinaryNotFound";
    case ErrorKind::non_zero_exit: return "NonZeroExit";
    case ErrorKind::target_unavailable: return "TargetUnavailable";
    case ErrorKind::timeout: return "Timeout";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse:
    case ErrorKind::validation:
    case ErrorKind::unknown_model:
    case ErrorKind::image_missing:
    case ErrorKind::missing_cert:
    case ErrorKind::invalid_range:
    case ErrorKind::unparseable_output:
    case ErrorKind::empty_series:
    case ErrorKind::no_common_points:
      return 2;
    case ErrorKind::infeasible_plan:
    case ErrorKind::multi_node_unsupported:
    case ErrorKind::single_node_plan:
    case ErrorKind::unsupported_scheduler:
      return 3;
    case ErrorKind::binary_not_found:
    case ErrorKind::non_zero_exit:
      return 4;
    case ErrorKind::target_unavailable:
    case ErrorKind::timeout:
      return 5;
  }
  return 1;
}

}  // namespace hpcserve
