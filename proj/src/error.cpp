#include "sixdof/error.hpp"

namespace sixdof {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParams: return "invalid-params";
    case ErrorKind::Parse: return "parse-error";
    case ErrorKind::Schema: return "schema-error";
    case ErrorKind::Io: return "io-error";
    case ErrorKind::EmptyTrajectory: return "empty-trajectory";
    case ErrorKind::MissingFrame: return "missing-frame";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::MissingGraph: return "missing-graph";
    case ErrorKind::OffContent: return "off-content-sample";
    case ErrorKind::SizeLimitExceeded: return "size-limit-exceeded";
    case ErrorKind::NoPositives: return "no-positives";
    case ErrorKind::NoNegatives: return "no-negatives";
    case ErrorKind::UnattainableTarget: return "unattainable-target";
    case ErrorKind::EmptySeries: return "empty-series";
  }
  return "unknown";
}

bool is_data_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::Schema:
    case ErrorKind::Io:
    case ErrorKind::EmptyTrajectory:
    case ErrorKind::MissingFrame:
      return true;
    default:
      return false;
  }
}

}  // namespace sixdof
