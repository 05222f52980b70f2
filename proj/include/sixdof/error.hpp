#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sixdof {

enum class ErrorKind {
  InvalidParams,
  Parse,
  Schema,
  Io,
  EmptyTrajectory,
  MissingFrame,
  Precondition,
  MissingGraph,
  OffContent,
  SizeLimitExceeded,
  NoPositives,
  NoNegatives,
  UnattainableTarget,
  EmptySeries,
};

std::string_view to_string(ErrorKind kind);

/// True for failures caused by the inputs (files, rows, frame coverage)
/// rather than by the computation itself.
bool is_data_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sixdof
