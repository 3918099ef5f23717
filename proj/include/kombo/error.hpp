// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kombo {

enum class ErrorKind {
  NotHangulSyllable,
  InvalidJamoIndex,
  TableGap,
  ConfigTooSmall,
  MalformedSequence,
  VocabError,
  ShapeError,
  ConfigError,
  OracleFailure,
  AlignmentError,
  EmptyPlan,
  CheckpointError,
  AnchorNotFound,
  NoData,
  ParseError,
  IoError,
  NonFiniteLoss,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace kombo
