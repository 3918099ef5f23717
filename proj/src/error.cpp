// SPDX-License-Identifier: Apache-2.0
#include "kombo/error.hpp"

namespace kombo {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotHangulSyllable: return "NotHangulSyllable";
    case ErrorKind::InvalidJamoIndex: return "InvalidJamoIndex";
    case ErrorKind::TableGap: return "TableGap";
    case ErrorKind::ConfigTooSmall: return "ConfigTooSmall";
    case ErrorKind::MalformedSequence: return "MalformedSequence";
    case ErrorKind::VocabError: return "VocabError";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::OracleFailure: return "OracleFailure";
    case ErrorKind::AlignmentError: return "AlignmentError";
    case ErrorKind::EmptyPlan: return "EmptyPlan";
    case ErrorKind::CheckpointError: return "CheckpointError";
    case ErrorKind::AnchorNotFound: return "AnchorNotFound";
    case ErrorKind::NoData: return "NoData";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
  }
  return "Unknown";
}

}  // namespace kombo
