// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/common/error.hpp"

namespace nie {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateInput: return "DEGENERATE_INPUT";
    case ErrorCode::kSize: return "SIZE";
    case ErrorCode::kShape: return "SHAPE";
    case ErrorCode::kNumeric: return "NUMERIC";
    case ErrorCode::kPose: return "POSE";
    case ErrorCode::kConfig: return "CONFIG";
    case ErrorCode::kData: return "DATA";
    case ErrorCode::kIo: return "IO";
  }
  return "UNKNOWN";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace nie
