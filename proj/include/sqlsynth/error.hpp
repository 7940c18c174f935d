// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sqlsynth {

enum class ErrorCode {
    ParseError,
    ValidationError,
    NotFound,
    InvalidInput,
    InvalidVector,
    InvalidMatrix,
    DimensionMismatch,
    StorageError,
    HarnessError,
    GatewayError,
    FixtureMiss,
    ConfigError,
    SelectionError,
    CheckpointError,
};

/// Library-wide exception type. Expected business outcomes (duplicate insert,
/// empty extraction) are reported through return values, not exceptions.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

/// Parse failure with a character offset into the offending text.
class ParseError : public Error {
public:
    ParseError(std::string message, std::size_t position)
        : Error(ErrorCode::ParseError,
                message + " (at offset " + std::to_string(position) + ")"),
          position_(position) {}

    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParseError: return "parse-error";
        case ErrorCode::ValidationError: return "validation-error";
        case ErrorCode::NotFound: return "not-found";
        case ErrorCode::InvalidInput: return "invalid-input";
        case ErrorCode::InvalidVector: return "invalid-vector";
        case ErrorCode::InvalidMatrix: return "invalid-matrix";
        case ErrorCode::DimensionMismatch: return "dimension-mismatch";
        case ErrorCode::StorageError: return "storage-error";
        case ErrorCode::HarnessError: return "harness-error";
        case ErrorCode::GatewayError: return "gateway-error";
        case ErrorCode::FixtureMiss: return "fixture-miss";
        case ErrorCode::ConfigError: return "config-error";
        case ErrorCode::SelectionError: return "selection-error";
        case ErrorCode::CheckpointError: return "checkpoint-error";
    }
    return "unknown";
}

}  // namespace sqlsynth
