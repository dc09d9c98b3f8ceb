// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ditto {

enum class ErrorKind {
  kInvalidArgument,
  kEmptyInput,
  kShapeMismatch,
  kNotConverged,
  kIo,
  kProtocol,
  kConnectivity,
  kTimeout,
  kRemote,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kEmptyInput: return "empty_input";
    case ErrorKind::kShapeMismatch: return "shape_mismatch";
    case ErrorKind::kNotConverged: return "not_converged";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kConnectivity: return "connectivity";
    case ErrorKind::kTimeout: return "timeout";
    case ErrorKind::kRemote: return "remote";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Wraps an error with the pipeline stage that produced it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, ErrorKind kind, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), kind_(kind) {}

  const std::string& stage() const noexcept { return stage_; }
  ErrorKind kind() const noexcept { return kind_; }

 private:
  std::string stage_;
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const char* what) {
  if (!cond) fail(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace ditto
