// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace physopt {

enum class ErrorKind {
  InvalidSpec,
  OutOfDomain,
  ShapeMismatch,
  Diverged,
  UnsupportedFamily,
  Parse,
  Io,
  Config,
  DegenerateBasis,
  NonSymmetric,
  UndefinedMetric,
  Generation,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }
  // Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& what);

}  // namespace physopt
