// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "physopt/error.hpp"

namespace physopt {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSpec: return "invalid specification";
    case ErrorKind::OutOfDomain: return "point outside domain";
    case ErrorKind::ShapeMismatch: return "shape mismatch";
    case ErrorKind::Diverged: return "diverged";
    case ErrorKind::UnsupportedFamily: return "unsupported family";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::DegenerateBasis: return "degenerate basis";
    case ErrorKind::NonSymmetric: return "matrix not symmetric";
    case ErrorKind::UndefinedMetric: return "metric undefined";
    case ErrorKind::Generation: return "generation failed";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace physopt
