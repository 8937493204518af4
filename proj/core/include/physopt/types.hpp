// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

namespace physopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace physopt
