// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

namespace metacog {

// Computation precision: everything downstream of ingestion runs in double.
using Scalar = double;
using Index = Eigen::Index;

using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

using VectorMap = Eigen::Map<Vector>;
using ConstVectorMap = Eigen::Map<const Vector>;

}  // namespace metacog
