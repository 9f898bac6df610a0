#pragma once

#include <Eigen/Dense>

namespace levyg {

// Group elements and Lie-algebra data are small (n <= 8).  Capped dynamic
// matrices keep the API size-generic without heap traffic in hot loops.
constexpr int kMaxDim = 8;

using GMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using GVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

}  // namespace levyg
