#pragma once

#include <Eigen/Dense>

namespace conjcalc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Primal variable x (also houses translations c and y).
using Point = Vec;
/// Dual variable u (also houses slopes w, v and d).
using DualVec = Vec;

inline constexpr int kMaxDim = 3;

}  // namespace conjcalc
