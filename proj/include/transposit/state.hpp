#pragma once

#include <Eigen/Dense>

namespace transposit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Point (t, x, v) of the extended phase space; lambda is used only by vakonomic runs.
struct DynState {
    double t = 0.0;
    Vec x;
    Vec v;
    Vec lambda;
};

}  // namespace transposit
