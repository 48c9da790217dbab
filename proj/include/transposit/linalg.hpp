#pragma once

#include "transposit/state.hpp"

namespace transposit {

struct DenseSolve {
    Vec x;
    double rcond = 0.0;
    double residual = 0.0;  ///< ‖Kx − b‖∞ / (1 + ‖K‖∞‖x‖∞ + ‖b‖∞)
};

inline constexpr double kMinRcond = 1e-13;

/// Partial-pivot LU solve; throws SingularSystem below min_rcond.
DenseSolve solve_dense(const Mat& K, const Vec& b, double min_rcond = kMinRcond);

double relative_residual(const Mat& K, const Vec& x, const Vec& b);

/// Orthonormal basis of the null space of J (columns), canonicalized.
Mat null_space(const Mat& J, double rel_cutoff = 1e-10);

int numerical_rank(const Mat& J, double rel_cutoff, Vec* singular_values = nullptr);

}  // namespace transposit
