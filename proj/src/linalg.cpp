#include "transposit/linalg.hpp"

#include <cmath>

#include "transposit/errors.hpp"

namespace transposit {

double relative_residual(const Mat& K, const Vec& x, const Vec& b) {
    if (b.size() == 0) return 0.0;
    const double r = (K * x - b).lpNorm<Eigen::Infinity>();
    const double knorm = K.cwiseAbs().rowwise().sum().maxCoeff();
    return r / (1.0 + knorm * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>());
}

DenseSolve solve_dense(const Mat& K, const Vec& b, double min_rcond) {
    DenseSolve out;
    if (K.rows() == 0) {
        out.x = Vec(0);
        out.rcond = 1.0;
        return out;
    }
    Eigen::PartialPivLU<Mat> lu(K);
    out.rcond = lu.rcond();
    if (!std::isfinite(out.rcond) || out.rcond < min_rcond)
        throw Error(ErrorKind::SingularSystem, "condition estimate " + std::to_string(out.rcond));
    out.x = lu.solve(b);
    out.residual = relative_residual(K, out.x, b);
    return out;
}

int numerical_rank(const Mat& J, double rel_cutoff, Vec* singular_values) {
    if (J.rows() == 0 || J.cols() == 0) {
        if (singular_values) *singular_values = Vec(0);
        return 0;
    }
    Eigen::JacobiSVD<Mat> svd(J);
    const Vec& sv = svd.singularValues();
    if (singular_values) *singular_values = sv;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > rel_cutoff * sv(0)) ++rank;
    return rank;
}

Mat null_space(const Mat& J, double rel_cutoff) {
    const Eigen::Index n = J.cols();
    Mat P = Mat::Identity(n, n);
    int rank = 0;
    if (J.rows() > 0) {
        Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeFullV);
        const Vec& sv = svd.singularValues();
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > rel_cutoff * sv(0)) ++rank;
        const Mat V = svd.matrixV();
        const Mat Vn = V.rightCols(n - rank);
        P = Vn * Vn.transpose();
    }
    // Project the standard basis and orthonormalize in coordinate order.
    const Eigen::Index dim = n - rank;
    Mat basis(n, dim);
    Eigen::Index found = 0;
    for (Eigen::Index i = 0; i < n && found < dim; ++i) {
        Vec w = P.col(i);
        for (Eigen::Index k = 0; k < found; ++k) w -= basis.col(k).dot(w) * basis.col(k);
        const double nrm = w.norm();
        if (nrm < 1e-8) continue;
        w /= nrm;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (std::abs(w(k)) > 1e-12) {
                if (w(k) < 0) w = -w;
                break;
            }
        }
        basis.col(found++) = w;
    }
    return basis.leftCols(found);
}

}  // namespace transposit
