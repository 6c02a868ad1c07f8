#pragma once

// Small dense linear-algebra helpers shared by the library. Dimensions here
// are tiny (d rarely above 4), so Jacobi SVD everywhere is fine; 2x2 singular
// values get a closed form because the pressure sums evaluate millions of them.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace affdim {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Singular values of A, descending.
inline std::vector<double> singular_values(const Mat& a) {
    if (a.rows() == 1 && a.cols() == 1) return {std::abs(a(0, 0))};
    if (a.rows() == 2 && a.cols() == 2) {
        // eigenvalues of A^T A via trace/determinant
        const double t = a(0, 0) * a(0, 0) + a(0, 1) * a(0, 1) +
                         a(1, 0) * a(1, 0) + a(1, 1) * a(1, 1);
        const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        double disc = t * t - 4.0 * det * det;
        if (disc < 0.0) disc = 0.0;
        const double root = std::sqrt(disc);
        double hi = 0.5 * (t + root);
        double lo = 0.5 * (t - root);
        if (lo < 0.0) lo = 0.0;
        return {std::sqrt(hi), std::sqrt(lo)};
    }
    Eigen::JacobiSVD<Mat> svd(a);
    std::vector<double> out(static_cast<std::size_t>(svd.singularValues().size()));
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        out[static_cast<std::size_t>(i)] = svd.singularValues()(i);
    return out;
}

/// Operator 2-norm (largest singular value).
inline double op_norm(const Mat& a) { return singular_values(a)[0]; }

/// Cosines of the principal angles between span(a) and span(b); both inputs
/// must have orthonormal columns. Descending order.
inline std::vector<double> principal_cosines(const Mat& a, const Mat& b) {
    Mat m = a.transpose() * b;
    auto sv = singular_values(m);
    if (m.rows() > 2 || m.cols() > 2) {
        Eigen::JacobiSVD<Mat> svd(m);
        sv.assign(svd.singularValues().data(),
                  svd.singularValues().data() + svd.singularValues().size());
    }
    for (auto& c : sv) c = std::min(c, 1.0);
    return sv;
}

/// Largest principal angle between two subspaces of equal dimension.
inline double max_principal_angle(const Mat& a, const Mat& b) {
    auto cos = principal_cosines(a, b);
    const double c = cos.empty() ? 1.0 : cos.back();
    return std::acos(std::clamp(c, -1.0, 1.0));
}

/// sin of the smallest angle attained between nonzero vectors of the two
/// subspaces: sqrt(1 - sigma_max(a^T b)^2).
inline double min_angle_sine(const Mat& a, const Mat& b) {
    auto cos = principal_cosines(a, b);
    const double c = cos.empty() ? 0.0 : cos.front();
    const double s2 = std::max(0.0, 1.0 - c * c);
    return std::sqrt(s2);
}

/// Orthonormalizes the columns of a (thin Q).
inline Mat orthonormalize(const Mat& a) {
    Eigen::HouseholderQR<Mat> qr(a);
    Mat q = qr.householderQ() * Mat::Identity(a.rows(), a.cols());
    return q;
}

/// Orthonormal basis of the orthogonal complement of span(basis).
inline Mat orthonormal_complement(const Mat& basis) {
    const Eigen::Index d = basis.rows();
    const Eigen::Index k = basis.cols();
    Eigen::HouseholderQR<Mat> qr(basis);
    Mat q = qr.householderQ();  // d x d
    return q.rightCols(d - k);
}

inline bool is_orthonormal(const Mat& a, double tol = 1e-10) {
    Mat g = a.transpose() * a;
    return (g - Mat::Identity(a.cols(), a.cols())).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace affdim
