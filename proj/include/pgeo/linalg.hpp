#pragma once

// Small dense helpers on top of Eigen: scale-free rank decisions, null
// spaces, and principal angles for basis-free subspace comparison.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <vector>

namespace pgeo {

inline constexpr double kRankRelTol = 1e-9;

inline int numeric_rank(const Eigen::MatrixXd& M, double rel_tol = kRankRelTol) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s[0] == 0.0) return 0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > rel_tol * s[0]) ++r;
    return r;
}

inline double smallest_singular_value(const Eigen::MatrixXd& M) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& s = svd.singularValues();
    return s.size() ? s[s.size() - 1] : 0.0;
}

inline double condition_number(const Eigen::MatrixXd& M) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s[s.size() - 1] == 0.0) return std::numeric_limits<double>::infinity();
    return s[0] / s[s.size() - 1];
}

// columns spanning the kernel of M
inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& M, double rel_tol = kRankRelTol) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double cut = (s.size() && s[0] > 0.0) ? rel_tol * s[0] : 0.0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > cut) ++r;
    return svd.matrixV().rightCols(M.cols() - r);
}

// orthonormal basis of the column span
inline Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& M, double rel_tol = kRankRelTol) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    const double cut = (s.size() && s[0] > 0.0) ? rel_tol * s[0] : 0.0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > cut) ++r;
    return svd.matrixU().leftCols(r);
}

// principal angles between the column spans, descending cosines
inline std::vector<double> principal_angles(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::MatrixXd qa = orthonormal_basis(A);
    Eigen::MatrixXd qb = orthonormal_basis(B);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(qa.transpose() * qb);
    std::vector<double> out;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        double c = std::clamp(svd.singularValues()[i], -1.0, 1.0);
        out.push_back(std::acos(c));
    }
    return out;
}

// max principal angle; infinity when the spans have different dimension
inline double max_principal_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::MatrixXd qa = orthonormal_basis(A);
    Eigen::MatrixXd qb = orthonormal_basis(B);
    if (qa.cols() != qb.cols()) return std::numeric_limits<double>::infinity();
    if (qa.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(qa.transpose() * qb);
    const auto& s = svd.singularValues();
    double cmin = std::clamp(s[s.size() - 1], -1.0, 1.0);
    return std::acos(cmin);
}

inline Eigen::MatrixXd antisymmetrize(const Eigen::MatrixXd& M) {
    return 0.5 * (M - M.transpose());
}

}  // namespace pgeo
