#pragma once

// Pointwise linear Dirac geometry on T_q M + T*_q M: maximally isotropic
// subspaces as 2n x n basis matrices (tangent rows on top), gauge
// transformations, graph tests and Poisson extraction, and the splitting
// D = D_H + D_V induced by a normal bundle.
//
// All predicates are representation-independent: bases are compared through
// principal angles of orthonormalized spans.

#include "pgeo/foliation.hpp"
#include "pgeo/linalg.hpp"

namespace pgeo {

class NotAGraphError : public std::runtime_error {
public:
    explicit NotAGraphError(const std::string& m) : std::runtime_error(m) {}
};

class GaugeDegeneracyError : public std::runtime_error {
public:
    GaugeDegeneracyError(const std::string& m, double sv)
        : std::runtime_error(m), smallest_singular_value(sv) {}
    double smallest_singular_value = 0.0;
};

class SplittingError : public std::runtime_error {
public:
    SplittingError(const std::string& m, int rank)
        : std::runtime_error(m), offending_rank(rank) {}
    int offending_rank = 0;
};

struct DiracSubspace {
    Eigen::MatrixXd basis;  // 2n x n, columns span D_q; rows [X; alpha]

    int n() const { return static_cast<int>(basis.rows()) / 2; }
    Eigen::MatrixXd tangentBlock() const { return basis.topRows(n()); }
    Eigen::MatrixXd cotangentBlock() const { return basis.bottomRows(n()); }
};

// sup |<(X,a),(Y,b)>| over an orthonormalized basis, pairing a(Y) + b(X)
inline double isotropy_defect(const DiracSubspace& D) {
    Eigen::MatrixXd B = orthonormal_basis(D.basis);
    const int n = D.n();
    Eigen::MatrixXd X = B.topRows(n), A = B.bottomRows(n);
    Eigen::MatrixXd G = X.transpose() * A + A.transpose() * X;
    return G.size() ? G.cwiseAbs().maxCoeff() : 0.0;
}

inline double subspace_gap(const DiracSubspace& A, const DiracSubspace& B) {
    return max_principal_angle(A.basis, B.basis);
}

inline DiracSubspace graph_of_poisson(const Eigen::MatrixXd& Pi) {
    const int n = static_cast<int>(Pi.rows());
    DiracSubspace D;
    D.basis.resize(2 * n, n);
    D.basis.topRows(n) = Pi;  // columns Pi e_j
    D.basis.bottomRows(n) = Eigen::MatrixXd::Identity(n, n);
    return D;
}

// (X, alpha) -> (X, alpha - B X)
inline DiracSubspace gauge_subspace(const DiracSubspace& D, const Eigen::MatrixXd& B) {
    const int n = D.n();
    DiracSubspace out;
    out.basis.resize(2 * n, D.basis.cols());
    out.basis.topRows(n) = D.basis.topRows(n);
    out.basis.bottomRows(n) = D.basis.bottomRows(n) - B * D.basis.topRows(n);
    return out;
}

inline bool is_graph(const DiracSubspace& D) {
    return numeric_rank(D.cotangentBlock()) == D.n();
}

inline Eigen::MatrixXd extract_poisson(const DiracSubspace& D) {
    if (!is_graph(D))
        throw NotAGraphError("extract_poisson: subspace meets the tangent summand nontrivially");
    const int n = D.n();
    Eigen::MatrixXd A = D.cotangentBlock();
    Eigen::MatrixXd Pi = D.tangentBlock() * A.partialPivLu().solve(Eigen::MatrixXd::Identity(n, n));
    return antisymmetrize(Pi);
}

// Pi (I - B Pi)^{-1}
inline Eigen::MatrixXd gauge_poisson(const Eigen::MatrixXd& Pi, const Eigen::MatrixXd& B) {
    const int n = static_cast<int>(Pi.rows());
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) - B * Pi;
    const double sv = smallest_singular_value(M);
    Eigen::MatrixXd scaleref = Eigen::MatrixXd::Identity(n, n) + (B * Pi).cwiseAbs();
    if (sv <= 1e-12 * scaleref.norm())
        throw GaugeDegeneracyError("gauge_poisson: Id - B Pi is singular", sv);
    return antisymmetrize(Pi * M.partialPivLu().solve(Eigen::MatrixXd::Identity(n, n)));
}

// H(D,F) = { X | (X, alpha) in D for some alpha in V0 }: eliminate against
// the constraint "alpha kills verticals is free, alpha(h) arbitrary"...
// concretely alpha in V0 means the first n_vert covector rows vanish.
inline Eigen::MatrixXd horizontal_distribution(const DiracSubspace& D, const FoliatedChart& chart) {
    const int n = D.n(), nv = chart.n_vert;
    // rows selecting the x-components of alpha
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nv, 2 * n);
    for (int a = 0; a < nv; ++a) C(a, n + a) = 1.0;
    Eigen::MatrixXd Y = null_space(C * D.basis);
    Eigen::MatrixXd members = D.basis * Y;  // columns (X, alpha) with alpha in V0
    return orthonormal_basis(members.topRows(n));
}

struct DiracSplitting {
    DiracSubspace D_H;  // rank n_trans inside H + V0
    DiracSubspace D_V;  // rank n_vert inside V + H0
    Eigen::MatrixXd leaf_poisson;  // vertical Poisson block extracted from D_V (n x n)
};

// intersection D cap W for W given as the kernel of constraint rows C
inline Eigen::MatrixXd intersect_with(const DiracSubspace& D, const Eigen::MatrixXd& C) {
    Eigen::MatrixXd Y = null_space(C * D.basis);
    return D.basis * Y;
}

inline DiracSplitting split_D(const DiracSubspace& D, const FoliatedChart& chart,
                              const Eigen::MatrixXd& gamma_at_q) {
    const int n = D.n(), nv = chart.n_vert, nt = chart.n_trans;
    // W_H = H + V0:  gamma X = 0 (x-rows), alpha_x = 0
    Eigen::MatrixXd C_H = Eigen::MatrixXd::Zero(2 * nv, 2 * n);
    for (int a = 0; a < nv; ++a) {
        C_H(a, a) = 1.0;
        for (int i = 0; i < nt; ++i) C_H(a, nv + i) = gamma_at_q(a, i);
        C_H(nv + a, n + a) = 1.0;
    }
    // W_V = V + H0:  X_xi = 0, alpha(h_i) = alpha_xi_i - Gamma^a_i alpha_x_a = 0
    Eigen::MatrixXd C_V = Eigen::MatrixXd::Zero(2 * nt, 2 * n);
    for (int i = 0; i < nt; ++i) {
        C_V(i, nv + i) = 1.0;
        C_V(nt + i, n + nv + i) = 1.0;
        for (int a = 0; a < nv; ++a) C_V(nt + i, n + a) = -gamma_at_q(a, i);
    }

    DiracSplitting out;
    out.D_H.basis = orthonormal_basis(intersect_with(D, C_H));
    out.D_V.basis = orthonormal_basis(intersect_with(D, C_V));
    const int rH = static_cast<int>(out.D_H.basis.cols());
    const int rV = static_cast<int>(out.D_V.basis.cols());
    if (rH != nt)
        throw SplittingError("split_D: rank of D_H is not the transverse rank "
                             "(almost-coupling violated)", rH);
    if (rV != nv)
        throw SplittingError("split_D: rank of D_V is not the leaf rank "
                             "(almost-coupling violated)", rV);

    // D_V = {(P eta, eta) | eta in H0}: solve for the leaf-tangent P with
    // vertical support. Unknowns: strict upper triangle of the x-block.
    Eigen::MatrixXd XB = out.D_V.basis.topRows(n), AB = out.D_V.basis.bottomRows(n);
    const int m = nv * (nv - 1) / 2;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n * rV, m);
    Eigen::VectorXd rhs(n * rV);
    for (int c = 0; c < rV; ++c)
        for (int r = 0; r < n; ++r) {
            rhs[c * n + r] = XB(r, c);
            if (r < nv) {
                int k = 0;
                for (int i = 0; i < nv; ++i)
                    for (int j = i + 1; j < nv; ++j, ++k) {
                        if (r == i) M(c * n + r, k) += AB(j, c);
                        if (r == j) M(c * n + r, k) -= AB(i, c);
                    }
            }
        }
    Eigen::VectorXd sol = M.colPivHouseholderQr().solve(rhs);
    const double resid = (M * sol - rhs).cwiseAbs().maxCoeff();
    if (resid > 1e-8 * std::max(1.0, XB.cwiseAbs().maxCoeff()))
        throw SplittingError("split_D: D_V is not the graph of a leaf-tangent bivector", rV);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    {
        int k = 0;
        for (int i = 0; i < nv; ++i)
            for (int j = i + 1; j < nv; ++j, ++k) {
                P(i, j) = sol[k];
                P(j, i) = -sol[k];
            }
    }
    out.leaf_poisson = P;
    return out;
}

}  // namespace pgeo
