#pragma once

// Dense matrices and vectors over Jet scalars, sized for chart dimensions.
// Used wherever a computed field (gauge images, coupling forms, averaged
// tensors) has to stay differentiable; plain double work goes through Eigen.

#include <utility>
#include <vector>

#include "pgeo/jet.hpp"

namespace pgeo {

class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(const std::string& msg, double pivot)
        : std::runtime_error(msg), min_pivot(pivot) {}
    double min_pivot = 0.0;
};

using JetVec = std::vector<Jet>;

struct JetMat {
    int rows = 0, cols = 0;
    std::vector<Jet> a;

    JetMat() = default;
    JetMat(int r, int c, const Jet& fill) : rows(r), cols(c), a(static_cast<size_t>(r * c), fill) {}

    Jet& operator()(int i, int j) { return a[static_cast<size_t>(i * cols + j)]; }
    const Jet& operator()(int i, int j) const { return a[static_cast<size_t>(i * cols + j)]; }

    static JetMat zero(int r, int c, int n, int order) {
        return JetMat(r, c, Jet::constant(0.0, n, order));
    }
    static JetMat identity(int m, int n, int order) {
        JetMat I = zero(m, m, n, order);
        for (int i = 0; i < m; ++i) I(i, i) = Jet::constant(1.0, n, order);
        return I;
    }
    static JetMat fromEigen(const Eigen::MatrixXd& m, int n, int order) {
        JetMat out = zero(static_cast<int>(m.rows()), static_cast<int>(m.cols()), n, order);
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j)
                out(static_cast<int>(i), static_cast<int>(j)) =
                    Jet::constant(m(i, j), n, order);
        return out;
    }

    Eigen::MatrixXd value() const {
        Eigen::MatrixXd m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = (*this)(i, j).v;
        return m;
    }

    JetMat transpose() const {
        JetMat t;
        t.rows = cols;
        t.cols = rows;
        t.a.resize(a.size(), a.empty() ? Jet{} : a.front());
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
        return t;
    }
};

inline JetMat operator+(const JetMat& A, const JetMat& B) {
    JetMat r = A;
    for (size_t i = 0; i < r.a.size(); ++i) r.a[i] = r.a[i] + B.a[i];
    return r;
}
inline JetMat operator-(const JetMat& A, const JetMat& B) {
    JetMat r = A;
    for (size_t i = 0; i < r.a.size(); ++i) r.a[i] = r.a[i] - B.a[i];
    return r;
}
inline JetMat operator-(const JetMat& A) {
    JetMat r = A;
    for (auto& x : r.a) x = -x;
    return r;
}
inline JetMat operator*(const JetMat& A, const JetMat& B) {
    if (A.cols != B.rows) throw JetError("jet matrix product shape mismatch");
    const int n = A.a.empty() ? (B.a.empty() ? 0 : B.a.front().n) : A.a.front().n;
    const int order = A.a.empty() ? 0 : A.a.front().order;
    JetMat r = JetMat::zero(A.rows, B.cols, n, order);
    for (int i = 0; i < A.rows; ++i)
        for (int k = 0; k < A.cols; ++k) {
            const Jet& aik = A(i, k);
            for (int j = 0; j < B.cols; ++j) r(i, j) = r(i, j) + aik * B(k, j);
        }
    return r;
}
inline JetMat operator*(const Jet& s, const JetMat& A) {
    JetMat r = A;
    for (auto& x : r.a) x = s * x;
    return r;
}
inline JetMat operator*(double s, const JetMat& A) {
    JetMat r = A;
    for (auto& x : r.a) x = x * s;
    return r;
}

inline JetVec operator*(const JetMat& A, const JetVec& x) {
    if (A.cols != static_cast<int>(x.size())) throw JetError("jet matvec shape mismatch");
    JetVec r(static_cast<size_t>(A.rows),
             Jet::constant(0.0, x.empty() ? 0 : x.front().n, x.empty() ? 0 : x.front().order));
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) r[static_cast<size_t>(i)] = r[static_cast<size_t>(i)] + A(i, j) * x[static_cast<size_t>(j)];
    return r;
}

// Gauss-Jordan with partial pivoting on values. Throws SingularMatrixError
// carrying the offending pivot magnitude.
inline JetMat inverse(const JetMat& A) {
    if (A.rows != A.cols) throw JetError("jet inverse of non-square matrix");
    const int m = A.rows;
    const int n = A.a.front().n;
    const int order = A.a.front().order;
    JetMat W = A;
    JetMat I = JetMat::identity(m, n, order);

    double scale = 0.0;
    for (const auto& x : W.a) scale = std::max(scale, std::abs(x.v));
    if (scale == 0.0) throw SingularMatrixError("jet inverse: zero matrix", 0.0);

    for (int col = 0; col < m; ++col) {
        int piv = col;
        for (int r = col + 1; r < m; ++r)
            if (std::abs(W(r, col).v) > std::abs(W(piv, col).v)) piv = r;
        const double pv = std::abs(W(piv, col).v);
        if (pv <= 1e-14 * scale)
            throw SingularMatrixError("jet inverse: singular matrix", pv);
        if (piv != col)
            for (int j = 0; j < m; ++j) {
                std::swap(W(piv, j), W(col, j));
                std::swap(I(piv, j), I(col, j));
            }
        const Jet d = inv(W(col, col));
        for (int j = 0; j < m; ++j) {
            W(col, j) = W(col, j) * d;
            I(col, j) = I(col, j) * d;
        }
        for (int r = 0; r < m; ++r) {
            if (r == col) continue;
            const Jet f = W(r, col);
            if (f.v == 0.0) {
                bool zero = true;
                if (f.order >= 1)
                    for (int i = 0; i < f.n && zero; ++i) zero = (f.g[static_cast<size_t>(i)] == 0.0);
                if (zero && f.order >= 2)
                    for (int i = 0; i < f.n * f.n && zero; ++i) zero = (f.h[static_cast<size_t>(i)] == 0.0);
                if (zero) continue;
            }
            for (int j = 0; j < m; ++j) {
                W(r, j) = W(r, j) - f * W(col, j);
                I(r, j) = I(r, j) - f * I(col, j);
            }
        }
    }
    return I;
}

}  // namespace pgeo
