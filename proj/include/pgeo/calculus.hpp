#pragma once

// Exterior derivative, Schouten/Lie brackets and pullbacks on chart fields.
// Derivative-consuming operations evaluate their inputs one jet order higher,
// so outputs remain fields with (reduced) jet access.

#include "pgeo/fields.hpp"

namespace pgeo {

class SingularJacobianError : public std::runtime_error {
public:
    SingularJacobianError(const std::string& m, const Coord& point)
        : std::runtime_error(m), at(point) {}
    Coord at;
};

namespace detail {
inline JetPoint raise_order(const JetPoint& p) {
    if (p.order() + 1 > 2)
        throw FieldError("derivative request exceeds jet order 2; use the finite-difference fallback");
    if (!p.standard_seed)
        throw FieldError("derivative field cannot be evaluated on composed jets of order >= 1");
    return JetPoint::seed(p.coords(), p.order() + 1);
}
}  // namespace detail

inline OneFormField exterior_derivative(const ScalarField& f, int dim) {
    return OneFormField(dim, [f, dim](const JetPoint& p) {
        JetPoint up = detail::raise_order(p);
        Jet v = f.eval(up);
        JetVec out;
        out.reserve(static_cast<size_t>(dim));
        for (int i = 0; i < dim; ++i) out.push_back(jet_partial(v, i));
        return out;
    });
}

inline TwoFormField exterior_derivative(const OneFormField& alpha) {
    const int d = alpha.dim();
    return TwoFormField(d, [alpha, d](const JetPoint& p) {
        JetPoint up = detail::raise_order(p);
        JetVec a = alpha.eval(up);
        JetVec out;
        out.reserve(static_cast<size_t>(detail::pair_count(d)));
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                out.push_back(jet_partial(a[static_cast<size_t>(j)], i) -
                              jet_partial(a[static_cast<size_t>(i)], j));
        return out;
    });
}

inline ThreeFormField exterior_derivative(const TwoFormField& beta) {
    const int d = beta.dim();
    return ThreeFormField(d, [beta, d](const JetPoint& p) {
        JetPoint up = detail::raise_order(p);
        JetMat b = beta.eval(up);
        JetVec out;
        out.reserve(static_cast<size_t>(detail::triple_count(d)));
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                for (int k = j + 1; k < d; ++k)
                    out.push_back(jet_partial(b(j, k), i) - jet_partial(b(i, k), j) +
                                  jet_partial(b(i, j), k));
        return out;
    });
}

// [[A,B]]^{ijk} = sum_l (A^{li} d_l B^{jk} + B^{li} d_l A^{jk}) + cyclic(i,j,k)
inline TrivectorField schouten_bivector_bivector(const BivectorField& A, const BivectorField& B) {
    if (A.dim() != B.dim())
        throw DimensionMismatchError("schouten bracket: bivector dimensions differ");
    const int d = A.dim();
    return TrivectorField(d, [A, B, d](const JetPoint& p) {
        JetPoint up = detail::raise_order(p);
        JetMat a = A.eval(up), b = B.eval(up);
        auto term = [&](int i, int j, int k) {
            Jet s = Jet::constant(0.0, p.dim(), p.order());
            const int idx[3][3] = {{i, j, k}, {j, k, i}, {k, i, j}};
            for (const auto& c : idx)
                for (int l = 0; l < d; ++l) {
                    s = s + truncate(a(l, c[0]), p.order()) * jet_partial(b(c[1], c[2]), l);
                    s = s + truncate(b(l, c[0]), p.order()) * jet_partial(a(c[1], c[2]), l);
                }
            return s;
        };
        JetVec out;
        out.reserve(static_cast<size_t>(detail::triple_count(d)));
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                for (int k = j + 1; k < d; ++k) out.push_back(term(i, j, k));
        return out;
    });
}

// Lie derivative L_W A, components W^l d_l A^{ij} - A^{lj} d_l W^i - A^{il} d_l W^j
inline BivectorField schouten_vector_bivector(const VectorField& W, const BivectorField& A) {
    if (W.dim() != A.dim())
        throw DimensionMismatchError("schouten bracket: vector/bivector dimensions differ");
    const int d = A.dim();
    return BivectorField(d, [W, A, d](const JetPoint& p) {
        JetPoint up = detail::raise_order(p);
        JetVec w = W.eval(up);
        JetMat a = A.eval(up);
        JetVec out;
        out.reserve(static_cast<size_t>(detail::pair_count(d)));
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                Jet s = Jet::constant(0.0, p.dim(), p.order());
                for (int l = 0; l < d; ++l) {
                    s = s + truncate(w[static_cast<size_t>(l)], p.order()) * jet_partial(a(i, j), l);
                    s = s - truncate(a(l, j), p.order()) * jet_partial(w[static_cast<size_t>(i)], l);
                    s = s - truncate(a(i, l), p.order()) * jet_partial(w[static_cast<size_t>(j)], l);
                }
                out.push_back(s);
            }
        return out;
    });
}

inline double jacobi_residual(const BivectorField& Pi, const std::vector<Coord>& sample) {
    if (sample.empty()) throw FieldError("jacobi_residual: empty sample");
    TrivectorField t = schouten_bivector_bivector(Pi, Pi);
    double sup = 0.0;
    for (const auto& q : sample) sup = std::max(sup, t.maxAbsValue(q));
    return sup;
}

// ---- pullbacks ---------------------------------------------------------

namespace detail {

struct PullbackData {
    JetPoint image;  // jets of Phi(q) at the request order
    JetMat J;        // jacobian entries as jets at the request order
};

inline PullbackData pullback_data(const SmoothMap& Phi, const JetPoint& p) {
    const int k = p.order();
    JetPoint up = raise_order(p);
    JetVec img = Phi.eval(up);
    const int d = static_cast<int>(img.size());
    JetVec imgk;
    imgk.reserve(img.size());
    for (const auto& j : img) imgk.push_back(truncate(j, k));
    PullbackData out;
    out.image = JetPoint::fromJets(std::move(imgk));
    out.J = JetMat::zero(d, d, p.dim(), k);
    for (int i = 0; i < d; ++i)
        for (int l = 0; l < d; ++l) out.J(i, l) = jet_partial(img[static_cast<size_t>(i)], l);
    return out;
}

inline JetMat inverse_or_singular(const JetMat& J, const JetPoint& p) {
    try {
        return inverse(J);
    } catch (const SingularMatrixError& e) {
        throw SingularJacobianError("pullback: singular jacobian (min pivot " +
                                        std::to_string(e.min_pivot) + ")",
                                    p.coords());
    }
}

}  // namespace detail

inline ScalarField pullback_scalar(const SmoothMap& Phi, const ScalarField& f) {
    return ScalarField([Phi, f](const JetPoint& p) {
        auto d = detail::pullback_data(Phi, p);
        return f.eval(d.image);
    });
}

inline OneFormField pullback_oneform(const SmoothMap& Phi, const OneFormField& alpha) {
    const int d = alpha.dim();
    return OneFormField(d, [Phi, alpha, d](const JetPoint& p) {
        auto pd = detail::pullback_data(Phi, p);
        JetVec a = alpha.eval(pd.image);
        return pd.J.transpose() * a;
    });
}

inline VectorField pullback_vector(const SmoothMap& Phi, const VectorField& X) {
    const int d = X.dim();
    return VectorField(d, [Phi, X, d](const JetPoint& p) {
        auto pd = detail::pullback_data(Phi, p);
        JetMat Jinv = detail::inverse_or_singular(pd.J, p);
        return Jinv * X.eval(pd.image);
    });
}

inline BivectorField pullback_bivector(const SmoothMap& Phi, const BivectorField& A) {
    const int d = A.dim();
    return BivectorField::fromMatrixFn(d, [Phi, A](const JetPoint& p) {
        auto pd = detail::pullback_data(Phi, p);
        JetMat Jinv = detail::inverse_or_singular(pd.J, p);
        return Jinv * A.eval(pd.image) * Jinv.transpose();
    });
}

inline TwoFormField pullback_twoform(const SmoothMap& Phi, const TwoFormField& B) {
    const int d = B.dim();
    return TwoFormField::fromMatrixFn(d, [Phi, B](const JetPoint& p) {
        auto pd = detail::pullback_data(Phi, p);
        return pd.J.transpose() * B.eval(pd.image) * pd.J;
    });
}

// (1,1)-tensor (e.g. a connection projector): J^{-1} M(Phi q) J
inline MatrixField pullback_endomorphism(const SmoothMap& Phi, const MatrixField& M) {
    return MatrixField(M.rows(), M.cols(), [Phi, M](const JetPoint& p) {
        auto pd = detail::pullback_data(Phi, p);
        JetMat Jinv = detail::inverse_or_singular(pd.J, p);
        return Jinv * M.eval(pd.image) * pd.J;
    });
}

inline SmoothMap compose(const SmoothMap& outer, const SmoothMap& inner) {
    if (outer.dim() != inner.dim()) throw DimensionMismatchError("compose: dimensions differ");
    SmoothMap::Fn fwd = [outer, inner](const JetPoint& p) {
        return outer.eval(JetPoint::fromJets(inner.eval(p)));
    };
    if (outer.hasInverse() && inner.hasInverse()) {
        SmoothMap::Fn inv = [outer, inner](const JetPoint& p) {
            return inner.evalInverse(JetPoint::fromJets(outer.evalInverse(p)));
        };
        return SmoothMap(outer.dim(), fwd, inv);
    }
    return SmoothMap(outer.dim(), fwd);
}

}  // namespace pgeo
