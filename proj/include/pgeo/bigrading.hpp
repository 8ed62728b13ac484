#pragma once

// H-dependent bigrading of tensors and of the exterior differential on a
// foliated chart, plus the coupling predicates and the coupling form.
//
// Adapted bases: frame columns (d_x_a | h_i) with dual coframe
// (eta^a = dx^a + Gamma^a_i dxi^i | dxi^i). A multivector transforms by
// A_ad = E^{-1} A E^{-T}; a form by a_ad = E^T a E. Form slots pairing with
// h_i are V0-legs (first bidegree index), slots pairing with d_x_a are
// H0-legs (second index).

#include <optional>

#include "pgeo/foliation.hpp"
#include "pgeo/linalg.hpp"

namespace pgeo {

class CouplingDegeneracyError : public std::runtime_error {
public:
    CouplingDegeneracyError(const std::string& m, double cond)
        : std::runtime_error(m), condition_number(cond) {}
    double condition_number = 0.0;
};

class BidegreeError : public std::runtime_error {
public:
    explicit BidegreeError(const std::string& m) : std::runtime_error(m) {}
};

struct BigradedBivector {
    Eigen::MatrixXd horiz;  // (2,0): n_trans x n_trans, frame components on h_i ^ h_j
    Eigen::MatrixXd mixed;  // (1,1): n_trans x n_vert
    Eigen::MatrixXd vert;   // (0,2): n_vert x n_vert

    double mixedMaxAbs() const { return mixed.size() ? mixed.cwiseAbs().maxCoeff() : 0.0; }
};

// adapted components of a bivector as jets: E^{-1} Pi E^{-T}
inline JetMat bigrade_bivector_jets(const JetMat& Pi, const Connection& conn, const JetPoint& p) {
    JetMat Einv = conn.frameInverseAt(p);
    return Einv * Pi * Einv.transpose();
}

inline BigradedBivector bigrade_bivector(const BivectorField& Pi, const Connection& conn,
                                         const Coord& q) {
    const int nv = conn.chart().n_vert, nt = conn.chart().n_trans;
    JetPoint p = JetPoint::seed(q, 0);
    Eigen::MatrixXd ad = bigrade_bivector_jets(Pi.eval(p), conn, p).value();
    BigradedBivector out;
    out.vert = ad.topLeftCorner(nv, nv);
    out.horiz = ad.bottomRightCorner(nt, nt);
    out.mixed = ad.bottomLeftCorner(nt, nv);
    return out;
}

// reassemble coordinate components from blocks: Pi = E Pi_ad E^T
inline Eigen::MatrixXd bigraded_to_coords(const BigradedBivector& b, const Connection& conn,
                                          const Coord& q) {
    const int nv = conn.chart().n_vert, nt = conn.chart().n_trans;
    const int n = nv + nt;
    Eigen::MatrixXd ad = Eigen::MatrixXd::Zero(n, n);
    ad.topLeftCorner(nv, nv) = b.vert;
    ad.bottomRightCorner(nt, nt) = b.horiz;
    ad.bottomLeftCorner(nt, nv) = b.mixed;
    ad.topRightCorner(nv, nt) = -b.mixed.transpose();
    JetPoint p = JetPoint::seed(q, 0);
    Eigen::MatrixXd E = conn.frameAt(p).value();
    return E * ad * E.transpose();
}

// mu = mu_{1,0} + mu_{0,1} with mu_{1,0} in V0 (kills verticals) and
// mu_{0,1} in H0 (kills horizontals); both returned in coordinates.
struct BigradedOneForm {
    Eigen::VectorXd part_10;
    Eigen::VectorXd part_01;
};

inline BigradedOneForm bigrade_oneform(const OneFormField& mu, const Connection& conn,
                                       const Coord& q) {
    const int nv = conn.chart().n_vert;
    const int n = conn.chart().dim();
    JetPoint p = JetPoint::seed(q, 0);
    JetMat E = conn.frameAt(p);
    JetVec m = mu.eval(p);
    JetVec ad = E.transpose() * m;
    Eigen::MatrixXd EinvT = conn.frameInverseAt(p).value().transpose();
    Eigen::VectorXd ad10 = Eigen::VectorXd::Zero(n), ad01 = Eigen::VectorXd::Zero(n);
    for (int c = 0; c < n; ++c) {
        if (c < nv)
            ad01[c] = ad[static_cast<size_t>(c)].v;
        else
            ad10[c] = ad[static_cast<size_t>(c)].v;
    }
    return {EinvT * ad10, EinvT * ad01};
}

// V0-part of a one-form as a field (jet-capable); used by q_form
inline OneFormField oneform_part10_field(const OneFormField& mu, const Connection& conn) {
    const int d = mu.dim();
    const int nv = conn.chart().n_vert;
    return OneFormField(d, [mu, conn, nv, d](const JetPoint& p) {
        JetMat E = conn.frameAt(p);
        JetVec ad = E.transpose() * mu.eval(p);
        for (int c = 0; c < nv; ++c) ad[static_cast<size_t>(c)] = Jet::constant(0.0, p.dim(), p.order());
        return conn.frameInverseAt(p).transpose() * ad;
    });
}
inline OneFormField oneform_part01_field(const OneFormField& mu, const Connection& conn) {
    const int d = mu.dim();
    const int nv = conn.chart().n_vert;
    return OneFormField(d, [mu, conn, nv, d](const JetPoint& p) {
        JetMat E = conn.frameAt(p);
        JetVec ad = E.transpose() * mu.eval(p);
        for (int c = nv; c < d; ++c) ad[static_cast<size_t>(c)] = Jet::constant(0.0, p.dim(), p.order());
        return conn.frameInverseAt(p).transpose() * ad;
    });
}

struct AlmostCouplingReport {
    bool is_almost_coupling = false;
    double sup_mixed = 0.0;
};

inline AlmostCouplingReport almost_coupling_report(const BivectorField& Pi, const Connection& conn,
                                                   const std::vector<Coord>& sample, double tol) {
    if (sample.empty()) throw FieldError("almost_coupling_report: empty sample");
    AlmostCouplingReport rep;
    for (const auto& q : sample)
        rep.sup_mixed = std::max(rep.sup_mixed, bigrade_bivector(Pi, conn, q).mixedMaxAbs());
    rep.is_almost_coupling = rep.sup_mixed < tol;
    return rep;
}

struct CouplingReport {
    bool coupling = false;
    bool almost_coupling_candidate = false;  // rank-deficient but nonzero transverse image
    int min_rank = 0;
    std::optional<Connection> induced;
};

// Pi^#(V0) from the dxi coframe columns; coupling iff that span has rank
// n_trans and meets the vertical bundle trivially at every sample point.
inline CouplingReport is_coupling(const BivectorField& Pi, const FoliatedChart& chart,
                                  const std::vector<Coord>& sample) {
    if (sample.empty()) throw FieldError("is_coupling: empty sample");
    const int nv = chart.n_vert, nt = chart.n_trans;
    CouplingReport rep;
    rep.coupling = true;
    rep.min_rank = nt;
    for (const auto& q : sample) {
        Eigen::MatrixXd P = Pi.value(q);
        Eigen::MatrixXd V = P.rightCols(nt);  // images of dxi^i
        const int r = numeric_rank(V);
        rep.min_rank = std::min(rep.min_rank, r);
        const bool transversal = numeric_rank(V.bottomRows(nt)) == nt;
        if (r != nt || !transversal) {
            rep.coupling = false;
            if (r > 0) rep.almost_coupling_candidate = true;
        }
    }
    if (rep.coupling) {
        BivectorField piCopy = Pi;
        MatrixField gamma(nv, nt, [piCopy, nv, nt](const JetPoint& p) {
            JetMat P = piCopy.eval(p);
            JetMat Vx = JetMat::zero(nv, nt, p.dim(), p.order());
            JetMat Vxi = JetMat::zero(nt, nt, p.dim(), p.order());
            for (int i = 0; i < nt; ++i) {
                for (int a = 0; a < nv; ++a) Vx(a, i) = P(a, nv + i);
                for (int j = 0; j < nt; ++j) Vxi(j, i) = P(nv + j, nv + i);
            }
            return -(Vx * inverse(Vxi));
        });
        rep.induced = Connection(chart, gamma);
    }
    return rep;
}

// sigma = -(horizontal block)^{-1} on the dxi coframe
inline Eigen::MatrixXd coupling_form(const BivectorField& Pi, const Connection& conn,
                                     const Coord& q) {
    BigradedBivector b = bigrade_bivector(Pi, conn, q);
    const double cond = condition_number(b.horiz);
    if (!(cond < 1e12))
        throw CouplingDegeneracyError("coupling form: degenerate horizontal block", cond);
    return antisymmetrize(-b.horiz.inverse());
}

// same as a V0-valued two-form field in coordinates (xi-xi block)
inline TwoFormField coupling_form_field(const BivectorField& Pi, const Connection& conn,
                                        double scale = 1.0) {
    const int nv = conn.chart().n_vert, nt = conn.chart().n_trans;
    const int n = nv + nt;
    return TwoFormField::fromMatrixFn(n, [Pi, conn, nv, nt, n, scale](const JetPoint& p) {
        JetMat ad = bigrade_bivector_jets(Pi.eval(p), conn, p);
        JetMat horiz = JetMat::zero(nt, nt, p.dim(), p.order());
        for (int i = 0; i < nt; ++i)
            for (int j = 0; j < nt; ++j) horiz(i, j) = ad(nv + i, nv + j);
        JetMat sigma;
        try {
            sigma = -1.0 * inverse(horiz);
        } catch (const SingularMatrixError&) {
            throw CouplingDegeneracyError("coupling form field: degenerate horizontal block",
                                          condition_number(horiz.value()));
        }
        JetMat out = JetMat::zero(n, n, p.dim(), p.order());
        for (int i = 0; i < nt; ++i)
            for (int j = 0; j < nt; ++j) out(nv + i, nv + j) = scale * sigma(i, j);
        return out;
    });
}

// ---- bigraded exterior differential ------------------------------------

namespace detail {

// mask an adapted p-form component multi-index by bidegree: s slots pairing
// with h_i (indices >= nv), l slots pairing with d_x_a
inline bool slot_match(std::initializer_list<int> slots, int nv, int s, int l) {
    int hs = 0, vs = 0;
    for (int c : slots) (c >= nv ? hs : vs)++;
    return hs == s && vs == l;
}

}  // namespace detail

inline OneFormField d_bigraded(const ScalarField& f, const Connection& conn, int s, int l) {
    if (!((s == 1 && l == 0) || (s == 0 && l == 1)))
        throw BidegreeError("d of a scalar has bidegrees (1,0) and (0,1) only");
    const int n = conn.chart().dim();
    const int nv = conn.chart().n_vert;
    OneFormField df = exterior_derivative(f, n);
    return OneFormField(n, [df, conn, nv, n, s, l](const JetPoint& p) {
        JetMat E = conn.frameAt(p);
        JetVec ad = E.transpose() * df.eval(p);
        for (int c = 0; c < n; ++c)
            if (!detail::slot_match({c}, nv, s, l))
                ad[static_cast<size_t>(c)] = Jet::constant(0.0, p.dim(), p.order());
        return conn.frameInverseAt(p).transpose() * ad;
    });
}

inline TwoFormField d_bigraded(const OneFormField& alpha, const Connection& conn, int s, int l) {
    if (s + l != 2 || s < 0 || l < -1 || !((s == 2 && l == 0) || (s == 1 && l == 1) || (s == 0 && l == 2)))
        throw BidegreeError("d of a one-form has bidegrees (2,0), (1,1), (0,2)");
    const int n = conn.chart().dim();
    const int nv = conn.chart().n_vert;
    TwoFormField da = exterior_derivative(alpha);
    return TwoFormField::fromMatrixFn(n, [da, conn, nv, n, s, l](const JetPoint& p) {
        JetMat E = conn.frameAt(p);
        JetMat ad = E.transpose() * da.eval(p) * E;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (!detail::slot_match({a, b}, nv, s, l))
                    ad(a, b) = Jet::constant(0.0, p.dim(), p.order());
        JetMat Einv = conn.frameInverseAt(p);
        return Einv.transpose() * ad * Einv;
    });
}

// For two-form input the selector additionally admits (2,1)-style splits of
// degree 3; d_{2,-1} of a (1,1)-form lands in (3,0) etc. The projection is by
// slot count, so any (s,l) with s+l = 3, 0 <= s,l <= 3 is accepted.
inline ThreeFormField d_bigraded(const TwoFormField& beta, const Connection& conn, int s, int l) {
    if (s + l != 3 || s < 0 || l < 0)
        throw BidegreeError("d of a two-form has bidegrees (s,l) with s+l = 3");
    const int n = conn.chart().dim();
    const int nv = conn.chart().n_vert;
    ThreeFormField db = exterior_derivative(beta);
    return ThreeFormField(n, [db, conn, nv, n, s, l](const JetPoint& p) {
        JetVec triples = db.evalTriples(p);
        const int ord = p.order();
        // full adapted cube T_ad[abc] = sum T[pqr] E[p,a] E[q,b] E[r,c]
        JetMat E = conn.frameAt(p);
        auto comp = [&](int i, int j, int k) -> Jet {
            if (i == j || j == k || i == k) return Jet::constant(0.0, p.dim(), ord);
            int a = i, b = j, c = k;
            double sign = 1.0;
            if (a > b) { std::swap(a, b); sign = -sign; }
            if (b > c) { std::swap(b, c); sign = -sign; }
            if (a > b) { std::swap(a, b); sign = -sign; }
            return sign * triples[static_cast<size_t>(detail::triple_index(a, b, c, n))];
        };
        std::vector<Jet> ad(static_cast<size_t>(n * n * n), Jet::constant(0.0, p.dim(), ord));
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                for (int c = b + 1; c < n; ++c) {
                    Jet v = Jet::constant(0.0, p.dim(), ord);
                    for (int pp = 0; pp < n; ++pp)
                        for (int qq = 0; qq < n; ++qq)
                            for (int rr = 0; rr < n; ++rr) {
                                Jet t = comp(pp, qq, rr);
                                bool zero = (pp == qq || qq == rr || pp == rr);
                                if (!zero) v = v + t * (E(pp, a) * E(qq, b) * E(rr, c));
                            }
                    ad[static_cast<size_t>((a * n + b) * n + c)] = v;
                }
        // mask by bidegree, then transform back with E^{-1}
        JetMat Ei = conn.frameInverseAt(p);
        JetVec out;
        out.reserve(static_cast<size_t>(detail::triple_count(n)));
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (int k = j + 1; k < n; ++k) {
                    Jet v = Jet::constant(0.0, p.dim(), ord);
                    for (int a = 0; a < n; ++a)
                        for (int b = a + 1; b < n; ++b)
                            for (int c = b + 1; c < n; ++c) {
                                if (!detail::slot_match({a, b, c}, nv, s, l)) continue;
                                const Jet& t = ad[static_cast<size_t>((a * n + b) * n + c)];
                                // antisymmetrized expansion over the 6 slot orders
                                Jet m = Ei(a, i) * (Ei(b, j) * Ei(c, k) - Ei(b, k) * Ei(c, j)) -
                                        Ei(a, j) * (Ei(b, i) * Ei(c, k) - Ei(b, k) * Ei(c, i)) +
                                        Ei(a, k) * (Ei(b, i) * Ei(c, j) - Ei(b, j) * Ei(c, i));
                                v = v + t * m;
                            }
                    out.push_back(v);
                }
        return out;
    });
}

}  // namespace pgeo
