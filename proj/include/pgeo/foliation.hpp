#pragma once

// Coordinate-aligned foliation data: the chart splits into vertical (leaf)
// coordinates x^a and transverse coordinates xi^i, with leaves the level sets
// of xi. A Connection stores the coefficients Gamma of a normal bundle in the
// horizontal frame h_i = d_{xi^i} - Gamma^a_i d_{x^a}.

#include "pgeo/calculus.hpp"

namespace pgeo {

struct FoliatedChart {
    int n_vert = 0;   // leaf coordinates x^a
    int n_trans = 0;  // transverse coordinates xi^i

    int dim() const { return n_vert + n_trans; }
    bool isVertical(int idx) const { return idx < n_vert; }
    int transIndex(int idx) const { return idx - n_vert; }

    void validate() const {
        if (n_vert < 1 || n_trans < 1)
            throw DimensionMismatchError("foliated chart needs n_vert >= 1 and n_trans >= 1");
    }
};

class Connection {
public:
    Connection() = default;
    Connection(FoliatedChart chart, MatrixField gamma)
        : chart_(chart), gamma_(std::move(gamma)) {
        chart_.validate();
        if (gamma_.rows() != chart_.n_vert || gamma_.cols() != chart_.n_trans)
            throw DimensionMismatchError("connection coefficient shape mismatch");
    }

    static Connection trivial(FoliatedChart chart) {
        return Connection(chart, MatrixField::constant(
                                     Eigen::MatrixXd::Zero(chart.n_vert, chart.n_trans)));
    }

    const FoliatedChart& chart() const { return chart_; }
    const MatrixField& coefficients() const { return gamma_; }

    JetMat gammaAt(const JetPoint& p) const { return gamma_.eval(p); }
    Eigen::MatrixXd gammaValue(const Coord& q) const { return gamma_.value(q); }

    // projector onto the vertical bundle along the horizontal one:
    // [[I, Gamma],[0, 0]] in (x, xi) block order; idempotent by construction
    JetMat projectorAt(const JetPoint& p) const {
        const int nv = chart_.n_vert, nt = chart_.n_trans, n = chart_.dim();
        JetMat g = gammaAt(p);
        JetMat P = JetMat::zero(n, n, p.dim(), p.order());
        for (int a = 0; a < nv; ++a) P(a, a) = Jet::constant(1.0, p.dim(), p.order());
        for (int a = 0; a < nv; ++a)
            for (int i = 0; i < nt; ++i) P(a, nv + i) = g(a, i);
        return P;
    }
    Eigen::MatrixXd projectorValue(const Coord& q) const {
        return projectorAt(JetPoint::seed(q, 0)).value();
    }

    // columns of the horizontal frame h_i = d_xi_i - Gamma^a_i d_x_a
    Eigen::MatrixXd horizontalFrameValue(const Coord& q) const {
        const int nv = chart_.n_vert, nt = chart_.n_trans, n = chart_.dim();
        Eigen::MatrixXd g = gammaValue(q);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, nt);
        H.topRows(nv) = -g;
        H.bottomRows(nt) = Eigen::MatrixXd::Identity(nt, nt);
        return H;
    }

    // frame matrix E: columns (d_x_a | h_i); its inverse is closed-form
    JetMat frameAt(const JetPoint& p) const {
        const int nv = chart_.n_vert, nt = chart_.n_trans, n = chart_.dim();
        JetMat g = gammaAt(p);
        JetMat E = JetMat::identity(n, p.dim(), p.order());
        for (int a = 0; a < nv; ++a)
            for (int i = 0; i < nt; ++i) E(a, nv + i) = -g(a, i);
        return E;
    }
    JetMat frameInverseAt(const JetPoint& p) const {
        const int nv = chart_.n_vert, nt = chart_.n_trans, n = chart_.dim();
        JetMat g = gammaAt(p);
        JetMat E = JetMat::identity(n, p.dim(), p.order());
        for (int a = 0; a < nv; ++a)
            for (int i = 0; i < nt; ++i) E(a, nv + i) = g(a, i);
        return E;
    }

private:
    FoliatedChart chart_;
    MatrixField gamma_;
};

// Curvature components R^a_{ij} = d_{xi_i} G^a_j - d_{xi_j} G^a_i
//                               - G^b_i d_{x_b} G^a_j + G^b_j d_{x_b} G^a_i.
// R == 0 iff the horizontal bundle is integrable.
struct CurvatureValue {
    std::vector<Eigen::MatrixXd> comp;  // n_vert matrices, each n_trans x n_trans antisym

    double maxAbs() const {
        double m = 0.0;
        for (const auto& M : comp) m = std::max(m, M.cwiseAbs().maxCoeff());
        return m;
    }
};

inline CurvatureValue curvature(const Connection& conn, const Coord& q) {
    const auto& ch = conn.chart();
    const int nv = ch.n_vert, nt = ch.n_trans;
    JetMat g = conn.gammaAt(JetPoint::seed(q, 1));
    Eigen::MatrixXd gv = g.value();
    CurvatureValue R;
    R.comp.assign(static_cast<size_t>(nv), Eigen::MatrixXd::Zero(nt, nt));
    for (int a = 0; a < nv; ++a)
        for (int i = 0; i < nt; ++i)
            for (int j = 0; j < nt; ++j) {
                double v = g(a, j).grad(nv + i) - g(a, i).grad(nv + j);
                for (int b = 0; b < nv; ++b)
                    v += -gv(b, i) * g(a, j).grad(b) + gv(b, j) * g(a, i).grad(b);
                R.comp[static_cast<size_t>(a)](i, j) = v;
            }
    return R;
}

inline double curvature_residual(const Connection& conn, const std::vector<Coord>& sample) {
    double sup = 0.0;
    for (const auto& q : sample) sup = std::max(sup, curvature(conn, q).maxAbs());
    return sup;
}

// horizontal frame fields h_i as VectorFields
inline VectorField horizontal_frame_field(const Connection& conn, int i) {
    const int nv = conn.chart().n_vert;
    const int n = conn.chart().dim();
    return VectorField(n, [conn, i, nv, n](const JetPoint& p) {
        JetMat g = conn.gammaAt(p);
        JetVec h(static_cast<size_t>(n), Jet::constant(0.0, p.dim(), p.order()));
        for (int a = 0; a < nv; ++a) h[static_cast<size_t>(a)] = -g(a, i);
        h[static_cast<size_t>(nv + i)] = Jet::constant(1.0, p.dim(), p.order());
        return h;
    });
}

}  // namespace pgeo
