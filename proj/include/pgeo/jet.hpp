#pragma once

// Forward-mode automatic differentiation to second order. A Jet carries the
// value, gradient and Hessian of a quantity with respect to the chart
// coordinates; arithmetic propagates all three. Order 0/1/2 selects how much
// is carried, so plain evaluation pays almost nothing for the machinery.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pgeo {

inline constexpr int kMaxDim = 8;

class JetError : public std::runtime_error {
public:
    explicit JetError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Jet {
    double v = 0.0;
    int n = 0;       // number of independent coordinates
    int order = 0;   // 0, 1 or 2

    std::array<double, kMaxDim> g{};
    std::array<double, kMaxDim * kMaxDim> h{};   // row-major, stride n

    Jet() = default;

    static Jet constant(double c, int n, int order) {
        Jet j;
        j.v = c;
        j.n = n;
        j.order = order;
        return j;
    }

    static Jet variable(double x, int i, int n, int order) {
        Jet j = constant(x, n, order);
        if (order >= 1) j.g[static_cast<size_t>(i)] = 1.0;
        return j;
    }

    double value() const { return v; }
    double grad(int i) const { return g[static_cast<size_t>(i)]; }
    double hess(int i, int j) const { return h[static_cast<size_t>(i * n + j)]; }

    Eigen::VectorXd gradient() const {
        Eigen::VectorXd out(n);
        for (int i = 0; i < n; ++i) out[i] = g[static_cast<size_t>(i)];
        return out;
    }
    Eigen::MatrixXd hessian() const {
        Eigen::MatrixXd out(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out(i, j) = hess(i, j);
        return out;
    }
};

namespace detail {
inline void check_compat(const Jet& a, const Jet& b) {
    if (a.n != b.n || a.order != b.order)
        throw JetError("jet context mismatch (dim " + std::to_string(a.n) + "/" +
                       std::to_string(b.n) + ", order " + std::to_string(a.order) +
                       "/" + std::to_string(b.order) + ")");
}
}  // namespace detail

inline Jet operator+(const Jet& a, const Jet& b) {
    detail::check_compat(a, b);
    Jet r = a;
    r.v += b.v;
    if (a.order >= 1)
        for (int i = 0; i < a.n; ++i) r.g[i] += b.g[i];
    if (a.order >= 2)
        for (int i = 0; i < a.n * a.n; ++i) r.h[i] += b.h[i];
    return r;
}

inline Jet operator-(const Jet& a, const Jet& b) {
    detail::check_compat(a, b);
    Jet r = a;
    r.v -= b.v;
    if (a.order >= 1)
        for (int i = 0; i < a.n; ++i) r.g[i] -= b.g[i];
    if (a.order >= 2)
        for (int i = 0; i < a.n * a.n; ++i) r.h[i] -= b.h[i];
    return r;
}

inline Jet operator-(const Jet& a) {
    Jet r = a;
    r.v = -r.v;
    if (a.order >= 1)
        for (int i = 0; i < a.n; ++i) r.g[i] = -r.g[i];
    if (a.order >= 2)
        for (int i = 0; i < a.n * a.n; ++i) r.h[i] = -r.h[i];
    return r;
}

inline Jet operator*(const Jet& a, const Jet& b) {
    detail::check_compat(a, b);
    Jet r = Jet::constant(a.v * b.v, a.n, a.order);
    if (a.order >= 1)
        for (int i = 0; i < a.n; ++i) r.g[i] = a.v * b.g[i] + b.v * a.g[i];
    if (a.order >= 2) {
        const int n = a.n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                r.h[i * n + j] = a.v * b.h[i * n + j] + b.v * a.h[i * n + j] +
                                 a.g[i] * b.g[j] + a.g[j] * b.g[i];
    }
    return r;
}

// f(a) with precomputed f, f', f'' at a.v
inline Jet chain(const Jet& a, double f, double fp, double fpp) {
    Jet r = Jet::constant(f, a.n, a.order);
    if (a.order >= 1)
        for (int i = 0; i < a.n; ++i) r.g[i] = fp * a.g[i];
    if (a.order >= 2) {
        const int n = a.n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                r.h[i * n + j] = fp * a.h[i * n + j] + fpp * a.g[i] * a.g[j];
    }
    return r;
}

inline Jet inv(const Jet& a) {
    if (a.v == 0.0) throw JetError("jet division by zero");
    const double iv = 1.0 / a.v;
    return chain(a, iv, -iv * iv, 2.0 * iv * iv * iv);
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * inv(b); }

inline Jet operator+(const Jet& a, double c) { Jet r = a; r.v += c; return r; }
inline Jet operator+(double c, const Jet& a) { return a + c; }
inline Jet operator-(const Jet& a, double c) { Jet r = a; r.v -= c; return r; }
inline Jet operator-(double c, const Jet& a) { return (-a) + c; }
inline Jet operator*(const Jet& a, double c) {
    Jet r = a;
    r.v *= c;
    if (a.order >= 1)
        for (int i = 0; i < a.n; ++i) r.g[i] *= c;
    if (a.order >= 2)
        for (int i = 0; i < a.n * a.n; ++i) r.h[i] *= c;
    return r;
}
inline Jet operator*(double c, const Jet& a) { return a * c; }
inline Jet operator/(const Jet& a, double c) { return a * (1.0 / c); }
inline Jet operator/(double c, const Jet& a) { return inv(a) * c; }

inline Jet sin(const Jet& a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet cos(const Jet& a) { return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Jet exp(const Jet& a) { const double e = std::exp(a.v); return chain(a, e, e, e); }
inline Jet log(const Jet& a) {
    if (a.v <= 0.0) throw JetError("jet log of non-positive value");
    return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
}
inline Jet sqrt(const Jet& a) {
    if (a.v <= 0.0) throw JetError("jet sqrt of non-positive value");
    const double s = std::sqrt(a.v);
    return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Jet pow(const Jet& a, int k) {
    if (k == 0) return Jet::constant(1.0, a.n, a.order);
    if (k < 0) return inv(pow(a, -k));
    Jet r = a;
    for (int i = 1; i < k; ++i) r = r * a;
    return r;
}

// Demote an order-p jet to the jet of its i-th partial derivative (order p-1).
inline Jet jet_partial(const Jet& a, int i) {
    if (a.order < 1) throw JetError("jet_partial needs order >= 1");
    Jet r = Jet::constant(a.g[static_cast<size_t>(i)], a.n, a.order - 1);
    if (r.order >= 1)
        for (int j = 0; j < a.n; ++j) r.g[j] = a.h[static_cast<size_t>(i * a.n + j)];
    return r;
}

inline Jet truncate(const Jet& a, int order) {
    Jet r = a;
    r.order = order;
    if (order < 2) r.h.fill(0.0);
    if (order < 1) r.g.fill(0.0);
    return r;
}

// A chart point seeded for jet evaluation. standard_seed marks points whose
// jets are the canonical coordinate seeds; per-point memo caches only fire on
// those (composed jets would poison a coordinate-keyed cache).
struct JetPoint {
    std::vector<Jet> q;
    bool standard_seed = false;

    int dim() const { return static_cast<int>(q.size()); }
    int order() const { return q.empty() ? 0 : q.front().order; }

    Eigen::VectorXd coords() const {
        Eigen::VectorXd x(dim());
        for (int i = 0; i < dim(); ++i) x[i] = q[static_cast<size_t>(i)].v;
        return x;
    }

    static JetPoint seed(const Eigen::VectorXd& x, int order) {
        if (x.size() > kMaxDim) throw JetError("chart dimension exceeds kMaxDim");
        JetPoint p;
        p.q.reserve(static_cast<size_t>(x.size()));
        for (int i = 0; i < x.size(); ++i)
            p.q.push_back(Jet::variable(x[i], i, static_cast<int>(x.size()), order));
        p.standard_seed = true;
        return p;
    }

    static JetPoint fromJets(std::vector<Jet> jets) {
        JetPoint p;
        p.q = std::move(jets);
        // order-0 jets carry no derivative data, so the point is equivalent
        // to a coordinate seed (this keeps memo caches usable at image points)
        p.standard_seed = p.q.empty() || p.q.front().order == 0;
        return p;
    }
};

}  // namespace pgeo
