#pragma once

// Smooth fields on a coordinate chart. A field is an immutable evaluator from
// jet-seeded chart points to jet-valued components; closures compose, so any
// field built from the combinators (or registered as a jet-generic primitive)
// serves derivatives up to order 2 through plain evaluation.

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "pgeo/jetmat.hpp"

namespace pgeo {

using Coord = Eigen::VectorXd;
using ChartPoint = Eigen::VectorXd;

class FieldError : public std::runtime_error {
public:
    explicit FieldError(const std::string& m) : std::runtime_error(m) {}
};

class DimensionMismatchError : public std::runtime_error {
public:
    explicit DimensionMismatchError(const std::string& m) : std::runtime_error(m) {}
};

namespace detail {

inline int pair_count(int n) { return n * (n - 1) / 2; }
inline int triple_count(int n) { return n * (n - 1) * (n - 2) / 6; }

// lexicographic index of (i,j), i<j, among pairs in dimension n
inline int pair_index(int i, int j, int n) {
    return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

inline int triple_index(int i, int j, int k, int n) {
    int idx = 0;
    for (int a = 0; a < i; ++a) idx += pair_count(n - 1 - a);
    return idx + pair_index(j - i - 1, k - i - 1, n - 1 - i);
}

struct MemoKey {
    int order = 0;
    int n = 0;
    std::array<int64_t, kMaxDim> c{};
    bool operator==(const MemoKey& o) const { return order == o.order && n == o.n && c == o.c; }
};

struct MemoKeyHash {
    size_t operator()(const MemoKey& k) const {
        size_t h = std::hash<int>()(k.order * 31 + k.n);
        for (int i = 0; i < k.n; ++i)
            h ^= std::hash<int64_t>()(k.c[static_cast<size_t>(i)]) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return h;
    }
};

inline bool memo_key_for(const JetPoint& p, MemoKey& key) {
    if (!p.standard_seed) return false;
    key.order = p.order();
    key.n = p.dim();
    for (int i = 0; i < key.n; ++i) {
        const double x = p.q[static_cast<size_t>(i)].v;
        if (!(std::abs(x) < 1e4)) return false;
        key.c[static_cast<size_t>(i)] = llround(x * 1e13);  // 1e-13 rounding
    }
    return true;
}

// Wraps an evaluator with a per-point cache. Values are deterministic, so
// last-writer-wins under concurrent insertion is fine.
template <class R>
std::function<R(const JetPoint&)> memoized(std::function<R(const JetPoint&)> fn) {
    struct State {
        std::function<R(const JetPoint&)> fn;
        std::unordered_map<MemoKey, R, MemoKeyHash> cache;
        std::mutex mu;
    };
    auto st = std::make_shared<State>();
    st->fn = std::move(fn);
    return [st](const JetPoint& p) -> R {
        MemoKey key;
        if (!memo_key_for(p, key)) return st->fn(p);
        {
            std::lock_guard<std::mutex> lock(st->mu);
            auto it = st->cache.find(key);
            if (it != st->cache.end()) return it->second;
        }
        R v = st->fn(p);
        {
            std::lock_guard<std::mutex> lock(st->mu);
            st->cache.emplace(key, v);
        }
        return v;
    };
}

}  // namespace detail

class ScalarField {
public:
    using Fn = std::function<Jet(const JetPoint&)>;

    ScalarField() = default;
    explicit ScalarField(Fn f) : fn_(std::make_shared<const Fn>(std::move(f))) {}

    bool valid() const { return static_cast<bool>(fn_); }

    Jet eval(const JetPoint& p) const { return (*fn_)(p); }
    double value(const Coord& x) const { return eval(JetPoint::seed(x, 0)).v; }
    Eigen::VectorXd gradient(const Coord& x) const { return eval(JetPoint::seed(x, 1)).gradient(); }
    Eigen::MatrixXd hessian(const Coord& x) const { return eval(JetPoint::seed(x, 2)).hessian(); }

    static ScalarField constant(double c) {
        return ScalarField([c](const JetPoint& p) {
            return Jet::constant(c, p.dim(), p.order());
        });
    }
    static ScalarField coordinate(int i) {
        return ScalarField([i](const JetPoint& p) { return p.q[static_cast<size_t>(i)]; });
    }

    // Fallback for value-only evaluators: central differences with step
    // h_i = eps^(1/3) * max(1, |x_i|), nested for the Hessian.
    static ScalarField fromValueFn(std::function<double(const Coord&)> f);

private:
    std::shared_ptr<const Fn> fn_;
};

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    return ScalarField([a, b](const JetPoint& p) { return a.eval(p) + b.eval(p); });
}
inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    return ScalarField([a, b](const JetPoint& p) { return a.eval(p) - b.eval(p); });
}
inline ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    return ScalarField([a, b](const JetPoint& p) { return a.eval(p) * b.eval(p); });
}
inline ScalarField operator/(const ScalarField& a, const ScalarField& b) {
    return ScalarField([a, b](const JetPoint& p) { return a.eval(p) / b.eval(p); });
}
inline ScalarField operator*(double c, const ScalarField& a) {
    return ScalarField([c, a](const JetPoint& p) { return c * a.eval(p); });
}
inline ScalarField operator*(const ScalarField& a, double c) { return c * a; }
inline ScalarField operator+(const ScalarField& a, double c) {
    return ScalarField([c, a](const JetPoint& p) { return a.eval(p) + c; });
}
inline ScalarField operator+(double c, const ScalarField& a) { return a + c; }
inline ScalarField operator-(const ScalarField& a) { return -1.0 * a; }
inline ScalarField operator-(const ScalarField& a, double c) { return a + (-c); }
inline ScalarField operator-(double c, const ScalarField& a) { return (-a) + c; }

inline ScalarField sin(const ScalarField& a) {
    return ScalarField([a](const JetPoint& p) { return sin(a.eval(p)); });
}
inline ScalarField cos(const ScalarField& a) {
    return ScalarField([a](const JetPoint& p) { return cos(a.eval(p)); });
}
inline ScalarField exp(const ScalarField& a) {
    return ScalarField([a](const JetPoint& p) { return exp(a.eval(p)); });
}
inline ScalarField pow(const ScalarField& a, int k) {
    return ScalarField([a, k](const JetPoint& p) { return pow(a.eval(p), k); });
}

// Partial-derivative field: evaluating at order k re-evaluates f at order k+1.
inline ScalarField partial(const ScalarField& f, int i) {
    return ScalarField([f, i](const JetPoint& p) {
        const int k = p.order();
        if (k + 1 > 2)
            throw FieldError("derivative request exceeds jet order 2; use the finite-difference fallback");
        if (!p.standard_seed)
            throw FieldError("derivative field cannot be evaluated on composed jets of order >= 1");
        return jet_partial(f.eval(JetPoint::seed(p.coords(), k + 1)), i);
    });
}

class VectorField {
public:
    using Fn = std::function<JetVec(const JetPoint&)>;

    VectorField() = default;
    VectorField(int dim, Fn f) : dim_(dim), fn_(std::make_shared<const Fn>(std::move(f))) {}

    int dim() const { return dim_; }
    bool valid() const { return static_cast<bool>(fn_); }

    JetVec eval(const JetPoint& p) const { return (*fn_)(p); }
    Eigen::VectorXd value(const Coord& x) const {
        JetVec v = eval(JetPoint::seed(x, 0));
        Eigen::VectorXd out(dim_);
        for (int i = 0; i < dim_; ++i) out[i] = v[static_cast<size_t>(i)].v;
        return out;
    }
    // rows: component index, cols: derivative direction
    Eigen::MatrixXd jacobianValue(const Coord& x) const {
        JetVec v = eval(JetPoint::seed(x, 1));
        Eigen::MatrixXd out(dim_, x.size());
        for (int i = 0; i < dim_; ++i) out.row(i) = v[static_cast<size_t>(i)].gradient().transpose();
        return out;
    }

    static VectorField fromComponents(std::vector<ScalarField> comps) {
        const int d = static_cast<int>(comps.size());
        return VectorField(d, [comps](const JetPoint& p) {
            JetVec out;
            out.reserve(comps.size());
            for (const auto& c : comps) out.push_back(c.eval(p));
            return out;
        });
    }
    static VectorField zero(int dim) {
        return VectorField(dim, [dim](const JetPoint& p) {
            return JetVec(static_cast<size_t>(dim), Jet::constant(0.0, p.dim(), p.order()));
        });
    }
    ScalarField component(int i) const {
        VectorField self = *this;
        return ScalarField([self, i](const JetPoint& p) { return self.eval(p)[static_cast<size_t>(i)]; });
    }

private:
    int dim_ = 0;
    std::shared_ptr<const Fn> fn_;
};

inline VectorField operator+(const VectorField& a, const VectorField& b) {
    if (a.dim() != b.dim()) throw DimensionMismatchError("vector field dimensions differ");
    return VectorField(a.dim(), [a, b](const JetPoint& p) {
        JetVec x = a.eval(p), y = b.eval(p);
        for (size_t i = 0; i < x.size(); ++i) x[i] = x[i] + y[i];
        return x;
    });
}
inline VectorField operator-(const VectorField& a, const VectorField& b) {
    if (a.dim() != b.dim()) throw DimensionMismatchError("vector field dimensions differ");
    return VectorField(a.dim(), [a, b](const JetPoint& p) {
        JetVec x = a.eval(p), y = b.eval(p);
        for (size_t i = 0; i < x.size(); ++i) x[i] = x[i] - y[i];
        return x;
    });
}
inline VectorField operator*(double c, const VectorField& a) {
    return VectorField(a.dim(), [c, a](const JetPoint& p) {
        JetVec x = a.eval(p);
        for (auto& j : x) j = c * j;
        return x;
    });
}
inline VectorField operator*(const ScalarField& f, const VectorField& a) {
    return VectorField(a.dim(), [f, a](const JetPoint& p) {
        Jet s = f.eval(p);
        JetVec x = a.eval(p);
        for (auto& j : x) j = s * j;
        return x;
    });
}

// Covariant one-forms share the component layout of vector fields.
class OneFormField {
public:
    using Fn = std::function<JetVec(const JetPoint&)>;

    OneFormField() = default;
    OneFormField(int dim, Fn f) : dim_(dim), fn_(std::make_shared<const Fn>(std::move(f))) {}

    int dim() const { return dim_; }
    bool valid() const { return static_cast<bool>(fn_); }

    JetVec eval(const JetPoint& p) const { return (*fn_)(p); }
    Eigen::VectorXd value(const Coord& x) const {
        JetVec v = eval(JetPoint::seed(x, 0));
        Eigen::VectorXd out(dim_);
        for (int i = 0; i < dim_; ++i) out[i] = v[static_cast<size_t>(i)].v;
        return out;
    }

    static OneFormField fromComponents(std::vector<ScalarField> comps) {
        const int d = static_cast<int>(comps.size());
        return OneFormField(d, [comps](const JetPoint& p) {
            JetVec out;
            out.reserve(comps.size());
            for (const auto& c : comps) out.push_back(c.eval(p));
            return out;
        });
    }
    static OneFormField zero(int dim) {
        return OneFormField(dim, [dim](const JetPoint& p) {
            return JetVec(static_cast<size_t>(dim), Jet::constant(0.0, p.dim(), p.order()));
        });
    }
    ScalarField component(int i) const {
        OneFormField self = *this;
        return ScalarField([self, i](const JetPoint& p) { return self.eval(p)[static_cast<size_t>(i)]; });
    }
    OneFormField memoizedCopy() const {
        auto base = fn_;
        return OneFormField(dim_, detail::memoized<JetVec>([base](const JetPoint& p) { return (*base)(p); }));
    }

private:
    int dim_ = 0;
    std::shared_ptr<const Fn> fn_;
};

inline OneFormField operator+(const OneFormField& a, const OneFormField& b) {
    if (a.dim() != b.dim()) throw DimensionMismatchError("one-form dimensions differ");
    return OneFormField(a.dim(), [a, b](const JetPoint& p) {
        JetVec x = a.eval(p), y = b.eval(p);
        for (size_t i = 0; i < x.size(); ++i) x[i] = x[i] + y[i];
        return x;
    });
}
inline OneFormField operator-(const OneFormField& a, const OneFormField& b) {
    if (a.dim() != b.dim()) throw DimensionMismatchError("one-form dimensions differ");
    return OneFormField(a.dim(), [a, b](const JetPoint& p) {
        JetVec x = a.eval(p), y = b.eval(p);
        for (size_t i = 0; i < x.size(); ++i) x[i] = x[i] - y[i];
        return x;
    });
}
inline OneFormField operator*(double c, const OneFormField& a) {
    return OneFormField(a.dim(), [c, a](const JetPoint& p) {
        JetVec x = a.eval(p);
        for (auto& j : x) j = c * j;
        return x;
    });
}
inline OneFormField operator*(const ScalarField& f, const OneFormField& a) {
    return OneFormField(a.dim(), [f, a](const JetPoint& p) {
        Jet s = f.eval(p);
        JetVec x = a.eval(p);
        for (auto& j : x) j = s * j;
        return x;
    });
}

namespace detail {

// Shared machinery for antisymmetric rank-2 fields (bivectors, two-forms):
// only the strict upper triangle is stored, so antisymmetry is structural.
class Alt2Base {
public:
    using UpperFn = std::function<JetVec(const JetPoint&)>;  // pairs (i<j) lex

    Alt2Base() = default;
    Alt2Base(int dim, UpperFn f) : dim_(dim), fn_(std::make_shared<const UpperFn>(std::move(f))) {}

    int dim() const { return dim_; }
    bool valid() const { return static_cast<bool>(fn_); }

    JetVec evalUpper(const JetPoint& p) const { return (*fn_)(p); }

    JetMat eval(const JetPoint& p) const {
        JetVec u = evalUpper(p);
        JetMat m = JetMat::zero(dim_, dim_, p.dim(), p.order());
        for (int i = 0; i < dim_; ++i)
            for (int j = i + 1; j < dim_; ++j) {
                const Jet& x = u[static_cast<size_t>(pair_index(i, j, dim_))];
                m(i, j) = x;
                m(j, i) = -x;
            }
        return m;
    }
    Eigen::MatrixXd value(const Coord& x) const { return eval(JetPoint::seed(x, 0)).value(); }

    Alt2Base memoUpper() const {
        auto base = fn_;
        return Alt2Base(dim_, memoized<JetVec>([base](const JetPoint& p) { return (*base)(p); }));
    }

protected:
    int dim_ = 0;
    std::shared_ptr<const UpperFn> fn_;
};

inline Alt2Base alt2_from_matrix_fn(int dim, std::function<JetMat(const JetPoint&)> fn) {
    return Alt2Base(dim, [dim, fn](const JetPoint& p) {
        JetMat m = fn(p);
        JetVec u(static_cast<size_t>(pair_count(dim)), Jet::constant(0.0, p.dim(), p.order()));
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j)
                u[static_cast<size_t>(pair_index(i, j, dim))] = 0.5 * (m(i, j) - m(j, i));
        return u;
    });
}

}  // namespace detail

class BivectorField {
public:
    BivectorField() = default;
    BivectorField(int dim, detail::Alt2Base::UpperFn f) : b_(dim, std::move(f)) {}

    int dim() const { return b_.dim(); }
    bool valid() const { return b_.valid(); }
    JetMat eval(const JetPoint& p) const { return b_.eval(p); }
    JetVec evalUpper(const JetPoint& p) const { return b_.evalUpper(p); }
    Eigen::MatrixXd value(const Coord& x) const { return b_.value(x); }

    static BivectorField zero(int dim) {
        return BivectorField(dim, [dim](const JetPoint& p) {
            return JetVec(static_cast<size_t>(detail::pair_count(dim)),
                          Jet::constant(0.0, p.dim(), p.order()));
        });
    }
    static BivectorField constant(const Eigen::MatrixXd& A) {
        const int d = static_cast<int>(A.rows());
        return BivectorField(d, [d, A](const JetPoint& p) {
            JetVec u;
            u.reserve(static_cast<size_t>(detail::pair_count(d)));
            for (int i = 0; i < d; ++i)
                for (int j = i + 1; j < d; ++j) u.push_back(Jet::constant(A(i, j), p.dim(), p.order()));
            return u;
        });
    }
    // u ^ v
    static BivectorField wedge(const VectorField& u, const VectorField& v) {
        if (u.dim() != v.dim()) throw DimensionMismatchError("wedge of mismatched vector fields");
        const int d = u.dim();
        return BivectorField(d, [d, u, v](const JetPoint& p) {
            JetVec a = u.eval(p), b = v.eval(p);
            JetVec out;
            out.reserve(static_cast<size_t>(detail::pair_count(d)));
            for (int i = 0; i < d; ++i)
                for (int j = i + 1; j < d; ++j)
                    out.push_back(a[static_cast<size_t>(i)] * b[static_cast<size_t>(j)] -
                                  a[static_cast<size_t>(j)] * b[static_cast<size_t>(i)]);
            return out;
        });
    }
    static BivectorField fromMatrixFn(int dim, std::function<JetMat(const JetPoint&)> fn,
                                      bool memo = false) {
        detail::Alt2Base base = detail::alt2_from_matrix_fn(dim, std::move(fn));
        if (memo) base = base.memoUpper();
        BivectorField out;
        out.b_ = base;
        return out;
    }
    ScalarField component(int i, int j) const;

private:
    detail::Alt2Base b_;
};

class TwoFormField {
public:
    TwoFormField() = default;
    TwoFormField(int dim, detail::Alt2Base::UpperFn f) : b_(dim, std::move(f)) {}

    int dim() const { return b_.dim(); }
    bool valid() const { return b_.valid(); }
    JetMat eval(const JetPoint& p) const { return b_.eval(p); }
    JetVec evalUpper(const JetPoint& p) const { return b_.evalUpper(p); }
    Eigen::MatrixXd value(const Coord& x) const { return b_.value(x); }

    static TwoFormField zero(int dim) {
        return TwoFormField(dim, [dim](const JetPoint& p) {
            return JetVec(static_cast<size_t>(detail::pair_count(dim)),
                          Jet::constant(0.0, p.dim(), p.order()));
        });
    }
    static TwoFormField fromMatrixFn(int dim, std::function<JetMat(const JetPoint&)> fn,
                                     bool memo = false) {
        detail::Alt2Base base = detail::alt2_from_matrix_fn(dim, std::move(fn));
        if (memo) base = base.memoUpper();
        TwoFormField out;
        out.b_ = base;
        return out;
    }
    ScalarField component(int i, int j) const;

private:
    detail::Alt2Base b_;
};

inline BivectorField operator+(const BivectorField& a, const BivectorField& b) {
    if (a.dim() != b.dim()) throw DimensionMismatchError("bivector dimensions differ");
    const int d = a.dim();
    return BivectorField(d, [a, b](const JetPoint& p) {
        JetVec x = a.evalUpper(p), y = b.evalUpper(p);
        for (size_t i = 0; i < x.size(); ++i) x[i] = x[i] + y[i];
        return x;
    });
}
inline BivectorField operator-(const BivectorField& a, const BivectorField& b) {
    if (a.dim() != b.dim()) throw DimensionMismatchError("bivector dimensions differ");
    const int d = a.dim();
    return BivectorField(d, [a, b](const JetPoint& p) {
        JetVec x = a.evalUpper(p), y = b.evalUpper(p);
        for (size_t i = 0; i < x.size(); ++i) x[i] = x[i] - y[i];
        return x;
    });
}
inline BivectorField operator*(double c, const BivectorField& a) {
    return BivectorField(a.dim(), [c, a](const JetPoint& p) {
        JetVec x = a.evalUpper(p);
        for (auto& j : x) j = c * j;
        return x;
    });
}
inline BivectorField operator*(const ScalarField& f, const BivectorField& a) {
    return BivectorField(a.dim(), [f, a](const JetPoint& p) {
        Jet s = f.eval(p);
        JetVec x = a.evalUpper(p);
        for (auto& j : x) j = s * j;
        return x;
    });
}
inline TwoFormField operator+(const TwoFormField& a, const TwoFormField& b) {
    if (a.dim() != b.dim()) throw DimensionMismatchError("two-form dimensions differ");
    return TwoFormField(a.dim(), [a, b](const JetPoint& p) {
        JetVec x = a.evalUpper(p), y = b.evalUpper(p);
        for (size_t i = 0; i < x.size(); ++i) x[i] = x[i] + y[i];
        return x;
    });
}
inline TwoFormField operator-(const TwoFormField& a, const TwoFormField& b) {
    if (a.dim() != b.dim()) throw DimensionMismatchError("two-form dimensions differ");
    return TwoFormField(a.dim(), [a, b](const JetPoint& p) {
        JetVec x = a.evalUpper(p), y = b.evalUpper(p);
        for (size_t i = 0; i < x.size(); ++i) x[i] = x[i] - y[i];
        return x;
    });
}
inline TwoFormField operator*(double c, const TwoFormField& a) {
    return TwoFormField(a.dim(), [c, a](const JetPoint& p) {
        JetVec x = a.evalUpper(p);
        for (auto& j : x) j = c * j;
        return x;
    });
}

// Fully antisymmetric rank-3 objects, stored on triples i<j<k.
namespace detail {
class Alt3Base {
public:
    using TripleFn = std::function<JetVec(const JetPoint&)>;

    Alt3Base() = default;
    Alt3Base(int dim, TripleFn f) : dim_(dim), fn_(std::make_shared<const TripleFn>(std::move(f))) {}

    int dim() const { return dim_; }
    bool valid() const { return static_cast<bool>(fn_); }
    JetVec evalTriples(const JetPoint& p) const { return (*fn_)(p); }

    // component with full index permutation handling
    static double component(const JetVec& triples, int i, int j, int k, int n) {
        if (i == j || j == k || i == k) return 0.0;
        int a = i, b = j, c = k, sign = 1;
        if (a > b) { std::swap(a, b); sign = -sign; }
        if (b > c) { std::swap(b, c); sign = -sign; }
        if (a > b) { std::swap(a, b); sign = -sign; }
        return sign * triples[static_cast<size_t>(triple_index(a, b, c, n))].v;
    }

protected:
    int dim_ = 0;
    std::shared_ptr<const TripleFn> fn_;
};
}  // namespace detail

class TrivectorField : public detail::Alt3Base {
public:
    TrivectorField() = default;
    TrivectorField(int dim, TripleFn f) : Alt3Base(dim, std::move(f)) {}

    // sup of |components| at a point
    double maxAbsValue(const Coord& x) const {
        JetVec t = evalTriples(JetPoint::seed(x, 0));
        double m = 0.0;
        for (const auto& j : t) m = std::max(m, std::abs(j.v));
        return m;
    }
};

class ThreeFormField : public detail::Alt3Base {
public:
    ThreeFormField() = default;
    ThreeFormField(int dim, TripleFn f) : Alt3Base(dim, std::move(f)) {}

    double maxAbsValue(const Coord& x) const {
        JetVec t = evalTriples(JetPoint::seed(x, 0));
        double m = 0.0;
        for (const auto& j : t) m = std::max(m, std::abs(j.v));
        return m;
    }
};

// General (non-antisymmetric) matrix-valued field, e.g. connection
// coefficients or projectors.
class MatrixField {
public:
    using Fn = std::function<JetMat(const JetPoint&)>;

    MatrixField() = default;
    MatrixField(int rows, int cols, Fn f)
        : rows_(rows), cols_(cols), fn_(std::make_shared<const Fn>(std::move(f))) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool valid() const { return static_cast<bool>(fn_); }

    JetMat eval(const JetPoint& p) const { return (*fn_)(p); }
    Eigen::MatrixXd value(const Coord& x) const { return eval(JetPoint::seed(x, 0)).value(); }

    static MatrixField constant(const Eigen::MatrixXd& M) {
        const int r = static_cast<int>(M.rows()), c = static_cast<int>(M.cols());
        return MatrixField(r, c, [M](const JetPoint& p) {
            return JetMat::fromEigen(M, p.dim(), p.order());
        });
    }
    static MatrixField fromEntries(int rows, int cols, std::vector<ScalarField> entries) {
        return MatrixField(rows, cols, [rows, cols, entries](const JetPoint& p) {
            JetMat m = JetMat::zero(rows, cols, p.dim(), p.order());
            for (int i = 0; i < rows; ++i)
                for (int j = 0; j < cols; ++j) m(i, j) = entries[static_cast<size_t>(i * cols + j)].eval(p);
            return m;
        });
    }
    MatrixField memoizedCopy() const {
        auto base = fn_;
        return MatrixField(rows_, cols_,
                           detail::memoized<JetMat>([base](const JetPoint& p) { return (*base)(p); }));
    }

private:
    int rows_ = 0, cols_ = 0;
    std::shared_ptr<const Fn> fn_;
};

// A smooth (local) diffeomorphism of the chart with jet access; jacobian
// comes from order-1 evaluation of the forward map.
class SmoothMap {
public:
    using Fn = std::function<JetVec(const JetPoint&)>;

    SmoothMap() = default;
    SmoothMap(int dim, Fn fwd) : dim_(dim), fwd_(std::make_shared<const Fn>(std::move(fwd))) {}
    SmoothMap(int dim, Fn fwd, Fn inv)
        : dim_(dim), fwd_(std::make_shared<const Fn>(std::move(fwd))),
          inv_(std::make_shared<const Fn>(std::move(inv))) {}

    int dim() const { return dim_; }
    bool valid() const { return static_cast<bool>(fwd_); }
    bool hasInverse() const { return static_cast<bool>(inv_); }

    JetVec eval(const JetPoint& p) const { return (*fwd_)(p); }
    Coord forward(const Coord& x) const {
        JetVec v = eval(JetPoint::seed(x, 0));
        Coord out(dim_);
        for (int i = 0; i < dim_; ++i) out[i] = v[static_cast<size_t>(i)].v;
        return out;
    }
    Eigen::MatrixXd jacobian(const Coord& x) const {
        JetVec v = eval(JetPoint::seed(x, 1));
        Eigen::MatrixXd J(dim_, dim_);
        for (int i = 0; i < dim_; ++i) J.row(i) = v[static_cast<size_t>(i)].gradient().transpose();
        return J;
    }
    Coord inverse(const Coord& x) const {
        if (!inv_) throw FieldError("smooth map has no inverse");
        JetVec v = (*inv_)(JetPoint::seed(x, 0));
        Coord out(dim_);
        for (int i = 0; i < dim_; ++i) out[i] = v[static_cast<size_t>(i)].v;
        return out;
    }
    JetVec evalInverse(const JetPoint& p) const {
        if (!inv_) throw FieldError("smooth map has no inverse");
        return (*inv_)(p);
    }

    static SmoothMap identity(int dim) {
        auto id = [](const JetPoint& p) { return p.q; };
        return SmoothMap(dim, id, id);
    }

private:
    int dim_ = 0;
    std::shared_ptr<const Fn> fwd_;
    std::shared_ptr<const Fn> inv_;
};

inline ScalarField BivectorField::component(int i, int j) const {
    detail::Alt2Base base = b_;
    const int d = dim();
    return ScalarField([base, i, j, d](const JetPoint& p) {
        if (i == j) return Jet::constant(0.0, p.dim(), p.order());
        JetVec u = base.evalUpper(p);
        if (i < j) return u[static_cast<size_t>(detail::pair_index(i, j, d))];
        return -u[static_cast<size_t>(detail::pair_index(j, i, d))];
    });
}
inline ScalarField TwoFormField::component(int i, int j) const {
    detail::Alt2Base base = b_;
    const int d = dim();
    return ScalarField([base, i, j, d](const JetPoint& p) {
        if (i == j) return Jet::constant(0.0, p.dim(), p.order());
        JetVec u = base.evalUpper(p);
        if (i < j) return u[static_cast<size_t>(detail::pair_index(i, j, d))];
        return -u[static_cast<size_t>(detail::pair_index(j, i, d))];
    });
}

inline ScalarField ScalarField::fromValueFn(std::function<double(const Coord&)> f) {
    return ScalarField([f](const JetPoint& p) {
        const Coord x = p.coords();
        const int n = p.dim();
        const int order = p.order();
        Jet out = Jet::constant(f(x), n, order);
        if (order == 0) return out;
        const double cbrt_eps = std::cbrt(std::numeric_limits<double>::epsilon());
        auto step = [&](int i) { return cbrt_eps * std::max(1.0, std::abs(x[i])); };
        if (!p.standard_seed)
            throw FieldError("finite-difference fallback requires coordinate-seeded jets");
        for (int i = 0; i < n; ++i) {
            Coord xp = x, xm = x;
            xp[i] += step(i);
            xm[i] -= step(i);
            out.g[static_cast<size_t>(i)] = (f(xp) - f(xm)) / (2.0 * step(i));
        }
        if (order >= 2) {
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    const double hi = step(i), hj = step(j);
                    double d2;
                    if (i == j) {
                        Coord xp = x, xm = x;
                        xp[i] += hi;
                        xm[i] -= hi;
                        d2 = (f(xp) - 2.0 * f(x) + f(xm)) / (hi * hi);
                    } else {
                        Coord xpp = x, xpm = x, xmp = x, xmm = x;
                        xpp[i] += hi; xpp[j] += hj;
                        xpm[i] += hi; xpm[j] -= hj;
                        xmp[i] -= hi; xmp[j] += hj;
                        xmm[i] -= hi; xmm[j] -= hj;
                        d2 = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * hi * hj);
                    }
                    out.h[static_cast<size_t>(i * n + j)] = d2;
                    out.h[static_cast<size_t>(j * n + i)] = d2;
                }
        }
        return out;
    });
}

}  // namespace pgeo
