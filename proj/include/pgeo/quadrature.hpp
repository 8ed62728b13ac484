#pragma once

// 1-D quadrature rules used by the averaging integrals: periodic-uniform
// (trapezoidal on a full period, spectrally accurate for periodic analytic
// integrands) and Gauss-Legendre for non-periodic ones.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace pgeo {

struct QuadratureRule {
    enum class Kind { PeriodicUniform, GaussLegendre };

    Kind kind = Kind::PeriodicUniform;
    std::vector<double> nodes;
    std::vector<double> weights;

    int size() const { return static_cast<int>(nodes.size()); }

    double weightSum() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }

    // m equispaced nodes on [0, length), weights length/m
    static QuadratureRule periodicUniform(int m, double length = 2.0 * std::numbers::pi) {
        if (m < 2) throw std::invalid_argument("quadrature needs at least 2 nodes");
        QuadratureRule r;
        r.kind = Kind::PeriodicUniform;
        r.nodes.resize(static_cast<size_t>(m));
        r.weights.assign(static_cast<size_t>(m), length / m);
        for (int i = 0; i < m; ++i) r.nodes[static_cast<size_t>(i)] = length * i / m;
        return r;
    }

    static QuadratureRule gaussLegendre(int m, double a, double b) {
        if (m < 2) throw std::invalid_argument("quadrature needs at least 2 nodes");
        QuadratureRule r;
        r.kind = Kind::GaussLegendre;
        r.nodes.resize(static_cast<size_t>(m));
        r.weights.resize(static_cast<size_t>(m));
        // Newton iteration on Legendre polynomials, standard interval [-1,1]
        for (int i = 0; i < m; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= m; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                pp = m * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / pp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            const double w = 2.0 / ((1.0 - x * x) * pp * pp);
            r.nodes[static_cast<size_t>(m - 1 - i)] = 0.5 * (b - a) * x + 0.5 * (a + b);
            r.weights[static_cast<size_t>(m - 1 - i)] = 0.5 * (b - a) * w;
        }
        return r;
    }
};

}  // namespace pgeo
