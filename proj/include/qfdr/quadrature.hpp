// quadrature.hpp - composite Simpson weights, Gauss-Legendre nodes, monotone
// cubic interpolation and a log-log slope fit.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qfdr/errors.hpp"

namespace qfdr::quad {

// Weights for integrating samples on a uniform grid of `intervals` steps of
// width h. Simpson for an even count; an odd count closes with the 3/8 rule
// on the last three intervals. One interval falls back to the trapezoid.
inline std::vector<double> simpson_weights(std::size_t intervals, double h) {
    std::vector<double> w(intervals + 1, 0.0);
    if (intervals == 0) return w;
    if (intervals == 1) {
        w[0] = w[1] = 0.5 * h;
        return w;
    }
    std::size_t simpson_end = intervals;
    if (intervals % 2 == 1) {
        simpson_end = intervals - 3;
        const double c = 3.0 * h / 8.0;
        w[simpson_end] += c;
        w[simpson_end + 1] += 3.0 * c;
        w[simpson_end + 2] += 3.0 * c;
        w[simpson_end + 3] += c;
    }
    for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    return w;
}

inline double simpson(std::span<const double> values, double h) {
    if (values.empty()) return 0.0;
    const auto w = simpson_weights(values.size() - 1, h);
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += w[i] * values[i];
    return s;
}

// Integrates f on [a, b] with composite Simpson on n points (n >= 3).
template <class F>
double simpson(F&& f, double a, double b, std::size_t n) {
    if (n < 3) throw DomainError("simpson: need at least 3 points");
    const double h = (b - a) / static_cast<double>(n - 1);
    const auto w = simpson_weights(n - 1, h);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * f(a + h * static_cast<double>(i));
    return s;
}

struct GaussLegendre {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;

    template <class F>
    double integrate(F&& f, double a, double b) const {
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(mid + half * nodes[i]);
        return half * s;
    }
};

// Newton iteration on P_n from the Chebyshev initial guess.
inline GaussLegendre gauss_legendre(std::size_t n) {
    GaussLegendre g;
    g.nodes.resize(n);
    g.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        g.nodes[i] = x;
        g.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return g;
}

// Monotone piecewise cubic Hermite interpolant (Fritsch-Carlson slopes).
class Pchip {
  public:
    Pchip() = default;
    Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw DomainError("Pchip: need >= 2 matching samples");
        for (std::size_t i = 1; i < n; ++i) {
            if (!(x_[i] > x_[i - 1])) throw DomainError("Pchip: abscissae must be strictly increasing");
        }
        std::vector<double> h(n - 1), delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            delta[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        d_.assign(n, 0.0);
        if (n == 2) {
            d_[0] = d_[1] = delta[0];
            return;
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] > 0.0) {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }

    // Hermite interpolant with caller-supplied slopes (e.g. exact derivatives).
    // Slopes that would break monotonicity are pulled back into the
    // Fritsch-Carlson region.
    Pchip(std::vector<double> x, std::vector<double> y, std::vector<double> slopes)
        : x_(std::move(x)), y_(std::move(y)), d_(std::move(slopes)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n || d_.size() != n) throw DomainError("Pchip: need >= 2 matching samples");
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (!(x_[i + 1] > x_[i])) throw DomainError("Pchip: abscissae must be strictly increasing");
            const double delta = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
            if (delta == 0.0) {
                d_[i] = d_[i + 1] = 0.0;
                continue;
            }
            const double a = d_[i] / delta, b = d_[i + 1] / delta;
            if (a < 0.0) d_[i] = 0.0;
            if (b < 0.0) d_[i + 1] = 0.0;
            const double r2 = a * a + b * b;
            if (r2 > 9.0) {
                const double tau = 3.0 / std::sqrt(r2);
                d_[i] = tau * a * delta;
                d_[i + 1] = tau * b * delta;
            }
        }
    }

    double operator()(double x) const { return eval(x).first; }
    double derivative(double x) const { return eval(x).second; }

    std::pair<double, double> eval(double x) const {
        const std::size_t n = x_.size();
        std::size_t k = 0;
        if (x >= x_[n - 1]) {
            k = n - 2;
        } else if (x > x_[0]) {
            k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
        }
        const double h = x_[k + 1] - x_[k];
        const double t = (x - x_[k]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        const double value = h00 * y_[k] + h10 * h * d_[k] + h01 * y_[k + 1] + h11 * h * d_[k + 1];
        const double dh00 = 6 * t2 - 6 * t, dh10 = 3 * t2 - 4 * t + 1;
        const double dh01 = -6 * t2 + 6 * t, dh11 = 3 * t2 - 2 * t;
        const double slope = (dh00 * y_[k] + dh01 * y_[k + 1]) / h + dh10 * d_[k] + dh11 * d_[k + 1];
        return {value, slope};
    }

    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& y() const { return y_; }

  private:
    static double end_slope(double h0, double h1, double d0, double d1) {
        double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (d * d0 <= 0.0) return 0.0;
        if (d0 * d1 <= 0.0 && std::abs(d) > std::abs(3.0 * d0)) return 3.0 * d0;
        return d;
    }

    std::vector<double> x_, y_, d_;
};

// Least-squares slope of log|y| against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need >= 2 pairs");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace qfdr::quad
