// geometry.hpp - fluctuation and dissipation metrics on control space,
// optimal (geodesic) protocols and Pareto fronts of the two costs.
//
// For a path lambda(t), with g_alpha = alpha Lambda + (1 - alpha) xi,
//     beta sigma^2 / 2 = int lambda_dot . Lambda . lambda_dot dt
//     W_diss           = int lambda_dot . xi     . lambda_dot dt
//     C_alpha          = int lambda_dot . g      . lambda_dot dt

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qfdr/lindblad.hpp"
#include "qfdr/parallel.hpp"
#include "qfdr/quadrature.hpp"
#include "qfdr/slow_driving.hpp"

namespace qfdr {

// H(lambda) = X_0 + sum_i lambda_i X_i with a generator constructor at inverse
// temperature beta.
struct ControlChart {
    HermitianMatrix base;
    std::vector<HermitianMatrix> forces;
    double beta = 1.0;
    GeneratorConstructor generator;

    Index parameters() const { return static_cast<Index>(forces.size()); }

    HermitianMatrix hamiltonian(const RealVector& lambda) const {
        if (lambda.size() != parameters()) throw DimensionMismatch("ControlChart: wrong parameter count");
        Matrix h = base.matrix();
        for (Index i = 0; i < parameters(); ++i) h += lambda(i) * forces[static_cast<std::size_t>(i)].matrix();
        return HermitianMatrix::symmetrized(h);
    }
};

struct MetricPair {
    RealMatrix fluctuation;  // Lambda
    RealMatrix dissipation;  // xi
};

// Lambda_ij = -(beta/2) Tr[X_i L+ S(X_j) + X_j L+ S(X_i)], xi likewise with J.
inline MetricPair metric_pair(const Lindbladian& l, const std::vector<HermitianMatrix>& forces, double beta) {
    const DrazinInverse lp = drazin_inverse(l);
    const DensityMatrix& pi = l.stationary_state();
    const auto n = static_cast<Index>(forces.size());
    std::vector<Matrix> ls(forces.size()), lj(forces.size());
    for (std::size_t i = 0; i < forces.size(); ++i) {
        ls[i] = lp.apply(smap(pi, forces[i]).matrix());
        lj[i] = lp.apply(jmap(pi, forces[i]).matrix());
    }
    MetricPair m{RealMatrix(n, n), RealMatrix(n, n)};
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
            m.fluctuation(i, j) =
                -0.5 * beta * (trace_product(forces[ui].matrix(), ls[uj]) + trace_product(forces[uj].matrix(), ls[ui])).real();
            m.dissipation(i, j) =
                -0.5 * beta * (trace_product(forces[ui].matrix(), lj[uj]) + trace_product(forces[uj].matrix(), lj[ui])).real();
        }
    }
    return m;
}

inline MetricPair metric_pair(const ControlChart& chart, const RealVector& lambda) {
    return metric_pair(chart.generator(chart.hamiltonian(lambda)), chart.forces, chart.beta);
}

inline RealMatrix fluctuation_metric(const ControlChart& chart, const RealVector& lambda) {
    return metric_pair(chart, lambda).fluctuation;
}

inline RealMatrix dissipation_metric(const ControlChart& chart, const RealVector& lambda) {
    return metric_pair(chart, lambda).dissipation;
}

inline void require_alpha(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
}

enum class MetricKind { Fluctuation, Dissipation, Alpha };

// lambda -> metric of the requested kind on a chart.
class MetricField {
  public:
    MetricField(ControlChart chart, MetricKind kind, double alpha = 0.0)
        : chart_(std::move(chart)), kind_(kind), alpha_(alpha) {
        if (kind_ == MetricKind::Alpha) require_alpha(alpha_);
    }

    RealMatrix evaluate(const RealVector& lambda) const {
        const MetricPair m = metric_pair(chart_, lambda);
        switch (kind_) {
            case MetricKind::Fluctuation: return m.fluctuation;
            case MetricKind::Dissipation: return m.dissipation;
            case MetricKind::Alpha: return alpha_ * m.fluctuation + (1.0 - alpha_) * m.dissipation;
        }
        return {};
    }

    MetricKind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    const ControlChart& chart() const { return chart_; }

  private:
    ControlChart chart_;
    MetricKind kind_;
    double alpha_;
};

// g_alpha = alpha Lambda + (1 - alpha) xi
inline MetricField alpha_metric(const ControlChart& chart, double alpha) {
    return MetricField(chart, MetricKind::Alpha, alpha);
}

// --------------------------- one parameter ----------------------------------

struct ScalarMetrics {
    double fluctuation = 0.0;  // Lambda
    double dissipation = 0.0;  // xi
    double alpha(double a) const { return a * fluctuation + (1.0 - a) * dissipation; }
};

using MetricPair1D = std::function<ScalarMetrics(double)>;

inline MetricPair1D metric_pair_1d(const ControlChart& chart) {
    if (chart.parameters() != 1) throw DimensionMismatch("metric_pair_1d: chart must have one parameter");
    return [chart](double lambda) {
        const MetricPair m = metric_pair(chart, RealVector::Constant(1, lambda));
        return ScalarMetrics{m.fluctuation(0, 0), m.dissipation(0, 0)};
    };
}

struct GeodesicSolution {
    double alpha = 0.0;
    double tau = 0.0;
    std::vector<double> times;
    std::vector<double> lambda;
    std::vector<double> velocity;
    double length = 0.0;        // int sqrt(g_alpha) |d lambda|
    double cost = 0.0;          // C_alpha = length^2 / tau
    double sigma_tilde2 = 0.0;  // beta sigma^2 / 2
    double w_diss = 0.0;
    double el_residual = 0.0;   // max |g lambda_dot^2 / (L / tau)^2 - 1|
    quad::Pchip path;           // lambda(t)

    double lambda_at(double t) const { return path(t); }
    double velocity_at(double t) const { return path.derivative(t); }
};

inline constexpr std::size_t kGeodesicLambdaGrid = 2048;

// Constant-g_alpha-speed protocol between lambda0 and lambda_tau:
//     lambda_dot(t) = (L / tau) g_alpha(lambda)^{-1/2},  L = int sqrt(g_alpha) |d lambda|.
// t(lambda) is tabulated on a 2048-point lambda grid and inverted with a
// monotone cubic using the exact slopes.
inline GeodesicSolution optimal_velocity_1d(const MetricPair1D& metrics, double alpha, double lambda0,
                                            double lambda_tau, double tau, std::size_t samples = 201,
                                            std::size_t lambda_grid = kGeodesicLambdaGrid) {
    require_alpha(alpha);
    if (!(tau > 0.0)) throw DomainError("optimal_velocity_1d: tau must be > 0");
    if (samples < 2 || lambda_grid < 3) throw DomainError("optimal_velocity_1d: grids too small");
    GeodesicSolution sol;
    sol.alpha = alpha;
    sol.tau = tau;
    if (lambda0 == lambda_tau) {
        sol.times = {0.0, tau};
        sol.lambda = {lambda0, lambda0};
        sol.velocity = {0.0, 0.0};
        sol.path = quad::Pchip({0.0, tau}, {lambda0, lambda0});
        return sol;
    }
    const double span = lambda_tau - lambda0;
    const double sign = span > 0 ? 1.0 : -1.0;
    const std::size_t m = lambda_grid - 1;
    const double h = std::abs(span) / static_cast<double>(m);

    // metric at nodes (even) and interval midpoints (odd) of a 2m-interval grid
    std::vector<ScalarMetrics> g(2 * m + 1);
    parallel_for(g.size(), [&](std::size_t k) {
        g[k] = metrics(lambda0 + sign * 0.5 * h * static_cast<double>(k));
    });
    std::vector<double> root(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double ga = g[k].alpha(alpha);
        if (!(ga > 0.0) || !std::isfinite(ga)) {
            throw SingularityError("optimal_velocity_1d: metric not positive at lambda = " +
                                   std::to_string(lambda0 + sign * 0.5 * h * static_cast<double>(k)));
        }
        root[k] = std::sqrt(ga);
    }
    std::vector<double> s(m + 1, 0.0);
    double fluct = 0.0, diss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t a = 2 * i, b = 2 * i + 1, c = 2 * i + 2;
        s[i + 1] = s[i] + h / 6.0 * (root[a] + 4.0 * root[b] + root[c]);
        fluct += h / 6.0 * (g[a].fluctuation / root[a] + 4.0 * g[b].fluctuation / root[b] + g[c].fluctuation / root[c]);
        diss += h / 6.0 * (g[a].dissipation / root[a] + 4.0 * g[b].dissipation / root[b] + g[c].dissipation / root[c]);
    }
    const double length = s[m];
    const double speed = length / tau;
    sol.length = length;
    sol.cost = length * length / tau;
    sol.sigma_tilde2 = speed * fluct;
    sol.w_diss = speed * diss;

    std::vector<double> t(m + 1), lam(m + 1), slope(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        t[i] = tau * s[i] / length;
        lam[i] = lambda0 + sign * h * static_cast<double>(i);
        slope[i] = sign * speed / root[2 * i];
    }
    t[m] = tau;
    sol.path = quad::Pchip(std::move(t), std::move(lam), std::move(slope));

    sol.times.resize(samples);
    sol.lambda.resize(samples);
    sol.velocity.resize(samples);
    std::vector<double> residual(samples, 0.0);
    parallel_for(samples, [&](std::size_t k) {
        const double tk = tau * static_cast<double>(k) / static_cast<double>(samples - 1);
        const auto [value, deriv] = sol.path.eval(tk);
        const double gk = metrics(value).alpha(alpha);
        sol.times[k] = tk;
        sol.lambda[k] = value;
        sol.velocity[k] = sign * speed / std::sqrt(gk);
        residual[k] = std::abs(gk * deriv * deriv / (speed * speed) - 1.0);
    });
    sol.el_residual = *std::max_element(residual.begin(), residual.end());
    return sol;
}

struct PathCost {
    double c_alpha = 0.0;
    double sigma_tilde2 = 0.0;
    double w_diss = 0.0;
};

// Simpson quadrature of lambda_dot^2 Lambda and lambda_dot^2 xi over `grid` points.
inline PathCost cost_of_path(const MetricPair1D& metrics, double alpha, const std::function<double(double)>& lambda,
                             const std::function<double(double)>& lambda_dot, double tau, std::size_t grid = 2049) {
    require_alpha(alpha);
    if (grid < 3) throw DomainError("cost_of_path: grid must be >= 3");
    std::vector<double> f(grid), x(grid);
    parallel_for(grid, [&](std::size_t k) {
        const double t = tau * static_cast<double>(k) / static_cast<double>(grid - 1);
        const double v = lambda_dot(t);
        const ScalarMetrics m = metrics(lambda(t));
        f[k] = v * v * m.fluctuation;
        x[k] = v * v * m.dissipation;
    });
    const double h = tau / static_cast<double>(grid - 1);
    PathCost c;
    c.sigma_tilde2 = quad::simpson(f, h);
    c.w_diss = quad::simpson(x, h);
    c.c_alpha = alpha * c.sigma_tilde2 + (1.0 - alpha) * c.w_diss;
    return c;
}

inline PathCost cost_of_path(const GeodesicSolution& g, const MetricPair1D& metrics, std::size_t grid = 2049) {
    return cost_of_path(
        metrics, g.alpha, [&](double t) { return g.lambda_at(t); }, [&](double t) { return g.velocity_at(t); }, g.tau,
        grid);
}

// delta(t) = sum_k c_k sin(k pi t / tau): vanishes at both endpoints.
struct PinnedPerturbation {
    double tau = 1.0;
    std::vector<double> coefficients;

    double value(double t) const {
        double s = 0.0;
        for (std::size_t k = 0; k < coefficients.size(); ++k)
            s += coefficients[k] * std::sin(static_cast<double>(k + 1) * std::numbers::pi * t / tau);
        return s;
    }
    double derivative(double t) const {
        double s = 0.0;
        for (std::size_t k = 0; k < coefficients.size(); ++k) {
            const double w = static_cast<double>(k + 1) * std::numbers::pi / tau;
            s += coefficients[k] * w * std::cos(w * t);
        }
        return s;
    }
};

// Cost of the geodesic displaced by `p`, same quadrature as cost_of_path(g).
inline PathCost perturbed_cost(const GeodesicSolution& g, const MetricPair1D& metrics, const PinnedPerturbation& p,
                               std::size_t grid = 2049) {
    return cost_of_path(
        metrics, g.alpha, [&](double t) { return g.lambda_at(t) + p.value(t); },
        [&](double t) { return g.velocity_at(t) + p.derivative(t); }, g.tau, grid);
}

struct ParetoPoint {
    double alpha = 0.0;
    double sigma_tilde2 = 0.0;
    double w_diss = 0.0;
    bool ok = true;
    std::string error;
};

inline std::vector<double> default_alpha_grid(std::size_t n = 41) {
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    return a;
}

// One geodesic per alpha; failures are recorded per point.
inline std::vector<ParetoPoint> pareto_front(const MetricPair1D& metrics, double lambda0, double lambda_tau, double tau,
                                             const std::vector<double>& alpha_grid) {
    for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
        require_alpha(alpha_grid[i]);
        if (i > 0 && alpha_grid[i] < alpha_grid[i - 1]) throw DomainError("pareto_front: alpha grid must be sorted");
    }
    std::vector<ParetoPoint> front(alpha_grid.size());
    for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
        front[i].alpha = alpha_grid[i];
        try {
            const GeodesicSolution g = optimal_velocity_1d(metrics, alpha_grid[i], lambda0, lambda_tau, tau, 2);
            front[i].sigma_tilde2 = g.sigma_tilde2;
            front[i].w_diss = g.w_diss;
        } catch (const Error& e) {
            front[i].ok = false;
            front[i].error = e.what();
        }
    }
    return front;
}

// --------------------------- several parameters -----------------------------

using MetricPairND = std::function<MetricPair(const RealVector&)>;

inline MetricPairND metric_pair_nd(const ControlChart& chart) {
    return [chart](const RealVector& l) { return metric_pair(chart, l); };
}

struct GeodesicND {
    double alpha = 0.0;
    double tau = 0.0;
    std::vector<double> times;
    std::vector<RealVector> lambda;
    std::vector<RealVector> velocity;
    double cost = 0.0;
    double sigma_tilde2 = 0.0;
    double w_diss = 0.0;
    double endpoint_miss = 0.0;    // |lambda(tau) - lambda_tau|
    double speed_variation = 0.0;  // max relative spread of g(v, v) along the path
    int newton_iterations = 0;
};

namespace detail {

// Gamma^k_ij v^i v^j with metric derivatives from central differences.
inline RealVector christoffel_contract(const std::function<RealMatrix(const RealVector&)>& g, const RealVector& x,
                                       const RealVector& v) {
    const Index n = x.size();
    std::vector<RealMatrix> dg(static_cast<std::size_t>(n));
    for (Index l = 0; l < n; ++l) {
        const double h = 1e-5 * std::max(1.0, std::abs(x(l)));
        RealVector xp = x, xm = x;
        xp(l) += h;
        xm(l) -= h;
        dg[static_cast<std::size_t>(l)] = (g(xp) - g(xm)) / (2.0 * h);
    }
    // w_l = sum_ij (d_i g_lj + d_j g_li - d_l g_ij) v_i v_j / 2
    RealVector w = RealVector::Zero(n);
    for (Index l = 0; l < n; ++l) {
        double acc = 0.0;
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                acc += (dg[static_cast<std::size_t>(i)](l, j) + dg[static_cast<std::size_t>(j)](l, i) -
                        dg[static_cast<std::size_t>(l)](i, j)) *
                       v(i) * v(j);
            }
        }
        w(l) = 0.5 * acc;
    }
    return g(x).ldlt().solve(w);
}

} // namespace detail

// Geodesic of g_alpha by shooting on the Euler-Lagrange ODE in an affine
// parameter u in [0, 1] (RK4, `steps` steps) with a finite-difference Newton
// update of the initial velocity. Time is t = tau u.
inline GeodesicND geodesic_nd(const MetricPairND& metrics, double alpha, const RealVector& lambda0,
                              const RealVector& lambda_tau, double tau, int steps = 200, double tol = 1e-10,
                              int max_iter = 50) {
    require_alpha(alpha);
    if (lambda0.size() != lambda_tau.size()) throw DimensionMismatch("geodesic_nd: endpoint sizes differ");
    const Index n = lambda0.size();
    auto g = [&](const RealVector& x) -> RealMatrix {
        const MetricPair m = metrics(x);
        return alpha * m.fluctuation + (1.0 - alpha) * m.dissipation;
    };
    auto integrate = [&](const RealVector& v0, std::vector<RealVector>* xs, std::vector<RealVector>* vs) {
        RealVector x = lambda0, v = v0;
        const double du = 1.0 / steps;
        if (xs) {
            xs->assign(1, x);
            vs->assign(1, v);
        }
        auto acc = [&](const RealVector& xx, const RealVector& vv) {
            return RealVector(-detail::christoffel_contract(g, xx, vv));
        };
        for (int k = 0; k < steps; ++k) {
            const RealVector k1x = v, k1v = acc(x, v);
            const RealVector k2x = v + 0.5 * du * k1v, k2v = acc(x + 0.5 * du * k1x, v + 0.5 * du * k1v);
            const RealVector k3x = v + 0.5 * du * k2v, k3v = acc(x + 0.5 * du * k2x, v + 0.5 * du * k2v);
            const RealVector k4x = v + du * k3v, k4v = acc(x + du * k3x, v + du * k3v);
            x += du / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
            v += du / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
            if (!x.allFinite() || !v.allFinite()) throw ConvergenceError("geodesic_nd: integration diverged");
            if (xs) {
                xs->push_back(x);
                vs->push_back(v);
            }
        }
        return x;
    };

    GeodesicND out;
    out.alpha = alpha;
    out.tau = tau;
    RealVector v0 = lambda_tau - lambda0;
    const double scale = std::max(1.0, (lambda_tau - lambda0).norm());
    RealVector miss = integrate(v0, nullptr, nullptr) - lambda_tau;
    int it = 0;
    while (miss.norm() > tol * scale) {
        if (++it > max_iter) {
            throw ConvergenceError("geodesic_nd: shooting did not converge, miss " + std::to_string(miss.norm()));
        }
        RealMatrix jac(n, n);
        for (Index j = 0; j < n; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(v0(j)));
            RealVector vp = v0;
            vp(j) += h;
            jac.col(j) = (integrate(vp, nullptr, nullptr) - lambda_tau - miss) / h;
        }
        v0 -= jac.partialPivLu().solve(miss);
        miss = integrate(v0, nullptr, nullptr) - lambda_tau;
    }
    out.newton_iterations = it;
    std::vector<RealVector> xs, vs;
    integrate(v0, &xs, &vs);
    out.endpoint_miss = (xs.back() - lambda_tau).norm();

    std::vector<double> sf(xs.size()), sd(xs.size()), sg(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const MetricPair m = metrics(xs[k]);
        sf[k] = vs[k].dot(m.fluctuation * vs[k]);
        sd[k] = vs[k].dot(m.dissipation * vs[k]);
        sg[k] = alpha * sf[k] + (1.0 - alpha) * sd[k];
    }
    const double du = 1.0 / steps;
    // dt = tau du and lambda_dot = v / tau give int lambda_dot g lambda_dot dt = (1/tau) int v g v du.
    out.sigma_tilde2 = quad::simpson(sf, du) / tau;
    out.w_diss = quad::simpson(sd, du) / tau;
    out.cost = alpha * out.sigma_tilde2 + (1.0 - alpha) * out.w_diss;
    const auto [lo, hi] = std::minmax_element(sg.begin(), sg.end());
    out.speed_variation = (*hi - *lo) / std::max(*hi, 1e-300);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        out.times.push_back(tau * du * static_cast<double>(k));
        out.lambda.push_back(xs[k]);
        out.velocity.push_back(vs[k] / tau);
    }
    return out;
}

} // namespace qfdr
