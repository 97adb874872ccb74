// exact_dynamics.hpp - master-equation trajectories, exact work mean and
// variance, and the two-point-measurement oracle on closed composite systems.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qfdr/lindblad.hpp"
#include "qfdr/parallel.hpp"
#include "qfdr/quadrature.hpp"
#include "qfdr/slow_driving.hpp"

namespace qfdr {

struct TrajectorySolution {
    std::vector<double> times;             // t_0 .. t_N, uniform
    std::vector<Matrix> states;            // rho(t_k)
    std::vector<SuperMatrix> propagators;  // P(t_{k+1}, t_k)

    std::size_t steps() const { return propagators.size(); }
    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

inline TrajectorySolution evolve(const GeneratorFamily& family, const DensityMatrix& rho0, double tau, int steps,
                                 StepScheme scheme = StepScheme::Magnus4) {
    if (steps < 8) throw DomainError("evolve: steps must be >= 8");
    if (!(tau > 0.0)) throw DomainError("evolve: tau must be > 0");
    TrajectorySolution out;
    const double dt = tau / steps;
    out.times.resize(steps + 1);
    for (int k = 0; k <= steps; ++k) out.times[k] = dt * k;
    out.propagators.resize(steps);
    parallel_for(static_cast<std::size_t>(steps), [&](std::size_t k) {
        out.propagators[k] = step_propagator(family, dt * static_cast<double>(k), dt, scheme);
    });
    out.states.reserve(steps + 1);
    out.states.push_back(rho0.matrix());
    Vector v = vectorize(rho0.matrix());
    for (int k = 0; k < steps; ++k) {
        v = out.propagators[k] * v;
        Matrix m = devectorize(v);
        out.states.push_back(0.5 * (m + m.adjoint()));
    }
    return out;
}

// Largest trace-norm distance between two trajectories on nested grids
// (`fine` has a multiple of `coarse`'s step count).
inline double trajectory_distance(const TrajectorySolution& coarse, const TrajectorySolution& fine) {
    const std::size_t ratio = fine.steps() / coarse.steps();
    if (ratio == 0 || ratio * coarse.steps() != fine.steps()) {
        throw DimensionMismatch("trajectory_distance: grids are not nested");
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < coarse.states.size(); ++k) {
        const Matrix diff = coarse.states[k] - fine.states[k * ratio];
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (diff + diff.adjoint()));
        worst = std::max(worst, es.eigenvalues().cwiseAbs().sum());
    }
    return worst;
}

namespace detail {
inline void require_matching_grid(const TrajectorySolution& traj, const ProtocolPath& path, const char* where) {
    if (traj.times.size() < 2 || std::abs(traj.times.back() - path.tau()) > 1e-12 * path.tau()) {
        throw DimensionMismatch(std::string(where) + ": trajectory grid does not span the path duration");
    }
    require_same_dim(traj.states.front().rows(), path.dim(), where);
}

// 1/2 {rho, A - Tr[A rho]} straight from the definition; trajectory states
// are not re-validated as density matrices here.
inline Matrix smap_direct(const Matrix& rho, const Matrix& a) {
    const cplx mean = trace_product(a, rho);
    const Matrix da = a - mean * identity(a.rows());
    return 0.5 * (rho * da + da * rho);
}
} // namespace detail

// W_diss = beta^{-1} ln(Z_tau / Z_0) + int Tr[Hdot_t rho_t] dt
inline double exact_dissipated_work(const TrajectorySolution& traj, const ProtocolPath& path) {
    detail::require_matching_grid(traj, path, "exact_dissipated_work");
    std::vector<double> power(traj.times.size());
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        power[k] = trace_product(path.derivative_at(traj.times[k]).matrix(), traj.states[k]).real();
    }
    return path.log_partition_ratio() / path.beta() + quad::simpson(power, traj.dt());
}

// Work done on the system, int Tr[Hdot_t rho_t] dt.
inline double exact_mean_work(const TrajectorySolution& traj, const ProtocolPath& path) {
    return exact_dissipated_work(traj, path) + path.free_energy_change();
}

// sigma^2 = 2 int_0^tau dt1 int_0^t1 dt2 Tr[Hdot_t1 P(t1, t2) S_{rho_t2}(Hdot_t2)].
// Each column t2 is pushed forward through the cached step propagators; both
// integrals use composite Simpson on the trajectory grid.
inline double exact_work_variance(const TrajectorySolution& traj, const ProtocolPath& path) {
    detail::require_matching_grid(traj, path, "exact_work_variance");
    const std::size_t n = traj.times.size();
    const double dt = traj.dt();
    std::vector<Matrix> hdot(n);
    std::vector<Vector> hdot_t(n);  // vec(Hdot^T) so that Tr[Hdot Y] = vec(Hdot^T) . vec(Y)
    for (std::size_t k = 0; k < n; ++k) {
        hdot[k] = path.derivative_at(traj.times[k]).matrix();
        hdot_t[k] = vectorize(hdot[k].transpose());
    }
    // f(k, j) for j <= k, row-major lower triangle.
    RealMatrix f = RealMatrix::Zero(static_cast<Index>(n), static_cast<Index>(n));
    parallel_for(n, [&](std::size_t j) {
        Vector y = vectorize(detail::smap_direct(traj.states[j], hdot[j]));
        f(static_cast<Index>(j), static_cast<Index>(j)) = hdot_t[j].cwiseProduct(y).sum().real();
        for (std::size_t k = j + 1; k < n; ++k) {
            y = traj.propagators[k - 1] * y;
            f(static_cast<Index>(k), static_cast<Index>(j)) = hdot_t[k].cwiseProduct(y).sum().real();
        }
    });
    std::vector<double> inner(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        const auto w = quad::simpson_weights(k, dt);
        double s = 0.0;
        for (std::size_t j = 0; j <= k; ++j) s += w[j] * f(static_cast<Index>(k), static_cast<Index>(j));
        inner[k] = s;
    }
    return 2.0 * quad::simpson(inner, dt);
}

inline WorkStatistics exact_statistics(const TrajectorySolution& traj, const ProtocolPath& path) {
    WorkStatistics w;
    w.method = WorkMethod::Exact;
    w.w_diss = exact_dissipated_work(traj, path);
    w.sigma2 = exact_work_variance(traj, path);
    w.delta_f = path.free_energy_change();
    w.w_mean = w.delta_f + w.w_diss;
    w.q_w = 0.5 * path.beta() * w.sigma2 - w.w_diss;
    if (w.q_w < -1e-9) {
        w.warnings.push_back("exact: W_diss exceeds beta sigma^2 / 2 by " + std::to_string(-w.q_w));
    }
    return w;
}

// --------------------------- closed composite systems ----------------------

using HamiltonianPath = std::function<HermitianMatrix(double)>;

inline constexpr Index kMaxCompositeDim = 64;

inline void require_composite_cap(Index d, const char* where) {
    if (d > kMaxCompositeDim) {
        throw DomainError(std::string(where) + ": composite dimension " + std::to_string(d) + " exceeds limit " +
                          std::to_string(kMaxCompositeDim));
    }
}

// exp(-i K) for Hermitian K through its eigendecomposition; unitary to round-off.
inline Matrix unitary_exp(const HermitianMatrix& k) {
    const Spectrum s = eigh(k);
    const Vector phases = s.eigenvalues.unaryExpr([](double e) { return std::exp(cplx(0.0, -e)); });
    return s.eigenvectors * phases.asDiagonal() * s.eigenvectors.adjoint();
}

// One fourth-order Magnus step of i dU/dt = H(t) U.
inline Matrix unitary_step(const HamiltonianPath& h, double t, double dt) {
    const double c = std::sqrt(3.0) / 6.0;
    const Matrix h1 = h(t + (0.5 - c) * dt).matrix();
    const Matrix h2 = h(t + (0.5 + c) * dt).matrix();
    const Matrix k = 0.5 * dt * (h1 + h2) - cplx(0.0, std::sqrt(3.0) / 12.0 * dt * dt) * commutator(h2, h1);
    return unitary_exp(HermitianMatrix::symmetrized(k));
}

// Cumulative U(t_k, 0) on a uniform grid of `steps` steps.
inline std::vector<Matrix> unitary_trajectory(const HamiltonianPath& h, double tau, int steps) {
    if (steps < 1) throw DomainError("unitary_trajectory: steps must be >= 1");
    const Index d = h(0.0).dim();
    std::vector<Matrix> u;
    u.reserve(steps + 1);
    u.push_back(identity(d));
    const double dt = tau / steps;
    for (int k = 0; k < steps; ++k) u.push_back(unitary_step(h, dt * k, dt) * u.back());
    return u;
}

// Closest unitary W V^dag to u = W S V^dag; strips round-off drift of long products.
inline Matrix nearest_unitary(const Matrix& u) {
    Eigen::JacobiSVD<Matrix> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

inline Matrix unitary_propagator(const HamiltonianPath& h, double tau, int steps) {
    return nearest_unitary(unitary_trajectory(h, tau, steps).back());
}

struct WorkMoments {
    double mean = 0.0;
    double second = 0.0;
};

// Heisenberg-difference moments Tr[(U^dag H_tau U - H_0) rho0] and Tr[(...)^2 rho0].
inline WorkMoments weak_measurement_moments(const Matrix& u, const HermitianMatrix& h0, const HermitianMatrix& htau,
                                            const DensityMatrix& rho0) {
    require_composite_cap(h0.dim(), "weak_measurement_moments");
    const Matrix w = u.adjoint() * htau.matrix() * u - h0.matrix();
    return WorkMoments{trace_product(w, rho0.matrix()).real(), trace_product(w * w, rho0.matrix()).real()};
}

struct ConvergedUnitary {
    Matrix u;
    int steps = 0;
    double unitarity_defect = 0.0;
};

// Doubles the step count until the work moments of rho0 move by less than 1e-9.
inline ConvergedUnitary converged_unitary(const HamiltonianPath& h, double tau, const DensityMatrix& rho0,
                                          int steps = 16, int max_steps = 1 << 14) {
    const HermitianMatrix h0 = h(0.0), ht = h(tau);
    Matrix u = unitary_propagator(h, tau, steps);
    WorkMoments prev = weak_measurement_moments(u, h0, ht, rho0);
    for (;;) {
        if (2 * steps > max_steps) throw ConvergenceError("converged_unitary: moment drift above 1e-9");
        steps *= 2;
        Matrix next = unitary_propagator(h, tau, steps);
        const WorkMoments m = weak_measurement_moments(next, h0, ht, rho0);
        const double drift = std::max(std::abs(m.mean - prev.mean), std::abs(m.second - prev.second));
        u = std::move(next);
        prev = m;
        if (drift < 1e-9) break;
    }
    const double defect = max_abs(u.adjoint() * u - identity(u.rows()));
    return ConvergedUnitary{u, steps, defect};
}

struct TPMDistribution {
    std::vector<double> support;
    std::vector<double> probabilities;

    double moment(int k) const {
        double s = 0.0;
        for (std::size_t i = 0; i < support.size(); ++i) s += probabilities[i] * std::pow(support[i], k);
        return s;
    }
    // <e^{-beta w}>
    double exponential_average(double beta) const {
        double s = 0.0;
        for (std::size_t i = 0; i < support.size(); ++i) s += probabilities[i] * std::exp(-beta * support[i]);
        return s;
    }
};

inline constexpr double kWorkBinTol = 1e-10;
// Transitions with |<m|U|n>|^2 below this are round-off of forbidden ones and
// are dropped; each shifts <e^{-beta w}> by at most this fraction of Z_tau/Z_0.
inline constexpr double kTransitionFloor = 1e-24;

// P(w) = sum_{n,m} p_n |<m(tau)|U|n(0)>|^2 delta(w - e_m(tau) + e_n(0)).
inline TPMDistribution tpm_distribution(const Matrix& u, const HermitianMatrix& h0, const HermitianMatrix& htau,
                                        double beta) {
    require_composite_cap(h0.dim(), "tpm_distribution");
    require_same_dim(h0.dim(), htau.dim(), "tpm_distribution");
    const Spectrum s0 = eigh(h0), st = eigh(htau);
    const RealVector p = boltzmann_weights(s0.eigenvalues, beta);
    const Matrix amp = st.eigenvectors.adjoint() * u * s0.eigenvectors;
    std::vector<std::pair<double, double>> events;
    const Index d = h0.dim();
    for (Index n = 0; n < d; ++n) {
        for (Index m = 0; m < d; ++m) {
            const double weight = std::norm(amp(m, n));
            if (weight > kTransitionFloor) events.emplace_back(st.eigenvalues(m) - s0.eigenvalues(n), p(n) * weight);
        }
    }
    std::sort(events.begin(), events.end());
    TPMDistribution out;
    double anchor = 0.0;
    for (const auto& [w, prob] : events) {
        if (out.support.empty() || w - anchor > kWorkBinTol) {
            anchor = w;
            out.support.push_back(w);
            out.probabilities.push_back(prob);
        } else {
            out.probabilities.back() += prob;
        }
    }
    return out;
}

inline TPMDistribution tpm_distribution_global(const HamiltonianPath& h, double tau, double beta, int steps = 0) {
    const HermitianMatrix h0 = h(0.0);
    require_composite_cap(h0.dim(), "tpm_distribution_global");
    require_positive_beta(beta, "tpm_distribution_global");
    const Matrix u = steps > 0 ? unitary_propagator(h, tau, steps) : converged_unitary(h, tau, gibbs_state(h0, beta)).u;
    return tpm_distribution(u, h0, h(tau), beta);
}

} // namespace qfdr
