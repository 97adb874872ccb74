// models.hpp - concrete systems: the driven harmonic oscillator, the thermal
// qubit under spherical protocols, and a discrete quench chain with a finite
// bath at arbitrary coupling.

#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qfdr/exact_dynamics.hpp"
#include "qfdr/geometry.hpp"
#include "qfdr/lindblad.hpp"
#include "qfdr/slow_driving.hpp"

namespace qfdr {

// --------------------------- harmonic oscillator ---------------------------

// H = omega (n + 1/2), driven through omega, relaxed by a perfect thermalizer.
struct OscillatorModel {
    double omega0 = 0.1;
    double omega_tau = 10.0;
    double beta = 1.0;
    double gamma_rate = 1.0;
    Index truncation = 0;      // 0 picks the default rule per frequency
    double omega_ref = 1.0;    // reference frequency for reporting
};

inline void require_oscillator(const OscillatorModel& m, double omega) {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw DomainError("oscillator: omega must be > 0");
    require_positive_beta(m.beta, "oscillator");
    if (!(m.gamma_rate > 0.0)) throw DomainError("oscillator: rate must be > 0");
}

// Lambda = beta (1 + cosh x) / (4 Gamma sinh^2(x/2)),
// xi     = beta (1 + sinh x / x) / (4 Gamma sinh^2(x/2)),  x = beta omega.
inline ScalarMetrics oscillator_metrics_closed_form(const OscillatorModel& m, double omega) {
    require_oscillator(m, omega);
    const double x = m.beta * omega;
    if (x > 700.0) {
        // sinh^2(x/2) overflows; keep the leading terms.
        return ScalarMetrics{m.beta / (2.0 * m.gamma_rate), 1.0 / (2.0 * m.gamma_rate * omega)};
    }
    const double sh = std::sinh(0.5 * x);
    const double pre = m.beta / (4.0 * m.gamma_rate * sh * sh);
    return ScalarMetrics{pre * (1.0 + std::cosh(x)), pre * (1.0 + std::sinh(x) / x)};
}

// Lambda - xi = beta (cosh x - sinh x / x) / (4 Gamma sinh^2(x/2)), series for small x.
inline double oscillator_skew_closed_form(const OscillatorModel& m, double omega) {
    require_oscillator(m, omega);
    const double x = m.beta * omega;
    if (x > 700.0) {
        const ScalarMetrics g = oscillator_metrics_closed_form(m, omega);
        return g.fluctuation - g.dissipation;
    }
    double num = 0.0;
    if (x < 0.1) {
        // sum_k x^{2k} (1/(2k)! - 1/(2k+1)!)
        double term = 1.0;
        for (int k = 1; k <= 8; ++k) {
            term *= x * x / ((2.0 * k - 1.0) * (2.0 * k));
            num += term * (1.0 - 1.0 / (2.0 * k + 1.0));
        }
    } else {
        num = std::cosh(x) - std::sinh(x) / x;
    }
    const double sh = std::sinh(0.5 * x);
    return m.beta * num / (4.0 * m.gamma_rate * sh * sh);
}

// Default Fock truncation: max(40, ceil(40 / (beta omega))).
inline Index oscillator_truncation(const OscillatorModel& m, double omega) {
    if (m.truncation > 0) return m.truncation;
    const double x = m.beta * omega;
    return std::max<Index>(40, static_cast<Index>(std::ceil(40.0 / x)));
}

// Metrics from the truncated Fock space of a_omega with the power operator
// per unit omega_dot: (1/omega) (H + omega (a^dag^2 + a^2) / 2).
inline ScalarMetrics oscillator_metrics_at_truncation(const OscillatorModel& m, double omega, Index d) {
    require_oscillator(m, omega);
    const Matrix a = annihilation(d);
    RealVector levels(d);
    for (Index n = 0; n < d; ++n) levels(n) = omega * (static_cast<double>(n) + 0.5);
    const HermitianMatrix h = HermitianMatrix::symmetrized(levels.cast<cplx>().asDiagonal());
    const Matrix a2 = a * a;
    const HermitianMatrix x = HermitianMatrix::symmetrized(h.matrix() / omega + 0.5 * (a2 + a2.adjoint()));
    const MetricPair mp = metric_pair(perfect_thermalizer(h, m.beta, m.gamma_rate), {x}, m.beta);
    return ScalarMetrics{mp.fluctuation(0, 0), mp.dissipation(0, 0)};
}

// Same, with a convergence check: a 25% larger truncation must agree to 1e-6.
inline ScalarMetrics oscillator_metrics_numeric(const OscillatorModel& m, double omega) {
    const Index d = oscillator_truncation(m, omega);
    const ScalarMetrics base = oscillator_metrics_at_truncation(m, omega, d);
    const Index bigger = static_cast<Index>(std::ceil(1.25 * static_cast<double>(d)));
    const ScalarMetrics check = oscillator_metrics_at_truncation(m, omega, bigger);
    const double dl = std::abs(check.fluctuation - base.fluctuation) / std::abs(check.fluctuation);
    const double dx = std::abs(check.dissipation - base.dissipation) / std::abs(check.dissipation);
    if (dl > 1e-6 || dx > 1e-6) {
        throw ConvergenceError("oscillator_metrics_numeric: truncation " + std::to_string(d) +
                               " not converged; try truncation >= " + std::to_string(2 * bigger));
    }
    return base;
}

inline MetricPair1D oscillator_metric_pair(const OscillatorModel& m) {
    return [m](double omega) { return oscillator_metrics_closed_form(m, omega); };
}

inline GeodesicSolution oscillator_geodesic(const OscillatorModel& m, double alpha, double tau,
                                            std::size_t samples = 201) {
    return optimal_velocity_1d(oscillator_metric_pair(m), alpha, m.omega0, m.omega_tau, tau, samples);
}

// |sinh(x/2)| / sqrt(1 + alpha cosh x + (1 - alpha) sinh x / x)
inline double oscillator_speed_profile(double x, double alpha) {
    if (x > 700.0) {
        // e^{x/2}/2 over sqrt((alpha + (1 - alpha)/x) e^x / 2)
        return 1.0 / std::sqrt(2.0 * (alpha + (1.0 - alpha) / x));
    }
    return std::abs(std::sinh(0.5 * x)) / std::sqrt(1.0 + alpha * std::cosh(x) + (1.0 - alpha) * std::sinh(x) / x);
}

// Pointwise relative residual of
//     omega_dot / (omega_tau - omega0) = f(x_t) / int_0^tau f(x_t) dt
// along a computed oscillator geodesic.
inline double oscillator_geodesic_residual(const OscillatorModel& m, const GeodesicSolution& g,
                                           std::size_t grid = 4097) {
    auto f_at = [&](double t) { return oscillator_speed_profile(m.beta * g.lambda_at(t), g.alpha); };
    const double norm = quad::simpson(f_at, 0.0, g.tau, grid);
    const double span = m.omega_tau - m.omega0;
    double worst = 0.0;
    for (std::size_t k = 0; k < g.times.size(); ++k) {
        const double lhs = g.velocity[k] / span;
        const double rhs = oscillator_speed_profile(m.beta * g.lambda[k], g.alpha) / norm;
        worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
    }
    return worst;
}

// --------------------------- qubit spherical protocols ---------------------

enum class QubitProtocolKind { Classical, Quantum };

// H(s) = r (sin th cos ph sx + sin th sin ph sy + cos th sz), s = t / tau in [0, 1].
//   classical: r = r_start + s, th = ph = 0
//   quantum:   r = sqrt(s^2 - 2 s + 2), ph = 0, th = atan2(1, 1 - s)  (so H = sx + (1 - s) sz)
struct QubitSphericalProtocol {
    QubitProtocolKind kind = QubitProtocolKind::Quantum;
    double tau = 100.0;
    double beta = 1.0;
    double gamma_rate = 1.0;
    double r_start = 1.0;

    double r(double s) const {
        return kind == QubitProtocolKind::Classical ? r_start + s : std::sqrt(s * s - 2.0 * s + 2.0);
    }
    double theta(double s) const { return kind == QubitProtocolKind::Classical ? 0.0 : std::atan2(1.0, 1.0 - s); }
    double phi(double) const { return 0.0; }

    HermitianMatrix hamiltonian_unit(double s) const { return qubit_hamiltonian(r(s), theta(s), phi(s)); }
    HermitianMatrix derivative_unit(double) const {
        return HermitianMatrix::symmetrized(kind == QubitProtocolKind::Classical ? Matrix(pauli::z())
                                                                                 : Matrix(-pauli::z()));
    }

    ProtocolPath path() const {
        const QubitSphericalProtocol self = *this;
        if (kind == QubitProtocolKind::Classical && !(r_start > 0.0)) {
            throw DomainError("qubit protocol: r must stay > 0");
        }
        return ProtocolPath::from_unit(
            tau, beta, [self](double s) { return self.hamiltonian_unit(s); },
            [self](double s) { return self.derivative_unit(s); });
    }

    GeneratorFamily family() const {
        const QubitSphericalProtocol self = *this;
        return GeneratorFamily{tau, [self](double t) {
                                   const double s = t / self.tau;
                                   return qubit_boson_generator(self.r(s), self.theta(s), self.phi(s), self.beta,
                                                                self.gamma_rate);
                               }};
    }
};

inline QubitSphericalProtocol qubit_protocol_classical(double tau = 100.0, double beta = 1.0, double gamma_rate = 1.0,
                                                       double r_start = 1.0) {
    return QubitSphericalProtocol{QubitProtocolKind::Classical, tau, beta, gamma_rate, r_start};
}

inline QubitSphericalProtocol qubit_protocol_quantum(double tau = 100.0, double beta = 1.0, double gamma_rate = 1.0) {
    return QubitSphericalProtocol{QubitProtocolKind::Quantum, tau, beta, gamma_rate, 1.0};
}

// --------------------------- discrete quench chain -------------------------

// N sudden quenches H_S(k/N) -> H_S((k+1)/N), k = 0..N-1, each followed by
// full equilibration of the composite H_S (x) I + I (x) H_B + g V.
struct QuenchSequence {
    int steps = 8;
    std::function<HermitianMatrix(double)> system_path;  // s in [0, 1]
    std::function<HermitianMatrix(double)> system_derivative;
    HermitianMatrix bath;
    HermitianMatrix interaction;
    double coupling = 0.0;
    double beta = 1.0;

    Index system_dim() const { return system_path(0.0).dim(); }
    Index bath_dim() const { return bath.dim(); }

    HermitianMatrix total(double s) const {
        const Index ds = system_dim(), db = bath_dim();
        const Matrix h = kron(system_path(s).matrix(), identity(db)) + kron(identity(ds), bath.matrix()) +
                         coupling * interaction.matrix();
        return HermitianMatrix::symmetrized(h);
    }

    void validate() const {
        if (steps < 2) throw DomainError("quench: need at least 2 steps");
        require_positive_beta(beta, "quench");
        const Index d = system_dim() * bath_dim();
        require_composite_cap(d, "quench");
        require_same_dim(interaction.dim(), d, "quench interaction");
    }
};

// Linear interpolation H_S(s) = (1 - s) H_0 + s H_1.
inline QuenchSequence linear_quench(const HermitianMatrix& h0, const HermitianMatrix& h1, const HermitianMatrix& bath,
                                    const HermitianMatrix& interaction, double coupling, double beta, int steps) {
    require_same_dim(h0.dim(), h1.dim(), "linear_quench");
    QuenchSequence q;
    q.steps = steps;
    q.system_path = [h0, h1](double s) { return h0 * (1.0 - s) + h1 * s; };
    q.system_derivative = [h0, h1](double) { return h1 - h0; };
    q.bath = bath;
    q.interaction = interaction;
    q.coupling = coupling;
    q.beta = beta;
    q.validate();
    return q;
}

struct QuenchStep {
    DensityMatrix global;   // pi_SB
    DensityMatrix reduced;  // Tr_B pi_SB
    double log_z = 0.0;
};

inline QuenchStep quench_equilibrium(const QuenchSequence& q, double s) {
    const HermitianMatrix h = q.total(s);
    const Spectrum spec = eigh(h);
    QuenchStep st;
    st.global = gibbs_state(spec, q.beta);
    st.log_z = log_partition_function(spec.eigenvalues, q.beta);
    st.reduced = DensityMatrix(partial_trace_second(st.global.matrix(), q.system_dim(), q.bath_dim()), 1e-10);
    return st;
}

inline WorkStatistics quench_statistics(const QuenchSequence& q) {
    q.validate();
    const int n = q.steps;
    std::vector<QuenchStep> eq(static_cast<std::size_t>(n) + 1);
    parallel_for(eq.size(), [&](std::size_t k) { eq[k] = quench_equilibrium(q, static_cast<double>(k) / n); });
    WorkStatistics w;
    w.method = WorkMethod::Quench;
    for (int k = 0; k < n; ++k) {
        const HermitianMatrix dh = q.system_path(static_cast<double>(k + 1) / n) - q.system_path(static_cast<double>(k) / n);
        const Matrix& rho = eq[static_cast<std::size_t>(k)].reduced.matrix();
        const double mean = trace_product(dh.matrix(), rho).real();
        const double second = trace_product(dh.matrix() * dh.matrix(), rho).real();
        w.w_mean += mean;
        w.sigma2 += second - mean * mean;
    }
    w.delta_f = -(eq.back().log_z - eq.front().log_z) / q.beta;
    w.w_diss = w.w_mean - w.delta_f;
    w.q_w = 0.5 * q.beta * w.sigma2 - w.w_diss;
    return w;
}

// beta^{-1} sum_k S(pi_SB^(k) || pi_SB^(k+1))
inline double quench_relative_entropy_sum(const QuenchSequence& q) {
    q.validate();
    double total = 0.0;
    QuenchStep prev = quench_equilibrium(q, 0.0);
    for (int k = 1; k <= q.steps; ++k) {
        QuenchStep next = quench_equilibrium(q, static_cast<double>(k) / q.steps);
        total += relative_entropy(prev.global, next.global);
        prev = std::move(next);
    }
    return total / q.beta;
}

// First-order continuum rates: as N -> infinity
//     N W_diss     -> (beta/2) int Tr_SB[Hdot J_{pi_SB}(Hdot)] ds
//     N sigma^2    -> int Var_{pi~}(Hdot) ds
//     N Q_w        -> (beta/2) int I(pi_SB, Hdot (x) I) ds
// with Hdot = dH_S/ds. `q_w_reduced` is the same skew term evaluated on the
// reduced state pi~ and the bare system operator; it agrees with `q_w` only at
// weak coupling.
struct QuenchContinuum {
    double w_diss = 0.0;
    double sigma2 = 0.0;
    double q_w = 0.0;
    double q_w_reduced = 0.0;
};

inline QuenchContinuum quench_continuum(const QuenchSequence& q, std::size_t grid = 257) {
    q.validate();
    if (grid < 3) throw DomainError("quench_continuum: grid must be >= 3");
    const Index db = q.bath_dim();
    std::vector<double> wd(grid), var(grid), skew(grid), skew_red(grid);
    parallel_for(grid, [&](std::size_t k) {
        const double s = static_cast<double>(k) / static_cast<double>(grid - 1);
        const QuenchStep st = quench_equilibrium(q, s);
        const HermitianMatrix hdot_s = q.system_derivative ? q.system_derivative(s)
                                                           : HermitianMatrix::symmetrized(
                                                                 (q.system_path(std::min(1.0, s + 1e-6)).matrix() -
                                                                  q.system_path(std::max(0.0, s - 1e-6)).matrix()) /
                                                                 (std::min(1.0, s + 1e-6) - std::max(0.0, s - 1e-6)));
        const HermitianMatrix hdot = HermitianMatrix::symmetrized(kron(hdot_s.matrix(), identity(db)));
        wd[k] = trace_product(hdot.matrix(), jmap(st.global, hdot).matrix()).real();
        var[k] = trace_product(hdot.matrix(), smap(st.global, hdot).matrix()).real();
        skew[k] = wyd_skew_information(st.global, hdot);
        skew_red[k] = wyd_skew_information(st.reduced, hdot_s);
    });
    const double h = 1.0 / static_cast<double>(grid - 1);
    QuenchContinuum c;
    c.w_diss = 0.5 * q.beta * quad::simpson(wd, h);
    c.sigma2 = quad::simpson(var, h);
    c.q_w = 0.5 * q.beta * quad::simpson(skew, h);
    c.q_w_reduced = 0.5 * q.beta * quad::simpson(skew_red, h);
    return c;
}

struct QuenchConvergenceRow {
    int steps = 0;
    double w_diss = 0.0;
    double half_beta_var = 0.0;
    double q_w_pred = 0.0;   // continuum Q_w / N
    double residual = 0.0;   // (half_beta_var - w_diss) - q_w_pred
    double relative_entropy_w = 0.0;
};

struct QuenchConvergence {
    QuenchContinuum continuum;
    std::vector<QuenchConvergenceRow> rows;
};

inline QuenchConvergence quench_continuum_check(const QuenchSequence& family, const std::vector<int>& steps,
                                                std::size_t grid = 257) {
    QuenchConvergence out;
    out.continuum = quench_continuum(family, grid);
    for (int n : steps) {
        QuenchSequence q = family;
        q.steps = n;
        const WorkStatistics w = quench_statistics(q);
        QuenchConvergenceRow row;
        row.steps = n;
        row.w_diss = w.w_diss;
        row.half_beta_var = 0.5 * q.beta * w.sigma2;
        row.q_w_pred = out.continuum.q_w / n;
        row.residual = (row.half_beta_var - row.w_diss) - row.q_w_pred;
        row.relative_entropy_w = quench_relative_entropy_sum(q);
        out.rows.push_back(row);
    }
    return out;
}

} // namespace qfdr
