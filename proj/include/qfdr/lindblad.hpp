// lindblad.hpp - Lindblad generators with Gibbs fixed points, their Drazin
// inverses and time-ordered propagators.

#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "qfdr/operators.hpp"

namespace qfdr {

namespace detail {

// Supermatrix built on first use. Shared between copies of a generator.
class LazySuper {
  public:
    explicit LazySuper(std::function<SuperMatrix()> build) : build_(std::move(build)) {}
    const SuperMatrix& get() const {
        std::call_once(once_, [this] { m_ = build_(); });
        return m_;
    }

  private:
    std::function<SuperMatrix()> build_;
    mutable std::once_flag once_;
    mutable SuperMatrix m_;
};

} // namespace detail

class Lindbladian {
  public:
    enum class Kind { PerfectThermalizer, Davies, QubitBoson, Generic };

    Lindbladian() = default;

    // Wraps a supermatrix and checks that it annihilates `stationary`.
    Lindbladian(SuperMatrix l, HermitianMatrix h, DensityMatrix stationary, std::string label,
                Kind kind = Kind::Generic)
        : hamiltonian_(std::move(h)), stationary_(std::move(stationary)), label_(std::move(label)), kind_(kind) {
        const Index d = hamiltonian_.dim();
        require_same_dim(l.rows(), d * d, "Lindbladian");
        require_same_dim(l.cols(), d * d, "Lindbladian");
        require_same_dim(stationary_.dim(), d, "Lindbladian");
        const double residual = (l * vectorize(stationary_.matrix())).norm();
        const double scale = std::max(1.0, l.cwiseAbs().maxCoeff());
        if (residual > 1e-9 * scale) {
            throw ContractViolation("Lindbladian '" + label_ + "': stationary state residual " +
                                    std::to_string(residual));
        }
        super_ = std::make_shared<detail::LazySuper>([m = std::move(l)] { return m; });
    }

    Index dim() const { return hamiltonian_.dim(); }
    const SuperMatrix& supermatrix() const { return super_->get(); }
    const HermitianMatrix& hamiltonian() const { return hamiltonian_; }
    const DensityMatrix& stationary_state() const { return stationary_; }
    const std::string& label() const { return label_; }
    Kind kind() const { return kind_; }
    // Relaxation rate of a perfect thermalizer, 0 otherwise.
    double thermalization_rate() const { return rate_; }

    Matrix apply(const Matrix& a) const {
        if (kind_ == Kind::PerfectThermalizer) {
            return rate_ * (a.trace() * stationary_.matrix() - a);
        }
        return apply_super(supermatrix(), a);
    }

  private:
    friend Lindbladian perfect_thermalizer(const HermitianMatrix&, double, double);

    HermitianMatrix hamiltonian_;
    DensityMatrix stationary_;
    std::string label_;
    Kind kind_ = Kind::Generic;
    double rate_ = 0.0;
    std::shared_ptr<const detail::LazySuper> super_;
};

// L[rho] = Gamma (pi Tr rho - rho)
inline Lindbladian perfect_thermalizer(const HermitianMatrix& h, double beta, double gamma_rate) {
    if (!(gamma_rate > 0.0) || !std::isfinite(gamma_rate)) {
        throw DomainError("perfect_thermalizer: rate must be > 0");
    }
    Lindbladian l;
    l.hamiltonian_ = h;
    l.stationary_ = gibbs_state(h, beta);
    l.label_ = "perfect-thermalizer";
    l.kind_ = Lindbladian::Kind::PerfectThermalizer;
    l.rate_ = gamma_rate;
    // d^2 x d^2 only when somebody asks for it; oscillator charts never do.
    l.super_ = std::make_shared<detail::LazySuper>([pi = l.stationary_.matrix(), gamma_rate] {
        const Index d = pi.rows();
        return SuperMatrix(gamma_rate * (trace_projector(pi) - SuperMatrix::Identity(d * d, d * d)));
    });
    return l;
}

// Time-dependent generator t -> L_t on [0, tau].
struct GeneratorFamily {
    double tau = 0.0;
    std::function<Lindbladian(double)> at;

    Lindbladian operator()(double t) const { return at(t); }
};

// --------------------------- Davies generator -------------------------------

// Rate matrix gamma_{ab}(omega) over the coupling index pair.
using RateFunction = std::function<Matrix(double)>;

inline constexpr double kBohrGroupingTol = 1e-10;
inline constexpr double kKmsTol = 1e-8;

struct BohrComponent {
    double omega = 0.0;
    std::vector<Matrix> jump;  // A_alpha(omega) in the lab frame
    Matrix rates;              // gamma_{alpha beta}(omega)
};

struct DaviesComponents {
    SuperMatrix unitary;      // -i[H, .]
    SuperMatrix dissipator;
    std::vector<BohrComponent> bohr;
    DensityMatrix gibbs;
};

// Planck occupation 1/(e^{beta w} - 1), 0 on overflow.
inline double planck(double beta, double omega) {
    const double x = beta * omega;
    if (x > 700.0) return 0.0;
    return 1.0 / std::expm1(x);
}

// Flat bosonic spectrum: gamma (N + 1) for emission (omega > 0), gamma N for
// absorption, `zero_rate` at omega = 0. Same scalar for every coupling pair
// on the diagonal.
inline RateFunction flat_bosonic_rates(double gamma_rate, double beta, Index couplings = 1, double zero_rate = 0.0) {
    return [=](double omega) -> Matrix {
        double g = zero_rate;
        if (omega > kBohrGroupingTol) {
            g = gamma_rate * (planck(beta, omega) + 1.0);
        } else if (omega < -kBohrGroupingTol) {
            g = gamma_rate * planck(beta, -omega);
        }
        return g * Matrix::Identity(couplings, couplings);
    };
}

inline DaviesComponents davies_components(const HermitianMatrix& h, const std::vector<HermitianMatrix>& couplings,
                                          const RateFunction& rate_fn, double beta) {
    require_positive_beta(beta, "davies_generator");
    if (couplings.empty()) throw ContractViolation("davies_generator: no couplings");
    const Index d = h.dim();
    for (const auto& a : couplings) require_same_dim(a.dim(), d, "davies_generator");
    const Spectrum spec = eigh(h);
    const RealVector& e = spec.eigenvalues;
    const Matrix& v = spec.eigenvectors;

    // Distinct Bohr frequencies e_j - e_i.
    std::vector<double> omegas;
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) omegas.push_back(e(j) - e(i));
    }
    std::sort(omegas.begin(), omegas.end());
    std::vector<double> groups;
    for (double w : omegas) {
        if (groups.empty() || w - groups.back() > kBohrGroupingTol) groups.push_back(w);
    }
    auto group_of = [&](double w) {
        auto it = std::lower_bound(groups.begin(), groups.end(), w - kBohrGroupingTol);
        return static_cast<std::size_t>(it - groups.begin());
    };

    const auto n_c = static_cast<Index>(couplings.size());
    std::vector<Matrix> in_eigenbasis;
    for (const auto& a : couplings) in_eigenbasis.push_back(v.adjoint() * a.matrix() * v);

    DaviesComponents out;
    out.gibbs = gibbs_state(spec, beta);
    out.bohr.resize(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        out.bohr[g].omega = groups[g];
        out.bohr[g].jump.assign(couplings.size(), Matrix::Zero(d, d));
    }
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            const std::size_t g = group_of(e(j) - e(i));
            for (Index a = 0; a < n_c; ++a) out.bohr[g].jump[a](i, j) = in_eigenbasis[a](i, j);
        }
    }
    for (auto& c : out.bohr) {
        for (auto& jmp : c.jump) jmp = (v * jmp * v.adjoint()).eval();
        c.rates = rate_fn(c.omega);
        if (c.rates.rows() != n_c || c.rates.cols() != n_c) {
            throw DimensionMismatch("davies_generator: rate matrix must be couplings x couplings");
        }
        if (max_abs(c.rates - c.rates.adjoint()) > 1e-12 * std::max(1.0, max_abs(c.rates))) {
            throw ContractViolation("davies_generator: rate matrix not Hermitian");
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(c.rates);
        if (es.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, max_abs(c.rates))) {
            throw ContractViolation("davies_generator: rate matrix not positive semidefinite");
        }
    }
    // KMS: gamma(-w) = e^{-beta w} gamma(w)^T on every Bohr pair.
    for (const auto& c : out.bohr) {
        if (c.omega <= kBohrGroupingTol) continue;
        const Matrix neg = rate_fn(-c.omega);
        const Matrix expected = std::exp(-beta * c.omega) * c.rates.transpose();
        const double scale = std::max(max_abs(expected), max_abs(neg));
        if (max_abs(neg - expected) > kKmsTol * std::max(scale, 1e-300)) {
            throw ContractViolation("davies_generator: rate function violates KMS at omega = " +
                                    std::to_string(c.omega));
        }
    }

    const Index d2 = d * d;
    out.unitary = cplx(0.0, -1.0) * (left_multiplication(h.matrix()) - right_multiplication(h.matrix()));
    out.dissipator = SuperMatrix::Zero(d2, d2);
    for (const auto& c : out.bohr) {
        for (Index a = 0; a < n_c; ++a) {
            for (Index b = 0; b < n_c; ++b) {
                const cplx g = c.rates(a, b);
                if (g == cplx(0.0)) continue;
                const Matrix& aa = c.jump[a];
                const Matrix& ab = c.jump[b];
                const Matrix ad_ab = aa.adjoint() * ab;
                // A_b rho A_a^dag - 1/2 {A_a^dag A_b, rho}
                out.dissipator += g * (sandwich(ab, aa.adjoint()) - 0.5 * left_multiplication(ad_ab) -
                                       0.5 * right_multiplication(ad_ab));
            }
        }
    }
    return out;
}

inline Lindbladian davies_generator(const HermitianMatrix& h, const std::vector<HermitianMatrix>& couplings,
                                    const RateFunction& rate_fn, double beta) {
    DaviesComponents c = davies_components(h, couplings, rate_fn, beta);
    return Lindbladian(c.unitary + c.dissipator, h, c.gibbs, "davies", Lindbladian::Kind::Davies);
}

// --------------------------- qubit-boson generator --------------------------

// U(theta, phi) = exp(-i phi sz / 2) exp(-i theta sy / 2), so that
// U r sz U^dag = r (sin t cos p sx + sin t sin p sy + cos t sz).
inline Matrix su2_rotation(double theta, double phi) {
    const cplx i(0.0, 1.0);
    Matrix rz = Matrix::Zero(2, 2);
    rz(0, 0) = std::exp(-i * phi / 2.0);
    rz(1, 1) = std::exp(i * phi / 2.0);
    Matrix ry(2, 2);
    ry << std::cos(theta / 2.0), -std::sin(theta / 2.0), std::sin(theta / 2.0), std::cos(theta / 2.0);
    return rz * ry;
}

inline HermitianMatrix qubit_hamiltonian(double r, double theta, double phi) {
    const Matrix u = su2_rotation(theta, phi);
    return HermitianMatrix::symmetrized(r * u * pauli::z() * u.adjoint());
}

// Thermal qubit in a flat bosonic bath. In the frame where H = r sz the rates
// are gamma (P + 1) on s- and gamma P on s+, P = 1/(e^{2 beta r} - 1); the
// generator also carries the coherent part -i[H, .].
inline Lindbladian qubit_boson_generator(double r, double theta, double phi, double beta, double gamma_rate) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("qubit_boson_generator: r must be > 0");
    if (!(gamma_rate > 0.0)) throw DomainError("qubit_boson_generator: rate must be > 0");
    require_positive_beta(beta, "qubit_boson_generator");
    const double p = planck(beta, 2.0 * r);
    const Matrix sm = pauli::lowering();
    const Matrix sp = pauli::raising();
    const Matrix hd = r * pauli::z();
    auto dissipator = [](const Matrix& l) {
        const Matrix ldl = l.adjoint() * l;
        return SuperMatrix(sandwich(l, l.adjoint()) - 0.5 * left_multiplication(ldl) - 0.5 * right_multiplication(ldl));
    };
    SuperMatrix ld = cplx(0.0, -1.0) * (left_multiplication(hd) - right_multiplication(hd));
    ld += gamma_rate * (p + 1.0) * dissipator(sm) + gamma_rate * p * dissipator(sp);
    const Matrix u = su2_rotation(theta, phi);
    const SuperMatrix l = sandwich(u, u.adjoint()) * ld * sandwich(u.adjoint(), u);
    const HermitianMatrix h = qubit_hamiltonian(r, theta, phi);
    return Lindbladian(l, h, gibbs_state(h, beta), "qubit-boson", Lindbladian::Kind::QubitBoson);
}

// Same generator for an arbitrary traceless-or-not qubit Hamiltonian
// h = c I + r n.sigma with r > 0.
inline Lindbladian qubit_boson_generator(const HermitianMatrix& h, double beta, double gamma_rate) {
    require_same_dim(h.dim(), 2, "qubit_boson_generator");
    const Matrix& m = h.matrix();
    const double c = 0.5 * m.trace().real();
    const double nx = m(1, 0).real(), ny = m(1, 0).imag(), nz = 0.5 * (m(0, 0) - m(1, 1)).real();
    const double r = std::sqrt(nx * nx + ny * ny + nz * nz);
    const double theta = std::atan2(std::hypot(nx, ny), nz);
    const double phi = std::atan2(ny, nx);
    Lindbladian l = qubit_boson_generator(r, theta, phi, beta, gamma_rate);
    if (c == 0.0) return l;
    // A multiple of the identity changes neither the dynamics nor the Gibbs state.
    return Lindbladian(l.supermatrix(), h, gibbs_state(h, beta), l.label(), l.kind());
}

// --------------------------- Drazin inverse ---------------------------------

class DrazinInverse {
  public:
    DrazinInverse() = default;

    Index dim() const { return stationary_.dim(); }
    const DensityMatrix& stationary_state() const { return stationary_; }

    // L+[A] = int_0^inf e^{nu L}[pi Tr A - A] d nu
    Matrix apply(const Matrix& a) const {
        if (rate_ > 0.0) return (a.trace() * stationary_.matrix() - a) / rate_;
        return apply_super(super_, a);
    }

    SuperMatrix supermatrix() const {
        if (rate_ > 0.0) {
            const Index d = dim();
            return (trace_projector(stationary_.matrix()) - SuperMatrix::Identity(d * d, d * d)) / rate_;
        }
        return super_;
    }

  private:
    friend DrazinInverse drazin_inverse(const Lindbladian&);
    DensityMatrix stationary_;
    SuperMatrix super_;
    double rate_ = 0.0;
};

inline constexpr double kDrazinRcondFloor = 1e-13;

// Deflated solve (L - P) X = (I - P), L+ = X (I - P) with P = vec(pi) vec(I)^dag.
inline DrazinInverse drazin_inverse(const Lindbladian& l) {
    DrazinInverse out;
    out.stationary_ = l.stationary_state();
    if (l.kind() == Lindbladian::Kind::PerfectThermalizer) {
        out.rate_ = l.thermalization_rate();
        return out;
    }
    const Index d = l.dim();
    const Index d2 = d * d;
    const SuperMatrix& lm = l.supermatrix();
    const SuperMatrix p = trace_projector(l.stationary_state().matrix());
    const SuperMatrix q = SuperMatrix::Identity(d2, d2) - p;
    const SuperMatrix shifted = lm - p;
    Eigen::PartialPivLU<SuperMatrix> lu(shifted);
    const double rc = lu.rcond();
    if (!(rc > kDrazinRcondFloor)) {
        Eigen::ComplexEigenSolver<SuperMatrix> es(lm);
        std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + d2);
        std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
        const cplx second = ev.size() > 1 ? ev[1] : cplx(0.0);
        throw SingularityError("drazin_inverse: zero eigenvalue of '" + l.label() +
                               "' is not simple; second near-null eigenvalue " + std::to_string(second.real()) +
                               (second.imag() < 0 ? "" : "+") + std::to_string(second.imag()) + "i");
    }
    out.super_ = lu.solve(q) * q;
    return out;
}

// --------------------------- propagators ------------------------------------

enum class StepScheme { Magnus4, Midpoint };

// exp of one step of the time-ordered evolution from t to t + dt.
inline SuperMatrix step_propagator(const GeneratorFamily& family, double t, double dt,
                                   StepScheme scheme = StepScheme::Magnus4) {
    if (scheme == StepScheme::Midpoint) {
        return SuperMatrix((dt * family(t + 0.5 * dt).supermatrix()).exp());
    }
    const double c = std::sqrt(3.0) / 6.0;
    const SuperMatrix a1 = family(t + (0.5 - c) * dt).supermatrix();
    const SuperMatrix a2 = family(t + (0.5 + c) * dt).supermatrix();
    const SuperMatrix omega = 0.5 * dt * (a1 + a2) + (std::sqrt(3.0) / 12.0) * dt * dt * (a2 * a1 - a1 * a2);
    return SuperMatrix(omega.exp());
}

// P(t1, t2) as an ordered product over `steps` equal steps.
inline SuperMatrix propagator(const GeneratorFamily& family, double t1, double t2, int steps,
                              StepScheme scheme = StepScheme::Magnus4) {
    if (t1 < t2) throw DomainError("propagator: requires t1 >= t2");
    if (steps < 1) throw DomainError("propagator: steps must be >= 1");
    const Index d = family(t2).dim();
    SuperMatrix p = SuperMatrix::Identity(d * d, d * d);
    if (t1 == t2) return p;
    const double dt = (t1 - t2) / steps;
    for (int k = 0; k < steps; ++k) p = (step_propagator(family, t2 + k * dt, dt, scheme) * p).eval();
    return p;
}

// Doubles the step count until successive propagators agree to `tol`.
inline SuperMatrix propagator_converged(const GeneratorFamily& family, double t1, double t2, int steps = 8,
                                        double tol = 1e-8, int max_steps = 1 << 16,
                                        StepScheme scheme = StepScheme::Magnus4) {
    SuperMatrix prev = propagator(family, t1, t2, steps, scheme);
    while (steps < max_steps) {
        steps *= 2;
        SuperMatrix next = propagator(family, t1, t2, steps, scheme);
        if ((next - prev).cwiseAbs().maxCoeff() < tol) return next;
        prev = std::move(next);
    }
    throw ConvergenceError("propagator: no convergence to " + std::to_string(tol) + " within " +
                           std::to_string(max_steps) + " steps");
}

} // namespace qfdr
