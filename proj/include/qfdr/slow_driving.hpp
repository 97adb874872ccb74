// slow_driving.hpp - first-order (in 1/tau) work statistics: variance,
// dissipation and the quantum correction, plus the protocol container shared
// with the exact solver.

#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qfdr/lindblad.hpp"
#include "qfdr/parallel.hpp"
#include "qfdr/quadrature.hpp"

namespace qfdr {

// H_t on [0, tau]. The derivative is analytic when supplied, otherwise a
// central difference with step tau * 1e-6.
class ProtocolPath {
  public:
    using HamiltonianFn = std::function<HermitianMatrix(double)>;

    ProtocolPath() = default;
    ProtocolPath(double tau, double beta, HamiltonianFn h, HamiltonianFn dh = {})
        : tau_(tau), beta_(beta), h_(std::move(h)), dh_(std::move(dh)) {
        if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("ProtocolPath: tau must be > 0");
        require_positive_beta(beta, "ProtocolPath");
        h0_ = h_(0.0);
        htau_ = h_(tau_);
    }

    // Builds H_t = H(t / tau) from a unit-interval family s -> H(s) and its
    // s-derivative.
    static ProtocolPath from_unit(double tau, double beta, HamiltonianFn h_of_s, HamiltonianFn dh_of_s = {}) {
        HamiltonianFn h = [h_of_s, tau](double t) { return h_of_s(t / tau); };
        HamiltonianFn dh;
        if (dh_of_s) dh = [dh_of_s, tau](double t) { return dh_of_s(t / tau) * (1.0 / tau); };
        ProtocolPath p(tau, beta, std::move(h), std::move(dh));
        p.unit_h_ = std::move(h_of_s);
        p.unit_dh_ = std::move(dh_of_s);
        return p;
    }

    // Same geometric path traversed in time c * tau. Only for unit-built paths.
    ProtocolPath rescaled(double c) const {
        if (!unit_h_) throw ContractViolation("ProtocolPath::rescaled: path was not built from a unit family");
        return from_unit(c * tau_, beta_, unit_h_, unit_dh_);
    }

    double tau() const { return tau_; }
    double beta() const { return beta_; }
    Index dim() const { return h0_.dim(); }
    const HermitianMatrix& initial_hamiltonian() const { return h0_; }
    const HermitianMatrix& final_hamiltonian() const { return htau_; }
    bool has_analytic_derivative() const { return static_cast<bool>(dh_); }

    HermitianMatrix hamiltonian_at(double t) const { return h_(t); }

    HermitianMatrix derivative_at(double t) const {
        if (dh_) return dh_(t);
        const double h = tau_ * 1e-6;
        if (t - h < 0.0) {
            return HermitianMatrix::symmetrized(
                (-3.0 * h_(t).matrix() + 4.0 * h_(t + h).matrix() - h_(t + 2 * h).matrix()) / (2 * h));
        }
        if (t + h > tau_) {
            return HermitianMatrix::symmetrized(
                (3.0 * h_(t).matrix() - 4.0 * h_(t - h).matrix() + h_(t - 2 * h).matrix()) / (2 * h));
        }
        return HermitianMatrix::symmetrized((h_(t + h).matrix() - h_(t - h).matrix()) / (2 * h));
    }

    // log(Z_tau / Z_0)
    double log_partition_ratio() const {
        return log_partition_function(htau_, beta_) - log_partition_function(h0_, beta_);
    }
    // -beta^{-1} ln(Z_tau / Z_0)
    double free_energy_change() const { return -log_partition_ratio() / beta_; }

  private:
    double tau_ = 0.0;
    double beta_ = 1.0;
    HamiltonianFn h_, dh_;
    HamiltonianFn unit_h_, unit_dh_;
    HermitianMatrix h0_, htau_;
};

// Generator constructor H -> L with Gibbs fixed point at the path's beta.
using GeneratorConstructor = std::function<Lindbladian(const HermitianMatrix&)>;

inline GeneratorFamily make_family(const ProtocolPath& path, GeneratorConstructor ctor) {
    return GeneratorFamily{path.tau(), [path, ctor](double t) { return ctor(path.hamiltonian_at(t)); }};
}

enum class WorkMethod { Slow, Exact, Oracle, Quench };

inline const char* to_string(WorkMethod m) {
    switch (m) {
        case WorkMethod::Slow: return "slow";
        case WorkMethod::Exact: return "exact";
        case WorkMethod::Oracle: return "oracle";
        case WorkMethod::Quench: return "quench";
    }
    return "?";
}

struct WorkStatistics {
    double w_mean = 0.0;
    double w_diss = 0.0;
    double sigma2 = 0.0;
    double q_w = 0.0;
    double delta_f = 0.0;
    WorkMethod method = WorkMethod::Slow;
    std::vector<std::string> warnings;
};

// Integrands of the three slow-driving quantities at one instant:
//   s = Tr[Hdot L+ S(Hdot)],  j = Tr[Hdot L+ J(Hdot)],  m = Tr[Hdot L+ M(Hdot)]
struct SlowRates {
    double s = 0.0;
    double j = 0.0;
    double m = 0.0;
};

inline SlowRates slow_rates(const Lindbladian& l, const HermitianMatrix& hdot) {
    const DrazinInverse lp = drazin_inverse(l);
    const DensityMatrix& pi = l.stationary_state();
    auto contract = [&](const HermitianMatrix& x) { return trace_product(hdot.matrix(), lp.apply(x.matrix())).real(); };
    return SlowRates{contract(smap(pi, hdot)), contract(jmap(pi, hdot)), contract(mmap(pi, hdot))};
}

// Pointwise dynamical skew information, Tr[Hdot L+ (J - S)(Hdot)] = -m.
inline double dynamical_skew_information(const Lindbladian& l, const HermitianMatrix& a) {
    return -slow_rates(l, a).m;
}

struct SlowIntegrals {
    double s = 0.0;  // int Tr[Hdot L+ S Hdot] dt
    double j = 0.0;
    double m = 0.0;
    std::size_t grid = 0;
};

inline constexpr std::size_t kMaxSlowGrid = 4097;
inline constexpr double kSlowGridTol = 1e-7;

// Composite Simpson over `grid` points; grid = 0 doubles from 65 points until
// successive results agree to 1e-7 relative (at most 4097 points).
inline SlowIntegrals slow_integrals(const ProtocolPath& path, const GeneratorFamily& family, std::size_t grid) {
    if (grid != 0 && grid < 3) throw DomainError("slow-driving: grid must be >= 3");
    const double tau = path.tau();
    auto sample = [&](std::size_t n, std::size_t stride, std::vector<SlowRates>& out) {
        // fills every `stride`-th slot of an n-point grid that is still empty
        const double h = tau / static_cast<double>(n - 1);
        std::vector<std::size_t> todo;
        for (std::size_t i = 0; i < n; i += stride) todo.push_back(i);
        parallel_for(todo.size(), [&](std::size_t k) {
            const std::size_t i = todo[k];
            const double t = h * static_cast<double>(i);
            out[i] = slow_rates(family(t), path.derivative_at(t));
        });
    };
    auto integrate = [&](const std::vector<SlowRates>& r) {
        const double h = tau / static_cast<double>(r.size() - 1);
        const auto w = quad::simpson_weights(r.size() - 1, h);
        SlowIntegrals out;
        for (std::size_t i = 0; i < r.size(); ++i) {
            out.s += w[i] * r[i].s;
            out.j += w[i] * r[i].j;
            out.m += w[i] * r[i].m;
        }
        out.grid = r.size();
        return out;
    };

    if (grid != 0) {
        std::vector<SlowRates> r(grid);
        sample(grid, 1, r);
        return integrate(r);
    }
    std::size_t n = 65;
    std::vector<SlowRates> r(n);
    sample(n, 1, r);
    SlowIntegrals prev = integrate(r);
    while (2 * n - 1 <= kMaxSlowGrid) {
        const std::size_t m = 2 * n - 1;
        std::vector<SlowRates> finer(m);
        for (std::size_t i = 0; i < n; ++i) finer[2 * i] = r[i];
        const double h = tau / static_cast<double>(m - 1);
        parallel_for(n - 1, [&](std::size_t k) {
            const std::size_t i = 2 * k + 1;
            const double t = h * static_cast<double>(i);
            finer[i] = slow_rates(family(t), path.derivative_at(t));
        });
        r = std::move(finer);
        n = m;
        SlowIntegrals next = integrate(r);
        auto close = [](double a, double b) { return std::abs(a - b) <= kSlowGridTol * std::max(std::abs(a), 1e-300); };
        const bool done = close(next.s, prev.s) && close(next.j, prev.j) &&
                          (close(next.m, prev.m) || std::abs(next.m - prev.m) <= kSlowGridTol * std::abs(next.s));
        prev = next;
        if (done) break;
    }
    return prev;
}

// Values in [-1e-10, 0) are set to zero with a warning; larger negatives are kept.
inline double clamp_roundoff(double v, const char* what, std::vector<std::string>* warnings) {
    if (v < 0.0 && v >= -1e-10) {
        if (warnings) warnings->push_back(std::string(what) + ": clamped round-off negative " + std::to_string(v));
        return 0.0;
    }
    return v;
}

// W_diss = -beta int Tr[Hdot L+ J(Hdot)] dt
inline double dissipated_work_slow(const ProtocolPath& path, const GeneratorFamily& family, std::size_t grid = 0,
                                   std::vector<std::string>* warnings = nullptr) {
    return clamp_roundoff(-path.beta() * slow_integrals(path, family, grid).j, "w_diss", warnings);
}

// sigma^2 = -2 int Tr[Hdot L+ S(Hdot)] dt
inline double work_variance_slow(const ProtocolPath& path, const GeneratorFamily& family, std::size_t grid = 0,
                                 std::vector<std::string>* warnings = nullptr) {
    return clamp_roundoff(-2.0 * slow_integrals(path, family, grid).s, "sigma2", warnings);
}

// Q_w = beta int Tr[Hdot L+ (J - S)(Hdot)] dt
inline double quantum_correction(const ProtocolPath& path, const GeneratorFamily& family, std::size_t grid = 0,
                                 std::vector<std::string>* warnings = nullptr) {
    return clamp_roundoff(-path.beta() * slow_integrals(path, family, grid).m, "q_w", warnings);
}

inline WorkStatistics fdr_report(const ProtocolPath& path, const GeneratorFamily& family, std::size_t grid = 0) {
    WorkStatistics w;
    w.method = WorkMethod::Slow;
    const SlowIntegrals in = slow_integrals(path, family, grid);
    const double beta = path.beta();
    w.w_diss = clamp_roundoff(-beta * in.j, "w_diss", &w.warnings);
    w.sigma2 = clamp_roundoff(-2.0 * in.s, "sigma2", &w.warnings);
    w.q_w = 0.5 * beta * w.sigma2 - w.w_diss;
    w.delta_f = path.free_energy_change();
    w.w_mean = w.delta_f + w.w_diss;
    return w;
}

} // namespace qfdr
