#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qfdr/models.hpp"
#include "qfdr/slow_driving.hpp"
#include "support.hpp"

using namespace qfdr;
using namespace qfdr::testing;

namespace {

GeneratorFamily thermalizer_family(const ProtocolPath& path, double gamma) {
    const double beta = path.beta();
    return make_family(path, [=](const HermitianMatrix& h) { return perfect_thermalizer(h, beta, gamma); });
}

ProtocolPath linear_z_path(double tau, double beta) {
    const auto sz = HermitianMatrix::symmetrized(Matrix(pauli::z()));
    return ProtocolPath::from_unit(
        tau, beta, [sz](double s) { return sz * (1.0 + s); }, [sz](double) { return sz; });
}

} // namespace

// H = (1 + s) sz, thermalizer at rate G: W = sigma^2 beta / 2 = (tanh 2b - tanh b) / (G tau).
TEST(SlowDriving, ThermalizerClassicalClosedForm) {
    for (double beta : {0.3, 1.0, 2.5}) {
        const double tau = 7.0, gamma = 1.3;
        const ProtocolPath path = linear_z_path(tau, beta);
        const WorkStatistics w = fdr_report(path, thermalizer_family(path, gamma));
        const double expected = (std::tanh(2.0 * beta) - std::tanh(beta)) / (gamma * tau);
        EXPECT_LT(rel_err(w.w_diss, expected), 1e-9) << beta;
        EXPECT_LT(rel_err(0.5 * beta * w.sigma2, expected), 1e-9) << beta;
        EXPECT_LT(std::abs(w.q_w), 1e-12);
    }
}

// Thermalizer: L+ X = -X / G on traceless X, so
//   W = (beta / G) int Tr[dH J(dH)],  sigma^2 = (2 / G) int Var(Hdot).
// Checked against Gauss-Legendre with the eigenbasis evaluated directly.
TEST(SlowDriving, ThermalizerQuantumAgainstQuadrature) {
    Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const Index d = rng.integer(2, 4);
        const double beta = rng.uniform(0.3, 2.0), gamma = rng.uniform(0.5, 2.0), tau = 3.0;
        const ProtocolPath path = random_protocol(rng, d, beta, tau, false);
        const WorkStatistics w = fdr_report(path, thermalizer_family(path, gamma));
        const auto gl = quad::gauss_legendre(24);
        double var = 0.0, kubo = 0.0;
        for (int panel = 0; panel < 8; ++panel) {
            const double a = tau * panel / 8.0, b = tau * (panel + 1) / 8.0;
            for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
                const double t = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[k];
                const Spectrum sp = eigh(path.hamiltonian_at(t));
                const RealVector p = boltzmann_weights(sp.eigenvalues, beta);
                const Matrix x = sp.eigenvectors.adjoint() * path.derivative_at(t).matrix() * sp.eigenvectors;
                double mean = 0.0;
                for (Index i = 0; i < d; ++i) mean += p(i) * x(i, i).real();
                double v = 0.0, kb = 0.0;
                for (Index i = 0; i < d; ++i) {
                    for (Index j = 0; j < d; ++j) {
                        const double xij2 = std::norm(x(i, j) - (i == j ? mean : 0.0));
                        v += 0.5 * (p(i) + p(j)) * xij2;
                        // log mean of populations via its integral form
                        double lm = 0.0;
                        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
                            const double u = 0.5 + 0.5 * gl.nodes[q];
                            lm += 0.5 * gl.weights[q] * std::pow(p(i), u) * std::pow(p(j), 1.0 - u);
                        }
                        kb += lm * xij2;
                    }
                }
                var += 0.5 * (b - a) * gl.weights[k] * v;
                kubo += 0.5 * (b - a) * gl.weights[k] * kb;
            }
        }
        EXPECT_LT(rel_err(w.sigma2, 2.0 * var / gamma), 1e-7) << trial;
        EXPECT_LT(rel_err(w.w_diss, beta * kubo / gamma), 1e-7) << trial;
        EXPECT_GT(w.q_w, 0.0);
    }
}

TEST(SlowDriving, CommutingProtocolsSatisfyClassicalRelation) {
    Rng rng(21);
    for (auto type : {GeneratorType::PerfectThermalizer, GeneratorType::Davies, GeneratorType::QubitBoson}) {
        for (int trial = 0; trial < 3; ++trial) {
            const Index d = type == GeneratorType::QubitBoson ? 2 : rng.integer(2, 4);
            const double beta = rng.uniform(0.3, 2.0);
            const ProtocolPath path = random_protocol(rng, d, beta, 5.0, true);
            const WorkStatistics w = fdr_report(path, make_family(path, random_constructor(rng, type, d, beta)));
            EXPECT_LT(std::abs(0.5 * beta * w.sigma2 - w.w_diss) / w.w_diss, 1e-8) << to_string(type);
        }
    }
}

TEST(SlowDriving, QuantumCorrectionIsConsistentAndPositive) {
    Rng rng(31);
    for (auto type : {GeneratorType::PerfectThermalizer, GeneratorType::Davies, GeneratorType::QubitBoson}) {
        const Index d = type == GeneratorType::QubitBoson ? 2 : 3;
        const double beta = 0.8;
        const ProtocolPath path = random_protocol(rng, d, beta, 4.0, false);
        const GeneratorFamily family = make_family(path, random_constructor(rng, type, d, beta));
        const WorkStatistics w = fdr_report(path, family, 513);
        const double q = quantum_correction(path, family, 513);
        EXPECT_NEAR(q, w.q_w, 1e-10 * w.w_diss) << to_string(type);
        EXPECT_GT(q, 1e-8) << to_string(type);
        EXPECT_NEAR(w.w_diss, dissipated_work_slow(path, family, 513), 1e-14);
        EXPECT_NEAR(w.sigma2, work_variance_slow(path, family, 513), 1e-14);
        EXPECT_NEAR(w.w_mean, w.delta_f + w.w_diss, 1e-14);
    }
}

TEST(SlowDriving, PointwiseSkewInformationIsNonNegative) {
    Rng rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        const auto type = static_cast<GeneratorType>(trial % 3);
        const Index d = type == GeneratorType::QubitBoson ? 2 : rng.integer(2, 4);
        const double beta = rng.uniform(0.1, 3.0);
        const Lindbladian l = random_constructor(rng, type, d, beta)(rng.hermitian(d));
        EXPECT_GE(dynamical_skew_information(l, rng.hermitian(d)), -1e-12) << to_string(type);
    }
}

TEST(SlowDriving, InverseDurationScaling) {
    const QubitSphericalProtocol proto = qubit_protocol_quantum(10.0);
    const ProtocolPath path = proto.path();
    const WorkStatistics a = fdr_report(path, proto.family());
    QubitSphericalProtocol longer = proto;
    longer.tau = 30.0;
    const WorkStatistics b = fdr_report(path.rescaled(3.0), longer.family());
    EXPECT_LT(rel_err(3.0 * b.w_diss, a.w_diss), 1e-9);
    EXPECT_LT(rel_err(3.0 * b.sigma2, a.sigma2), 1e-9);
    EXPECT_LT(rel_err(3.0 * b.q_w, a.q_w), 1e-8);
    EXPECT_NEAR(a.delta_f, b.delta_f, 1e-14);
}

TEST(SlowDriving, AdaptiveGridMatchesFineGrid) {
    const QubitSphericalProtocol proto = qubit_protocol_quantum(5.0, 1.5, 0.7);
    const SlowIntegrals adaptive = slow_integrals(proto.path(), proto.family(), 0);
    const SlowIntegrals fine = slow_integrals(proto.path(), proto.family(), 4097);
    EXPECT_LE(adaptive.grid, kMaxSlowGrid);
    EXPECT_LT(rel_err(adaptive.s, fine.s), 1e-7);
    EXPECT_LT(rel_err(adaptive.j, fine.j), 1e-7);
    EXPECT_LT(rel_err(adaptive.m, fine.m), 1e-6);
    EXPECT_THROW(slow_integrals(proto.path(), proto.family(), 2), DomainError);
}

TEST(ProtocolPath, FiniteDifferenceDerivative) {
    const QubitSphericalProtocol proto = qubit_protocol_quantum(4.0);
    const ProtocolPath analytic = proto.path();
    const ProtocolPath numeric(4.0, 1.0, [&](double t) { return analytic.hamiltonian_at(t); });
    EXPECT_FALSE(numeric.has_analytic_derivative());
    for (double t : {0.0, 1.0, 2.5, 4.0}) {
        EXPECT_LT(max_abs(numeric.derivative_at(t).matrix() - analytic.derivative_at(t).matrix()), 1e-7) << t;
    }
    EXPECT_THROW(numeric.rescaled(2.0), ContractViolation);
}

TEST(ProtocolPath, FreeEnergyChange) {
    const ProtocolPath path = linear_z_path(2.0, 0.7);
    const double expected = -(std::log(2.0 * std::cosh(1.4)) - std::log(2.0 * std::cosh(0.7))) / 0.7;
    EXPECT_NEAR(path.free_energy_change(), expected, 1e-14);
    EXPECT_THROW(ProtocolPath(0.0, 1.0, [](double) { return HermitianMatrix::identity(2); }), DomainError);
    EXPECT_THROW(ProtocolPath(1.0, -1.0, [](double) { return HermitianMatrix::identity(2); }), DomainError);
}

TEST(SlowDriving, RoundoffClamp) {
    std::vector<std::string> warnings;
    EXPECT_EQ(clamp_roundoff(-1e-12, "x", &warnings), 0.0);
    EXPECT_EQ(warnings.size(), 1u);
    EXPECT_EQ(clamp_roundoff(-1e-6, "x", &warnings), -1e-6);
    EXPECT_EQ(clamp_roundoff(2.0, "x", nullptr), 2.0);
}
