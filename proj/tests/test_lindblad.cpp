#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "qfdr/lindblad.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace qfdr;
using qfdr::testing::GeneratorType;
using qfdr::testing::Rng;

namespace {

void expect_lindblad_structure(const Lindbladian& l, Rng& rng) {
    const Index d = l.dim();
    const SuperMatrix& lm = l.supermatrix();
    EXPECT_LT((lm * vectorize(l.stationary_state().matrix())).norm(), 1e-10);
    const Matrix a = rng.complex_matrix(d);
    const Matrix la = apply_super(lm, a);
    EXPECT_LT(max_abs(apply_super(lm, a.adjoint()) - la.adjoint()), 1e-10);
    EXPECT_LT(std::abs(la.trace()), 1e-12 * std::max(1.0, max_abs(lm)));
    Eigen::ComplexEigenSolver<SuperMatrix> es(lm);
    int near_zero = 0;
    for (Index i = 0; i < lm.rows(); ++i) {
        const cplx ev = es.eigenvalues()(i);
        if (std::abs(ev) < 1e-9) {
            ++near_zero;
        } else {
            EXPECT_LT(ev.real(), 0.0);
        }
    }
    EXPECT_EQ(near_zero, 1);
}

void expect_drazin_properties(const Lindbladian& l, Rng& rng) {
    const DrazinInverse lp = drazin_inverse(l);
    const Matrix& pi = l.stationary_state().matrix();
    const Matrix a = rng.complex_matrix(l.dim());
    const Matrix target = a - a.trace() * pi;
    EXPECT_LT(max_abs(l.apply(lp.apply(a)) - target), 1e-9);
    EXPECT_LT(max_abs(lp.apply(l.apply(a)) - target), 1e-9);
    EXPECT_LT(max_abs(lp.apply(pi)), 1e-9);
    EXPECT_LT(std::abs(lp.apply(a).trace()), 1e-9);
}

} // namespace

TEST(PerfectThermalizer, FixedPointAndAction) {
    Rng rng(1);
    const HermitianMatrix h = rng.hermitian(2);
    const Lindbladian l = perfect_thermalizer(h, 0.8, 1.7);
    const Matrix& pi = l.stationary_state().matrix();
    EXPECT_LT(max_abs(l.apply(pi)), 1e-15);
    const DensityMatrix rho = rng.density(2);
    EXPECT_LT(max_abs(l.apply(rho.matrix()) - 1.7 * (pi - rho.matrix())), 1e-14);
    EXPECT_LT(max_abs(apply_super(l.supermatrix(), rho.matrix()) - 1.7 * (pi - rho.matrix())), 1e-14);
    EXPECT_THROW(perfect_thermalizer(h, 0.8, 0.0), DomainError);
    EXPECT_THROW(perfect_thermalizer(h, 0.8, -1.0), DomainError);
}

TEST(PerfectThermalizer, SupermatrixExponential) {
    Rng rng(2);
    const double gamma = 1.3;
    const Lindbladian l = perfect_thermalizer(rng.hermitian(3), 1.1, gamma);
    const Matrix& pi = l.stationary_state().matrix();
    const Matrix a = rng.complex_matrix(3);
    for (double nu : {0.1, 1.0, 10.0}) {
        const Matrix evolved = apply_super(SuperMatrix((nu * l.supermatrix()).exp()), a);
        const Matrix expected = pi * a.trace() + std::exp(-gamma * nu) * (a - pi * a.trace());
        EXPECT_LT(max_abs(evolved - expected), 1e-12);
    }
}

TEST(Davies, ReproducesQubitBosonGenerator) {
    for (double r : {0.3, 1.0, 2.5}) {
        for (double beta : {0.5, 1.0, 3.0}) {
            const double gamma = 0.7;
            const Lindbladian qb = qubit_boson_generator(r, 0.0, 0.0, beta, gamma);
            const Lindbladian dv = davies_generator(HermitianMatrix(r * pauli::z()), {HermitianMatrix(pauli::x())},
                                                    flat_bosonic_rates(gamma, beta), beta);
            EXPECT_LT(max_abs(qb.supermatrix() - dv.supermatrix()), 1e-10);
        }
    }
}

TEST(Davies, ReproducesRotatedQubitBosonGenerator) {
    const double theta = 0.7, phi = 1.9, r = 0.8, beta = 1.2, gamma = 1.0;
    const Matrix u = su2_rotation(theta, phi);
    const Lindbladian qb = qubit_boson_generator(r, theta, phi, beta, gamma);
    const Lindbladian dv = davies_generator(qubit_hamiltonian(r, theta, phi),
                                            {HermitianMatrix::symmetrized(u * pauli::x() * u.adjoint())},
                                            flat_bosonic_rates(gamma, beta), beta);
    EXPECT_LT(max_abs(qb.supermatrix() - dv.supermatrix()), 1e-10);
}

TEST(Davies, DetailedBalanceOnEigenoperators) {
    Rng rng(3);
    const double beta = 0.9;
    const HermitianMatrix h = rng.hermitian(4);
    const auto c = davies_components(h, {rng.hermitian(4), rng.hermitian(4)}, qfdr::testing::random_kms_rates(rng, 2, beta), beta);
    const Matrix& pi = c.gibbs.matrix();
    for (const auto& comp : c.bohr) {
        for (const auto& a : comp.jump) {
            EXPECT_LT(max_abs(pi * a - std::exp(beta * comp.omega) * a * pi), 1e-10 * std::max(1.0, std::exp(beta * comp.omega)));
        }
    }
}

TEST(Davies, UnitaryAndDissipativePartsCommute) {
    Rng rng(4);
    const double beta = 1.4;
    for (Index d : {2, 3, 4}) {
        const auto c = davies_components(rng.hermitian(d), {rng.hermitian(d)}, qfdr::testing::random_kms_rates(rng, 1, beta), beta);
        EXPECT_LT(max_abs(c.unitary * c.dissipator - c.dissipator * c.unitary), 1e-10);
    }
}

TEST(Davies, GibbsFixedPoint) {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Index d = rng.integer(2, 5);
        const double beta = rng.uniform(0.2, 3.0);
        const HermitianMatrix h = rng.hermitian(d);
        const Lindbladian l = davies_generator(h, {rng.hermitian(d)}, qfdr::testing::random_kms_rates(rng, 1, beta), beta);
        EXPECT_LT((l.supermatrix() * vectorize(gibbs_state(h, beta).matrix())).norm(), 1e-9);
        expect_lindblad_structure(l, rng);
    }
}

TEST(Davies, RejectsKmsViolation) {
    Rng rng(6);
    const RateFunction flat = [](double) { return Matrix::Identity(1, 1); };
    EXPECT_THROW(davies_generator(rng.hermitian(3), {rng.hermitian(3)}, flat, 1.0), ContractViolation);
    const RateFunction negative = [](double w) { return Matrix::Constant(1, 1, w > 0 ? -1.0 : -std::exp(w)); };
    EXPECT_THROW(davies_generator(rng.hermitian(2), {rng.hermitian(2)}, negative, 1.0), ContractViolation);
}

TEST(QubitBoson, ThermalFixedPointAndRelaxationRate) {
    const double r = 0.6, beta = 1.5, gamma = 0.9;
    const Lindbladian l = qubit_boson_generator(r, 0.0, 0.0, beta, gamma);
    const Matrix pi = gibbs_state(HermitianMatrix(r * pauli::z()), beta).matrix();
    EXPECT_LT(max_abs(l.apply(pi)), 1e-14);
    const double p = 1.0 / std::expm1(2.0 * beta * r);
    Eigen::ComplexEigenSolver<SuperMatrix> es(l.supermatrix());
    double best = 1e9;
    for (Index i = 0; i < 4; ++i) best = std::min(best, std::abs(es.eigenvalues()(i) - cplx(-gamma * (2 * p + 1), 0.0)));
    EXPECT_LT(best, 1e-12);
    EXPECT_NEAR(pi(1, 1).real() / pi(0, 0).real(), std::exp(2.0 * beta * r), 1e-10);
}

TEST(QubitBoson, ZeroTemperatureKeepsGroundState) {
    const Lindbladian l = qubit_boson_generator(1.0, 0.0, 0.0, 1e3, 1.0);
    Matrix ground = Matrix::Zero(2, 2);
    ground(1, 1) = 1.0;
    EXPECT_LT(max_abs(l.apply(ground)), 1e-15);
    EXPECT_THROW(qubit_boson_generator(0.0, 0.0, 0.0, 1.0, 1.0), DomainError);
    EXPECT_THROW(qubit_boson_generator(-1.0, 0.0, 0.0, 1.0, 1.0), DomainError);
}

TEST(QubitBoson, HamiltonianOverloadMatchesAngles) {
    const Lindbladian a = qubit_boson_generator(1.3, 0.9, 0.4, 1.0, 1.0);
    const Lindbladian b = qubit_boson_generator(qubit_hamiltonian(1.3, 0.9, 0.4), 1.0, 1.0);
    EXPECT_LT(max_abs(a.supermatrix() - b.supermatrix()), 1e-12);
    const HermitianMatrix shifted = qubit_hamiltonian(1.3, 0.9, 0.4) + HermitianMatrix::identity(2) * 0.25;
    const Lindbladian c = qubit_boson_generator(shifted, 1.0, 1.0);
    EXPECT_LT(max_abs(a.supermatrix() - c.supermatrix()), 1e-12);
}

TEST(Drazin, PerfectThermalizerClosedForm) {
    Rng rng(7);
    const Lindbladian l = perfect_thermalizer(rng.hermitian(3), 0.6, 2.0);
    const Matrix a = rng.complex_matrix(3);
    const Matrix expected = (l.stationary_state().matrix() * a.trace() - a) / 2.0;
    EXPECT_LT(max_abs(drazin_inverse(l).apply(a) - expected), 1e-14);
    // Same answer from the generic deflated solve.
    const Lindbladian generic(l.supermatrix(), l.hamiltonian(), l.stationary_state(), "generic");
    EXPECT_LT(max_abs(drazin_inverse(generic).apply(a) - expected), 1e-12);
}

TEST(Drazin, PropertiesAcrossConstructors) {
    Rng rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const auto type = static_cast<GeneratorType>(trial % 3);
        const Index d = type == GeneratorType::QubitBoson ? 2 : rng.integer(2, 4);
        const double beta = rng.uniform(0.3, 2.0);
        const auto ctor = qfdr::testing::random_constructor(rng, type, d, beta);
        const Lindbladian l = ctor(rng.hermitian(d));
        expect_lindblad_structure(l, rng);
        expect_drazin_properties(l, rng);
        const Matrix a = rng.hermitian(d).matrix();
        EXPECT_LT(max_abs(drazin_inverse(l).apply(a) - qfdr::testing::drazin_by_integral(l, a)), 1e-7);
    }
}

TEST(Drazin, EigenvaluesHaveNonpositiveRealPart) {
    Rng rng(9);
    const Lindbladian l = qubit_boson_generator(0.7, 0.4, 0.2, 1.0, 1.0);
    Eigen::ComplexEigenSolver<SuperMatrix> es(drazin_inverse(l).supermatrix());
    for (Index i = 0; i < 4; ++i) EXPECT_LE(es.eigenvalues()(i).real(), 1e-12);
    EXPECT_LT(max_abs(drazin_inverse(l).apply(l.stationary_state().matrix())), 1e-12);
}

TEST(Drazin, DegenerateKernelIsReported) {
    // Pure dephasing on a qubit leaves both populations stationary.
    const HermitianMatrix h(pauli::z());
    const Matrix z = pauli::z();
    SuperMatrix l = cplx(0.0, -1.0) * (left_multiplication(z) - right_multiplication(z));
    l += sandwich(z, z) - SuperMatrix::Identity(4, 4);
    const Lindbladian deph(l, h, gibbs_state(h, 1.0), "dephasing");
    try {
        drazin_inverse(deph);
        FAIL() << "expected SingularityError";
    } catch (const SingularityError& e) {
        EXPECT_NE(std::string(e.what()).find("second near-null eigenvalue"), std::string::npos);
    }
}

TEST(Lindbladian, RejectsWrongStationaryState) {
    const Lindbladian l = qubit_boson_generator(1.0, 0.0, 0.0, 1.0, 1.0);
    EXPECT_THROW(Lindbladian(l.supermatrix(), l.hamiltonian(), DensityMatrix::maximally_mixed(2), "bad"),
                 ContractViolation);
}

namespace {
GeneratorFamily rotating_family(double beta) {
    return GeneratorFamily{1.0, [beta](double t) { return qubit_boson_generator(1.0 + t, 0.8 * t, 0.3 * t, beta, 1.0); }};
}
} // namespace

TEST(Propagator, IdentityAndConstantGenerator) {
    const GeneratorFamily fam = rotating_family(1.0);
    EXPECT_LT(max_abs(propagator(fam, 0.4, 0.4, 5) - SuperMatrix::Identity(4, 4)), 1e-15);
    const Lindbladian fixed = qubit_boson_generator(0.9, 0.3, 0.1, 1.0, 1.0);
    const GeneratorFamily constant{1.0, [fixed](double) { return fixed; }};
    const SuperMatrix expected = (0.7 * fixed.supermatrix()).exp();
    EXPECT_LT(max_abs(propagator(constant, 0.9, 0.2, 7) - expected), 1e-12);
    EXPECT_LT(max_abs(propagator(constant, 0.9, 0.2, 7, StepScheme::Midpoint) - expected), 1e-12);
    EXPECT_THROW(propagator(fam, 0.1, 0.2, 4), DomainError);
    EXPECT_THROW(propagator(fam, 0.3, 0.2, 0), DomainError);
}

TEST(Propagator, TracePreservingAndSelfConvergent) {
    const GeneratorFamily fam = rotating_family(1.0);
    const SuperMatrix p = propagator_converged(fam, 1.0, 0.0);
    const Vector id = vectorize(identity(2));
    EXPECT_LT((id.adjoint() * p - id.adjoint()).norm(), 1e-10);
    EXPECT_LT(max_abs(propagator(fam, 1.0, 0.0, 256) - propagator(fam, 1.0, 0.0, 512)), 1e-8);
    // Fourth order: error ratio near 16 under step halving.
    const SuperMatrix ref = propagator(fam, 1.0, 0.0, 1024);
    const double e1 = max_abs(propagator(fam, 1.0, 0.0, 8) - ref);
    const double e2 = max_abs(propagator(fam, 1.0, 0.0, 16) - ref);
    EXPECT_GT(e1 / e2, 12.0);
}
