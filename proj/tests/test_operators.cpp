#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "qfdr/operators.hpp"
#include "qfdr/quadrature.hpp"
#include "support.hpp"

using namespace qfdr;
using qfdr::testing::Rng;

namespace {

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

Matrix taylor_exp(const Matrix& x, int terms) {
    Matrix sum = identity(x.rows());
    Matrix term = identity(x.rows());
    for (int k = 1; k < terms; ++k) {
        term = (term * x / static_cast<double>(k)).eval();
        sum += term;
    }
    return sum;
}

// rho^a through the matrix logarithm, independent of the eigen pathway.
Matrix power_via_log(const Matrix& rho, double a) { return (a * rho.log()).exp(); }

} // namespace

TEST(HermitianMatrix, RejectsNonHermitian) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0;
    EXPECT_THROW(HermitianMatrix{m}, ContractViolation);
    EXPECT_NO_THROW(HermitianMatrix{pauli::y()});
}

TEST(DensityMatrix, ValidatesTraceAndPositivity) {
    EXPECT_THROW(DensityMatrix{diag2(0.5, 0.6)}, ContractViolation);
    EXPECT_THROW(DensityMatrix{diag2(1.2, -0.2)}, ContractViolation);
    EXPECT_NO_THROW(DensityMatrix{diag2(0.3, 0.7)});
}

TEST(Spectrum, ReconstructsSource) {
    Rng rng(11);
    for (Index d : {2, 3, 5, 8}) {
        const HermitianMatrix h = rng.hermitian(d);
        const Spectrum s = eigh(h);
        EXPECT_LT(max_abs(s.reconstruct() - h.matrix()), 1e-10);
        EXPECT_LT(max_abs(s.eigenvectors.adjoint() * s.eigenvectors - identity(d)), 1e-12);
        for (Index i = 1; i < d; ++i) EXPECT_LE(s.eigenvalues(i - 1), s.eigenvalues(i));
    }
}

TEST(GibbsState, ZeroHamiltonianIsMaximallyMixed) {
    const DensityMatrix pi = gibbs_state(HermitianMatrix::zero(2), 1.0);
    EXPECT_LT(max_abs(pi.matrix() - 0.5 * identity(2)), 1e-15);
}

TEST(GibbsState, TwoLevelBoltzmannWeights) {
    const double e = std::log(3.0);
    const DensityMatrix pi = gibbs_state(HermitianMatrix(diag2(0.0, e)), 1.0);
    EXPECT_NEAR(pi.matrix()(0, 0).real(), 0.75, 1e-15);
    EXPECT_NEAR(pi.matrix()(1, 1).real(), 0.25, 1e-15);
}

TEST(GibbsState, MatchesTaylorSeriesExponential) {
    Rng rng(7);
    const HermitianMatrix h = rng.hermitian(4, 0.5);
    const double beta = 0.7;
    Matrix e = taylor_exp(-beta * h.matrix(), 30);
    e /= e.trace();
    EXPECT_LT(max_abs(gibbs_state(h, beta).matrix() - e), 1e-12);
}

TEST(GibbsState, CommutesWithHamiltonianAndIsOrdered) {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const HermitianMatrix h = rng.hermitian(5, 3.0);
        const DensityMatrix pi = gibbs_state(h, 1.3);
        EXPECT_LT(max_abs(commutator(h.matrix(), pi.matrix())), 1e-12);
        const Spectrum s = eigh(h);
        const Matrix p = s.eigenvectors.adjoint() * pi.matrix() * s.eigenvectors;
        for (Index i = 1; i < 5; ++i) EXPECT_GE(p(i - 1, i - 1).real(), p(i, i).real());
    }
}

TEST(GibbsState, SurvivesLargeBeta) {
    const DensityMatrix pi = gibbs_state(HermitianMatrix(diag2(-800.0, 800.0)), 10.0);
    EXPECT_NEAR(pi.matrix()(0, 0).real(), 1.0, 1e-15);
    EXPECT_TRUE(pi.matrix().allFinite());
}

TEST(GibbsState, RejectsBadBeta) {
    EXPECT_THROW(gibbs_state(HermitianMatrix::zero(2), 0.0), DomainError);
    EXPECT_THROW(gibbs_state(HermitianMatrix::zero(2), std::nan("")), DomainError);
}

TEST(MatrixPower, Examples) {
    const DensityMatrix half = DensityMatrix::maximally_mixed(2);
    EXPECT_LT(max_abs(matrix_power(half, 0.5).matrix() - identity(2) / std::sqrt(2.0)), 1e-15);
    const DensityMatrix rho(diag2(0.75, 0.25));
    EXPECT_LT(max_abs(matrix_power(rho, 0.5).matrix() - diag2(std::sqrt(3.0) / 2.0, 0.5)), 1e-15);
    EXPECT_LT(max_abs(matrix_power(rho, 1.0).matrix() - rho.matrix()), 1e-15);
    EXPECT_THROW(matrix_power(rho, 1.5), DomainError);
    EXPECT_THROW(matrix_power(rho, -0.1), DomainError);
}

TEST(MatrixPower, SemigroupProperty) {
    Rng rng(3);
    for (Index d : {2, 3, 4, 6}) {
        const DensityMatrix rho = rng.density(d);
        const Matrix prod = matrix_power(rho, 0.3).matrix() * matrix_power(rho, 0.7).matrix();
        EXPECT_LT(max_abs(prod - rho.matrix()), 1e-10);
    }
}

TEST(MatrixPower, ZeroExponentIsSupportProjector) {
    Vector psi(3);
    psi << 1.0, cplx(0.0, 1.0), 0.5;
    const DensityMatrix rho = DensityMatrix::pure(psi);
    const Matrix p = matrix_power(rho, 0.0).matrix();
    EXPECT_LT(max_abs(p - rho.matrix()), 1e-12);
}

TEST(Smap, CommutingCaseIsProduct) {
    const DensityMatrix rho(diag2(0.8, 0.2));
    const HermitianMatrix a(diag2(1.0, -2.0));
    const double mean = expectation(a, rho);
    const Matrix expected = rho.matrix() * (a.matrix() - mean * identity(2));
    EXPECT_LT(max_abs(smap(rho, a).matrix() - expected), 1e-15);
    EXPECT_LT(max_abs(jmap(rho, a).matrix() - expected), 1e-15);
}

TEST(Smap, AnnihilatesIdentity) {
    Rng rng(4);
    const DensityMatrix rho = rng.density(3);
    const HermitianMatrix c = HermitianMatrix::identity(3) * 2.5;
    EXPECT_LT(max_abs(smap(rho, c).matrix()), 1e-14);
    EXPECT_LT(max_abs(jmap(rho, c).matrix()), 1e-14);
    EXPECT_LT(max_abs(mmap(rho, c).matrix()), 1e-14);
}

TEST(Smap, MatchesAnticommutator) {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const DensityMatrix rho = rng.density(2);
        const HermitianMatrix a(pauli::x());
        const Matrix da = a.matrix() - expectation(a, rho) * identity(2);
        const Matrix expected = 0.5 * (rho.matrix() * da + da * rho.matrix());
        EXPECT_LT(max_abs(smap(rho, a).matrix() - expected), 1e-14);
    }
}

TEST(Smap, DimensionMismatch) {
    EXPECT_THROW(smap(DensityMatrix::maximally_mixed(2), HermitianMatrix::zero(3)), DimensionMismatch);
    EXPECT_THROW(jmap(DensityMatrix::maximally_mixed(2), HermitianMatrix::zero(3)), DimensionMismatch);
    EXPECT_THROW(mmap(DensityMatrix::maximally_mixed(2), HermitianMatrix::zero(3)), DimensionMismatch);
}

TEST(Jmap, MatchesGaussLegendreIntegral) {
    Rng rng(6);
    const auto gl = quad::gauss_legendre(64);
    for (int trial = 0; trial < 5; ++trial) {
        const DensityMatrix rho = rng.density(3);
        const HermitianMatrix a = rng.hermitian(3);
        const Matrix da = a.matrix() - expectation(a, rho) * identity(3);
        Matrix integral = Matrix::Zero(3, 3);
        for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
            const double s = 0.5 * (gl.nodes[k] + 1.0);
            integral += 0.5 * gl.weights[k] * power_via_log(rho.matrix(), s) * da * power_via_log(rho.matrix(), 1.0 - s);
        }
        EXPECT_LT(max_abs(jmap(rho, a).matrix() - integral), 1e-9);
    }
}

TEST(Maps, LinearTracelessHermitian) {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const Index d = rng.integer(2, 6);
        const DensityMatrix rho = rng.density(d);
        const HermitianMatrix a = rng.hermitian(d), b = rng.hermitian(d);
        const double c = rng.normal();
        for (auto map : {smap, jmap, mmap}) {
            const Matrix lhs = map(rho, a + b * c).matrix();
            const Matrix rhs = map(rho, a).matrix() + c * map(rho, b).matrix();
            EXPECT_LT(max_abs(lhs - rhs), 1e-12);
            const Matrix out = map(rho, a).matrix();
            EXPECT_LT(std::abs(out.trace()), 1e-12);
            EXPECT_LT(max_abs(out - out.adjoint()), 1e-14);
        }
    }
}

TEST(Maps, JmapEqualsSmapWhenCommuting) {
    Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        const Index d = rng.integer(2, 8);
        const Matrix u = rng.unitary(d);
        RealVector p(d), e(d);
        for (Index i = 0; i < d; ++i) {
            p(i) = rng.uniform(0.05, 1.0);
            e(i) = rng.normal();
        }
        p /= p.sum();
        const DensityMatrix rho(u * p.cast<cplx>().asDiagonal() * u.adjoint());
        const HermitianMatrix a = HermitianMatrix::symmetrized(u * e.cast<cplx>().asDiagonal() * u.adjoint());
        EXPECT_LT(max_abs(jmap(rho, a).matrix() - smap(rho, a).matrix()), 1e-12);
        EXPECT_LT(max_abs(mmap(rho, a).matrix()), 1e-12);
        EXPECT_LT(wyd_skew_information(rho, a), 1e-12);
    }
}

TEST(LogMean, Basics) {
    EXPECT_DOUBLE_EQ(log_mean(0.3, 0.3), 0.3);
    EXPECT_NEAR(log_mean(0.75, 0.25), 0.5 / std::log(3.0), 1e-16);
    EXPECT_NEAR(log_mean(1.0, 1.0 + 1e-14), 1.0 + 5e-15, 1e-15);
    EXPECT_GT(log_mean(1.0, 1e-300), 0.0);
    EXPECT_LE(log_mean(0.9, 0.1), arithmetic_mean(0.9, 0.1));
}

TEST(Mmap, OffDiagonalFactorForThreeToOne) {
    const double lambda = mean_gap(0.75, 0.25);
    EXPECT_NEAR(lambda, 0.5 - 0.5 / std::log(3.0), 1e-15);
    EXPECT_NEAR(lambda, 0.044880, 1e-6);
    EXPECT_EQ(mean_gap(0.4, 0.4), 0.0);
}

TEST(Mmap, EigenFactorsAreNonnegative) {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const Index d = rng.integer(2, 6);
        const DensityMatrix rho = rng.density(d);
        const HermitianMatrix a = rng.hermitian(d);
        const RealVector p = rho.populations();
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) EXPECT_GE(arithmetic_mean(p(i), p(j)) - log_mean(p(i), p(j)), -1e-16);
        EXPECT_GE(trace_product(a.matrix(), mmap(rho, a).matrix()).real(), -1e-14);
    }
}

TEST(Wyd, QubitExample) {
    const DensityMatrix rho(diag2(0.75, 0.25));
    const HermitianMatrix a(pauli::x());
    const double lambda = 0.5 - 0.5 / std::log(3.0);
    EXPECT_NEAR(wyd_skew_information(rho, a), 2.0 * lambda, 1e-15);
}

TEST(Wyd, MatchesDefiningIntegral) {
    Rng rng(13);
    const auto gl = quad::gauss_legendre(64);
    for (int trial = 0; trial < 5; ++trial) {
        const DensityMatrix rho = rng.density(3);
        const HermitianMatrix a = rng.hermitian(3);
        const double integral = gl.integrate(
            [&](double s) {
                const Matrix c1 = commutator(a.matrix(), power_via_log(rho.matrix(), s));
                const Matrix c2 = commutator(a.matrix(), power_via_log(rho.matrix(), 1.0 - s));
                return -0.5 * trace_product(c1, c2).real();
            },
            0.0, 1.0);
        EXPECT_NEAR(wyd_skew_information(rho, a), integral, 1e-9);
        EXPECT_NEAR(wyd_skew_information(rho, a), trace_product(a.matrix(), mmap(rho, a).matrix()).real(), 1e-12);
    }
}

TEST(Wyd, PureStateLimitIsVariance) {
    // The approach is logarithmic in the floor: the residual is 2|A_01|^2 LM(1 - eps, eps).
    Vector psi(2);
    psi << std::cos(0.4), std::sin(0.4);
    const HermitianMatrix a(pauli::x());
    const Matrix pure = psi * psi.adjoint();
    const double variance = (pure * a.matrix() * a.matrix()).trace().real() - std::pow((pure * a.matrix()).trace().real(), 2);
    Matrix basis(2, 2);
    basis.col(0) = Vector(psi);
    basis(0, 1) = -std::sin(0.4);
    basis(1, 1) = std::cos(0.4);
    double prev_gap = 1.0;
    for (double eps : {1e-4, 1e-12, 1e-100, 1e-250}) {
        RealVector p(2);
        p << 1.0 - eps, eps;
        const DensityMatrix rho = DensityMatrix::from_spectrum(Spectrum{p, basis});
        const double gap = variance - wyd_skew_information(rho, a);
        EXPECT_GT(gap, 0.0);
        EXPECT_LT(gap, prev_gap);
        prev_gap = gap;
    }
    EXPECT_LT(prev_gap, 5e-3 * variance);
}

TEST(Wyd, PositiveForNonCommuting) {
    Rng rng(14);
    for (int trial = 0; trial < 100; ++trial) {
        const Index d = rng.integer(2, 6);
        const DensityMatrix rho = rng.density(d);
        const HermitianMatrix a = rng.hermitian(d);
        const double wyd = wyd_skew_information(rho, a);
        EXPECT_GE(wyd, 0.0);
        if (commutator(a.matrix(), rho.matrix()).norm() > 1e-3) {
            EXPECT_GT(wyd, 1e-10);
        }
    }
}

TEST(SuperVectors, RoundTripAndSandwich) {
    Rng rng(15);
    for (Index d : {2, 3, 4}) {
        const Matrix a = rng.complex_matrix(d), b = rng.complex_matrix(d), x = rng.complex_matrix(d);
        EXPECT_EQ(devectorize(vectorize(x)), x);
        EXPECT_LT(max_abs(apply_super(sandwich(a, b), x) - a * x * b), 1e-12);
        EXPECT_LT(max_abs(apply_super(left_multiplication(a), x) - a * x), 1e-12);
        EXPECT_LT(max_abs(apply_super(right_multiplication(b), x) - x * b), 1e-12);
        const DensityMatrix rho = rng.density(d);
        EXPECT_LT(max_abs(apply_super(trace_projector(rho.matrix()), x) - x.trace() * rho.matrix()), 1e-12);
    }
    EXPECT_THROW(devectorize(Vector::Zero(5)), DimensionMismatch);
}

TEST(PartialTrace, ProductState) {
    Rng rng(16);
    const DensityMatrix a = rng.density(2), b = rng.density(3);
    const Matrix ab = kron(a.matrix(), b.matrix());
    EXPECT_LT(max_abs(partial_trace_second(ab, 2, 3) - a.matrix()), 1e-14);
}
