// operators.hpp - dense Hermitian operator algebra: Gibbs states, matrix powers,
// the arithmetic/logarithmic mean maps and operator <-> supervector conversion.
//
// Convention: hbar = k_B = 1. Vectorization is column-major, so that
//     vec(A X B) = (B^T (x) A) vec(X).

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>

#include "qfdr/errors.hpp"

namespace qfdr {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Gibbs populations and spectral weights are clamped below at this value.
inline constexpr double kPopulationFloor = 1e-300;
// Relative gap below which the logarithmic mean takes its diagonal limit.
inline constexpr double kLogMeanDegeneracy = 1e-13;
inline constexpr double kHermiticityTol = 1e-12;
inline constexpr double kDensityTol = 1e-12;

// --------------------------- small helpers ----------------------------------

inline Matrix identity(Index d) { return Matrix::Identity(d, d); }

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline cplx trace_product(const Matrix& a, const Matrix& b) {
    // Tr[A B] without forming the product.
    return (a.transpose().cwiseProduct(b)).sum();
}

inline void require_same_dim(Index a, Index b, const char* where) {
    if (a != b) {
        throw DimensionMismatch(std::string(where) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
}

inline void require_positive_beta(double beta, const char* where) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw DomainError(std::string(where) + ": beta must be finite and > 0");
    }
}

// --------------------------- HermitianMatrix --------------------------------

class HermitianMatrix {
  public:
    HermitianMatrix() = default;

    explicit HermitianMatrix(const Matrix& m) {
        if (m.rows() != m.cols() || m.rows() == 0) {
            throw ContractViolation("HermitianMatrix: matrix must be square and non-empty");
        }
        if (!m.allFinite()) throw ContractViolation("HermitianMatrix: non-finite entries");
        const double scale = std::max(1.0, max_abs(m));
        const double defect = max_abs(m - m.adjoint());
        if (defect > kHermiticityTol * scale) {
            throw ContractViolation("HermitianMatrix: input is not Hermitian (defect " +
                                    std::to_string(defect) + ")");
        }
        m_ = 0.5 * (m + m.adjoint());
    }

    // Projects onto the Hermitian part without checking. For results of maps
    // that are Hermitian up to round-off.
    static HermitianMatrix symmetrized(const Matrix& m) {
        HermitianMatrix h;
        h.m_ = 0.5 * (m + m.adjoint());
        return h;
    }

    static HermitianMatrix zero(Index d) { return symmetrized(Matrix::Zero(d, d)); }
    static HermitianMatrix identity(Index d) { return symmetrized(Matrix::Identity(d, d)); }

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    cplx operator()(Index i, Index j) const { return m_(i, j); }

    HermitianMatrix operator+(const HermitianMatrix& o) const {
        require_same_dim(dim(), o.dim(), "HermitianMatrix::operator+");
        return symmetrized(m_ + o.m_);
    }
    HermitianMatrix operator-(const HermitianMatrix& o) const {
        require_same_dim(dim(), o.dim(), "HermitianMatrix::operator-");
        return symmetrized(m_ - o.m_);
    }
    HermitianMatrix operator*(double s) const { return symmetrized(s * m_); }
    friend HermitianMatrix operator*(double s, const HermitianMatrix& h) { return h * s; }

  private:
    Matrix m_;
};

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

// --------------------------- Spectrum ---------------------------------------

struct Spectrum {
    RealVector eigenvalues;  // ascending
    Matrix eigenvectors;     // columns, unitary

    Matrix reconstruct() const {
        return eigenvectors * eigenvalues.cast<cplx>().asDiagonal() * eigenvectors.adjoint();
    }

    template <class F>
    Matrix apply(F&& f) const {
        RealVector fe = eigenvalues.unaryExpr(std::forward<F>(f));
        return eigenvectors * fe.cast<cplx>().asDiagonal() * eigenvectors.adjoint();
    }
};

// The single eigendecomposition pathway for Hermitian input.
inline Spectrum eigh(const HermitianMatrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("eigh: self-adjoint eigensolver failed");
    }
    return Spectrum{solver.eigenvalues(), solver.eigenvectors()};
}

// --------------------------- DensityMatrix ----------------------------------

class DensityMatrix {
  public:
    DensityMatrix() = default;

    // Validates Hermiticity, unit trace and positivity to `tol`.
    explicit DensityMatrix(const Matrix& m, double tol = kDensityTol) {
        HermitianMatrix h(m);
        const double tr = h.matrix().trace().real();
        if (std::abs(tr - 1.0) > tol) {
            throw ContractViolation("DensityMatrix: trace " + std::to_string(tr) + " != 1");
        }
        Spectrum s = eigh(h);
        if (s.eigenvalues(0) < -tol) {
            throw ContractViolation("DensityMatrix: negative eigenvalue " +
                                    std::to_string(s.eigenvalues(0)));
        }
        m_ = h.matrix();
        spectrum_ = std::move(s);
    }

    // Builds U diag(p) U^dagger from a trusted decomposition.
    static DensityMatrix from_spectrum(Spectrum s) {
        DensityMatrix r;
        r.m_ = s.reconstruct();
        r.m_ = 0.5 * (r.m_ + r.m_.adjoint()).eval();
        r.spectrum_ = std::move(s);
        return r;
    }

    static DensityMatrix maximally_mixed(Index d) {
        return from_spectrum(Spectrum{RealVector::Constant(d, 1.0 / static_cast<double>(d)),
                                      Matrix::Identity(d, d)});
    }

    static DensityMatrix pure(const Vector& psi) {
        const Vector v = psi / psi.norm();
        return DensityMatrix(v * v.adjoint());
    }

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    const Spectrum& spectrum() const { return spectrum_; }
    HermitianMatrix as_hermitian() const { return HermitianMatrix::symmetrized(m_); }

    // Eigenvalues clamped below at kPopulationFloor.
    RealVector populations() const {
        return spectrum_.eigenvalues.unaryExpr([](double p) { return std::max(p, kPopulationFloor); });
    }

  private:
    Matrix m_;
    Spectrum spectrum_;
};

inline double expectation(const HermitianMatrix& a, const DensityMatrix& rho) {
    require_same_dim(a.dim(), rho.dim(), "expectation");
    return trace_product(a.matrix(), rho.matrix()).real();
}

// --------------------------- Gibbs states -----------------------------------

// log Tr exp(-beta H), shifted by the ground energy for overflow safety.
inline double log_partition_function(const RealVector& energies, double beta) {
    const double e0 = energies.minCoeff();
    double sum = 0.0;
    for (Index i = 0; i < energies.size(); ++i) sum += std::exp(-beta * (energies(i) - e0));
    return -beta * e0 + std::log(sum);
}

inline double log_partition_function(const HermitianMatrix& h, double beta) {
    require_positive_beta(beta, "log_partition_function");
    return log_partition_function(eigh(h).eigenvalues, beta);
}

inline RealVector boltzmann_weights(const RealVector& energies, double beta) {
    const double e0 = energies.minCoeff();
    RealVector w = (-beta * (energies.array() - e0)).exp().matrix();
    w /= w.sum();
    return w.unaryExpr([](double p) { return std::max(p, kPopulationFloor); });
}

inline DensityMatrix gibbs_state(const Spectrum& spec, double beta) {
    require_positive_beta(beta, "gibbs_state");
    return DensityMatrix::from_spectrum(
        Spectrum{boltzmann_weights(spec.eigenvalues, beta), spec.eigenvectors});
}

inline DensityMatrix gibbs_state(const HermitianMatrix& h, double beta) {
    require_positive_beta(beta, "gibbs_state");
    return gibbs_state(eigh(h), beta);
}

// --------------------------- matrix means -----------------------------------

// Logarithmic mean (x - y) / (ln x - ln y) with LM(p, p) = p.
inline double log_mean(double x, double y) {
    x = std::max(x, kPopulationFloor);
    y = std::max(y, kPopulationFloor);
    if (x < y) std::swap(x, y);
    if (x - y < kLogMeanDegeneracy * x) return 0.5 * (x + y);
    return (x - y) / std::log1p((x - y) / y);
}

inline double arithmetic_mean(double x, double y) { return 0.5 * (x + y); }

// Eigen-factor of the map M = S - J; nonnegative by the AM >= LM inequality.
inline double mean_gap(double x, double y) {
    return std::max(0.0, arithmetic_mean(std::max(x, kPopulationFloor), std::max(y, kPopulationFloor)) -
                             log_mean(x, y));
}

namespace detail {

// Applies A -> U [ (U^dag (A - Tr[A rho]) U)_{ij} f(p_i, p_j) ] U^dag.
template <class Factor>
HermitianMatrix eigenbasis_map(const DensityMatrix& rho, const HermitianMatrix& a, Factor&& factor,
                               const char* where) {
    require_same_dim(rho.dim(), a.dim(), where);
    const Spectrum& s = rho.spectrum();
    const RealVector p = rho.populations();
    const Index d = a.dim();
    const double mean = expectation(a, rho);
    Matrix b = s.eigenvectors.adjoint() * (a.matrix() - mean * identity(d)) * s.eigenvectors;
    for (Index j = 0; j < d; ++j) {
        for (Index i = 0; i < d; ++i) b(i, j) *= factor(p(i), p(j));
    }
    return HermitianMatrix::symmetrized(s.eigenvectors * b * s.eigenvectors.adjoint());
}

} // namespace detail

// rho^a for a in [0, 1]; a = 0 gives the projector onto the support.
inline HermitianMatrix matrix_power(const DensityMatrix& rho, double a) {
    if (!(a >= 0.0 && a <= 1.0)) throw DomainError("matrix_power: exponent must lie in [0, 1]");
    const Spectrum& s = rho.spectrum();
    if (a == 0.0) {
        const double cut = 1e-14 * std::max(s.eigenvalues.maxCoeff(), kPopulationFloor);
        return HermitianMatrix::symmetrized(s.apply([cut](double p) { return p > cut ? 1.0 : 0.0; }));
    }
    return HermitianMatrix::symmetrized(
        s.apply([a](double p) { return std::pow(std::max(p, kPopulationFloor), a); }));
}

// S_rho(A) = 1/2 {rho, A - Tr[A rho]}
inline HermitianMatrix smap(const DensityMatrix& rho, const HermitianMatrix& a) {
    return detail::eigenbasis_map(rho, a, arithmetic_mean, "smap");
}

// J_rho(A) = int_0^1 rho^s (A - Tr[A rho]) rho^{1-s} ds, closed form via the logarithmic mean.
inline HermitianMatrix jmap(const DensityMatrix& rho, const HermitianMatrix& a) {
    return detail::eigenbasis_map(rho, a, log_mean, "jmap");
}

// M_rho(A) = S_rho(A) - J_rho(A)
inline HermitianMatrix mmap(const DensityMatrix& rho, const HermitianMatrix& a) {
    return detail::eigenbasis_map(rho, a, mean_gap, "mmap");
}

// Average Wigner-Yanase-Dyson skew information, -1/2 int_0^1 Tr[[A, rho^s][A, rho^{1-s}]] ds,
// evaluated as Tr[A M_rho(A)] in the eigenbasis of rho.
inline double wyd_skew_information(const DensityMatrix& rho, const HermitianMatrix& a) {
    require_same_dim(rho.dim(), a.dim(), "wyd_skew_information");
    const Spectrum& s = rho.spectrum();
    const RealVector p = rho.populations();
    const Matrix b = s.eigenvectors.adjoint() * a.matrix() * s.eigenvectors;
    double total = 0.0;
    for (Index j = 0; j < b.cols(); ++j) {
        for (Index i = 0; i < b.rows(); ++i) {
            if (i != j) total += std::norm(b(i, j)) * mean_gap(p(i), p(j));
        }
    }
    return total;
}

// S(rho || sigma) = Tr[rho (ln rho - ln sigma)] through eigen-logarithms.
// Populations are floored, so a rank-deficient sigma gives a large finite value.
inline double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
    require_same_dim(rho.dim(), sigma.dim(), "relative_entropy");
    auto log_of = [](const DensityMatrix& m) {
        const Spectrum& s = m.spectrum();
        return s.apply([](double p) { return std::log(std::max(p, kPopulationFloor)); });
    };
    return trace_product(rho.matrix(), log_of(rho) - log_of(sigma)).real();
}

// --------------------------- supervectors -----------------------------------

using SuperMatrix = Matrix;

inline Vector vectorize(const Matrix& a) {
    return Eigen::Map<const Vector>(a.data(), a.size());
}

inline Matrix devectorize(const Vector& v) {
    const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (d * d != v.size()) throw DimensionMismatch("devectorize: length is not a perfect square");
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

inline SuperMatrix kron(const Matrix& a, const Matrix& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

// X -> A X
inline SuperMatrix left_multiplication(const Matrix& a) { return kron(identity(a.rows()), a); }
// X -> X B
inline SuperMatrix right_multiplication(const Matrix& b) { return kron(b.transpose(), identity(b.rows())); }
// X -> A X B
inline SuperMatrix sandwich(const Matrix& a, const Matrix& b) { return kron(b.transpose(), a); }

inline Matrix apply_super(const SuperMatrix& s, const Matrix& a) {
    return devectorize(s * vectorize(a));
}

// X -> Tr[X] rho, i.e. vec(rho) vec(I)^dagger
inline SuperMatrix trace_projector(const Matrix& rho) {
    return vectorize(rho) * vectorize(identity(rho.rows())).adjoint();
}

// --------------------------- Pauli / ladder operators ----------------------

namespace pauli {

inline Matrix x() {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}
inline Matrix y() {
    Matrix m(2, 2);
    m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
    return m;
}
inline Matrix z() {
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}
// |down><up| with |up> = (1, 0) the +1 eigenvector of sigma_z
inline Matrix lowering() {
    Matrix m = Matrix::Zero(2, 2);
    m(1, 0) = 1.0;
    return m;
}
inline Matrix raising() { return lowering().adjoint(); }

} // namespace pauli

// Truncated annihilation operator on the Fock space {|0>, ..., |d-1>}.
inline Matrix annihilation(Index d) {
    Matrix a = Matrix::Zero(d, d);
    for (Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

// Partial trace over the second tensor factor of a (dim_a * dim_b) operator.
inline Matrix partial_trace_second(const Matrix& m, Index dim_a, Index dim_b) {
    require_same_dim(m.rows(), dim_a * dim_b, "partial_trace_second");
    Matrix r = Matrix::Zero(dim_a, dim_a);
    for (Index i = 0; i < dim_a; ++i) {
        for (Index j = 0; j < dim_a; ++j) {
            cplx s = 0.0;
            for (Index b = 0; b < dim_b; ++b) s += m(i * dim_b + b, j * dim_b + b);
            r(i, j) = s;
        }
    }
    return r;
}

} // namespace qfdr
