// Shared fixtures for the unit tests: seeded random operators.

#pragma once

#include <random>

#include "qfdr/operators.hpp"

namespace qfdr::testing {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(gen_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(gen_); }

    Matrix complex_matrix(Index d) {
        Matrix m(d, d);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) m(i, j) = cplx(normal(), normal());
        return m;
    }

    HermitianMatrix hermitian(Index d, double scale = 1.0) {
        const Matrix m = complex_matrix(d);
        return HermitianMatrix::symmetrized(scale * 0.5 * (m + m.adjoint()));
    }

    DensityMatrix density(Index d) {
        const Matrix g = complex_matrix(d);
        Matrix rho = g * g.adjoint();
        rho /= rho.trace();
        return DensityMatrix(0.5 * (rho + rho.adjoint()));
    }

    Matrix unitary(Index d) {
        Eigen::HouseholderQR<Matrix> qr(complex_matrix(d));
        return qr.householderQ() * identity(d);
    }

    std::mt19937_64& engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
};

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace qfdr::testing
