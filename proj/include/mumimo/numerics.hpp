// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <span>

#include <Eigen/Dense>

#include "mumimo/errors.hpp"
#include "mumimo/rng.hpp"

namespace mumimo {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace tolerance {
inline constexpr double hermitian_symmetry = 1e-12; ///< max |H - H^H| entry
inline constexpr double psd_clip = 1e-10;           ///< relative to the largest eigenvalue
inline constexpr double real_form = 1e-9;           ///< |Im| of a Hermitian form, relative
} // namespace tolerance

/// Square complex matrix with conjugate symmetry checked on construction.
class HermitianMatrix {
  public:
    /// Throws NumericalError if `m` is not square or deviates from m^H by more than
    /// `tolerance::hermitian_symmetry`. The stored matrix is exactly Hermitian.
    explicit HermitianMatrix(ComplexMatrix m);

    static HermitianMatrix identity(Eigen::Index dim);
    static HermitianMatrix diagonal(std::span<const double> values);

    Eigen::Index dim() const noexcept { return m_.rows(); }
    const ComplexMatrix& matrix() const noexcept { return m_; }
    Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
    double trace() const { return m_.diagonal().real().sum(); }

  private:
    ComplexMatrix m_;
};

struct EigenDecomposition {
    RealVector values;     ///< ascending
    ComplexMatrix vectors; ///< unitary, column i pairs with values[i]
};

EigenDecomposition hermitian_eig(const HermitianMatrix& h);

/// Thrown by psd_sqrt when an eigenvalue lies below the clipping tolerance.
class NotPsdError : public NumericalError {
  public:
    NotPsdError(double eigenvalue, double largest);
    double eigenvalue() const noexcept { return eigenvalue_; }

  private:
    double eigenvalue_;
};

/// Principal square root through the eigendecomposition. Eigenvalues in
/// [-psd_clip * lambda_max, psd_clip * lambda_max] are treated as zero.
HermitianMatrix psd_sqrt(const HermitianMatrix& h);

/// Re(x^H H x). Throws NumericalError on size mismatch or a non-negligible imaginary part.
double quad_form(const ComplexVector& x, const HermitianMatrix& h);

/// Re(tr[A B]) for Hermitian A, B (the trace is real; checked).
double trace_product(const HermitianMatrix& a, const HermitianMatrix& b);

/// Circularly symmetric CN(0, I): real and imaginary parts each N(0, 1/2).
ComplexVector sample_cn(Eigen::Index dim, RandomStream& rng);
void fill_cn(Eigen::Ref<ComplexVector> out, RandomStream& rng);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

/// ||a - ref||_F / ||ref||_F (absolute when ref is zero).
double relative_frobenius_error(const ComplexMatrix& a, const ComplexMatrix& ref);

} // namespace mumimo
