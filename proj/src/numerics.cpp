// SPDX-License-Identifier: Apache-2.0

#include "mumimo/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace mumimo {

namespace {

std::string dims(Eigen::Index r, Eigen::Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

} // namespace

HermitianMatrix::HermitianMatrix(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) {
        throw NumericalError("HermitianMatrix: expected a nonempty square matrix, got " + dims(m_.rows(), m_.cols()));
    }
    if (!m_.allFinite()) {
        throw NumericalError("HermitianMatrix: non-finite entry in " + dims(m_.rows(), m_.cols()) + " matrix");
    }
    const double asym = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (asym >= tolerance::hermitian_symmetry) {
        std::ostringstream os;
        os << "HermitianMatrix: |H - H^H|_max = " << asym << " exceeds " << tolerance::hermitian_symmetry;
        throw NumericalError(os.str());
    }
    // Remove the sub-tolerance asymmetry so every downstream form is exactly real.
    ComplexMatrix sym = 0.5 * (m_ + m_.adjoint());
    sym.diagonal() = sym.diagonal().real().cast<Complex>();
    m_ = std::move(sym);
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index dim) {
    return HermitianMatrix(ComplexMatrix::Identity(dim, dim));
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> values) {
    ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
    }
    return HermitianMatrix(std::move(m));
}

EigenDecomposition hermitian_eig(const HermitianMatrix& h) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix(), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("hermitian_eig: eigen-solver did not converge for " + dims(h.dim(), h.dim()) + " matrix");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

NotPsdError::NotPsdError(double eigenvalue, double largest)
    : NumericalError([&] {
          std::ostringstream os;
          os << "matrix is not PSD: eigenvalue " << eigenvalue << " below -" << tolerance::psd_clip
             << " x largest eigenvalue " << largest;
          return os.str();
      }()),
      eigenvalue_(eigenvalue) {}

HermitianMatrix psd_sqrt(const HermitianMatrix& h) {
    const auto eig = hermitian_eig(h);
    const double largest = std::max(eig.values.maxCoeff(), 0.0);
    const double smallest = eig.values.minCoeff();
    if (smallest < -tolerance::psd_clip * largest || (largest == 0.0 && smallest < 0.0)) {
        throw NotPsdError(smallest, largest);
    }
    // Eigenvalues inside the clipping band are roundoff; their square roots would not be.
    const double floor = tolerance::psd_clip * largest;
    const RealVector roots = eig.values.unaryExpr([floor](double v) { return v <= floor ? 0.0 : std::sqrt(v); });
    ComplexMatrix s = eig.vectors * roots.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
    return HermitianMatrix(0.5 * (s + s.adjoint()));
}

double quad_form(const ComplexVector& x, const HermitianMatrix& h) {
    if (x.size() != h.dim()) {
        throw NumericalError("quad_form: vector of length " + std::to_string(x.size()) + " against " +
                             dims(h.dim(), h.dim()) + " matrix");
    }
    const Complex v = x.dot(h.matrix() * x); // Eigen's dot conjugates the left operand
    const double scale = std::max(std::abs(v.real()), x.squaredNorm() * h.matrix().cwiseAbs().maxCoeff());
    if (std::abs(v.imag()) > tolerance::real_form * scale) {
        throw NumericalError("quad_form: imaginary part " + std::to_string(v.imag()) + " is not negligible");
    }
    return v.real();
}

double trace_product(const HermitianMatrix& a, const HermitianMatrix& b) {
    if (a.dim() != b.dim()) {
        throw NumericalError("trace_product: " + dims(a.dim(), a.dim()) + " vs " + dims(b.dim(), b.dim()));
    }
    // tr[AB] = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B.
    const Complex t = (a.matrix().array() * b.matrix().array().conjugate()).sum();
    const double scale = std::max(std::abs(t.real()), a.matrix().norm() * b.matrix().norm());
    if (std::abs(t.imag()) > tolerance::real_form * scale) {
        throw NumericalError("trace_product: imaginary part " + std::to_string(t.imag()) + " is not negligible");
    }
    return t.real();
}

void fill_cn(Eigen::Ref<ComplexVector> out, RandomStream& rng) {
    constexpr double scale = 0.70710678118654752440; // sqrt(1/2)
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const double re = rng.normal();
        const double im = rng.normal();
        out[i] = Complex(scale * re, scale * im);
    }
}

ComplexVector sample_cn(Eigen::Index dim, RandomStream& rng) {
    ComplexVector v(dim);
    fill_cn(v, rng);
    return v;
}

double relative_frobenius_error(const ComplexMatrix& a, const ComplexMatrix& ref) {
    const double denom = ref.norm();
    const double diff = (a - ref).norm();
    return denom > 0.0 ? diff / denom : diff;
}

} // namespace mumimo
