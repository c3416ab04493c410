// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include "mumimo/correlation.hpp"
#include "mumimo/errors.hpp"
#include "mumimo/numerics.hpp"
#include "mumimo/rng.hpp"

using namespace mumimo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

HermitianMatrix random_hermitian(int dim, std::uint64_t seed) {
    RandomStream rng(seed);
    ComplexMatrix a(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            a(i, j) = Complex(rng.normal(), rng.normal());
        }
    }
    return HermitianMatrix(ComplexMatrix((a + a.adjoint()) * 0.5));
}

double unitarity_error(const ComplexMatrix& v) {
    return (v.adjoint() * v - ComplexMatrix::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("hermitian matrix rejects asymmetric input") {
    ComplexMatrix m(2, 2);
    m << 1.0, Complex(0.0, 1.0), Complex(0.0, 1.0), 2.0;
    CHECK_THROWS_AS(HermitianMatrix(m), NumericalError);
    CHECK_THROWS_AS(HermitianMatrix(ComplexMatrix(2, 3)), NumericalError);

    // Roundoff-level asymmetry is accepted and removed.
    m << 1.0, Complex(0.5, 0.25), Complex(0.5 + 1e-14, -0.25), 2.0;
    const HermitianMatrix h(m);
    CHECK(h(0, 1) == std::conj(h(1, 0)));
    CHECK(h(0, 0).imag() == 0.0);
}

TEST_CASE("eigendecomposition of identity and diagonal matrices") {
    const auto id = hermitian_eig(HermitianMatrix::identity(3));
    for (int i = 0; i < 3; ++i) {
        CHECK_THAT(id.values(i), WithinAbs(1.0, 1e-14));
    }
    CHECK(unitarity_error(id.vectors) < 1e-12);

    const std::array<double, 2> d{2.0, 5.0};
    const auto diag = hermitian_eig(HermitianMatrix::diagonal(d));
    CHECK_THAT(diag.values(0), WithinAbs(2.0, 1e-14));
    CHECK_THAT(diag.values(1), WithinAbs(5.0, 1e-14));
    CHECK_THAT(std::abs(diag.vectors(0, 0)), WithinAbs(1.0, 1e-14));
    CHECK_THAT(std::abs(diag.vectors(1, 1)), WithinAbs(1.0, 1e-14));
    CHECK_THAT(std::abs(diag.vectors(1, 0)), WithinAbs(0.0, 1e-14));
}

TEST_CASE("eigendecomposition reconstructs random hermitian matrices") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto h = random_hermitian(4 + static_cast<int>(seed % 5), seed);
        const auto e = hermitian_eig(h);
        const ComplexMatrix back = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
        CHECK(relative_frobenius_error(back, h.matrix()) < 1e-10);
        CHECK(unitarity_error(e.vectors) < 1e-10);
        CHECK_THAT(e.values.sum(), WithinRel(h.trace(), 1e-10));
        for (Eigen::Index i = 1; i < e.values.size(); ++i) {
            CHECK(e.values(i - 1) <= e.values(i));
        }
    }
}

TEST_CASE("psd square root") {
    const auto id = psd_sqrt(HermitianMatrix::identity(4));
    CHECK(relative_frobenius_error(id.matrix(), ComplexMatrix::Identity(4, 4)) < 1e-14);

    const std::array<double, 2> d{4.0, 9.0};
    const auto s = psd_sqrt(HermitianMatrix::diagonal(d));
    CHECK_THAT(s(0, 0).real(), WithinAbs(2.0, 1e-14));
    CHECK_THAT(s(1, 1).real(), WithinAbs(3.0, 1e-14));
    CHECK_THAT(std::abs(s(0, 1)), WithinAbs(0.0, 1e-14));

    const auto r = one_ring_matrix(OneRingParams(8, 20.0 * M_PI / 180.0, 0.4));
    const auto root = psd_sqrt(r);
    CHECK(relative_frobenius_error(root.matrix() * root.matrix(), r.matrix()) < 1e-9);
}

TEST_CASE("psd square root leaves projectors unchanged") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto e = hermitian_eig(random_hermitian(6, seed));
        const ComplexMatrix u = e.vectors.leftCols(static_cast<Eigen::Index>(1 + seed % 5));
        const HermitianMatrix p(ComplexMatrix(u * u.adjoint()));
        CHECK(relative_frobenius_error(psd_sqrt(p).matrix(), p.matrix()) < 1e-9);
    }
}

TEST_CASE("psd square root rejects indefinite matrices and clips roundoff") {
    const std::array<double, 3> bad{1.0, -0.5, 2.0};
    try {
        psd_sqrt(HermitianMatrix::diagonal(bad));
        FAIL("expected NotPsdError");
    } catch (const NotPsdError& e) {
        CHECK(e.eigenvalue() == -0.5);
    }
    const std::array<double, 3> tiny{1.0, -1e-12, 2.0};
    const auto s = psd_sqrt(HermitianMatrix::diagonal(tiny));
    CHECK(s(1, 1).real() == 0.0);
}

TEST_CASE("quadratic forms") {
    const int m = 5;
    CHECK_THAT(quad_form(ComplexVector::Ones(m), HermitianMatrix::identity(m)), WithinAbs(5.0, 1e-14));

    const auto h = random_hermitian(m, 3);
    ComplexVector e1 = ComplexVector::Zero(m);
    e1(0) = 1.0;
    CHECK(quad_form(e1, h) == h(0, 0).real());

    const auto r = one_ring_matrix(OneRingParams(4, 2.0 * M_PI, 0.0));
    ComplexVector ones = ComplexVector::Ones(4);
    const double v = quad_form(ones, r);
    const double top = hermitian_eig(r).values.maxCoeff();
    CHECK(v >= 0.0);
    CHECK(v <= 4.0 * top);

    CHECK_THROWS_AS(quad_form(ComplexVector::Ones(3), h), NumericalError);
}

TEST_CASE("trace of a product of hermitian matrices is real") {
    const auto a = random_hermitian(6, 11);
    const auto b = random_hermitian(6, 12);
    const Complex direct = (a.matrix() * b.matrix()).trace();
    CHECK_THAT(trace_product(a, b), WithinRel(direct.real(), 1e-12));
    CHECK_THROWS_AS(trace_product(a, random_hermitian(5, 1)), NumericalError);
}

TEST_CASE("complex normal sampling") {
    RandomStream rng(2024);
    const auto x = sample_cn(100000, rng);
    const double power = x.squaredNorm() / static_cast<double>(x.size());
    CHECK(power > 0.99);
    CHECK(power < 1.01);
    // Mean of n unit-variance CN entries has per-component std sqrt(1/(2n)).
    const Complex mean = x.mean();
    const double sigma = std::sqrt(0.5 / static_cast<double>(x.size()));
    CHECK(std::abs(mean.real()) < 5.0 * sigma);
    CHECK(std::abs(mean.imag()) < 5.0 * sigma);
    const double re_var = x.real().squaredNorm() / static_cast<double>(x.size());
    CHECK_THAT(re_var, WithinAbs(0.5, 0.01));

    RandomStream a(99);
    RandomStream b(99);
    CHECK(sample_cn(1, a)(0) == sample_cn(1, b)(0));
}

TEST_CASE("substreams are keyed, not sequential") {
    auto first = RandomStream::substream(5, 1, 7);
    auto again = RandomStream::substream(5, 1, 7);
    auto other = RandomStream::substream(5, 1, 8);
    const auto x = first();
    CHECK(x == again());
    CHECK(x != other());
    CHECK(derive_key(1, 2) != derive_key(2, 1));
}

TEST_CASE("dB conversions") {
    CHECK_THAT(db_to_linear(10.0), WithinRel(10.0, 1e-15));
    CHECK_THAT(db_to_linear(-3.0), WithinRel(0.5011872336272722, 1e-14));
    CHECK_THAT(linear_to_db(100.0), WithinAbs(20.0, 1e-14));
}
