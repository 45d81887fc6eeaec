#include "mbl/lanczos.hpp"

#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace mbl;
using mbltest::random_hermitian;

TEST_CASE("lanczos matches dense extremal eigenvalues", "[lanczos]") {
    for (Eigen::Index dim : {8, 64, 200}) {
        const Matrix h = random_hermitian(dim, 300 + static_cast<unsigned>(dim));
        Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);

        const auto ex = hermitian_extremal_eigs(
            [&h](const Vector& x, Vector& y) { y.noalias() = h * x; }, dim);
        CHECK(ex.converged);
        CHECK(ex.min == Catch::Approx(es.eigenvalues()(0)).margin(1e-8));
        CHECK(ex.max == Catch::Approx(es.eigenvalues()(dim - 1)).margin(1e-8));
        CHECK(hermitian_spectral_norm(h) ==
              Catch::Approx(es.eigenvalues().cwiseAbs().maxCoeff()).margin(1e-8));
    }
}

TEST_CASE("lanczos handles degenerate extremes and special cases", "[lanczos]") {
    // projector-like spectrum: highly degenerate +-1
    const Eigen::Index dim = 128;
    Matrix u = Matrix::Zero(dim, dim);
    {
        mbl::Rng rng(5);
        u = mbl::haar_unitary(dim, rng);
    }
    Eigen::VectorXd d(dim);
    for (Eigen::Index i = 0; i < dim; ++i) d(i) = (i < dim / 2) ? 1.0 : -1.0;
    const Matrix m = u * d.asDiagonal() * u.adjoint();
    CHECK(hermitian_spectral_norm(m) == Catch::Approx(1.0).margin(1e-9));

    // zero matrix
    const Matrix z = Matrix::Zero(16, 16);
    CHECK(hermitian_spectral_norm(z) == Catch::Approx(0.0).margin(1e-14));

    // dimension 1
    Matrix one(1, 1);
    one(0, 0) = -3.5;
    CHECK(hermitian_spectral_norm(one) == Catch::Approx(3.5).margin(1e-14));
}

TEST_CASE("general spectral norm via M^dagger M", "[lanczos]") {
    mbl::Rng rng(9);
    const Matrix g = mbl::ginibre(120, rng);
    Eigen::JacobiSVD<Matrix> svd(g);
    CHECK(spectral_norm_lanczos(g) ==
          Catch::Approx(svd.singularValues()(0)).margin(1e-7));
}

TEST_CASE("lanczos is deterministic for a fixed seed", "[lanczos]") {
    const Matrix h = random_hermitian(96, 17);
    const double a = hermitian_spectral_norm(h);
    const double b = hermitian_spectral_norm(h);
    CHECK(a == b);
}
