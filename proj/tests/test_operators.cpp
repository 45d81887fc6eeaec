#include "mbl/operators.hpp"

#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <unsupported/Eigen/KroneckerProduct>

using namespace mbl;
using mbltest::partial_trace_oracle;
using mbltest::power_iteration_norm;
using mbltest::random_hermitian;

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

}  // namespace

TEST_CASE("embed_local places operators with identity elsewhere", "[operators]") {
    LatticeSpec lat2(2, 2);

    // sigma_x at site 0 of N=2 is sigma_x (x) I
    DenseOperator a = embed_site(pauli_x(), lat2, 0);
    CHECK((a.mat - kron(pauli_x(), Matrix::Identity(2, 2))).norm() == 0.0);

    // identity embeds to the global identity
    DenseOperator id = embed_site(Matrix::Identity(2, 2), lat2, 1);
    CHECK((id.mat - Matrix::Identity(4, 4)).norm() == 0.0);

    // sigma_z at site 1 of N=3: diagonal enumerated by hand over the 8 basis
    // states with site 0 slowest
    LatticeSpec lat3(3, 2);
    DenseOperator z1 = embed_site(pauli_z(), lat3, 1);
    Eigen::VectorXd expected(8);
    expected << 1, 1, -1, -1, 1, 1, -1, -1;
    CHECK((z1.mat.diagonal().real() - expected).norm() == 0.0);
    CHECK(z1.mat.diagonal().imag().norm() == 0.0);

    // norm is preserved by embedding
    CHECK(operator_norm(z1) == Catch::Approx(1.0).margin(1e-12));

    CHECK_THROWS_AS(embed_local(Matrix::Identity(3, 3), Region(lat2, {0})), InvalidShape);
}

TEST_CASE("embed_local on multi-site regions matches kron composition", "[operators]") {
    LatticeSpec lat(4, 2);
    mbl::Rng rng(11);
    const Matrix g = mbl::ginibre(4, rng);

    // Adjacent region {1,2}: direct kron I (x) g (x) I.
    DenseOperator e = embed_local(g, Region(lat, {1, 2}));
    const Matrix direct =
        kron(Matrix::Identity(2, 2), kron(g, Matrix::Identity(2, 2)));
    CHECK((e.mat - direct).cwiseAbs().maxCoeff() < 1e-14);

    // Non-adjacent region {0,3}: check against embedding of the two tensor
    // factors separately for a product operator g = u (x) v.
    const Matrix u = mbl::ginibre(2, rng);
    const Matrix v = mbl::ginibre(2, rng);
    DenseOperator uv = embed_local(kron(u, v), Region(lat, {0, 3}));
    DenseOperator split(lat, embed_site(u, lat, 0).mat * embed_site(v, lat, 3).mat);
    CHECK((uv.mat - split.mat).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("partial trace basics", "[operators]") {
    LatticeSpec lat(2, 2);

    // tr over a traceless factor kills the operator
    DenseOperator xz(lat, kron(pauli_x(), pauli_z()));
    CHECK(partial_trace(xz, Region(lat, {0})).norm() == 0.0);

    // pure product state reduces to its factor
    Vector zero(2), plus(2);
    zero << 1, 0;
    plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
    const Matrix rho = kron((zero * zero.adjoint()).eval(), (plus * plus.adjoint()).eval());
    const Matrix reduced = partial_trace(DenseOperator(lat, rho), Region(lat, {1}));
    CHECK((reduced - plus * plus.adjoint()).cwiseAbs().maxCoeff() < 1e-14);

    // trace preservation and linearity
    mbl::Rng rng(5);
    const Matrix a = mbl::ginibre(4, rng);
    const Matrix b = mbl::ginibre(4, rng);
    const Matrix ta = partial_trace(DenseOperator(lat, a), Region(lat, {0}));
    const Matrix tb = partial_trace(DenseOperator(lat, b), Region(lat, {0}));
    const Matrix tab =
        partial_trace(DenseOperator(lat, (a + 2.0 * b).eval()), Region(lat, {0}));
    CHECK((tab - ta - 2.0 * tb).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(ta.trace() - a.trace()) < 1e-12);
}

TEST_CASE("partial trace agrees with index-summation oracle", "[operators]") {
    for (int n : {3, 4}) {
        LatticeSpec lat(n, 2);
        const Matrix a = random_hermitian(lat.dim(), 100 + static_cast<unsigned>(n));
        const std::vector<std::vector<int>> keeps = {{0}, {0, 1}, {1, 2}, {0, n - 1}};
        for (const auto& keep : keeps) {
            const Matrix got = partial_trace(DenseOperator(lat, a), Region(lat, keep));
            const Matrix want = partial_trace_oracle(a, n, 2, keep);
            CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    // qutrit cross-check
    LatticeSpec lat(3, 3);
    const Matrix a = random_hermitian(lat.dim(), 42);
    const Matrix got = partial_trace(DenseOperator(lat, a), Region(lat, {1}));
    const Matrix want = partial_trace_oracle(a, 3, 3, {1});
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("restriction map examples", "[operators]") {
    LatticeSpec lat(2, 2);

    // identity is a fixed point
    DenseOperator id = DenseOperator::identity(lat);
    CHECK((restrict_to(id, Region(lat, {0})).mat - id.mat).cwiseAbs().maxCoeff() < 1e-14);

    // operators already supported on S are unchanged
    DenseOperator x0 = embed_site(pauli_x(), lat, 0);
    CHECK((restrict_to(x0, Region(lat, {0})).mat - x0.mat).cwiseAbs().maxCoeff() < 1e-14);

    // traceless complement maps to zero
    DenseOperator xz(lat, kron(pauli_x(), pauli_z()));
    CHECK(restrict_to(xz, Region(lat, {0})).mat.norm() == 0.0);
}

TEST_CASE("restriction map is linear, unital, trace preserving, idempotent, contractive",
          "[operators]") {
    LatticeSpec lat(4, 2);
    for (std::uint64_t seed : {1, 2, 3}) {
        const Matrix a = random_hermitian(lat.dim(), 1000 + seed);
        DenseOperator op(lat, a);
        Region s(lat, {1, 2});

        const DenseOperator ra = restrict_to(op, s);
        // trace preservation
        CHECK(std::abs(ra.trace() - op.trace()) < 1e-10);
        // idempotence
        CHECK((restrict_to(ra, s).mat - ra.mat).cwiseAbs().maxCoeff() < 1e-12);
        // contractivity (relative)
        CHECK(operator_norm(ra) <= operator_norm(op) * (1.0 + 1e-10));

        // nesting: Gamma_S1 Gamma_S2 = Gamma_{S1 cap S2} for S1 within S2
        Region s1(lat, {1});
        const DenseOperator nested = restrict_to(restrict_to(op, s), s1);
        const DenseOperator direct = restrict_to(op, s1);
        CHECK((nested.mat - direct.mat).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("operator and trace norms", "[operators]") {
    LatticeSpec lat(2, 2);
    CHECK(operator_norm(embed_site(pauli_x(), lat, 0)) == Catch::Approx(1.0).margin(1e-12));
    CHECK(operator_norm(Matrix(2.0 * Matrix::Identity(4, 4))) ==
          Catch::Approx(2.0).margin(1e-12));

    // vs power-iteration oracle on random 8x8 Hermitian
    const Matrix h = random_hermitian(8, 7);
    CHECK(operator_norm(h) == Catch::Approx(power_iteration_norm(h)).margin(1e-10));

    // trace norm of a pure-state density matrix is 1
    Vector psi = mbltest::random_state(4, 3);
    CHECK(trace_norm(Matrix(psi * psi.adjoint())) == Catch::Approx(1.0).margin(1e-12));

    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = 1;
    diag(1, 1) = -1;
    CHECK(trace_norm(diag) == Catch::Approx(2.0).margin(1e-12));

    // Hoelder: |tr(A rho)| <= ||A|| ||rho||_1 on 100 random pairs
    mbl::Rng rng(9);
    for (int i = 0; i < 100; ++i) {
        const Matrix a = mbl::ginibre(6, rng);
        const Matrix r = mbl::ginibre(6, rng);
        CHECK(std::abs((a * r).trace()) <=
              operator_norm(a) * trace_norm(r) * (1.0 + 1e-10));
    }
}

TEST_CASE("generalized Pauli-X", "[operators]") {
    CHECK((generalized_pauli_x(2) - pauli_x()).norm() == 0.0);
    for (int d : {3, 4}) {
        const Matrix gx = generalized_pauli_x(d);
        CHECK((gx - gx.adjoint()).norm() == 0.0);
        CHECK(std::abs(gx.trace()) == 0.0);
        CHECK(operator_norm(gx) == Catch::Approx(1.0).margin(1e-12));
        // equal superposition is the +1 eigenvector
        Vector plus = Vector::Constant(d, 1.0 / std::sqrt(double(d)));
        CHECK((gx * plus - plus).norm() < 1e-12);
    }
}

TEST_CASE("locality profile of strictly and approximately local operators", "[operators]") {
    LatticeSpec lat(5, 2);

    // strictly supported: err_l = 0 for all l
    DenseOperator x2 = embed_site(pauli_x(), lat, 2);
    const auto p = locality_profile(x2, Region(lat, {2}));
    for (const auto& [l, e] : p.samples) CHECK(e < 1e-12);

    // depth-1 nearest-neighbour circuit: err_l = 0 for l >= 1
    mbl::Rng rng(21);
    DenseOperator v = DenseOperator::identity(lat);
    for (int b = 0; b + 1 < lat.num_sites; b += 2) {
        const Matrix gate = mbl::haar_unitary(4, rng);
        v = DenseOperator(lat, embed_local(gate, Region(lat, {b, b + 1})).mat * v.mat);
    }
    DenseOperator dressed(lat, v.mat * x2.mat * v.mat.adjoint());
    const auto pd = locality_profile(dressed, Region(lat, {2}));
    CHECK(pd.err_at(1) < 1e-12);
    CHECK(pd.max_l_err() < 1e-12);

    // profile of any operator vanishes at maximal l
    const Matrix a = random_hermitian(lat.dim(), 55);
    const auto pa = locality_profile(DenseOperator(lat, a), Region(lat, {0}));
    CHECK(pa.max_l_err() < 1e-12);

    CHECK_THROWS_AS(locality_profile(DenseOperator::zero(lat), Region(lat, {0})),
                    InvalidInput);
}

TEST_CASE("exponential fit on synthetic decay", "[operators]") {
    std::vector<std::pair<int, double>> samples;
    for (int l = 0; l <= 6; ++l) samples.emplace_back(l, 0.7 * std::exp(-1.3 * l));
    const auto fit = fit_exponential_decay(samples);
    REQUIRE(fit.has_value());
    CHECK(fit->first == Catch::Approx(0.7).epsilon(1e-6));
    CHECK(fit->second == Catch::Approx(1.3).epsilon(1e-6));
}
