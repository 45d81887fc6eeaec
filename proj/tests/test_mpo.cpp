#include "mbl/mpo.hpp"

#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <unsupported/Eigen/KroneckerProduct>

using namespace mbl;
using mbltest::random_hermitian;

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

}  // namespace

TEST_CASE("product operators compress to bond dimension one", "[mpo]") {
    LatticeSpec lat(3, 2);
    const Matrix zz1 = kron(pauli_z(), kron(pauli_z(), Matrix::Identity(2, 2)));
    const MPO mpo = dense_to_mpo(DenseOperator(lat, zz1), 1e-12);
    for (Eigen::Index b : mpo.bond_dims) CHECK(b == 1);
    CHECK((mpo_to_dense(mpo).mat - zz1).cwiseAbs().maxCoeff() < 1e-12);

    LatticeSpec lat6(6, 2);
    const MPO id = dense_to_mpo(DenseOperator::identity(lat6), 1e-12);
    for (Eigen::Index b : id.bond_dims) CHECK(b == 1);
}

TEST_CASE("rank-2 operator across the middle cut", "[mpo]") {
    // A = B (x) C + B' (x) C' with orthogonal pairs on a 2+2 split
    LatticeSpec lat(4, 2);
    const Matrix b1 = kron(pauli_x(), pauli_x());
    const Matrix b2 = kron(pauli_z(), pauli_z());
    const Matrix c1 = kron(pauli_z(), Matrix::Identity(2, 2));
    const Matrix c2 = kron(pauli_x(), pauli_y());
    const Matrix a = kron(b1, c1) + kron(b2, c2);

    const MPO mpo = dense_to_mpo(DenseOperator(lat, a), 1e-12);
    CHECK(mpo.bond_dims[2] == 2);  // middle cut
    CHECK((mpo_to_dense(mpo).mat - a).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("exact round trip at zero tolerance and cut-rank bounds", "[mpo]") {
    for (int n : {3, 4, 5}) {
        LatticeSpec lat(n, 2);
        const Matrix a = random_hermitian(lat.dim(), 700 + static_cast<unsigned>(n));
        const MPO mpo = dense_to_mpo(DenseOperator(lat, a), 0.0);
        CHECK(operator_norm(Matrix(mpo_to_dense(mpo).mat - a)) < 1e-10);
        // bond at cut j is at most d^{2 min(j, n-j)}
        for (int j = 0; j <= n; ++j) {
            const double cap = std::pow(4.0, std::min(j, n - j));
            CHECK(static_cast<double>(mpo.bond_dims[static_cast<std::size_t>(j)]) <=
                  cap + 0.5);
        }
    }
    // qutrit round trip
    LatticeSpec lat3(3, 3);
    const Matrix a3 = random_hermitian(lat3.dim(), 31);
    const MPO mpo3 = dense_to_mpo(DenseOperator(lat3, a3), 0.0);
    CHECK(operator_norm(Matrix(mpo_to_dense(mpo3).mat - a3)) < 1e-10);
}

TEST_CASE("bond dimensions are monotone in the SVD tolerance", "[mpo]") {
    LatticeSpec lat(5, 2);
    // moderately compressible operator: sum of a few local strings
    Matrix a = embed_site(pauli_x(), lat, 1).mat + embed_site(pauli_z(), lat, 3).mat +
               0.3 * embed_local(kron(pauli_x(), pauli_x()), Region(lat, {2, 3})).mat;
    const MPO tight = dense_to_mpo(DenseOperator(lat, a), 1e-14);
    const MPO loose = dense_to_mpo(DenseOperator(lat, a), 1e-2);
    for (std::size_t j = 0; j < tight.bond_dims.size(); ++j)
        CHECK(loose.bond_dims[j] <= tight.bond_dims[j]);
    CHECK(operator_norm(Matrix(mpo_to_dense(tight).mat - a)) < 1e-10);
}

TEST_CASE("projector MPO of strictly local and dressed constants", "[mpo]") {
    LatticeSpec lat(6, 2);
    DisorderSpec dspec;
    dspec.seed = 15;
    auto h = build_diagonal_mbl(dspec, lat);

    // strictly local: bond 1 outside X, error is pure SVD noise
    const DenseOperator hd = h.as_dense_operator();
    auto zs = make_strictly_local_constant(pauli_z(), Region(lat, {2}), &hd);
    auto zst = truncate_constant(zs, 1);
    const auto strict = projector_mpo(zs, zst, 0, 1e-12);
    CHECK(strict.bond_trivial_outside);
    CHECK(strict.error_vs_full < 1e-10);

    // dressed at l = 2: error against the parent obeys 2 g(l)/gamma + svd
    auto v = build_dressing_unitary(lat, 3, 1.0, 7, 0.5);
    auto z = extract_dressed_z(dress_hamiltonian(h, v), v, 3);
    auto zt = truncate_constant(z, 2);
    for (int k : {0, 1}) {
        const auto res = projector_mpo(z, zt, k, 1e-12);
        CHECK(res.bond_trivial_outside);
        CHECK(res.error_vs_full <= res.error_bound);
        CHECK((mpo_to_dense(res.mpo).mat - zt.projector(k)).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("stability of truncated projector products", "[mpo]") {
    LatticeSpec lat(6, 2);
    DisorderSpec dspec;
    dspec.seed = 20;
    auto h = build_diagonal_mbl(dspec, lat);

    // all factors strictly local: measured difference is zero
    auto vid = build_dressing_unitary(lat, 0, 1.0, 0);
    auto hd0 = dress_hamiltonian(h, vid);
    std::vector<ConstantOfMotion> strict;
    for (int j = 0; j < lat.num_sites; ++j)
        strict.push_back(extract_dressed_z(hd0, vid, j));
    std::vector<const ConstantOfMotion*> strict_ptrs;
    for (const auto& z : strict) strict_ptrs.push_back(&z);
    const auto chain0 = make_projector_chain(strict_ptrs, {0, 1, 0, 1, 1, 0}, 1);
    const auto res0 = stability_product(chain0);
    CHECK(res0.measured < 1e-10);

    // dressed family at l = 2
    auto v = build_dressing_unitary(lat, 3, 1.2, 9, 0.5);
    auto hdress = dress_hamiltonian(h, v);
    std::vector<ConstantOfMotion> zs;
    for (int j = 0; j < lat.num_sites; ++j) zs.push_back(extract_dressed_z(hdress, v, j));
    std::vector<const ConstantOfMotion*> ptrs;
    for (const auto& z : zs) ptrs.push_back(&z);

    // single factor reduces to the projector perturbation bound
    const auto single = make_projector_chain({ptrs[3]}, {1}, 2);
    const auto res1 = stability_product(single);
    CHECK(res1.measured <= res1.bound_sum + 1e-9);
    CHECK(res1.bound_sum ==
          Catch::Approx(2.0 * single.truncated[0].perturbation_norm / 2.0).margin(1e-12));

    // full chain
    const auto chain = make_projector_chain(ptrs, {0, 1, 1, 0, 1, 0}, 2);
    const auto res = stability_product(chain);
    CHECK(res.measured <= res.bound_sum + 1e-9);
    CHECK(res.bound_sum <= res.bound_uniform + 1e-12);
}

TEST_CASE("joint eigenprojector of the dressed family", "[mpo]") {
    LatticeSpec lat(6, 2);
    DisorderSpec dspec;
    dspec.seed = 25;
    auto h = build_diagonal_mbl(dspec, lat);

    // identity dressing: product is exactly |s><s|
    auto vid = build_dressing_unitary(lat, 0, 1.0, 0);
    auto hd0 = dress_hamiltonian(h, vid);
    std::vector<ConstantOfMotion> zs0;
    for (int j = 0; j < lat.num_sites; ++j) zs0.push_back(extract_dressed_z(hd0, vid, j));
    std::vector<const ConstantOfMotion*> p0;
    for (const auto& z : zs0) p0.push_back(&z);
    // selection k=1 (lambda=+1) means digit 0; pick s = |010011>
    const std::vector<int> sel = {1, 0, 1, 1, 0, 0};
    const auto q0 = joint_eigenprojector(make_projector_chain(p0, sel, 1));
    Eigen::Index s_index = 0;
    for (int j = 0; j < 6; ++j) s_index = s_index * 2 + (sel[static_cast<std::size_t>(j)] == 1 ? 0 : 1);
    const Vector basis = StateVector::basis_state(lat, s_index).amplitudes;
    CHECK(std::abs(std::real(basis.dot(q0.mat * basis)) - 1.0) < 1e-12);
    CHECK(std::abs(q0.mat.trace() - Complex(1.0, 0.0)) < 1e-10);

    // dressed family: fidelity against V|s> within the stability bound
    auto v = build_dressing_unitary(lat, 3, 1.2, 11, 0.5);
    auto hdress = dress_hamiltonian(h, v);
    std::vector<ConstantOfMotion> zs;
    for (int j = 0; j < lat.num_sites; ++j) zs.push_back(extract_dressed_z(hdress, v, j));
    std::vector<const ConstantOfMotion*> ptrs;
    for (const auto& z : zs) ptrs.push_back(&z);

    const auto chain = make_projector_chain(ptrs, sel, 2);
    const auto q = joint_eigenprojector(chain);
    const auto stability = stability_product(chain);
    const Vector eigvec = v.v.mat.col(s_index);
    const double fidelity = std::abs(eigvec.dot(q.mat * eigvec));
    CHECK(1.0 - fidelity <= stability.bound_sum + 1e-9);

    // idempotency up to the stability error
    CHECK(operator_norm(Matrix(q.mat * q.mat - q.mat)) <= 3.0 * stability.bound_sum + 1e-9);

    // large l: no truncation left, fidelity 1
    const auto chain_full = make_projector_chain(ptrs, sel, 6);
    const auto qf = joint_eigenprojector(chain_full);
    CHECK(std::abs(std::abs(eigvec.dot(qf.mat * eigvec)) - 1.0) < 1e-10);

    // conflicting selections on the same site have empty intersection
    const auto bad = make_projector_chain({ptrs[2], ptrs[2]}, {0, 1}, 2);
    CHECK_THROWS_AS(joint_eigenprojector(bad), EmptyIntersection);
}
