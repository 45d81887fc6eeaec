#include "mbl/evolution.hpp"

#include "mbl/model.hpp"
#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

using namespace mbl;
using mbltest::random_hermitian;
using mbltest::random_state;

namespace {

// Independent oracle: A_t = exp(iHt) A exp(-iHt) via the dense matrix exponential.
Matrix evolve_expm_oracle(const Matrix& h, const Matrix& a, double t) {
    const Matrix u = (Complex(0.0, t) * h).exp();
    return u * a * u.adjoint();
}

Spectrum small_disordered_spectrum(int n, std::uint64_t seed, DiagonalMBLHamiltonian* out_h = nullptr) {
    LatticeSpec lat(n, 2);
    DisorderSpec spec;
    spec.seed = seed;
    auto h = build_diagonal_mbl(spec, lat);
    if (out_h) *out_h = h;
    return h.spectrum();
}

}  // namespace

TEST_CASE("heisenberg evolution basics", "[evolution]") {
    DiagonalMBLHamiltonian h;
    const Spectrum s = small_disordered_spectrum(3, 21, &h);
    LatticeSpec lat = s.lattice;
    const DenseOperator a = embed_site(pauli_x(), lat, 1);

    // t = 0 leaves the operator unchanged
    CHECK((heisenberg_evolve(a, s, 0.0).mat - a.mat).cwiseAbs().maxCoeff() < 1e-14);

    // the Hamiltonian is conserved
    const DenseOperator hd = h.as_dense_operator();
    CHECK((heisenberg_evolve(hd, s, 1.7).mat - hd.mat).cwiseAbs().maxCoeff() < 1e-10);

    // norm and trace invariance
    const DenseOperator at = heisenberg_evolve(a, s, 2.3);
    CHECK(operator_norm(at) == Catch::Approx(operator_norm(a)).margin(1e-10));
    CHECK(std::abs(at.trace() - a.trace()) < 1e-9);
}

TEST_CASE("single-spin Larmor precession against the matrix exponential", "[evolution]") {
    LatticeSpec lat(1, 2);
    const double omega = 1.3;
    Matrix hm = 0.5 * omega * pauli_z();
    DenseOperator h(lat, hm);
    const Spectrum s = Spectrum::from_dense(h);

    const double t = (M_PI / 2.0) / omega;  // omega t = pi/2
    const Matrix at = heisenberg_evolve(DenseOperator(lat, pauli_x()), s, t).mat;

    // e^{i theta sz/2} sx e^{-i theta sz/2} = cos(theta) sx - sin(theta) sy
    CHECK((at - (-pauli_y())).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((at - evolve_expm_oracle(hm, pauli_x(), t)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("heisenberg evolution matches expm oracle on random inputs", "[evolution]") {
    for (int n : {2, 3, 4}) {
        LatticeSpec lat(n, 2);
        const Matrix hm = random_hermitian(lat.dim(), 500 + static_cast<unsigned>(n));
        const Matrix am = random_hermitian(lat.dim(), 600 + static_cast<unsigned>(n));
        const Spectrum s = Spectrum::from_dense(DenseOperator(lat, hm));
        for (double t : {0.3, 2.0, 17.5}) {
            const Matrix got = heisenberg_evolve(DenseOperator(lat, am), s, t).mat;
            const Matrix want = evolve_expm_oracle(hm, am, t);
            CHECK((got - want).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("trace-insertion identity tr(A_t rho_-t) = tr(A rho)", "[evolution]") {
    DiagonalMBLHamiltonian h;
    const Spectrum s = small_disordered_spectrum(4, 23, &h);
    LatticeSpec lat = s.lattice;
    const DenseOperator a = embed_site(pauli_x(), lat, 2);
    const StateVector psi(lat, random_state(lat.dim(), 77));
    const Complex expect0 = (a.mat * psi.density_matrix().mat).trace();
    for (double t : {0.9, 12.0, 400.0}) {
        const StateVector psi_back = evolve_state(psi, s, -t);
        const Matrix at = heisenberg_evolve(a, s, t).mat;
        const Complex expect_t = (at * psi_back.density_matrix().mat).trace();
        CHECK(std::abs(expect_t - expect0) < 1e-9);
    }
}

TEST_CASE("non-interacting model keeps single-site operators local", "[evolution]") {
    LatticeSpec lat(5, 2);
    DisorderSpec spec;
    spec.seed = 40;
    spec.coupling_scale = 0.0;  // J = 0
    auto h = build_diagonal_mbl(spec, lat);
    const Spectrum s = h.spectrum();
    const DenseOperator a = embed_site(pauli_x(), lat, 2);
    for (double t : {1.0, 31.4, 999.0}) {
        const DenseOperator at = heisenberg_evolve(a, s, t);
        const DenseOperator reduced = restrict_to(at, Region(lat, {2}));
        CHECK(operator_norm(DenseOperator(lat, (at.mat - reduced.mat).eval())) < 1e-10);
    }
}

TEST_CASE("evolution kernel matches dense evolution", "[evolution]") {
    // permutation spectrum (diagonal H) and dense spectrum (dressed H)
    DiagonalMBLHamiltonian h;
    const Spectrum sdiag = small_disordered_spectrum(4, 29, &h);
    LatticeSpec lat = sdiag.lattice;
    auto v = build_dressing_unitary(lat, 2, 1.0, 3, 0.5);
    const Spectrum sdense = dressed_spectrum(h, v);

    const Matrix am = random_hermitian(lat.dim(), 91);
    const DenseOperator a(lat, am);

    for (const Spectrum* s : {&sdiag, &sdense}) {
        EvolutionKernel kernel(*s, a);
        for (double t : {0.0, 1.1, 53.0}) {
            const Matrix dense = heisenberg_evolve(a, *s, t).mat;
            CHECK((kernel.evolve_dense(t) - dense).cwiseAbs().maxCoeff() < 1e-10);

            const Vector ph = kernel.phases(t);
            const Vector x = random_state(lat.dim(), 100 + static_cast<unsigned>(10 * t));
            Vector y;
            kernel.apply(ph, x, y);
            CHECK((y - dense * x).norm() < 1e-10);
        }
    }
}

TEST_CASE("region caches reproduce partial traces of evolved operators", "[evolution]") {
    DiagonalMBLHamiltonian h;
    const Spectrum sdiag = small_disordered_spectrum(5, 31, &h);
    LatticeSpec lat = sdiag.lattice;
    auto v = build_dressing_unitary(lat, 2, 1.2, 13, 0.5);
    const Spectrum sdense = dressed_spectrum(h, v);

    const Matrix am = random_hermitian(lat.dim(), 92);
    const DenseOperator a(lat, am);
    const Region s_region(lat, {1, 3});

    for (const Spectrum* s : {&sdiag, &sdense}) {
        EvolutionKernel kernel(*s, a);
        auto cache = kernel.make_region_cache(s_region);
        // force the dense fallback path with a zero cache budget
        EvolutionKernel tight(*s, a, 0);
        auto cache_fallback = tight.make_region_cache(s_region);

        for (double t : {0.4, 7.7}) {
            const Vector ph = kernel.phases(t);
            const DenseOperator at = heisenberg_evolve(a, *s, t);
            const Matrix expect = partial_trace(at, s_region);
            CHECK((kernel.partial_trace_block(ph, t, *cache) - expect).cwiseAbs().maxCoeff() <
                  1e-10);
            CHECK((tight.partial_trace_block(ph, t, *cache_fallback) - expect)
                      .cwiseAbs()
                      .maxCoeff() < 1e-10);

            // Gamma_S(A_t) action
            const Vector x = random_state(lat.dim(), 55);
            Vector y;
            kernel.apply_restriction(kernel.partial_trace_block(ph, t, *cache), *cache, x, y);
            CHECK((y - restrict_to(at, s_region).mat * x).norm() < 1e-10);
        }
    }
}

TEST_CASE("dephasing average: fixed points and the + product state", "[evolution]") {
    DiagonalMBLHamiltonian h;
    const Spectrum s = small_disordered_spectrum(4, 37, &h);
    LatticeSpec lat = s.lattice;

    // a state diagonal in the eigenbasis is unchanged
    RealVector p = RealVector::Zero(lat.dim());
    p(0) = 0.5;
    p(3) = 0.5;
    Matrix diag = Matrix::Zero(lat.dim(), lat.dim());
    for (Eigen::Index k = 0; k < lat.dim(); ++k)
        diag += p(k) * s.eigenvectors.col(k) * s.eigenvectors.col(k).adjoint();
    const DenseOperator rho_diag(lat, diag);
    CHECK((dephasing_average_state(rho_diag, s).mat - diag).cwiseAbs().maxCoeff() < 1e-12);

    // |+>^N under a generic diagonal H averages to the normalised identity
    const DenseOperator rho_plus = StateVector::plus_product(lat).density_matrix();
    const Matrix omega = dephasing_average_state(rho_plus, s).mat;
    CHECK((omega - Matrix::Identity(lat.dim(), lat.dim()) / double(lat.dim()))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("dephasing average agrees with Monte Carlo time integration", "[evolution]") {
    DiagonalMBLHamiltonian h;
    const Spectrum s = small_disordered_spectrum(3, 41, &h);
    LatticeSpec lat = s.lattice;
    const StateVector psi(lat, random_state(lat.dim(), 11));
    const DenseOperator rho = psi.density_matrix();
    const Matrix omega = dephasing_average_state(rho, s).mat;

    // Golden-ratio low-discrepancy times: equidistributed on [0, T] with far
    // smaller integration error than i.i.d. sampling at this budget.
    const double T = 1e4 / s.min_gap;
    const int samples = 2000;
    Rng rng(2718);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double u = rng.uniform();
    Matrix acc = Matrix::Zero(lat.dim(), lat.dim());
    for (int i = 0; i < samples; ++i) {
        u += phi;
        u -= std::floor(u);
        const StateVector pt = evolve_state(psi, s, T * u);
        acc += pt.density_matrix().mat;
    }
    acc /= double(samples);
    const double dist = 0.5 * trace_norm(Matrix(acc - omega));
    CHECK(dist < 0.02);
}

TEST_CASE("dephasing requires non-degenerate energies", "[evolution]") {
    LatticeSpec lat(2, 2);
    RealVector h = RealVector::Constant(2, 1.0);  // degenerate
    auto ham = DiagonalMBLHamiltonian::from_fields(lat, h, RealMatrix::Zero(2, 2));
    const Spectrum s = ham.spectrum();
    const DenseOperator rho = StateVector::plus_product(lat).density_matrix();
    CHECK_THROWS_AS(dephasing_average_state(rho, s), DegenerateSpectrum);
}

TEST_CASE("effective dimension", "[evolution]") {
    DiagonalMBLHamiltonian h;
    const Spectrum s = small_disordered_spectrum(4, 43, &h);
    LatticeSpec lat = s.lattice;

    // an eigenstate has d_eff = 1
    const StateVector eig(lat, s.eigenvectors.col(5));
    CHECK(effective_dimension(eig, s) == Catch::Approx(1.0).margin(1e-10));

    // |+>^N under diagonal H has d_eff = 2^N
    CHECK(effective_dimension(StateVector::plus_product(lat), s) ==
          Catch::Approx(double(lat.dim())).margin(1e-9));

    // generalised weights: identity state
    const RealVector p = RealVector::Constant(lat.dim(), 1.0 / double(lat.dim()));
    CHECK(effective_dimension_of_weights(p) == Catch::Approx(double(lat.dim())).margin(1e-12));
}
