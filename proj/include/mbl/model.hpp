// model.hpp — Disordered MBL Hamiltonians (diagonal and quasi-locally
// dressed) and the brick-wall dressing unitaries.

#pragma once

#include "mbl/errors.hpp"
#include "mbl/operators.hpp"
#include "mbl/rng.hpp"
#include "mbl/spectrum.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace mbl {

// ------------------------------ disorder spec -------------------------------

struct DisorderSpec {
    std::uint64_t seed = 1;
    double field_width = 1.0;     // h_i ~ U[-W, W]
    double coupling_scale = 0.3;  // J0
    double decay_length = 1.0;    // xi, in sites
    int interaction_order = 2;
};

// ---------------------- diagonal MBL Hamiltonian ----------------------------

// H = sum_j h_j sigma^z_j + sum_{i<j} J_ij sigma^z_i sigma^z_j, diagonal in
// the computational basis with energies E(s) = sum h_j z_j + sum J_ij z_i z_j,
// z in {+1,-1} (z = +1 for local state |0>).
struct DiagonalMBLHamiltonian {
    LatticeSpec lattice;
    RealVector fields;     // length N
    RealMatrix couplings;  // N x N, strictly upper triangle used
    RealVector diagonal;   // length D

    double energy_of(Eigen::Index basis_index) const { return diagonal(basis_index); }

    DenseOperator as_dense_operator() const {
        Matrix m = Matrix::Zero(diagonal.size(), diagonal.size());
        m.diagonal() = diagonal.cast<Complex>();
        return DenseOperator(lattice, std::move(m));
    }

    Spectrum spectrum() const { return Spectrum::from_diagonal(lattice, diagonal); }

    static DiagonalMBLHamiltonian from_fields(const LatticeSpec& lattice,
                                              RealVector fields, RealMatrix couplings) {
        if (lattice.local_dim != 2)
            throw Unsupported("DiagonalMBLHamiltonian: local_dim must be 2");
        if (fields.size() != lattice.num_sites || couplings.rows() != lattice.num_sites ||
            couplings.cols() != lattice.num_sites)
            throw InvalidShape("DiagonalMBLHamiltonian: parameter shapes must be N, NxN");
        DiagonalMBLHamiltonian h;
        h.lattice = lattice;
        h.fields = std::move(fields);
        h.couplings = std::move(couplings);
        h.assemble_diagonal();
        return h;
    }

  private:
    void assemble_diagonal() {
        const int n = lattice.num_sites;
        const Eigen::Index D = lattice.dim();
        diagonal.resize(D);
        std::vector<double> z(static_cast<std::size_t>(n));
        for (Eigen::Index s = 0; s < D; ++s) {
            Eigen::Index rem = s;
            for (int j = n - 1; j >= 0; --j) {
                z[static_cast<std::size_t>(j)] = (rem % 2 == 0) ? 1.0 : -1.0;
                rem /= 2;
            }
            double e = 0.0;
            for (int j = 0; j < n; ++j) e += fields(j) * z[static_cast<std::size_t>(j)];
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    e += couplings(i, j) * z[static_cast<std::size_t>(i)] *
                         z[static_cast<std::size_t>(j)];
            diagonal(s) = e;
        }
    }
};

// h_i i.i.d. uniform on [-W, W]; J_ij = J0 * u_ij * exp(-|i-j|/xi) with u_ij
// i.i.d. uniform on [-1, 1]. Same spec => bitwise identical output.
inline DiagonalMBLHamiltonian build_diagonal_mbl(const DisorderSpec& spec,
                                                 const LatticeSpec& lattice) {
    if (lattice.local_dim != 2)
        throw Unsupported("build_diagonal_mbl: local_dim must be 2 in v1");
    if (spec.interaction_order != 2)
        throw Unsupported("build_diagonal_mbl: interaction_order must be 2 in v1");
    const int n = lattice.num_sites;

    Rng field_rng(split_seed(spec.seed, 1));
    RealVector h(n);
    for (int i = 0; i < n; ++i) h(i) = field_rng.uniform_pm(spec.field_width);

    Rng coupling_rng(split_seed(spec.seed, 2));
    RealMatrix j = RealMatrix::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            j(a, b) = spec.coupling_scale * coupling_rng.uniform_pm(1.0) *
                      std::exp(-static_cast<double>(b - a) / spec.decay_length);

    return DiagonalMBLHamiltonian::from_fields(lattice, std::move(h), std::move(j));
}

inline GenericityReport check_genericity(const DiagonalMBLHamiltonian& h,
                                         double tol = -1.0) {
    return check_genericity(h.diagonal, tol);
}

// --------------------------- two-site gate application ----------------------

// m <- (gate embedded on sites (site, site+1)) * m, in place.
inline void apply_two_site_gate_left(Matrix& m, const Matrix& gate, int site,
                                     const LatticeSpec& lat) {
    const int d = lat.local_dim;
    const Eigen::Index d2 = static_cast<Eigen::Index>(d) * d;
    if (gate.rows() != d2 || gate.cols() != d2)
        throw InvalidShape("apply_two_site_gate_left: gate must be d^2 x d^2");
    if (site < 0 || site + 1 >= lat.num_sites)
        throw InvalidInput("apply_two_site_gate_left: bond outside chain");
    const Eigen::Index D = lat.dim();
    Eigen::Index w = 1;  // weight of the fast digit block right of the pair
    for (int k = site + 2; k < lat.num_sites; ++k) w *= d;
    const Eigen::Index npre = D / (w * d2);

    Vector scratch(d2), transformed(d2);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        Complex* col = m.col(c).data();
        for (Eigen::Index pre = 0; pre < npre; ++pre) {
            const Eigen::Index base = pre * d2 * w;
            for (Eigen::Index post = 0; post < w; ++post) {
                for (Eigen::Index a = 0; a < d2; ++a) scratch(a) = col[base + a * w + post];
                transformed.noalias() = gate * scratch;
                for (Eigen::Index a = 0; a < d2; ++a) col[base + a * w + post] = transformed(a);
            }
        }
    }
}

// exp(-i theta g) for Hermitian g.
inline Matrix expi_hermitian(const Matrix& g, double theta) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    Vector phases(g.rows());
    for (Eigen::Index k = 0; k < g.rows(); ++k)
        phases(k) = std::exp(Complex(0.0, -theta * es.eigenvalues()(k)));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// ----------------------------- dressing unitary -----------------------------

// Brick-wall circuit: layer k acts on even bonds for odd k and odd bonds for
// even k, so each layer extends the light cone of a site by at most one. The
// bond generators are fixed Hermitian matrices with unit norm; the angles
// shrink by exp(-alpha) per layer, which is what makes the circuit f-local
// in practice. The achieved profile is measured, never assumed.
struct DressingUnitary {
    LatticeSpec lattice;
    int layers = 0;
    double angle_decay = 1.0;  // alpha
    double theta0 = 0.5;
    std::uint64_t seed = 0;
    DenseOperator v;
    LocalityProfile f_profile;  // of V sigma^x_mid V^dagger around mid site

    bool is_identity() const { return layers == 0 || theta0 == 0.0; }
};

// Embeds a single-site operator and left-multiplies: m <- (op at site) * m.
inline void apply_single_site_left(Matrix& m, const Matrix& op, int site,
                                   const LatticeSpec& lat) {
    const int d = lat.local_dim;
    if (op.rows() != d || op.cols() != d)
        throw InvalidShape("apply_single_site_left: operator must be d x d");
    const Eigen::Index D = lat.dim();
    Eigen::Index w = 1;
    for (int k = site + 1; k < lat.num_sites; ++k) w *= d;
    const Eigen::Index npre = D / (w * d);

    Vector scratch(d), transformed(d);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        Complex* col = m.col(c).data();
        for (Eigen::Index pre = 0; pre < npre; ++pre) {
            const Eigen::Index base = pre * d * w;
            for (Eigen::Index post = 0; post < w; ++post) {
                for (Eigen::Index a = 0; a < d; ++a) scratch(a) = col[base + a * w + post];
                transformed.noalias() = op * scratch;
                for (Eigen::Index a = 0; a < d; ++a) col[base + a * w + post] = transformed(a);
            }
        }
    }
}

inline DressingUnitary build_dressing_unitary(const LatticeSpec& lattice, int layers,
                                              double angle_decay, std::uint64_t seed,
                                              double theta0 = 0.5) {
    if (layers < 0) throw InvalidInput("build_dressing_unitary: layers must be >= 0");
    if (angle_decay <= 0.0)
        throw InvalidInput("build_dressing_unitary: angle_decay must be > 0");
    const int n = lattice.num_sites;
    const int d = lattice.local_dim;
    const Eigen::Index d2 = static_cast<Eigen::Index>(d) * d;

    // One Hermitian generator per bond, reused across layers.
    Rng gen_rng(split_seed(seed, 1));
    std::vector<Matrix> generators;
    generators.reserve(static_cast<std::size_t>(std::max(0, n - 1)));
    for (int b = 0; b + 1 < n; ++b)
        generators.push_back(random_hermitian_unit_norm(d2, gen_rng));

    Rng angle_rng(split_seed(seed, 2));
    Matrix v = Matrix::Identity(lattice.dim(), lattice.dim());
    for (int layer = 1; layer <= layers; ++layer) {
        const double width = theta0 * std::exp(-angle_decay * layer);
        const int first_bond = (layer % 2 == 1) ? 0 : 1;
        for (int b = first_bond; b + 1 < n; b += 2) {
            const double theta = angle_rng.uniform_pm(width);
            const Matrix gate = expi_hermitian(generators[static_cast<std::size_t>(b)], theta);
            apply_two_site_gate_left(v, gate, b, lattice);
        }
    }

    DressingUnitary out;
    out.lattice = lattice;
    out.layers = layers;
    out.angle_decay = angle_decay;
    out.theta0 = theta0;
    out.seed = seed;
    out.v = DenseOperator(lattice, std::move(v));

    // Measured f-profile: conjugate a mid-chain generalised X and profile it.
    const int mid = n / 2;
    Matrix xvdag = out.v.mat.adjoint();
    apply_single_site_left(xvdag, generalized_pauli_x(d), mid, lattice);
    DenseOperator conj(lattice, out.v.mat * xvdag);
    out.f_profile = locality_profile(conj, Region::single(lattice, mid));
    return out;
}

// V H V^dagger as a dense operator; the spectrum is that of H by construction.
inline DenseOperator dress_hamiltonian(const DiagonalMBLHamiltonian& h,
                                       const DressingUnitary& v) {
    if (!(h.lattice == v.lattice))
        throw InvalidShape("dress_hamiltonian: lattice mismatch");
    const Matrix hd = v.v.mat * h.diagonal.cast<Complex>().asDiagonal() * v.v.mat.adjoint();
    return DenseOperator(h.lattice, hd);
}

// Spectrum of the dressed Hamiltonian from its known diagonal parent.
inline Spectrum dressed_spectrum(const DiagonalMBLHamiltonian& h, const DressingUnitary& v) {
    return Spectrum::from_conjugated_diagonal(h.lattice, h.diagonal, v.v.mat);
}

}  // namespace mbl
