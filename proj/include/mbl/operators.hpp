// operators.hpp — Dense operator algebra on a qudit chain: embedding,
// partial trace, the restriction map, norms and locality profiling.
//
// Basis convention: lexicographic tensor order with site 0 as the slowest
// index, i.e. |s0 s1 ... s_{N-1}> maps to  sum_j s_j d^{N-1-j}.

#pragma once

#include "mbl/errors.hpp"
#include "mbl/lanczos.hpp"
#include "mbl/lattice.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace mbl {

// --------------------------- operator / state types -------------------------

struct DenseOperator {
    LatticeSpec lattice;
    Matrix mat;

    DenseOperator() = default;

    DenseOperator(LatticeSpec lat, Matrix m) : lattice(lat), mat(std::move(m)) {
        if (mat.rows() != lattice.dim() || mat.cols() != lattice.dim())
            throw InvalidShape("DenseOperator: matrix dimension does not match lattice");
    }

    static DenseOperator identity(const LatticeSpec& lat) {
        return DenseOperator(lat, Matrix::Identity(lat.dim(), lat.dim()));
    }

    static DenseOperator zero(const LatticeSpec& lat) {
        return DenseOperator(lat, Matrix::Zero(lat.dim(), lat.dim()));
    }

    Eigen::Index dim() const { return mat.rows(); }

    bool is_hermitian(double tol = 1e-10) const {
        return (mat - mat.adjoint()).cwiseAbs().maxCoeff() <= tol;
    }

    bool is_unitary(double tol = 1e-10) const {
        return (mat * mat.adjoint() - Matrix::Identity(dim(), dim()))
                   .cwiseAbs()
                   .maxCoeff() <= tol;
    }

    Complex trace() const { return mat.trace(); }
};

struct StateVector {
    LatticeSpec lattice;
    Vector amplitudes;

    StateVector() = default;

    StateVector(LatticeSpec lat, Vector amp) : lattice(lat), amplitudes(std::move(amp)) {
        if (amplitudes.size() != lattice.dim())
            throw InvalidShape("StateVector: vector length does not match lattice");
    }

    // |r> for computational basis index r.
    static StateVector basis_state(const LatticeSpec& lat, Eigen::Index r) {
        Vector v = Vector::Zero(lat.dim());
        v(r) = 1.0;
        return StateVector(lat, std::move(v));
    }

    // Product of single-site equal superpositions, |+>^N for d = 2.
    static StateVector plus_product(const LatticeSpec& lat) {
        const Eigen::Index D = lat.dim();
        Vector v = Vector::Constant(D, 1.0 / std::sqrt(static_cast<double>(D)));
        return StateVector(lat, std::move(v));
    }

    double norm() const { return amplitudes.norm(); }

    void normalize() {
        const double n = norm();
        if (n <= 0.0) throw InvalidInput("StateVector::normalize: zero vector");
        amplitudes /= n;
    }

    DenseOperator density_matrix() const {
        return DenseOperator(lattice, amplitudes * amplitudes.adjoint());
    }
};

// ------------------------------ small operators -----------------------------

inline Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

inline Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

// Generalised Pauli-X with entries (1 - delta_rs) / (d - 1); reduces to the
// usual sigma_x for d = 2 and has unit operator norm for every d.
inline Matrix generalized_pauli_x(int d) {
    if (d < 2) throw InvalidInput("generalized_pauli_x: d must be >= 2");
    Matrix m = Matrix::Constant(d, d, 1.0 / static_cast<double>(d - 1));
    m.diagonal().setZero();
    return m;
}

// ------------------------------- embedding ----------------------------------

// Operator acting as `op` on the given sites and as the identity elsewhere.
inline DenseOperator embed_local(const Matrix& op, const Region& sites) {
    const SiteIndexer ix(sites);
    if (op.rows() != ix.dim_in || op.cols() != ix.dim_in)
        throw InvalidShape("embed_local: operator dimension must be d^{|sites|}");
    Matrix out = Matrix::Zero(sites.lattice.dim(), sites.lattice.dim());
    for (Eigen::Index a = 0; a < ix.dim_in; ++a)
        for (Eigen::Index b = 0; b < ix.dim_in; ++b) {
            const Complex val = op(a, b);
            if (val == Complex(0, 0)) continue;
            for (Eigen::Index e = 0; e < ix.dim_out; ++e)
                out(ix.compose(a, e), ix.compose(b, e)) = val;
        }
    return DenseOperator(sites.lattice, std::move(out));
}

inline DenseOperator embed_site(const Matrix& op, const LatticeSpec& lat, int site) {
    return embed_local(op, Region::single(lat, site));
}

// ------------------------------ partial trace -------------------------------

// Trace out the complement of `keep`; returns a d^{|keep|}-dimensional matrix.
inline Matrix partial_trace(const DenseOperator& a, const Region& keep) {
    if (!(keep.lattice == a.lattice))
        throw InvalidShape("partial_trace: region belongs to a different lattice");
    const SiteIndexer ix(keep);
    Matrix out = Matrix::Zero(ix.dim_in, ix.dim_in);
    for (Eigen::Index e = 0; e < ix.dim_out; ++e) {
        const Eigen::Index oe = ix.offset_out[static_cast<std::size_t>(e)];
        for (Eigen::Index p = 0; p < ix.dim_in; ++p)
            for (Eigen::Index q = 0; q < ix.dim_in; ++q)
                out(p, q) += a.mat(oe + ix.offset_in[static_cast<std::size_t>(p)],
                                   oe + ix.offset_in[static_cast<std::size_t>(q)]);
    }
    return out;
}

// ----------------------------- restriction map ------------------------------

// Gamma_S(A) = I_{S^c} (x) d^{-|S^c|} tr_{S^c}(A). Unital, trace preserving,
// idempotent and norm contractive; leaves operators supported on S unchanged.
inline DenseOperator restrict_to(const DenseOperator& a, const Region& s) {
    const Matrix reduced = partial_trace(a, s);
    const double scale = 1.0 / static_cast<double>(s.complement_dim());
    return embed_local(scale * reduced, s);
}

// --------------------------------- norms ------------------------------------

// Largest singular value; for Hermitian input the largest |eigenvalue|.
// Dense solve up to moderate dimension, Lanczos beyond.
inline double operator_norm(const Matrix& m, double lanczos_tol = 1e-11) {
    if (m.rows() == 0) return 0.0;
    const bool herm = (m.rows() == m.cols()) &&
                      (m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + m.cwiseAbs().maxCoeff());
    const Eigen::Index dense_cutoff = 256;
    if (m.rows() <= dense_cutoff) {
        if (herm) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
            return es.eigenvalues().cwiseAbs().maxCoeff();
        }
        if (m.rows() <= 32) {
            Eigen::JacobiSVD<Matrix> svd(m);
            return svd.singularValues()(0);
        }
        // singular values of m = |eigenvalues| of the Hermitian dilation
        Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(m.adjoint() * m),
                                                 Eigen::EigenvaluesOnly);
        return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    }
    LanczosOptions opt;
    opt.tol = lanczos_tol;
    return herm ? hermitian_spectral_norm(m, opt) : spectral_norm_lanczos(m, opt);
}

inline double operator_norm(const DenseOperator& a) { return operator_norm(a.mat); }

// Sum of singular values.
inline double trace_norm(const Matrix& m) {
    if (m.rows() == 0) return 0.0;
    if (m.rows() == m.cols() &&
        (m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().sum();
    }
    if (m.rows() <= 32) {
        Eigen::JacobiSVD<Matrix> svd(m);
        return svd.singularValues().sum();
    }
    Eigen::BDCSVD<Matrix> svd(m);
    return svd.singularValues().sum();
}

inline double trace_norm(const DenseOperator& a) { return trace_norm(a.mat); }

// ----------------------------- locality profile -----------------------------

struct LocalityProfile {
    Region base_region;
    std::vector<std::pair<int, double>> samples;  // (l, ||A - Gamma_{X_l}(A)||)
    std::optional<std::pair<double, double>> fitted_decay;  // g(l) ~ c1 exp(-c2 l)

    double err_at(int l) const {
        for (const auto& [ll, e] : samples)
            if (ll == l) return e;
        throw InvalidInput("LocalityProfile: no sample at l = " + std::to_string(l));
    }

    double max_l_err() const { return samples.back().second; }

    // Non-increasing envelope (running minimum over l).
    std::vector<std::pair<int, double>> envelope() const {
        std::vector<std::pair<int, double>> env = samples;
        double running = env.empty() ? 0.0 : env.front().second;
        for (auto& [l, e] : env) {
            running = std::min(running, e);
            e = running;
        }
        return env;
    }
};

// Least-squares fit of log(err) = log(c1) - c2 * l over strictly positive samples.
inline std::optional<std::pair<double, double>> fit_exponential_decay(
    const std::vector<std::pair<int, double>>& samples, double floor = 1e-13) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& [l, e] : samples) {
        if (e <= floor) continue;
        const double x = static_cast<double>(l);
        const double y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return std::nullopt;
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) return std::nullopt;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    return std::make_pair(std::exp(intercept), -slope);
}

// err_l = ||A - Gamma_{X_l}(A)|| for l = 0..N; the last entries vanish once
// X_l covers the chain.
inline LocalityProfile locality_profile(const DenseOperator& a, const Region& x,
                                        int max_l = -1) {
    if (operator_norm(a) <= 0.0)
        throw InvalidInput("locality_profile: operator must be nonzero");
    LocalityProfile profile;
    profile.base_region = x;
    const int lmax = (max_l >= 0) ? max_l : x.lattice.num_sites;
    for (int l = 0; l <= lmax; ++l) {
        const Region xl = x.enlarge(l);
        const Matrix diff = a.mat - restrict_to(a, xl).mat;
        profile.samples.emplace_back(l, operator_norm(diff));
        if (xl.size() == x.lattice.num_sites && l < lmax) {
            // Region saturated; remaining errors are identically this one (0).
            for (int l2 = l + 1; l2 <= lmax; ++l2)
                profile.samples.emplace_back(l2, profile.samples.back().second);
            break;
        }
    }
    profile.fitted_decay = fit_exponential_decay(profile.samples);
    return profile;
}

}  // namespace mbl
