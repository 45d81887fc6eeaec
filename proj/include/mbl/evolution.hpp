// evolution.hpp — Heisenberg evolution in the eigenbasis, dephasing averages
// and effective dimensions.
//
// Conventions: A_t = e^{iHt} A e^{-iHt}, state evolution |psi_t> = e^{-iHt}|psi>.
// In the eigenbasis (A_t)_{kl} = e^{i(E_k - E_l)t} A_{kl}, so an evolved
// operator factorises as U Phi B Phi^dagger U^dagger with B = U^dagger A U.
// The sampling loops never materialise A_t; they use this factorisation for
// matrix-vector products and small partial-trace blocks.

#pragma once

#include "mbl/errors.hpp"
#include "mbl/operators.hpp"
#include "mbl/spectrum.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

namespace mbl {

// ------------------------------ dense evolution ------------------------------

// A_t as a dense operator; fine for tests and small chains.
inline DenseOperator heisenberg_evolve(const DenseOperator& a, const Spectrum& s,
                                       double t) {
    Matrix b = s.op_to_eigenbasis(a.mat);
    const Eigen::Index D = b.rows();
    Vector phases(D);
    for (Eigen::Index k = 0; k < D; ++k) phases(k) = std::exp(Complex(0.0, s.energies(k) * t));
    b = phases.asDiagonal() * b * phases.conjugate().asDiagonal();
    return DenseOperator(a.lattice, s.op_from_eigenbasis(b));
}

// |psi_t> = e^{-iHt} |psi>.
inline StateVector evolve_state(const StateVector& psi, const Spectrum& s, double t) {
    Vector c = s.to_eigenbasis(psi.amplitudes);
    for (Eigen::Index k = 0; k < c.size(); ++k)
        c(k) *= std::exp(Complex(0.0, -s.energies(k) * t));
    return StateVector(psi.lattice, s.from_eigenbasis(c));
}

// ------------------------------ evolution kernel -----------------------------

// Factored A_t engine bound to one observable and one spectrum. Region caches
// provide tr_{S^c}(A_t) as a small matrix per sample without forming A_t.
class EvolutionKernel {
  public:
    EvolutionKernel(const Spectrum& spectrum, const DenseOperator& a,
                    std::size_t cache_budget_bytes = (1ull << 30))
        : spec_(&spectrum),
          lattice_(a.lattice),
          b_(spectrum.op_to_eigenbasis(a.mat)),
          hermitian_(a.is_hermitian(1e-10 * (1.0 + a.mat.cwiseAbs().maxCoeff()))),
          cache_budget_(cache_budget_bytes) {
        if (spectrum.dim() != a.dim())
            throw InvalidShape("EvolutionKernel: spectrum and operator dimension differ");
        if (spec_->has_permutation()) {
            inverse_perm_.assign(static_cast<std::size_t>(spectrum.dim()), 0);
            for (Eigen::Index k = 0; k < spectrum.dim(); ++k)
                inverse_perm_[static_cast<std::size_t>(
                    spec_->basis_permutation[static_cast<std::size_t>(k)])] = k;
        }
        // Sparse row cache when the eigenbasis operator is itself sparse
        // (single-site observables under diagonal models are permutations).
        const Eigen::Index D = b_.rows();
        const double floor = 1e-15 * (1.0 + b_.cwiseAbs().maxCoeff());
        Eigen::Index nnz = 0;
        for (Eigen::Index l = 0; l < D && nnz <= 4 * D; ++l)
            for (Eigen::Index k = 0; k < D; ++k)
                if (std::abs(b_(k, l)) > floor) ++nnz;
        if (nnz <= 4 * D) {
            sparse_rows_.assign(static_cast<std::size_t>(D), {});
            for (Eigen::Index l = 0; l < D; ++l)
                for (Eigen::Index k = 0; k < D; ++k)
                    if (std::abs(b_(k, l)) > floor)
                        sparse_rows_[static_cast<std::size_t>(k)].emplace_back(l, b_(k, l));
        }
    }

    const Spectrum& spectrum() const { return *spec_; }
    const Matrix& eigenbasis_operator() const { return b_; }
    bool hermitian() const { return hermitian_; }
    Eigen::Index dim() const { return b_.rows(); }

    Vector phases(double t) const {
        Vector ph(dim());
        for (Eigen::Index k = 0; k < dim(); ++k)
            ph(k) = std::exp(Complex(0.0, spec_->energies(k) * t));
        return ph;
    }

    // y = A_t x given the phase vector for t.
    void apply(const Vector& ph, const Vector& x, Vector& y) const {
        Vector c = spec_->to_eigenbasis(x);
        c.array() *= ph.array().conjugate();
        Vector w;
        if (!sparse_rows_.empty()) {
            w.setZero(c.size());
            for (Eigen::Index k = 0; k < c.size(); ++k)
                for (const auto& [l, val] : sparse_rows_[static_cast<std::size_t>(k)])
                    w(k) += val * c(l);
        } else {
            w.noalias() = b_ * c;
        }
        w.array() *= ph.array();
        y = spec_->from_eigenbasis(w);
    }

    Matrix evolve_dense(double t) const {
        const Vector ph = phases(t);
        const Matrix bt = ph.asDiagonal() * b_ * ph.conjugate().asDiagonal();
        return spec_->op_from_eigenbasis(bt);
    }

    // Stationary part of A_t: tr(A omega)-type expectations use the diagonal
    // of the eigenbasis representation.
    Vector eigenbasis_diagonal() const { return b_.diagonal(); }

    // ---------------- region cache: tr_{S^c}(A_t) per sample ----------------

    struct RegionCache {
        Region region;
        std::unique_ptr<SiteIndexer> indexer;
        bool use_quadform = false;   // fused quadratic forms over cached products
        bool use_permutation = false;
        // For the quadform path: row-slab products n_ab[k,l] = B[k,l]*K[l,k]
        // with K = (U rows of a)^dagger (U rows of b), for a <= b when
        // Hermitian, else all pairs.
        std::vector<Matrix> n_mats;
        std::vector<std::pair<Eigen::Index, Eigen::Index>> n_pairs;
    };

    std::shared_ptr<RegionCache> make_region_cache(const Region& s) const {
        auto cache = std::make_shared<RegionCache>();
        cache->region = s;
        cache->indexer = std::make_unique<SiteIndexer>(s);
        if (spec_->has_permutation()) {
            cache->use_permutation = true;
            return cache;
        }
        const SiteIndexer& ix = *cache->indexer;
        const Eigen::Index D = dim();
        std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
        for (Eigen::Index a = 0; a < ix.dim_in; ++a)
            for (Eigen::Index b = hermitian_ ? a : 0; b < ix.dim_in; ++b)
                pairs.emplace_back(a, b);
        const std::size_t bytes = pairs.size() * static_cast<std::size_t>(D) *
                                  static_cast<std::size_t>(D) * sizeof(Complex);
        if (bytes > cache_budget_) return cache;  // fallback: dense per sample

        // Row slabs U_a = U[rows {compose(a, e)}, :].
        std::vector<Matrix> slabs;
        slabs.reserve(static_cast<std::size_t>(ix.dim_in));
        for (Eigen::Index a = 0; a < ix.dim_in; ++a) {
            Matrix ua(ix.dim_out, D);
            for (Eigen::Index e = 0; e < ix.dim_out; ++e)
                ua.row(e) = spec_->eigenvectors.row(ix.compose(a, e));
            slabs.push_back(std::move(ua));
        }
        for (const auto& [a, b] : pairs) {
            // T_t[a,b] = sum_{k,l} phi_k B[k,l] conj(phi_l) K[l,k],
            // K = U_b^dagger U_a; store the fused elementwise product.
            const Matrix k_ba = slabs[static_cast<std::size_t>(b)].adjoint() *
                                slabs[static_cast<std::size_t>(a)];
            cache->n_mats.push_back(b_.cwiseProduct(k_ba.transpose()));
        }
        cache->n_pairs = std::move(pairs);
        cache->use_quadform = true;
        return cache;
    }

    // tr_{S^c}(A_t) as a d^{|S|} x d^{|S|} matrix.
    Matrix partial_trace_block(const Vector& ph, double t, const RegionCache& cache) const {
        const SiteIndexer& ix = *cache.indexer;
        Matrix block = Matrix::Zero(ix.dim_in, ix.dim_in);
        if (cache.use_permutation) {
            // A_t[r,c] = phi_{q(r)} B[q(r), q(c)] conj(phi_{q(c)}).
            for (Eigen::Index a = 0; a < ix.dim_in; ++a)
                for (Eigen::Index b = hermitian_ ? a : 0; b < ix.dim_in; ++b) {
                    Complex sum = 0.0;
                    for (Eigen::Index e = 0; e < ix.dim_out; ++e) {
                        const Eigen::Index qa =
                            inverse_perm_[static_cast<std::size_t>(ix.compose(a, e))];
                        const Eigen::Index qb =
                            inverse_perm_[static_cast<std::size_t>(ix.compose(b, e))];
                        sum += ph(qa) * b_(qa, qb) * std::conj(ph(qb));
                    }
                    block(a, b) = sum;
                    if (hermitian_ && b != a) block(b, a) = std::conj(sum);
                }
            return block;
        }
        if (cache.use_quadform) {
            for (std::size_t i = 0; i < cache.n_pairs.size(); ++i) {
                const auto [a, b] = cache.n_pairs[i];
                const Complex sum =
                    (ph.transpose() * (cache.n_mats[i] * ph.conjugate()))(0, 0);
                block(a, b) = sum;
                if (hermitian_ && b != a) block(b, a) = std::conj(sum);
            }
            return block;
        }
        // Fallback: materialise A_t once for this sample.
        const Matrix at = evolve_dense(t);
        return partial_trace(DenseOperator(lattice_, at), cache.region);
    }

    // y = Gamma_S(A_t) x from the small trace block.
    void apply_restriction(const Matrix& block, const RegionCache& cache, const Vector& x,
                           Vector& y) const {
        const SiteIndexer& ix = *cache.indexer;
        const double scale = 1.0 / static_cast<double>(ix.dim_out);
        y.setZero(x.size());
        for (Eigen::Index a = 0; a < ix.dim_in; ++a)
            for (Eigen::Index b = 0; b < ix.dim_in; ++b) {
                const Complex w = scale * block(a, b);
                if (w == Complex(0, 0)) continue;
                for (Eigen::Index e = 0; e < ix.dim_out; ++e)
                    y(ix.compose(a, e)) += w * x(ix.compose(b, e));
            }
    }

  private:
    const Spectrum* spec_;
    LatticeSpec lattice_;
    Matrix b_;
    bool hermitian_;
    std::size_t cache_budget_;
    std::vector<Eigen::Index> inverse_perm_;
    std::vector<std::vector<std::pair<Eigen::Index, Complex>>> sparse_rows_;
};

// ------------------------------- dephasing -----------------------------------

// Diagonal weights <k|rho|k> in the energy eigenbasis.
inline RealVector eigenbasis_diagonal_weights(const DenseOperator& rho, const Spectrum& s) {
    const Eigen::Index D = s.dim();
    RealVector p(D);
    if (s.has_permutation()) {
        for (Eigen::Index k = 0; k < D; ++k) {
            const auto r = s.basis_permutation[static_cast<std::size_t>(k)];
            p(k) = rho.mat(r, r).real();
        }
        return p;
    }
    const Matrix w = rho.mat * s.eigenvectors;
    for (Eigen::Index k = 0; k < D; ++k)
        p(k) = std::real(s.eigenvectors.col(k).dot(w.col(k)));
    return p;
}

// Exact infinite-time average of rho under non-degenerate energies: zero out
// the off-diagonal part in the eigenbasis.
inline DenseOperator dephasing_average_state(const DenseOperator& rho, const Spectrum& s) {
    if (!rho.is_hermitian(1e-9)) throw InvalidInput("dephasing_average_state: rho not Hermitian");
    if (std::abs(rho.trace() - Complex(1.0, 0.0)) > 1e-9)
        throw InvalidInput("dephasing_average_state: rho must have unit trace");
    require_nondegenerate_energies(s);
    const RealVector p = eigenbasis_diagonal_weights(rho, s);
    Matrix diag = Matrix::Zero(s.dim(), s.dim());
    diag.diagonal() = p.cast<Complex>();
    return DenseOperator(rho.lattice, s.op_from_eigenbasis(diag));
}

// --------------------------- effective dimension -----------------------------

inline double effective_dimension_of_weights(const RealVector& p) {
    const double sum = p.array().square().sum();
    if (sum <= 0.0) throw InvalidInput("effective_dimension: zero weight vector");
    return 1.0 / sum;
}

// d_eff = ( sum_k |<k|psi>|^4 )^{-1}; between 1 and D.
inline double effective_dimension(const StateVector& psi, const Spectrum& s) {
    require_nondegenerate_energies(s);
    const Vector c = s.to_eigenbasis(psi.amplitudes);
    RealVector p = c.cwiseAbs2();
    return effective_dimension_of_weights(p);
}

}  // namespace mbl
