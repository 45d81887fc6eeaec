// mpo.hpp — Matrix-product operators by sequential SVD, eigenprojector
// compression and the stability of truncated projector products.

#pragma once

#include "mbl/constants.hpp"
#include "mbl/errors.hpp"
#include "mbl/operators.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace mbl {

// ----------------------------------- MPO ------------------------------------

// Chain of site tensors W_j with indices (left bond, right bond, s, s');
// sites[j][s * d + s'] is the (bond_l x bond_r) matrix block. Boundary bonds
// have dimension 1.
struct MPO {
    LatticeSpec lattice;
    std::vector<std::vector<Matrix>> sites;
    std::vector<Eigen::Index> bond_dims;     // N + 1 entries, first = last = 1
    double svd_tol = 0.0;
    double truncation_error_bound = 0.0;     // accumulated discarded weight

    Eigen::Index max_bond() const {
        Eigen::Index m = 1;
        for (Eigen::Index b : bond_dims) m = std::max(m, b);
        return m;
    }
};

// Flattened index of the pair tensor: site j contributes digit s_j d + s'_j
// with site 0 slowest, matching the operator basis convention.
inline MPO dense_to_mpo(const DenseOperator& a, double svd_tol) {
    const int n = a.lattice.num_sites;
    const int d = a.lattice.local_dim;
    const Eigen::Index d2 = static_cast<Eigen::Index>(d) * d;
    const Eigen::Index D = a.lattice.dim();

    // Rearrange A[r, c] into the pair-index tensor as a (d^2 x d2^{n-1}) matrix.
    std::vector<Eigen::Index> weight(static_cast<std::size_t>(n), 1);
    for (int j = n - 2; j >= 0; --j)
        weight[static_cast<std::size_t>(j)] = weight[static_cast<std::size_t>(j + 1)] * d;
    Eigen::Index cols = 1;
    for (int j = 1; j < n; ++j) cols *= d2;
    Matrix carry(d2, cols);
    {
        std::vector<int> rd(static_cast<std::size_t>(n)), cd(static_cast<std::size_t>(n));
        for (Eigen::Index r = 0; r < D; ++r) {
            Eigen::Index rem = r;
            for (int j = n - 1; j >= 0; --j) {
                rd[static_cast<std::size_t>(j)] = static_cast<int>(rem % d);
                rem /= d;
            }
            for (Eigen::Index c = 0; c < D; ++c) {
                rem = c;
                for (int j = n - 1; j >= 0; --j) {
                    cd[static_cast<std::size_t>(j)] = static_cast<int>(rem % d);
                    rem /= d;
                }
                Eigen::Index row = rd[0] * d + cd[0];
                Eigen::Index col = 0;
                for (int j = 1; j < n; ++j)
                    col = col * d2 + (rd[static_cast<std::size_t>(j)] * d +
                                      cd[static_cast<std::size_t>(j)]);
                carry(row, col) = a.mat(r, c);
            }
        }
    }

    MPO mpo;
    mpo.lattice = a.lattice;
    mpo.svd_tol = svd_tol;
    mpo.bond_dims.assign(static_cast<std::size_t>(n + 1), 1);
    Eigen::Index bond = 1;
    for (int j = 0; j + 1 < n; ++j) {
        // carry has shape (bond * d2, d2^{n-1-j}); split after this site.
        Eigen::BDCSVD<Matrix> svd(carry, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        const double cutoff = svd_tol * (sv.size() > 0 ? sv(0) : 0.0);
        Eigen::Index keep = 0;
        double discarded = 0.0;
        for (Eigen::Index i = 0; i < sv.size(); ++i) {
            if (sv(i) > cutoff && sv(i) > 0.0)
                ++keep;
            else
                discarded += sv(i) * sv(i);
        }
        keep = std::max<Eigen::Index>(keep, 1);
        mpo.truncation_error_bound += std::sqrt(discarded);

        const Matrix u = svd.matrixU().leftCols(keep);
        std::vector<Matrix> site(static_cast<std::size_t>(d2));
        for (Eigen::Index p = 0; p < d2; ++p) {
            Matrix block(bond, keep);
            for (Eigen::Index b = 0; b < bond; ++b) block.row(b) = u.row(b * d2 + p);
            site[static_cast<std::size_t>(p)] = std::move(block);
        }
        mpo.sites.push_back(std::move(site));
        mpo.bond_dims[static_cast<std::size_t>(j + 1)] = keep;

        // next carry: (keep x cols/d2) regrouped so the next pair index leads
        Matrix rest = sv.head(keep).asDiagonal() * svd.matrixV().leftCols(keep).adjoint();
        const Eigen::Index next_cols = rest.cols() / d2;
        Matrix next(keep * d2, next_cols);
        for (Eigen::Index b = 0; b < keep; ++b)
            for (Eigen::Index p = 0; p < d2; ++p)
                for (Eigen::Index crest = 0; crest < next_cols; ++crest)
                    next(b * d2 + p, crest) = rest(b, p * next_cols + crest);
        carry = std::move(next);
        bond = keep;
    }
    // last site: carry is (bond * d2, 1)
    std::vector<Matrix> last(static_cast<std::size_t>(d2));
    for (Eigen::Index p = 0; p < d2; ++p) {
        Matrix block(bond, 1);
        for (Eigen::Index b = 0; b < bond; ++b) block(b, 0) = carry(b * d2 + p, 0);
        last[static_cast<std::size_t>(p)] = std::move(block);
    }
    mpo.sites.push_back(std::move(last));
    return mpo;
}

inline DenseOperator mpo_to_dense(const MPO& mpo) {
    const int n = mpo.lattice.num_sites;
    const int d = mpo.lattice.local_dim;
    const Eigen::Index d2 = static_cast<Eigen::Index>(d) * d;

    // T has shape ((d^k)^2, bond): row index = rp * d^k + cp.
    Matrix t = Matrix::Ones(1, 1);
    Eigen::Index dk = 1;
    for (int j = 0; j < n; ++j) {
        const Eigen::Index bond_r = mpo.bond_dims[static_cast<std::size_t>(j + 1)];
        Matrix next = Matrix::Zero(dk * d * dk * d, bond_r);
        for (Eigen::Index rp = 0; rp < dk; ++rp)
            for (Eigen::Index cp = 0; cp < dk; ++cp) {
                const Eigen::Index base_in = rp * dk + cp;
                for (Eigen::Index s = 0; s < d; ++s)
                    for (Eigen::Index sp = 0; sp < d; ++sp) {
                        const Eigen::Index row_out =
                            (rp * d + s) * (dk * d) + (cp * d + sp);
                        next.row(row_out) +=
                            t.row(base_in) *
                            mpo.sites[static_cast<std::size_t>(j)]
                                     [static_cast<std::size_t>(s * d + sp)];
                    }
            }
        t = std::move(next);
        dk *= d;
    }
    Matrix out(dk, dk);
    for (Eigen::Index r = 0; r < dk; ++r)
        for (Eigen::Index c = 0; c < dk; ++c) out(r, c) = t(r * dk + c, 0);
    return DenseOperator(mpo.lattice, std::move(out));
}

// ------------------------------ projector MPO --------------------------------

struct ProjectorMPOResult {
    MPO mpo;
    double error_vs_full = 0.0;    // ||dense(mpo) - P_k|| against the parent
    double error_bound = 0.0;      // 2 g(l) / gamma + svd truncation bound
    bool bond_trivial_outside = true;
};

// MPO of the truncated eigenprojector P^l_k. Outside X_l every bond is 1
// because the truncation is strictly local.
inline ProjectorMPOResult projector_mpo(const ConstantOfMotion& z,
                                        const TruncatedConstant& zt, int k,
                                        double svd_tol) {
    const LatticeSpec lat = z.z.lattice;
    ProjectorMPOResult out;
    out.mpo = dense_to_mpo(DenseOperator(lat, zt.projector(k)), svd_tol);
    out.error_vs_full = operator_norm(Matrix(mpo_to_dense(out.mpo).mat - z.projector(k)));
    out.error_bound =
        2.0 * zt.perturbation_norm / z.gap + out.mpo.truncation_error_bound + 1e-10;
    // A cut at position j splits sites {0..j-1} | {j..N-1}; it lies outside
    // the (contiguous) truncation region iff it does not separate two of its
    // sites, and there the operator factorises, so the bond must be 1.
    const int r0 = zt.region_l.sites.front();
    const int r1 = zt.region_l.sites.back();
    for (int j = 0; j <= lat.num_sites; ++j) {
        const bool outside = (j <= r0) || (j >= r1 + 1);
        if (outside && out.mpo.bond_dims[static_cast<std::size_t>(j)] != 1)
            out.bond_trivial_outside = false;
    }
    return out;
}

// ---------------------------- projector chains -------------------------------

// One constant of motion per site family with one eigenvalue selection each.
struct ProjectorChain {
    std::vector<const ConstantOfMotion*> constants;
    std::vector<TruncatedConstant> truncated;
    std::vector<int> selection;  // cluster index per factor
    int l = 0;
};

inline ProjectorChain make_projector_chain(const std::vector<const ConstantOfMotion*>& zs,
                                           const std::vector<int>& selection, int l) {
    if (zs.size() != selection.size())
        throw InvalidShape("make_projector_chain: one selection per constant required");
    ProjectorChain chain;
    chain.constants = zs;
    chain.selection = selection;
    chain.l = l;
    for (const auto* z : zs) chain.truncated.push_back(truncate_constant(*z, l));
    return chain;
}

struct StabilityResult {
    double measured = 0.0;       // ||prod P - prod P^l||
    double bound_sum = 0.0;      // sum_k 2 g_k(l) / gamma_k (triangle inequality)
    double bound_uniform = 0.0;  // 2 N max g / min gamma
};

// Lemma-style stability of products of truncated eigenprojectors.
inline StabilityResult stability_product(const ProjectorChain& chain) {
    if (chain.constants.empty()) throw InvalidInput("stability_product: empty chain");
    const Eigen::Index dim = chain.constants.front()->z.dim();
    Matrix full = Matrix::Identity(dim, dim);
    Matrix trunc = Matrix::Identity(dim, dim);
    StabilityResult out;
    double max_ratio = 0.0;
    for (std::size_t i = 0; i < chain.constants.size(); ++i) {
        const int k = chain.selection[i];
        full = full * chain.constants[i]->projector(k);
        trunc = trunc * chain.truncated[i].projector(k);
        const double ratio = chain.truncated[i].perturbation_norm / chain.constants[i]->gap;
        out.bound_sum += 2.0 * ratio;
        max_ratio = std::max(max_ratio, ratio);
    }
    out.bound_uniform = 2.0 * static_cast<double>(chain.constants.size()) * max_ratio;
    out.measured = operator_norm(Matrix(full - trunc));
    return out;
}

// Product of all truncated projectors; for a full commuting family this is a
// rank-one approximation to a Hamiltonian eigenprojector.
inline DenseOperator joint_eigenprojector(const ProjectorChain& chain) {
    if (chain.constants.empty()) throw InvalidInput("joint_eigenprojector: empty chain");
    const LatticeSpec lat = chain.constants.front()->z.lattice;
    const Eigen::Index dim = lat.dim();

    // Consistency: the exact projectors must intersect.
    Matrix full = Matrix::Identity(dim, dim);
    for (std::size_t i = 0; i < chain.constants.size(); ++i)
        full = full * chain.constants[i]->projector(chain.selection[i]);
    if (std::abs(full.trace()) < 0.5)
        throw EmptyIntersection("joint_eigenprojector: selected eigenspaces do not intersect");

    Matrix prod = Matrix::Identity(dim, dim);
    for (std::size_t i = 0; i < chain.constants.size(); ++i)
        prod = prod * chain.truncated[i].projector(chain.selection[i]);
    return DenseOperator(lat, std::move(prod));
}

}  // namespace mbl
