// constants.hpp — Local constants of motion: spectral data, region
// truncation and the projector perturbation bounds.

#pragma once

#include "mbl/errors.hpp"
#include "mbl/model.hpp"
#include "mbl/operators.hpp"
#include "mbl/spectrum.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace mbl {

// --------------------------- eigenvalue clustering --------------------------

struct EigenvalueClusters {
    std::vector<double> values;               // cluster representatives, ascending
    std::vector<std::vector<int>> members;    // indices into the sorted eigenvalues
    double gap = 0.0;                         // min distance between representatives
};

// Groups sorted eigenvalues into clusters split at spacings > tol. Spacings
// strictly within a factor `ambiguity_factor` of tol (so neither clearly
// intra- nor clearly inter-cluster) raise AmbiguousSpectrum.
inline EigenvalueClusters cluster_eigenvalues(const RealVector& sorted_vals, double tol,
                                              double ambiguity_factor = 10.0) {
    const Eigen::Index n = sorted_vals.size();
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const double spacing = sorted_vals(i + 1) - sorted_vals(i);
        if (spacing > tol / ambiguity_factor && spacing < tol * ambiguity_factor)
            throw AmbiguousSpectrum("cluster_eigenvalues: spacing " +
                                    std::to_string(spacing) + " within a factor " +
                                    std::to_string(ambiguity_factor) + " of tol " +
                                    std::to_string(tol));
    }
    EigenvalueClusters out;
    std::vector<int> current{0};
    for (Eigen::Index i = 1; i <= n; ++i) {
        if (i < n && sorted_vals(i) - sorted_vals(i - 1) <= tol) {
            current.push_back(static_cast<int>(i));
            continue;
        }
        double mean = 0.0;
        for (int idx : current) mean += sorted_vals(idx);
        out.values.push_back(mean / static_cast<double>(current.size()));
        out.members.push_back(current);
        if (i < n) current = {static_cast<int>(i)};
    }
    out.gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < out.values.size(); ++k)
        out.gap = std::min(out.gap, out.values[k + 1] - out.values[k]);
    return out;
}

struct SpectralDecomposition {
    std::vector<double> eigenvalues;       // lambda_k, ascending
    std::vector<Matrix> projectors;        // P_k, sum to identity
    std::vector<Eigen::Index> dims;        // ranks
    double gap = 0.0;
};

// Full-space spectral decomposition of a Hermitian operator with eigenvalues
// clustered at tolerance tol.
inline SpectralDecomposition spectral_decompose(const DenseOperator& z, double tol,
                                                double ambiguity_factor = 10.0) {
    if (!z.is_hermitian(1e-10 * (1.0 + z.mat.cwiseAbs().maxCoeff())))
        throw InvalidInput("spectral_decompose: Hermitian input required");
    Eigen::SelfAdjointEigenSolver<Matrix> es(z.mat);
    const auto clusters = cluster_eigenvalues(es.eigenvalues(), tol, ambiguity_factor);
    SpectralDecomposition out;
    out.eigenvalues = clusters.values;
    out.gap = clusters.gap;
    for (const auto& group : clusters.members) {
        Matrix frame(z.dim(), static_cast<Eigen::Index>(group.size()));
        for (std::size_t i = 0; i < group.size(); ++i)
            frame.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(group[i]);
        out.projectors.push_back(frame * frame.adjoint());
        out.dims.push_back(static_cast<Eigen::Index>(group.size()));
    }
    return out;
}

// ---------------------------- constant of motion ----------------------------

// Spectral data is kept both as full projectors and as local frames: the
// operator is lambda-decomposed over clusters, with eigenvector frames per
// cluster (full projectors P_k = F_k F_k^dagger).
struct ConstantOfMotion {
    DenseOperator z;
    std::vector<double> eigenvalues;       // lambda_k, ascending
    std::vector<Matrix> frames;            // F_k, D x dim_k, orthonormal columns
    std::vector<Eigen::Index> eigenspace_dims;
    double gap = 0.0;                      // gamma
    Region base_region;                    // X
    LocalityProfile locality;              // g(l) = ||Z - Gamma_{X_l}(Z)||
    double commutator_norm = 0.0;          // ||[H, Z]|| at extraction
    // strictly local constants carry the local eigen data as well
    bool strictly_local = false;
    std::vector<Eigen::Index> local_dims;  // ranks of the local block clusters

    int num_clusters() const { return static_cast<int>(eigenvalues.size()); }
    Matrix projector(int k) const {
        return frames[static_cast<std::size_t>(k)] *
               frames[static_cast<std::size_t>(k)].adjoint();
    }
    double g_of(int l) const { return locality.err_at(l); }
};

// min_k dim of the eigenspaces, as an operator on the full lattice.
inline Eigen::Index min_eigenspace_dim(const ConstantOfMotion& z) {
    return *std::min_element(z.eigenspace_dims.begin(), z.eigenspace_dims.end());
}

// For strictly local constants: the local minimum d_min, so that the full
// dimension factorises as d_min * d^{N - |X|}.
inline Eigen::Index min_local_eigenspace_dim(const ConstantOfMotion& z) {
    if (!z.strictly_local)
        throw InvalidInput("min_local_eigenspace_dim: constant is not strictly local");
    return *std::min_element(z.local_dims.begin(), z.local_dims.end());
}

// Z = V sigma^z_j V^dagger. Eigenvalues are {-1, +1} with half-dimensional
// eigenspaces and gap exactly 2; the frames are the matching column slices
// of V. The commutator with the dressed Hamiltonian is verified.
inline ConstantOfMotion extract_dressed_z(const DenseOperator& h_dressed,
                                          const DressingUnitary& v, int site,
                                          double commutator_rel_tol = 1e-9) {
    const LatticeSpec lat = v.lattice;
    if (lat.local_dim != 2)
        throw Unsupported("extract_dressed_z: requires qubit chains");
    if (site < 0 || site >= lat.num_sites)
        throw InvalidInput("extract_dressed_z: site outside chain");
    const Eigen::Index D = lat.dim();

    // z_j(s) = +1 iff digit j of s is 0.
    Eigen::Index w = 1;
    for (int k = site + 1; k < lat.num_sites; ++k) w *= 2;
    auto zsign = [w](Eigen::Index s) { return ((s / w) % 2 == 0) ? 1.0 : -1.0; };

    Matrix minus_frame(D, D / 2), plus_frame(D, D / 2);
    Eigen::Index ip = 0, im = 0;
    for (Eigen::Index s = 0; s < D; ++s) {
        if (zsign(s) > 0)
            plus_frame.col(ip++) = v.v.mat.col(s);
        else
            minus_frame.col(im++) = v.v.mat.col(s);
    }

    ConstantOfMotion out;
    out.eigenvalues = {-1.0, +1.0};
    out.frames = {std::move(minus_frame), std::move(plus_frame)};
    out.eigenspace_dims = {D / 2, D / 2};
    out.gap = 2.0;
    out.base_region = Region::single(lat, site);
    out.z = DenseOperator(
        lat, out.frames[1] * out.frames[1].adjoint() - out.frames[0] * out.frames[0].adjoint());

    const Matrix comm = h_dressed.mat * out.z.mat - out.z.mat * h_dressed.mat;
    out.commutator_norm = operator_norm(comm);
    const double scale = operator_norm(h_dressed) * 1.0;  // ||Z|| = 1
    if (out.commutator_norm > commutator_rel_tol * std::max(scale, 1e-30))
        throw NotConserved("extract_dressed_z: ||[H, Z]|| = " +
                           std::to_string(out.commutator_norm));

    out.locality = locality_profile(out.z, out.base_region);
    out.strictly_local = v.is_identity();
    if (out.strictly_local) out.local_dims = {1, 1};
    return out;
}

// Strictly local constant from a Hermitian local block on region X. The
// Hamiltonian (if given) must commute; diagonal blocks with diagonal models
// commute exactly.
inline ConstantOfMotion make_strictly_local_constant(const Matrix& local_block,
                                                     const Region& x,
                                                     const DenseOperator* h = nullptr,
                                                     double cluster_tol = 1e-8,
                                                     double commutator_rel_tol = 1e-9) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(local_block);
    const auto clusters = cluster_eigenvalues(es.eigenvalues(), cluster_tol);
    if (clusters.values.size() < 2)
        throw NeedTwoEigenspaces("make_strictly_local_constant: needs M >= 2 eigenvalues");

    const SiteIndexer ix(x);
    const Eigen::Index D = x.lattice.dim();

    ConstantOfMotion out;
    out.base_region = x;
    out.eigenvalues = clusters.values;
    out.gap = clusters.gap;
    out.strictly_local = true;
    out.z = embed_local(local_block, x);

    for (const auto& group : clusters.members) {
        const Eigen::Index local_rank = static_cast<Eigen::Index>(group.size());
        Matrix frame = Matrix::Zero(D, local_rank * ix.dim_out);
        for (Eigen::Index i = 0; i < local_rank; ++i) {
            const Vector u = es.eigenvectors().col(group[static_cast<std::size_t>(i)]);
            for (Eigen::Index e = 0; e < ix.dim_out; ++e) {
                const Eigen::Index col = i * ix.dim_out + e;
                for (Eigen::Index a = 0; a < ix.dim_in; ++a)
                    frame(ix.compose(a, e), col) = u(a);
            }
        }
        out.frames.push_back(std::move(frame));
        out.local_dims.push_back(local_rank);
        out.eigenspace_dims.push_back(local_rank * ix.dim_out);
    }

    if (h != nullptr) {
        const Matrix comm = h->mat * out.z.mat - out.z.mat * h->mat;
        out.commutator_norm = operator_norm(comm);
        const double scale = operator_norm(*h) * std::max(operator_norm(out.z), 1e-30);
        if (out.commutator_norm > commutator_rel_tol * std::max(scale, 1e-30))
            throw NotConserved("make_strictly_local_constant: ||[H, Z]|| = " +
                               std::to_string(out.commutator_norm));
    }
    out.locality = locality_profile(out.z, x);
    return out;
}

// --------------------------- truncated constants ----------------------------

// Z_l = Gamma_{X_l}(Z) with eigen data of the strictly local truncation.
// Since Z_l = I_{X_l^c} (x) z_l, the spectral data factorises through the
// local block; clusters are matched to the parent eigenvalues by proximity.
struct TruncatedConstant {
    int l = 0;
    Region region_l;                       // X_l
    DenseOperator z_l;
    double perturbation_norm = 0.0;        // ||V_l|| = ||Z - Z_l||
    double parent_gap = 0.0;               // gamma of the parent
    std::vector<double> eigenvalues;       // parent lambda_k (matched)
    std::vector<Matrix> local_frames;      // local eigvecs per cluster
    std::vector<Eigen::Index> local_dims;
    std::vector<Eigen::Index> dims;        // full ranks = local rank * d^{|X_l^c|}
    bool weak = false;                     // ||V_l|| >= gamma / 2
    bool rank_stable = false;              // dims match the parent's
    // measured perturbation data, one entry per cluster
    std::vector<double> proj_distance;     // ||P_k - P^l_k||
    std::vector<double> offproj_distance;  // ||P_k (I - P^l_k)||
    bool eq_proj_ok = true;                // offproj <= ||V_l|| / gamma (+ slack)
    bool eq_proj2_ok = true;               // proj   <= 2||V_l|| / gamma (+ slack)
    // The gamma-denominator form above is the leading-order statement; the
    // perturbed clusters sit within ||V_l|| of the originals, so the sharp
    // gap in the subspace-angle bound is gamma - ||V_l||.
    bool eq_proj_sharp_ok = true;          // offproj <= ||V_l|| / (gamma - ||V_l||)

    // Full-space P^l_k, embedded from the local frame.
    Matrix projector(int k) const {
        const Matrix& lf = local_frames[static_cast<std::size_t>(k)];
        return embed_local(Matrix(lf * lf.adjoint()), region_l).mat;
    }

    // Full-space orthonormal frame spanning P^l_k: columns |k, r> with
    // r = (local eigenvector index, complement basis index), local index slow.
    Matrix frame(int k) const {
        const SiteIndexer ix(region_l);
        const Matrix& lf = local_frames[static_cast<std::size_t>(k)];
        const Eigen::Index local_rank = lf.cols();
        Matrix f = Matrix::Zero(region_l.lattice.dim(), local_rank * ix.dim_out);
        for (Eigen::Index i = 0; i < local_rank; ++i)
            for (Eigen::Index e = 0; e < ix.dim_out; ++e)
                for (Eigen::Index a = 0; a < ix.dim_in; ++a)
                    f(ix.compose(a, e), i * ix.dim_out + e) = lf(a, i);
        return f;
    }
};

inline TruncatedConstant truncate_constant(const ConstantOfMotion& z, int l,
                                           double slack = 1e-10) {
    const LatticeSpec lat = z.z.lattice;
    TruncatedConstant out;
    out.l = l;
    out.region_l = z.base_region.enlarge(l);
    out.parent_gap = z.gap;

    const SiteIndexer ix(out.region_l);
    const double inv_comp = 1.0 / static_cast<double>(ix.dim_out);
    const Matrix local_block = inv_comp * partial_trace(z.z, out.region_l);
    out.z_l = embed_local(local_block, out.region_l);
    out.perturbation_norm = operator_norm(Matrix(z.z.mat - out.z_l.mat));
    out.weak = !(out.perturbation_norm < z.gap / 2.0);

    // Local eigen data, clusters matched to parent eigenvalues by proximity.
    Eigen::SelfAdjointEigenSolver<Matrix> es(local_block);
    const int m = z.num_clusters();
    std::vector<std::vector<int>> groups(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double mu = es.eigenvalues()(i);
        int best = 0;
        double best_dist = std::abs(mu - z.eigenvalues[0]);
        for (int k = 1; k < m; ++k) {
            const double dist = std::abs(mu - z.eigenvalues[static_cast<std::size_t>(k)]);
            if (dist < best_dist) {
                best = k;
                best_dist = dist;
            }
        }
        if (!(best_dist < z.gap / 2.0))
            throw ClusterMismatch("truncate_constant: eigenvalue " + std::to_string(mu) +
                                  " drifted past the cluster midpoint");
        groups[static_cast<std::size_t>(best)].push_back(static_cast<int>(i));
    }

    out.eigenvalues = z.eigenvalues;
    for (int k = 0; k < m; ++k) {
        const auto& group = groups[static_cast<std::size_t>(k)];
        Matrix lf(local_block.rows(), static_cast<Eigen::Index>(group.size()));
        for (std::size_t i = 0; i < group.size(); ++i)
            lf.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(group[i]);
        out.local_frames.push_back(std::move(lf));
        out.local_dims.push_back(static_cast<Eigen::Index>(group.size()));
        out.dims.push_back(static_cast<Eigen::Index>(group.size()) * ix.dim_out);
    }
    out.rank_stable = (out.dims == z.eigenspace_dims);

    // Perturbation distances against the parent projectors.
    const double bound1 = out.perturbation_norm / z.gap;
    const double gap_sharp = z.gap - out.perturbation_norm;
    const double bound_sharp = (gap_sharp > 0.0)
                                   ? out.perturbation_norm / gap_sharp
                                   : std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k) {
        const Matrix pk = z.projector(k);
        const Matrix plk = embed_local(
            Matrix(out.local_frames[static_cast<std::size_t>(k)] *
                   out.local_frames[static_cast<std::size_t>(k)].adjoint()),
            out.region_l).mat;
        out.proj_distance.push_back(operator_norm(Matrix(pk - plk)));
        out.offproj_distance.push_back(
            operator_norm(Matrix(pk * (Matrix::Identity(pk.rows(), pk.cols()) - plk))));
        if (out.offproj_distance.back() > bound1 + slack) out.eq_proj_ok = false;
        if (out.offproj_distance.back() > bound_sharp + slack) out.eq_proj_sharp_ok = false;
        if (out.proj_distance.back() > 2.0 * bound1 + slack) out.eq_proj2_ok = false;
    }
    return out;
}

}  // namespace mbl
