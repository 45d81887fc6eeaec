// lanczos.hpp — Extremal eigenvalues / spectral norm of Hermitian operators
//
// Lanczos with full reorthogonalisation against a deterministic seeded start
// vector. Used by the sampling loops, where a full dense eigensolve per time
// sample would dominate the runtime. Values are validated against the dense
// solver in the test suite.

#pragma once

#include "mbl/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace mbl {

using MatVec = std::function<void(const Vector&, Vector&)>;

struct LanczosOptions {
    double tol = 1e-10;       // relative residual tolerance
    int max_iter = 300;
    std::uint64_t seed = 0x5eedbeefcafeULL;
    // Extremal Ritz values converge long before the residuals when the
    // extreme eigenvalues are degenerate (the residual tracks the vector,
    // which has no limit then). Stop once both ends have moved less than
    // stagnation_tol * scale over stagnation_window consecutive steps.
    double stagnation_tol = 1e-12;
    int stagnation_window = 3;
    int min_iter = 8;
};

struct ExtremalEigs {
    double min = 0.0;
    double max = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Extremal eigenvalues of a Hermitian operator given only its action.
inline ExtremalEigs hermitian_extremal_eigs(const MatVec& apply, Eigen::Index dim,
                                            const LanczosOptions& opt = {}) {
    ExtremalEigs out;
    if (dim == 0) return out;
    if (dim == 1) {
        Vector e(1), w(1);
        e(0) = 1.0;
        apply(e, w);
        out.min = out.max = w(0).real();
        out.converged = true;
        return out;
    }

    Rng rng(opt.seed ^ static_cast<std::uint64_t>(dim));
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.complex_gaussian();
    v /= v.norm();

    const int m = static_cast<int>(std::min<Eigen::Index>(opt.max_iter, dim));
    std::vector<Vector> basis;
    basis.reserve(static_cast<std::size_t>(m));
    std::vector<double> alpha, beta;  // beta[k] couples step k and k+1

    Vector w(dim);
    double scale = 1e-300;
    int stagnant = 0;
    double prev_min = 0.0, prev_max = 0.0;
    for (int k = 0; k < m; ++k) {
        basis.push_back(v);
        apply(v, w);
        const double a = std::real(basis[static_cast<std::size_t>(k)].dot(w));
        alpha.push_back(a);
        w -= a * basis[static_cast<std::size_t>(k)];
        if (k > 0) w -= beta[static_cast<std::size_t>(k - 1)] * basis[static_cast<std::size_t>(k - 1)];
        // Full reorthogonalisation, two passes.
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : basis) w -= u.dot(w) * u;
        const double b = w.norm();

        // Ritz values of the current tridiagonal matrix.
        const int kk = k + 1;
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(kk, kk);
        for (int i = 0; i < kk; ++i) t(i, i) = alpha[static_cast<std::size_t>(i)];
        for (int i = 0; i + 1 < kk; ++i)
            t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        const auto& theta = es.eigenvalues();
        out.min = theta(0);
        out.max = theta(kk - 1);
        out.iterations = kk;
        scale = std::max({scale, std::abs(out.min), std::abs(out.max)});

        // Residual of each extremal Ritz pair is beta * |last row of S|.
        const double res_lo = b * std::abs(es.eigenvectors()(kk - 1, 0));
        const double res_hi = b * std::abs(es.eigenvectors()(kk - 1, kk - 1));
        if (std::max(res_lo, res_hi) <= opt.tol * scale) {
            out.converged = true;
            return out;
        }
        if (b <= 1e-14 * scale) {
            // Invariant subspace found; the Ritz values are exact.
            out.converged = true;
            return out;
        }
        const double movement =
            std::max(std::abs(out.min - prev_min), std::abs(out.max - prev_max));
        stagnant = (k > 0 && movement <= opt.stagnation_tol * scale) ? stagnant + 1 : 0;
        prev_min = out.min;
        prev_max = out.max;
        if (kk >= opt.min_iter && stagnant >= opt.stagnation_window) {
            out.converged = true;
            return out;
        }
        beta.push_back(b);
        v = w / b;
    }
    out.converged = (m >= dim);  // full Krylov space is exact
    return out;
}

inline double hermitian_spectral_norm(const MatVec& apply, Eigen::Index dim,
                                      const LanczosOptions& opt = {}) {
    const ExtremalEigs e = hermitian_extremal_eigs(apply, dim, opt);
    return std::max(std::abs(e.min), std::abs(e.max));
}

inline double hermitian_spectral_norm(const Matrix& h, const LanczosOptions& opt = {}) {
    return hermitian_spectral_norm(
        [&h](const Vector& x, Vector& y) { y.noalias() = h * x; }, h.rows(), opt);
}

// Spectral norm of a general matrix via Lanczos on M^dagger M.
inline double spectral_norm_lanczos(const Matrix& m, const LanczosOptions& opt = {}) {
    Vector tmp(m.rows());
    const double lam = hermitian_extremal_eigs(
                           [&m, &tmp](const Vector& x, Vector& y) {
                               tmp.noalias() = m * x;
                               y.noalias() = m.adjoint() * tmp;
                           },
                           m.cols(), opt)
                           .max;
    return std::sqrt(std::max(0.0, lam));
}

}  // namespace mbl
