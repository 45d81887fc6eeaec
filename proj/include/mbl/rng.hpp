// rng.hpp — Deterministic random streams: uniforms, Gaussians, Haar unitaries
//
// All randomness in the library flows through these helpers so that a 64-bit
// seed reproduces every number bitwise. std::mt19937_64 has a standardised
// sequence; the mapping to doubles is done by hand because the distribution
// classes in <random> are implementation-defined.

#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace mbl {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using Complex = std::complex<double>;

// SplitMix64 step; used to derive independent substream seeds from one seed.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform in [-w, w].
    double uniform_pm(double w) { return (2.0 * uniform() - 1.0) * w; }

    // Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Complex complex_gaussian() {
        const double re = gaussian();
        const double im = gaussian();
        return Complex(re, im) / std::sqrt(2.0);
    }

    std::uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Complex Ginibre matrix with i.i.d. standard complex Gaussian entries.
inline Matrix ginibre(Eigen::Index dim, Rng& rng) {
    Matrix g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = rng.complex_gaussian();
    return g;
}

// Haar-random unitary: QR of a Ginibre matrix with the R-diagonal phase fix.
inline Matrix haar_unitary(Eigen::Index dim, Rng& rng) {
    const Matrix g = ginibre(dim, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < dim; ++k) {
        const Complex rkk = r(k, k);
        const double a = std::abs(rkk);
        q.col(k) *= (a > 0.0) ? rkk / a : Complex(1.0, 0.0);
    }
    return q;
}

// GUE-style random Hermitian matrix, normalised to unit operator norm.
inline Matrix random_hermitian_unit_norm(Eigen::Index dim, Rng& rng) {
    Matrix g = ginibre(dim, rng);
    Matrix h = 0.5 * (g + g.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
    if (norm > 0.0) h /= norm;
    return h;
}

}  // namespace mbl
