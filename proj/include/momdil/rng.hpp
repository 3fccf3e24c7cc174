#pragma once

// Portable, seedable random streams. Everything here is bit-reproducible
// across platforms and standard libraries up to the libm calls in Box-Muller.
//
// Generator: xoshiro256** with its state filled by splitmix64.
// Stream derivation: scenario k of a generator seeded with s draws from
//   Xoshiro256(stream_seed(s, k)),  stream_seed(s, k) = splitmix64(s ^ (k+1) * 0x9E3779B97F4A7C15).

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/QR>

namespace momdil {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ ((stream + 1) * 0x9E3779B97F4A7C15ULL);
    return splitmix64(s);
}

class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Standard complex Gaussian, E|z|^2 = 1.
    std::complex<double> complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Ginibre matrix: i.i.d. standard complex Gaussian entries, filled row-major.
inline Eigen::MatrixXcd ginibre(Xoshiro256& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXcd g(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = rng.complex_normal();
    return g;
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// diag(R) moved into Q.
inline Eigen::MatrixXcd haar_unitary(Xoshiro256& rng, Eigen::Index dim) {
    const Eigen::MatrixXcd g = ginibre(rng, dim, dim);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < dim; ++k) {
        const std::complex<double> rkk = r(k, k);
        const double mag = std::abs(rkk);
        const std::complex<double> phase = mag > 0.0 ? rkk / mag : std::complex<double>(1.0);
        q.col(k) *= phase;
    }
    return q;
}

/// Uniformly random unit vector in C^n.
inline Eigen::VectorXcd random_unit_vector(Xoshiro256& rng, Eigen::Index n) {
    Eigen::VectorXcd v(n);
    for (Eigen::Index k = 0; k < n; ++k) v(k) = rng.complex_normal();
    const double nv = v.norm();
    return nv > 0.0 ? Eigen::VectorXcd(v / nv) : Eigen::VectorXcd(Eigen::VectorXcd::Unit(n, 0));
}

} // namespace momdil
