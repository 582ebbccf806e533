#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace chanest {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from a master seed and a tag path.
// Streams are keyed by semantic values (realization index, p, pSNR in
// milli-dB, ...) so that the same cell computed by different commands
// consumes identical randomness.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = splitmix64(master);
    for (std::uint64_t t : tags) s = splitmix64(s ^ t);
    return s;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
inline std::complex<double> complex_gaussian(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    const double re = n(rng);
    const double im = n(rng);
    return {re * M_SQRT1_2, im * M_SQRT1_2};
}

inline Eigen::VectorXcd complex_gaussian_vector(std::mt19937_64& rng, Eigen::Index n) {
    Eigen::VectorXcd v(n);
    std::normal_distribution<double> g(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = g(rng);
        const double im = g(rng);
        v(i) = std::complex<double>(re * M_SQRT1_2, im * M_SQRT1_2);
    }
    return v;
}

}  // namespace chanest
