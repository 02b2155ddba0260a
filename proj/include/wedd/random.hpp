#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "wedd/matrix.hpp"

namespace wedd {

/// SplitMix64: the n-th output is a fixed mixing function of seed + n * gamma,
/// so streams are reproducible across platforms for a given seed.
class Rng {
public:
    static constexpr const char* kAlgorithm = "splitmix64";

    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [lo, hi].
    std::size_t integer(std::size_t lo, std::size_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::size_t>(next_u64() % span);
    }

private:
    std::uint64_t state_;
};

/// i.i.d. uniform(lo, hi) entries.
inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

/// Product of rows x rank and rank x cols uniform factors (rank rank almost surely).
inline Matrix random_low_rank(std::size_t rows, std::size_t cols, std::size_t rank, Rng& rng, double lo = -1.0,
                              double hi = 1.0) {
    const Matrix left = random_matrix(rows, rank, rng, lo, hi);
    const Matrix right = random_matrix(rank, cols, rng, lo, hi);
    return left * right;
}

/// Sparse random matrix: each entry nonzero with probability density, value uniform(0, 1).
inline Matrix random_sparse(std::size_t rows, std::size_t cols, double density, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data()) {
        if (rng.uniform01() < density) v = rng.uniform01();
    }
    return m;
}

/// Random permutation of {0, ..., n-1} (Fisher-Yates).
inline std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.integer(0, i - 1)]);
    return p;
}

} // namespace wedd
