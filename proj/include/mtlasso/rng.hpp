#pragma once

#include "mtlasso/types.hpp"

#include <cstdint>
#include <random>

namespace mtlasso {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Child seed for one (replicate, stream) pair. Depends only on its
/// arguments, so every replicate draws the same numbers under any schedule.
constexpr std::uint64_t child_seed(std::uint64_t master, std::uint64_t replicate, std::uint64_t stream) noexcept {
    return mix64(mix64(mix64(master) ^ replicate) ^ (stream * 0xd1b54a32d192ed03ULL));
}

enum Stream : std::uint64_t {
    kStreamCovariance = 1,
    kStreamSupport = 2,
    kStreamDesign = 3,
    kStreamNoise = 4,
};

/// Generator for one stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }

    Matrix normal_matrix(Index rows, Index cols) {
        Matrix m(rows, cols);
        // Column-major fill; the draw order is part of the determinism contract.
        for (Index j = 0; j < cols; ++j) {
            for (Index i = 0; i < rows; ++i) m(i, j) = normal_(engine_);
        }
        return m;
    }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace mtlasso
