#pragma once

#include "mtlasso/types.hpp"

#include <cstdint>
#include <random>

namespace testutil {

using mtlasso::Index;
using mtlasso::Matrix;
using mtlasso::Vector;

inline Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
    return m;
}

// Y = X B + noise with the first s rows of B active.
struct Instance {
    Matrix x, y, b;
};

inline Instance sparse_instance(Index n, Index p, Index t, Index s, double noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Instance in;
    in.x = gaussian(n, p, rng);
    in.b = Matrix::Zero(p, t);
    in.b.topRows(s) = gaussian(s, t, rng);
    in.y = in.x * in.b + noise * gaussian(n, t, rng);
    return in;
}

}  // namespace testutil
