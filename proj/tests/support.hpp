#pragma once

#include <cmath>
#include <cstdint>

#include "fepcd/rbm.hpp"
#include "fepcd/rng.hpp"

namespace fepcd::test {

// Small reference model used throughout the tests.
inline RbmParams t1() {
    RbmParams p;
    p.W = Matrix(2, 2, {1.0, -1.0, 0.5, 0.2});
    p.a = {0.1, -0.2};
    p.b = {0.3, 0.0};
    return p;
}

inline double normal(RngStream& rng, double stddev = 1.0) { return stddev * gaussian_sample(0.0, rng); }

inline RbmParams random_params(std::size_t nv, std::size_t nh, std::uint64_t seed, double stddev = 1.0) {
    RngStream rng(seed, 77);
    RbmParams p = RbmParams::zeros(nv, nh);
    for (double& w : p.W.data()) w = normal(rng, stddev);
    for (double& x : p.a) x = normal(rng, stddev);
    for (double& x : p.b) x = normal(rng, stddev);
    return p;
}

inline Matrix random_binary(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    RngStream rng(seed, 78);
    Matrix m(rows, cols);
    for (double& x : m.data()) x = bernoulli_sample(0.5, rng) ? 1.0 : 0.0;
    return m;
}

inline double naive_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace fepcd::test
