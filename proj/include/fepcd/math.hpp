#pragma once

#include <algorithm>
#include <cmath>

namespace fepcd {

// Logistic function. Split at zero so neither branch evaluates exp of a large
// positive argument; saturates to 0 / 1 without producing NaN.
inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + e^x), a.k.a. softplus.
inline double log1p_exp(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace fepcd
