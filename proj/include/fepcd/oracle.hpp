#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fepcd/matrix.hpp"
#include "fepcd/rbm.hpp"

namespace fepcd::oracle {

// Largest n_visible + n_hidden accepted by the enumeration routines.
inline constexpr std::size_t kMaxUnits = 20;

// Throws SizeLimitError / PreconditionError if p cannot be enumerated.
void require_enumerable(const RbmParams& p);

// Binary state with bit i of `index` as unit i.
Vector state_from_index(std::size_t index, std::size_t n_units);
std::size_t index_from_state(std::span<const double> state);

// log Z by log-sum-exp over every joint (v, h) configuration.
double log_partition_function(const RbmParams& p);

// log sum_h exp(-E(v, h)), enumerated over h (no closed form involved).
double log_unnormalized_marginal(const RbmParams& p, std::span<const double> v);

// P(v) for every visible state, indexed by index_from_state.
std::vector<double> visible_marginal(const RbmParams& p);

// Mean log P(v) over the rows of `data`.
double mean_log_likelihood(const RbmParams& p, const Matrix& data);

struct ExactGradient {
    GradientStats positive;  // data-clamped, with h summed out exactly
    GradientStats negative;  // full model expectation
};

ExactGradient exact_gradient(const RbmParams& p, const Matrix& data);

// Gradient of the mean log-likelihood, one entry per parameter.
struct ParamGradient {
    Matrix W;
    Vector a;
    Vector b;
};

ParamGradient difference(const GradientStats& pos, const GradientStats& neg);

// Central differences of mean_log_likelihood; step must lie in [1e-7, 1e-3].
ParamGradient finite_diff_loglik_grad(const RbmParams& p, const Matrix& data, double step);

// Largest |x - y| over all corresponding entries.
double max_abs_diff(const ParamGradient& x, const ParamGradient& y);
double max_abs_diff(const GradientStats& x, const GradientStats& y);

/// Running sum with Neumaier compensation.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

double log_sum_exp(std::span<const double> xs);

}  // namespace fepcd::oracle
