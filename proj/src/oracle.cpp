#include "fepcd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fepcd/errors.hpp"

namespace fepcd::oracle {

void CompensatedSum::add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        carry_ += (sum_ - t) + x;
    } else {
        carry_ += (x - t) + sum_;
    }
    sum_ = t;
}

double log_sum_exp(std::span<const double> xs) {
    if (xs.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(xs.begin(), xs.end());
    CompensatedSum s;
    for (double x : xs) s.add(std::exp(x - m));
    return m + std::log(s.value());
}

void require_enumerable(const RbmParams& p) {
    p.validate();
    if (p.visible_kind != VisibleKind::Binary) {
        throw PreconditionError("exact oracle: only binary visible units can be enumerated");
    }
    if (p.n_visible() + p.n_hidden() > kMaxUnits) {
        throw SizeLimitError("exact oracle: " + std::to_string(p.n_visible() + p.n_hidden()) +
                             " units exceeds the enumeration cap of " + std::to_string(kMaxUnits));
    }
}

Vector state_from_index(std::size_t index, std::size_t n_units) {
    Vector s(n_units);
    for (std::size_t i = 0; i < n_units; ++i) s[i] = static_cast<double>((index >> i) & 1u);
    return s;
}

std::size_t index_from_state(std::span<const double> state) {
    std::size_t index = 0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (state[i] != 0.0) index |= std::size_t{1} << i;
    }
    return index;
}

namespace {

std::vector<Vector> all_states(std::size_t n) {
    std::vector<Vector> states;
    states.reserve(std::size_t{1} << n);
    for (std::size_t s = 0; s < (std::size_t{1} << n); ++s) states.push_back(state_from_index(s, n));
    return states;
}

}  // namespace

double log_partition_function(const RbmParams& p) {
    require_enumerable(p);
    const auto hs = all_states(p.n_hidden());
    std::vector<double> terms;
    terms.reserve((std::size_t{1} << p.n_visible()) * hs.size());
    for (std::size_t vi = 0; vi < (std::size_t{1} << p.n_visible()); ++vi) {
        const Vector v = state_from_index(vi, p.n_visible());
        for (const auto& h : hs) terms.push_back(-energy(p, v, h));
    }
    return log_sum_exp(terms);
}

double log_unnormalized_marginal(const RbmParams& p, std::span<const double> v) {
    require_enumerable(p);
    std::vector<double> terms;
    for (std::size_t hi = 0; hi < (std::size_t{1} << p.n_hidden()); ++hi) {
        terms.push_back(-energy(p, v, state_from_index(hi, p.n_hidden())));
    }
    return log_sum_exp(terms);
}

std::vector<double> visible_marginal(const RbmParams& p) {
    const double log_z = log_partition_function(p);
    std::vector<double> table(std::size_t{1} << p.n_visible());
    for (std::size_t vi = 0; vi < table.size(); ++vi) {
        table[vi] = std::exp(log_unnormalized_marginal(p, state_from_index(vi, p.n_visible())) - log_z);
    }
    return table;
}

double mean_log_likelihood(const RbmParams& p, const Matrix& data) {
    if (data.rows() == 0) throw PreconditionError("mean_log_likelihood: empty dataset");
    if (data.cols() != p.n_visible()) throw DimensionError("mean_log_likelihood: data width");
    const double log_z = log_partition_function(p);
    CompensatedSum s;
    for (std::size_t r = 0; r < data.rows(); ++r) s.add(log_unnormalized_marginal(p, data.row(r)) - log_z);
    return s.value() / static_cast<double>(data.rows());
}

namespace {

// Accumulates sum_w w * (v h^T, v, h) with compensation on every entry.
struct StatsAccumulator {
    std::size_t nv, nh;
    std::vector<CompensatedSum> vh, v, h;

    StatsAccumulator(std::size_t nv, std::size_t nh) : nv(nv), nh(nh), vh(nv * nh), v(nv), h(nh) {}

    void add(double weight, std::span<const double> vs, std::span<const double> hs) {
        for (std::size_t i = 0; i < nv; ++i) {
            v[i].add(weight * vs[i]);
            for (std::size_t j = 0; j < nh; ++j) vh[i * nh + j].add(weight * vs[i] * hs[j]);
        }
        for (std::size_t j = 0; j < nh; ++j) h[j].add(weight * hs[j]);
    }

    GradientStats finish(double scale, std::size_t count) const {
        GradientStats s{Matrix(nv, nh), Vector(nv), Vector(nh), count};
        for (std::size_t k = 0; k < vh.size(); ++k) s.vh.data()[k] = vh[k].value() * scale;
        for (std::size_t i = 0; i < nv; ++i) s.v[i] = v[i].value() * scale;
        for (std::size_t j = 0; j < nh; ++j) s.h[j] = h[j].value() * scale;
        return s;
    }
};

}  // namespace

ExactGradient exact_gradient(const RbmParams& p, const Matrix& data) {
    require_enumerable(p);
    if (data.rows() == 0) throw PreconditionError("exact_gradient: empty dataset");
    if (data.cols() != p.n_visible()) throw DimensionError("exact_gradient: data width");
    const auto hs = all_states(p.n_hidden());

    StatsAccumulator pos(p.n_visible(), p.n_hidden());
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const auto v = data.row(r);
        const double log_norm = log_unnormalized_marginal(p, v);
        for (const auto& h : hs) pos.add(std::exp(-energy(p, v, h) - log_norm), v, h);
    }

    const double log_z = log_partition_function(p);
    StatsAccumulator neg(p.n_visible(), p.n_hidden());
    const std::size_t n_vis_states = std::size_t{1} << p.n_visible();
    for (std::size_t vi = 0; vi < n_vis_states; ++vi) {
        const Vector v = state_from_index(vi, p.n_visible());
        for (const auto& h : hs) neg.add(std::exp(-energy(p, v, h) - log_z), v, h);
    }
    return {pos.finish(1.0 / static_cast<double>(data.rows()), data.rows()),
            neg.finish(1.0, n_vis_states * hs.size())};
}

ParamGradient difference(const GradientStats& pos, const GradientStats& neg) {
    ParamGradient g{pos.vh, pos.v, pos.h};
    for (std::size_t k = 0; k < g.W.size(); ++k) g.W.data()[k] -= neg.vh.data()[k];
    for (std::size_t i = 0; i < g.a.size(); ++i) g.a[i] -= neg.v[i];
    for (std::size_t j = 0; j < g.b.size(); ++j) g.b[j] -= neg.h[j];
    return g;
}

ParamGradient finite_diff_loglik_grad(const RbmParams& p, const Matrix& data, double step) {
    require_enumerable(p);
    if (!(step >= 1e-7 && step <= 1e-3)) {
        throw PreconditionError("finite_diff_loglik_grad: step must lie in [1e-7, 1e-3]");
    }
    RbmParams probe = p;
    auto central = [&](double& x) {
        const double saved = x;
        x = saved + step;
        const double up = mean_log_likelihood(probe, data);
        x = saved - step;
        const double down = mean_log_likelihood(probe, data);
        x = saved;
        return (up - down) / (2.0 * step);
    };
    ParamGradient g{Matrix(p.n_visible(), p.n_hidden()), Vector(p.n_visible()), Vector(p.n_hidden())};
    for (std::size_t k = 0; k < g.W.size(); ++k) g.W.data()[k] = central(probe.W.data()[k]);
    for (std::size_t i = 0; i < g.a.size(); ++i) g.a[i] = central(probe.a[i]);
    for (std::size_t j = 0; j < g.b.size(); ++j) g.b[j] = central(probe.b[j]);
    return g;
}

namespace {

double max_abs_diff(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DimensionError("max_abs_diff: size mismatch");
    double m = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) m = std::max(m, std::abs(x[k] - y[k]));
    return m;
}

}  // namespace

double max_abs_diff(const ParamGradient& x, const ParamGradient& y) {
    return std::max({max_abs_diff(x.W.data(), y.W.data()), max_abs_diff(x.a, y.a), max_abs_diff(x.b, y.b)});
}

double max_abs_diff(const GradientStats& x, const GradientStats& y) {
    return std::max({max_abs_diff(x.vh.data(), y.vh.data()), max_abs_diff(x.v, y.v), max_abs_diff(x.h, y.h)});
}

}  // namespace fepcd::oracle
