#include "fepcd/rbm.hpp"

#include <cmath>
#include <limits>

#include "fepcd/errors.hpp"
#include "fepcd/math.hpp"
#include "fepcd/parallel.hpp"

namespace fepcd {

namespace {

void require_size(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(want) +
                             ", got " + std::to_string(got));
    }
}

// x log x with the 0 log 0 = 0 convention.
double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void hidden_input(const RbmParams& p, std::span<const double> v, std::span<double> out) {
    std::copy(p.b.begin(), p.b.end(), out.begin());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 0.0) axpy(v[i], p.W.row(i), out);
    }
}

double visible_term(const RbmParams& p, std::span<const double> v) {
    double acc = 0.0;
    if (p.visible_kind == VisibleKind::Binary) {
        for (std::size_t i = 0; i < v.size(); ++i) acc -= v[i] * p.a[i];
    } else {
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double d = v[i] - p.a[i];
            acc += 0.5 * d * d;
        }
    }
    return acc;
}

}  // namespace

std::string to_string(VisibleKind kind) {
    return kind == VisibleKind::Binary ? "binary" : "gaussian";
}

VisibleKind parse_visible_kind(const std::string& text) {
    if (text == "binary") return VisibleKind::Binary;
    if (text == "gaussian") return VisibleKind::Gaussian;
    throw PreconditionError("unknown visible kind '" + text + "'");
}

void RbmParams::validate() const {
    if (W.rows() != a.size() || W.cols() != b.size()) {
        throw DimensionError("RbmParams: W is " + std::to_string(W.rows()) + "x" +
                             std::to_string(W.cols()) + " but |a|=" + std::to_string(a.size()) +
                             ", |b|=" + std::to_string(b.size()));
    }
    if (!std::isfinite(max_abs())) {
        throw PreconditionError("RbmParams: non-finite parameter");
    }
}

double RbmParams::max_abs() const {
    double m = 0.0;
    auto scan = [&m](const std::vector<double>& xs) {
        for (double x : xs) {
            if (!std::isfinite(x)) {
                m = std::numeric_limits<double>::infinity();
                return;
            }
            m = std::max(m, std::abs(x));
        }
    };
    scan(W.data());
    scan(a);
    scan(b);
    return m;
}

RbmParams RbmParams::zeros(std::size_t n_visible, std::size_t n_hidden, VisibleKind kind) {
    return {Matrix(n_visible, n_hidden), Vector(n_visible, 0.0), Vector(n_hidden, 0.0), kind};
}

RbmParams RbmParams::random_init(std::size_t n_visible, std::size_t n_hidden, VisibleKind kind,
                                 RngStream& rng, double stddev) {
    auto p = zeros(n_visible, n_hidden, kind);
    for (double& w : p.W.data()) w = stddev * gaussian_sample(0.0, rng);
    return p;
}

void Hyperparams::validate() const {
    auto fail = [](const std::string& msg) { throw PreconditionError("hyperparameters: " + msg); };
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) fail("epsilon must be finite and >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must be in [0, 1)");
    if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) fail("weight_decay must be >= 0");
    if (batch_size == 0) fail("batch_size must be >= 1");
    if (k == 0) fail("k must be >= 1");
    if (n_chains == 0) fail("n_chains must be >= 1");
    if (!(elite_fraction > 0.0 && elite_fraction <= 1.0)) fail("elite_fraction must be in (0, 1]");
}

Velocity Velocity::zeros_like(const RbmParams& p) {
    return {Matrix(p.W.rows(), p.W.cols()), Vector(p.a.size(), 0.0), Vector(p.b.size(), 0.0)};
}

double energy(const RbmParams& p, std::span<const double> v, std::span<const double> h) {
    require_size(v.size(), p.n_visible(), "energy(v)");
    require_size(h.size(), p.n_hidden(), "energy(h)");
    double interaction = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] == 0.0) continue;
        interaction += v[i] * dot(p.W.row(i), h);
    }
    double hidden_bias = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) hidden_bias += p.b[j] * h[j];
    return -interaction + visible_term(p, v) - hidden_bias;
}

Vector hidden_probs(const RbmParams& p, std::span<const double> v) {
    require_size(v.size(), p.n_visible(), "hidden_probs");
    Vector out(p.n_hidden());
    hidden_input(p, v, out);
    for (double& x : out) x = sigmoid(x);
    return out;
}

Vector visible_probs(const RbmParams& p, std::span<const double> h) {
    require_size(h.size(), p.n_hidden(), "visible_probs");
    Vector out(p.n_visible());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = p.a[i];
        for (std::size_t j = 0; j < h.size(); ++j) {
            if (h[j] != 0.0) acc += h[j] * p.W(i, j);
        }
        out[i] = p.visible_kind == VisibleKind::Binary ? sigmoid(acc) : acc;
    }
    return out;
}

double free_energy(const RbmParams& p, std::span<const double> v) {
    require_size(v.size(), p.n_visible(), "free_energy");
    Vector input(p.n_hidden());
    hidden_input(p, v, input);
    double f = visible_term(p, v);
    for (double x : input) f -= log1p_exp(x);
    return f;
}

double free_energy_entropy_form(const RbmParams& p, std::span<const double> v) {
    require_size(v.size(), p.n_visible(), "free_energy_entropy_form");
    Vector input(p.n_hidden());
    hidden_input(p, v, input);
    double f = visible_term(p, v);
    for (double x : input) {
        const double q = sigmoid(x);
        const double not_q = sigmoid(-x);
        f += -q * x + xlogx(q) + xlogx(not_q);
    }
    return f;
}

Conditionals::Conditionals(const RbmParams& p) : params_(p), wt_(p.W.transposed()) {
    p.validate();
}

void Conditionals::hidden_probs(std::span<const double> v, std::span<double> out) const {
    require_size(v.size(), params_.n_visible(), "hidden_probs");
    require_size(out.size(), params_.n_hidden(), "hidden_probs(out)");
    hidden_input(params_, v, out);
    for (double& x : out) x = sigmoid(x);
}

void Conditionals::visible_probs(std::span<const double> h, std::span<double> out) const {
    require_size(h.size(), params_.n_hidden(), "visible_probs");
    require_size(out.size(), params_.n_visible(), "visible_probs(out)");
    const auto& a = params_.a;
    std::copy(a.begin(), a.end(), out.begin());
    for (std::size_t j = 0; j < h.size(); ++j) {
        if (h[j] != 0.0) axpy(h[j], wt_.row(j), out);
    }
    if (params_.visible_kind == VisibleKind::Binary) {
        for (double& x : out) x = sigmoid(x);
    }
}

Matrix Conditionals::hidden_probs(const Matrix& v_batch, std::size_t threads) const {
    Matrix out(v_batch.rows(), params_.n_hidden());
    parallel_for(v_batch.rows(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) hidden_probs(v_batch.row(r), out.row(r));
    });
    return out;
}

Matrix Conditionals::visible_probs(const Matrix& h_batch, std::size_t threads) const {
    Matrix out(h_batch.rows(), params_.n_visible());
    parallel_for(h_batch.rows(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) visible_probs(h_batch.row(r), out.row(r));
    });
    return out;
}

Vector free_energies(const RbmParams& p, const Matrix& v_batch, std::size_t threads) {
    Vector out(v_batch.rows());
    parallel_for(v_batch.rows(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) out[r] = free_energy(p, v_batch.row(r));
    });
    return out;
}

GradientStats batch_stats(const Matrix& v_batch, const Matrix& h_prob_batch,
                          std::span<const std::size_t> rows) {
    if (v_batch.rows() != h_prob_batch.rows()) {
        throw DimensionError("batch_stats: " + std::to_string(v_batch.rows()) + " visible rows vs " +
                             std::to_string(h_prob_batch.rows()) + " hidden rows");
    }
    if (rows.empty()) {
        throw PreconditionError("batch_stats: no rows");
    }
    const std::size_t nv = v_batch.cols();
    const std::size_t nh = h_prob_batch.cols();
    GradientStats s{Matrix(nv, nh), Vector(nv, 0.0), Vector(nh, 0.0), rows.size()};
    for (std::size_t r : rows) {
        const auto v = v_batch.row(r);
        const auto h = h_prob_batch.row(r);
        for (std::size_t i = 0; i < nv; ++i) {
            if (v[i] == 0.0) continue;
            axpy(v[i], h, s.vh.row(i));
            s.v[i] += v[i];
        }
        for (std::size_t j = 0; j < nh; ++j) s.h[j] += h[j];
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& x : s.vh.data()) x *= inv;
    for (double& x : s.v) x *= inv;
    for (double& x : s.h) x *= inv;
    return s;
}

GradientStats batch_stats(const Matrix& v_batch, const Matrix& h_prob_batch) {
    std::vector<std::size_t> rows(v_batch.rows());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
    return batch_stats(v_batch, h_prob_batch, rows);
}

void apply_update(RbmParams& p, const GradientStats& pos, const GradientStats& neg,
                  const Hyperparams& hp, Velocity& velocity) {
    const std::size_t nv = p.n_visible();
    const std::size_t nh = p.n_hidden();
    for (const GradientStats* s : {&pos, &neg}) {
        if (s->vh.rows() != nv || s->vh.cols() != nh || s->v.size() != nv || s->h.size() != nh) {
            throw DimensionError("apply_update: statistics do not match model shape");
        }
    }
    if (velocity.W.rows() != nv || velocity.W.cols() != nh || velocity.a.size() != nv ||
        velocity.b.size() != nh) {
        velocity = Velocity::zeros_like(p);
    }
    auto& w = p.W.data();
    auto& vw = velocity.W.data();
    const auto& pvh = pos.vh.data();
    const auto& nvh = neg.vh.data();
    for (std::size_t k = 0; k < w.size(); ++k) {
        vw[k] = hp.momentum * vw[k] + hp.epsilon * (pvh[k] - nvh[k]) - hp.epsilon * hp.weight_decay * w[k];
        w[k] += vw[k];
    }
    for (std::size_t i = 0; i < nv; ++i) {
        velocity.a[i] = hp.momentum * velocity.a[i] + hp.epsilon * (pos.v[i] - neg.v[i]);
        p.a[i] += velocity.a[i];
    }
    for (std::size_t j = 0; j < nh; ++j) {
        velocity.b[j] = hp.momentum * velocity.b[j] + hp.epsilon * (pos.h[j] - neg.h[j]);
        p.b[j] += velocity.b[j];
    }
}

}  // namespace fepcd
