#include "fepcd/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fepcd/errors.hpp"
#include "fepcd/parallel.hpp"

namespace fepcd {

namespace {

void require_k(std::size_t k) {
    if (k == 0) throw PreconditionError("sampler: k must be >= 1");
}

// Runs k sweeps v -> h ~ P(h|v) -> v' ~ P(v|h) in place, leaving P(h|v_final)
// in `h_prob`. `h` is scratch of size n_hidden.
void run_chain(const Conditionals& cond, std::span<double> v, std::span<double> h,
               std::span<double> h_prob, RngStream& rng, std::size_t k) {
    const bool binary = cond.params().visible_kind == VisibleKind::Binary;
    cond.hidden_probs(v, h_prob);
    for (std::size_t step = 0; step < k; ++step) {
        for (std::size_t j = 0; j < h.size(); ++j) h[j] = bernoulli_sample(h_prob[j], rng) ? 1.0 : 0.0;
        cond.visible_probs(h, v);
        if (binary) {
            for (double& x : v) x = bernoulli_sample(x, rng) ? 1.0 : 0.0;
        } else {
            for (double& x : v) x = gaussian_sample(x, rng);
        }
        cond.hidden_probs(v, h_prob);
    }
}

}  // namespace

ChainPool ChainPool::from_data(const Matrix& init, std::size_t n_chains, VisibleKind kind,
                               std::uint64_t seed, std::uint64_t stream_base) {
    if (n_chains == 0) throw PreconditionError("ChainPool: n_chains must be >= 1");
    if (init.rows() == 0) throw PreconditionError("ChainPool: no initial rows");
    ChainPool pool{Matrix(n_chains, init.cols()), {}, 0};
    pool.streams.reserve(n_chains);
    for (std::size_t c = 0; c < n_chains; ++c) {
        pool.streams.emplace_back(seed, stream_base + c);
        const auto src = init.row(c % init.rows());
        auto dst = pool.states.row(c);
        for (std::size_t i = 0; i < src.size(); ++i) {
            dst[i] = kind == VisibleKind::Binary
                         ? (bernoulli_sample(std::clamp(src[i], 0.0, 1.0), pool.streams[c]) ? 1.0 : 0.0)
                         : src[i];
        }
    }
    return pool;
}

GibbsResult gibbs_step(const Conditionals& cond, std::span<const double> v, RngStream& rng) {
    const auto& p = cond.params();
    if (v.size() != p.n_visible()) throw DimensionError("gibbs_step: visible length mismatch");
    GibbsResult out{Vector(v.begin(), v.end()), Vector(p.n_hidden())};
    Vector h(p.n_hidden());
    run_chain(cond, out.v, h, out.h_prob, rng, 1);
    return out;
}

GibbsResult gibbs_step(const RbmParams& p, std::span<const double> v, RngStream& rng) {
    return gibbs_step(Conditionals(p), v, rng);
}

PhaseStats cd_k(const RbmParams& p, const Matrix& data_batch, std::size_t k, RngStream& rng,
                std::size_t threads) {
    require_k(k);
    if (data_batch.rows() == 0) throw PreconditionError("cd_k: empty batch");
    if (data_batch.cols() != p.n_visible()) throw DimensionError("cd_k: batch width mismatch");
    const Conditionals cond(p);
    const Matrix pos_h = cond.hidden_probs(data_batch, threads);

    const RngStream batch_key(rng.next_u64(), 0);
    Matrix chain_v = data_batch;
    Matrix chain_h(data_batch.rows(), p.n_hidden());
    parallel_for(data_batch.rows(), threads, [&](std::size_t begin, std::size_t end) {
        Vector h(p.n_hidden());
        for (std::size_t r = begin; r < end; ++r) {
            RngStream row_rng = batch_key.derive(r);
            run_chain(cond, chain_v.row(r), h, chain_h.row(r), row_rng, k);
        }
    });
    return {batch_stats(data_batch, pos_h), batch_stats(chain_v, chain_h)};
}

Matrix advance_chains(const RbmParams& p, ChainPool& pool, std::size_t k, std::size_t threads) {
    require_k(k);
    if (pool.states.cols() != p.n_visible()) throw DimensionError("advance_chains: pool width mismatch");
    if (pool.streams.size() != pool.size()) throw PreconditionError("advance_chains: one stream per chain");
    const Conditionals cond(p);
    Matrix h_prob(pool.size(), p.n_hidden());
    parallel_for(pool.size(), threads, [&](std::size_t begin, std::size_t end) {
        Vector h(p.n_hidden());
        for (std::size_t c = begin; c < end; ++c) {
            run_chain(cond, pool.states.row(c), h, h_prob.row(c), pool.streams[c], k);
        }
    });
    ++pool.age;
    return h_prob;
}

GradientStats pcd_step(const RbmParams& p, ChainPool& pool, std::size_t k, std::size_t threads) {
    const Matrix h_prob = advance_chains(p, pool, k, threads);
    return batch_stats(pool.states, h_prob);
}

std::size_t elite_count(std::size_t n, double elite_fraction) {
    if (!(elite_fraction > 0.0 && elite_fraction <= 1.0)) {
        throw PreconditionError("elite_fraction must be in (0, 1]");
    }
    // Relative slack absorbs representation error such as 0.3 * 10 = 3.0000000000000004.
    const double exact = elite_fraction * static_cast<double>(n);
    const auto count = static_cast<std::size_t>(std::ceil(exact * (1.0 - 1e-12)));
    return std::clamp<std::size_t>(count, 1, n);
}

std::vector<std::size_t> select_lowest(std::span<const double> free_energies, double elite_fraction) {
    if (free_energies.empty()) throw PreconditionError("select_elite: no states");
    const std::size_t keep = elite_count(free_energies.size(), elite_fraction);
    std::vector<std::size_t> order(free_energies.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return free_energies[x] < free_energies[y]; });
    order.resize(keep);
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<std::size_t> select_elite(const RbmParams& p, const Matrix& states, double elite_fraction,
                                      std::size_t threads) {
    if (states.rows() == 0) throw PreconditionError("select_elite: no states");
    return select_lowest(free_energies(p, states, threads), elite_fraction);
}

GradientStats fepcd_step(const RbmParams& p, ChainPool& pool, std::size_t k, double elite_fraction,
                         std::size_t threads) {
    elite_count(pool.size(), elite_fraction);
    const Matrix h_prob = advance_chains(p, pool, k, threads);
    const auto elite = select_elite(p, pool.states, elite_fraction, threads);
    return batch_stats(pool.states, h_prob, elite);
}

}  // namespace fepcd
