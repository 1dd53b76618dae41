#include "fepcd/trainer.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>

#include "fepcd/errors.hpp"
#include "fepcd/parallel.hpp"
#include "fepcd/samplers.hpp"

namespace fepcd {

namespace {

constexpr double kDivergenceLimit = 1e6;

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

void check_divergence(const RbmParams& p, std::size_t epoch, std::size_t update) {
    const double m = p.max_abs();
    if (!(m <= kDivergenceLimit)) {
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch) + ", update " +
                              std::to_string(update) + ": max |parameter| = " + std::to_string(m));
    }
}

}  // namespace

std::string to_string(Estimator e) {
    switch (e) {
        case Estimator::CD: return "cd";
        case Estimator::PCD: return "pcd";
        case Estimator::FEPCD: return "fepcd";
    }
    return "?";
}

Estimator parse_estimator(const std::string& text) {
    const auto t = lower(text);
    if (t == "cd") return Estimator::CD;
    if (t == "pcd") return Estimator::PCD;
    if (t == "fepcd") return Estimator::FEPCD;
    throw PreconditionError("unknown estimator '" + text + "' (expected cd, pcd or fepcd)");
}

RbmParams initial_params(std::size_t n_visible, std::size_t n_hidden, VisibleKind kind,
                         std::uint64_t seed) {
    RngStream rng(seed, streams::kInit);
    return RbmParams::random_init(n_visible, n_hidden, kind, rng);
}

double reconstruction_error(const RbmParams& p, const Matrix& batch, RngStream& rng,
                            std::size_t threads) {
    if (batch.rows() == 0) throw PreconditionError("reconstruction_error: empty batch");
    if (batch.cols() != p.n_visible()) throw DimensionError("reconstruction_error: batch width");
    const Conditionals cond(p);
    const RngStream key(rng.next_u64(), 0);
    std::vector<double> row_error(batch.rows());
    parallel_for(batch.rows(), threads, [&](std::size_t begin, std::size_t end) {
        Vector h(p.n_hidden());
        Vector v(p.n_visible());
        for (std::size_t r = begin; r < end; ++r) {
            RngStream row_rng = key.derive(r);
            cond.hidden_probs(batch.row(r), h);
            for (double& x : h) x = bernoulli_sample(x, row_rng) ? 1.0 : 0.0;
            cond.visible_probs(h, v);
            double e = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double d = batch(r, i) - v[i];
                e += d * d;
            }
            row_error[r] = e;
        }
    });
    const double total = std::accumulate(row_error.begin(), row_error.end(), 0.0);
    return total / static_cast<double>(batch.size());
}

TrainResult train_rbm(const RbmParams& init, const Matrix& data, const Hyperparams& hp,
                      Estimator estimator, std::uint64_t seed, const EpochObserver& observer) {
    init.validate();
    hp.validate();
    if (data.rows() == 0) throw PreconditionError("train_rbm: empty dataset");
    if (data.cols() != init.n_visible()) {
        throw DimensionError("train_rbm: data has " + std::to_string(data.cols()) +
                             " columns, model expects " + std::to_string(init.n_visible()));
    }

    TrainResult result{init, {}};
    RbmParams& p = result.params;
    Velocity velocity = Velocity::zeros_like(p);
    RngStream shuffle_rng(seed, streams::kShuffle);
    RngStream cd_rng(seed, streams::kCd);
    RngStream recon_rng(seed, streams::kReconstruction);
    std::optional<ChainPool> pool;

    std::vector<std::size_t> order(data.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t n_batches = (data.rows() + hp.batch_size - 1) / hp.batch_size;

    using Clock = std::chrono::steady_clock;
    double elapsed = 0.0;
    for (std::size_t epoch = 1; epoch <= hp.epochs; ++epoch) {
        const auto start = Clock::now();
        shuffle(order, shuffle_rng);
        double recon_sum = 0.0;
        for (std::size_t batch = 0; batch < n_batches; ++batch) {
            const std::size_t begin = batch * hp.batch_size;
            const std::size_t end = std::min(data.rows(), begin + hp.batch_size);
            const Matrix x = data.gather_rows(std::span(order).subspan(begin, end - begin));
            recon_sum += reconstruction_error(p, x, recon_rng, hp.threads) * static_cast<double>(x.rows());

            PhaseStats stats;
            if (estimator == Estimator::CD) {
                stats = cd_k(p, x, hp.k, cd_rng, hp.threads);
            } else {
                stats.pos = batch_stats(x, Conditionals(p).hidden_probs(x, hp.threads));
                if (!pool) {
                    pool = ChainPool::from_data(x, hp.n_chains, p.visible_kind, seed, streams::kChainBase);
                }
                stats.neg = estimator == Estimator::PCD
                                ? pcd_step(p, *pool, hp.k, hp.threads)
                                : fepcd_step(p, *pool, hp.k, hp.elite_fraction, hp.threads);
            }
            apply_update(p, stats.pos, stats.neg, hp, velocity);
            check_divergence(p, epoch, batch);
        }
        elapsed += std::chrono::duration<double>(Clock::now() - start).count();

        const Vector f = free_energies(p, data, hp.threads);
        const double mean_f = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
        result.metrics.push_back({epoch, recon_sum / static_cast<double>(data.rows()), mean_f, elapsed});
        if (observer) observer(epoch, p);
    }
    return result;
}

void write_metrics_csv(std::ostream& out, const std::vector<EpochMetrics>& metrics,
                       Estimator estimator, std::uint64_t seed) {
    out << "epoch,recon_error,mean_free_energy,seconds,estimator,seed\n";
    char buf[160];
    for (const auto& m : metrics) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.6f,", m.epoch, m.recon_error,
                      m.mean_free_energy, m.seconds);
        out << buf << to_string(estimator) << ',' << seed << '\n';
    }
}

}  // namespace fepcd
