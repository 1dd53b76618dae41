#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fepcd/matrix.hpp"
#include "fepcd/rbm.hpp"
#include "fepcd/rng.hpp"

namespace fepcd {

enum class Estimator { CD, PCD, FEPCD };

std::string to_string(Estimator e);
// Accepts "cd", "pcd", "fepcd" (any case).
Estimator parse_estimator(const std::string& text);

// Stream ids reserved by the trainer under a run seed.
namespace streams {
inline constexpr std::uint64_t kInit = 0;
inline constexpr std::uint64_t kShuffle = 1;
inline constexpr std::uint64_t kCd = 2;
inline constexpr std::uint64_t kReconstruction = 3;
inline constexpr std::uint64_t kOutputLayer = 4;
inline constexpr std::uint64_t kSubset = 5;
inline constexpr std::uint64_t kSampling = 6;
// Chain c of a persistent pool uses stream kChainBase + c.
inline constexpr std::uint64_t kChainBase = 1u << 20;
}  // namespace streams

struct EpochMetrics {
    std::size_t epoch = 0;  // 1-based
    double recon_error = 0.0;
    double mean_free_energy = 0.0;
    // Cumulative training time; excluded from reproducibility comparisons.
    double seconds = 0.0;
};

struct TrainResult {
    RbmParams params;
    std::vector<EpochMetrics> metrics;
};

// Called after each epoch with the 1-based epoch number. Time spent here is
// not counted in EpochMetrics::seconds.
using EpochObserver = std::function<void(std::size_t epoch, const RbmParams&)>;

// Default initial parameters for a run: W ~ Normal(0, 0.01^2) drawn from
// RngStream(seed, streams::kInit), zero biases.
RbmParams initial_params(std::size_t n_visible, std::size_t n_hidden, VisibleKind kind,
                         std::uint64_t seed);

/// Minibatch training of one RBM.
///
/// Each epoch shuffles the rows once and visits ceil(m / batch_size)
/// minibatches. PCD and FEPCD keep a single chain pool for the whole run,
/// seeded from the first minibatch. Throws DivergenceError when any
/// parameter becomes non-finite or exceeds 1e6 in magnitude.
TrainResult train_rbm(const RbmParams& init, const Matrix& data, const Hyperparams& hp,
                      Estimator estimator, std::uint64_t seed, const EpochObserver& observer = {});

// Mean squared difference between the batch and the visible means of its
// one-step reconstruction (hidden states sampled from rng).
double reconstruction_error(const RbmParams& p, const Matrix& batch, RngStream& rng,
                            std::size_t threads = 1);

// Header row then one row per epoch:
// epoch,recon_error,mean_free_energy,seconds,estimator,seed
void write_metrics_csv(std::ostream& out, const std::vector<EpochMetrics>& metrics,
                       Estimator estimator, std::uint64_t seed);

}  // namespace fepcd
