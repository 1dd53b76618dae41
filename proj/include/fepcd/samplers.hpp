#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fepcd/matrix.hpp"
#include "fepcd/rbm.hpp"
#include "fepcd/rng.hpp"

namespace fepcd {

/// Persistent fantasy particles: one visible state and one private random
/// stream per chain. Chain c always draws from streams[c].
struct ChainPool {
    Matrix states;
    std::vector<RngStream> streams;
    std::uint64_t age = 0;

    std::size_t size() const { return states.rows(); }

    // n_chains chains seeded from the rows of `init` (cycled when there are
    // fewer rows than chains). Binary pools draw each unit as Bernoulli(x)
    // from the chain's own stream so states start in {0,1}; Gaussian pools
    // copy the rows. Chain c uses RngStream(seed, stream_base + c).
    static ChainPool from_data(const Matrix& init, std::size_t n_chains, VisibleKind kind,
                               std::uint64_t seed, std::uint64_t stream_base = 0);
};

struct GibbsResult {
    Vector v;       // new visible state (sampled)
    Vector h_prob;  // P(h = 1 | v) for the new state
};

// One sweep v -> h ~ P(h|v) -> v' ~ P(v|h).
GibbsResult gibbs_step(const RbmParams& p, std::span<const double> v, RngStream& rng);
GibbsResult gibbs_step(const Conditionals& cond, std::span<const double> v, RngStream& rng);

struct PhaseStats {
    GradientStats pos;
    GradientStats neg;
};

// CD-k. Row r of the batch runs its chain on rng.derive-ed stream r, keyed by
// one draw from `rng`, so results are independent of `threads`.
PhaseStats cd_k(const RbmParams& p, const Matrix& data_batch, std::size_t k, RngStream& rng,
                std::size_t threads = 1);

// Advances every chain k sweeps; returns the hidden probabilities of the new states.
Matrix advance_chains(const RbmParams& p, ChainPool& pool, std::size_t k, std::size_t threads = 1);

// PCD negative phase: advance all chains, average all of them.
GradientStats pcd_step(const RbmParams& p, ChainPool& pool, std::size_t k, std::size_t threads = 1);

// Number of elites kept out of n: ceil(fraction * n), at least 1.
std::size_t elite_count(std::size_t n, double elite_fraction);

// Indices (ascending) of the elite_count() entries with the lowest free
// energy; ties go to the lower index.
std::vector<std::size_t> select_lowest(std::span<const double> free_energies, double elite_fraction);

std::vector<std::size_t> select_elite(const RbmParams& p, const Matrix& states, double elite_fraction,
                                      std::size_t threads = 1);

// FEPCD negative phase: advance all chains exactly like pcd_step, then
// average only the chains whose new state has the lowest free energy.
// Non-elite chains keep their advanced state.
GradientStats fepcd_step(const RbmParams& p, ChainPool& pool, std::size_t k, double elite_fraction,
                         std::size_t threads = 1);

}  // namespace fepcd
