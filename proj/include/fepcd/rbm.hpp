#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "fepcd/matrix.hpp"
#include "fepcd/rng.hpp"

namespace fepcd {

enum class VisibleKind { Binary, Gaussian };

std::string to_string(VisibleKind kind);
VisibleKind parse_visible_kind(const std::string& text);

/// Parameters of a restricted Boltzmann machine.
///
/// W is n_visible x n_hidden with W(i, j) coupling visible unit i to hidden
/// unit j; `a` holds visible biases and `b` hidden biases. Gaussian visibles
/// have fixed unit variance.
struct RbmParams {
    Matrix W;
    Vector a;
    Vector b;
    VisibleKind visible_kind = VisibleKind::Binary;

    std::size_t n_visible() const { return a.size(); }
    std::size_t n_hidden() const { return b.size(); }

    // Throws DimensionError on inconsistent shapes and PreconditionError on non-finite entries.
    void validate() const;

    // Largest absolute parameter value, or +inf if any entry is non-finite.
    double max_abs() const;

    static RbmParams zeros(std::size_t n_visible, std::size_t n_hidden,
                           VisibleKind kind = VisibleKind::Binary);

    // W ~ Normal(0, stddev^2); a = b = 0.
    static RbmParams random_init(std::size_t n_visible, std::size_t n_hidden, VisibleKind kind,
                                 RngStream& rng, double stddev = 0.01);

    friend bool operator==(const RbmParams&, const RbmParams&) = default;
};

/// Phase statistics <v h^T>, <v>, <h>, already divided by `count`.
struct GradientStats {
    Matrix vh;
    Vector v;
    Vector h;
    std::size_t count = 0;

    friend bool operator==(const GradientStats&, const GradientStats&) = default;
};

struct Hyperparams {
    double epsilon = 0.05;
    double momentum = 0.0;
    double weight_decay = 0.0;
    std::size_t batch_size = 20;
    std::size_t epochs = 10;
    std::size_t k = 1;
    std::size_t n_chains = 20;
    double elite_fraction = 0.5;
    // Worker cap for per-row/per-chain loops; results do not depend on it.
    std::size_t threads = 1;

    // Throws PreconditionError naming the offending field.
    void validate() const;
};

// Momentum state carried between updates.
struct Velocity {
    Matrix W;
    Vector a;
    Vector b;

    static Velocity zeros_like(const RbmParams& p);
};

double energy(const RbmParams& p, std::span<const double> v, std::span<const double> h);

// P(h_j = 1 | v) for every hidden unit.
Vector hidden_probs(const RbmParams& p, std::span<const double> v);

// Binary: P(v_i = 1 | h). Gaussian: the conditional mean a_i + sum_j h_j W_ij.
Vector visible_probs(const RbmParams& p, std::span<const double> h);

// -log sum_h exp(-E(v, h)) in closed form.
double free_energy(const RbmParams& p, std::span<const double> v);

// Free energy written as mean-field energy minus hidden entropy. Equal to
// free_energy() for binary visibles; kept as an independent cross-check.
double free_energy_entropy_form(const RbmParams& p, std::span<const double> v);

/// Cached transpose of W so both conditionals stream contiguous memory.
///
/// Results are bit-identical to the free functions above.
class Conditionals {
public:
    explicit Conditionals(const RbmParams& p);

    const RbmParams& params() const { return params_; }

    void hidden_probs(std::span<const double> v, std::span<double> out) const;
    void visible_probs(std::span<const double> h, std::span<double> out) const;

    Matrix hidden_probs(const Matrix& v_batch, std::size_t threads = 1) const;
    Matrix visible_probs(const Matrix& h_batch, std::size_t threads = 1) const;

private:
    RbmParams params_;
    Matrix wt_;
};

Vector free_energies(const RbmParams& p, const Matrix& v_batch, std::size_t threads = 1);

GradientStats batch_stats(const Matrix& v_batch, const Matrix& h_prob_batch);

// Statistics over the listed rows only, accumulated in the order given.
GradientStats batch_stats(const Matrix& v_batch, const Matrix& h_prob_batch,
                          std::span<const std::size_t> rows);

// One momentum step of stochastic gradient ascent on the log-likelihood:
//   velocity <- momentum * velocity + epsilon * (pos - neg - weight_decay * W)
//   params   <- params + velocity
// Weight decay applies to W only.
void apply_update(RbmParams& p, const GradientStats& pos, const GradientStats& neg,
                  const Hyperparams& hp, Velocity& velocity);

}  // namespace fepcd
