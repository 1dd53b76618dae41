#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fepcd/matrix.hpp"
#include "fepcd/rbm.hpp"
#include "fepcd/trainer.hpp"

namespace fepcd {

/// An RBM whose visible layer is [features, one-hot label]; the last
/// n_classes visible units are the label units.
struct LabeledRbm {
    RbmParams params;
    std::size_t n_classes = 0;

    std::size_t n_features() const { return params.n_visible() - n_classes; }
    void validate() const;

    friend bool operator==(const LabeledRbm&, const LabeledRbm&) = default;
};

/// Greedily trained stack. Layer 0 sees the input; layer L+1 sees the hidden
/// probabilities of layer L. When top_label_units > 0 the top layer carries
/// that many extra label units at the end of its visible side.
struct DbnModel {
    std::vector<RbmParams> layers;
    std::size_t top_label_units = 0;

    void validate() const;

    friend bool operator==(const DbnModel&, const DbnModel&) = default;
};

struct DenseLayer {
    Matrix W;  // n_in x n_out
    Vector b;

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Logistic hidden layers followed by a softmax output layer.
struct FeedforwardNet {
    std::vector<DenseLayer> layers;

    std::size_t n_inputs() const { return layers.empty() ? 0 : layers.front().W.rows(); }
    std::size_t n_outputs() const { return layers.empty() ? 0 : layers.back().W.cols(); }
    void validate() const;

    friend bool operator==(const FeedforwardNet&, const FeedforwardNet&) = default;
};

// Hidden probabilities of layer `upto` (0-based), feeding probabilities (not
// samples) upward. Label units of a label-augmented top layer are held at 0.
Vector propagate_up(const DbnModel& dbn, std::span<const double> v, std::size_t upto);
Matrix propagate_up(const DbnModel& dbn, const Matrix& v_batch, std::size_t upto, std::size_t threads = 1);

// Seed used for layer L of a stack; layer 0 uses the stack seed itself.
std::uint64_t layer_seed(std::uint64_t seed, std::size_t layer);

struct PretrainResult {
    DbnModel model;
    std::vector<std::vector<EpochMetrics>> metrics;  // per layer
};

/// Greedy layer-wise pretraining.
///
/// sizes = {input_dim, hidden_0, hidden_1, ...}; one Hyperparams and one
/// Estimator per layer. Layer L starts from initial_params(..., layer_seed(seed, L))
/// and trains with train_rbm under the same seed. Only layer 0 may use
/// Gaussian visibles.
PretrainResult pretrain_stack(const std::vector<std::size_t>& sizes, const Matrix& data,
                              const std::vector<Hyperparams>& hps,
                              const std::vector<Estimator>& estimators, std::uint64_t seed,
                              VisibleKind input_kind = VisibleKind::Binary);

// Concatenates one-hot labels after the features. Labels must lie in [0, n_classes).
Matrix with_one_hot(const Matrix& features, std::span<const int> labels, std::size_t n_classes);

struct DiscriminativeResult {
    LabeledRbm model;
    std::vector<EpochMetrics> metrics;
};

// Trains a generative RBM on [features, one-hot(label)].
DiscriminativeResult train_discriminative_rbm(const Matrix& features, const std::vector<int>& labels,
                                              std::size_t n_classes, std::size_t n_hidden,
                                              const Hyperparams& hp, Estimator estimator,
                                              std::uint64_t seed,
                                              VisibleKind kind = VisibleKind::Binary,
                                              const EpochObserver& observer = {});

/// Stack whose top layer is a label-augmented RBM: layers 0..L-2 are
/// pretrained generatively as in pretrain_stack, then the top layer is
/// trained with train_discriminative_rbm on [propagated features, one-hot].
/// The result has top_label_units = n_classes.
PretrainResult pretrain_discriminative_stack(const std::vector<std::size_t>& sizes, const Matrix& data,
                                             const std::vector<int>& labels, std::size_t n_classes,
                                             const std::vector<Hyperparams>& hps,
                                             const std::vector<Estimator>& estimators, std::uint64_t seed,
                                             VisibleKind input_kind = VisibleKind::Binary);

struct Classification {
    std::size_t label = 0;
    Vector scores;         // P(y = c | v), sums to 1
    Vector free_energies;  // F([v, one_hot(c)])
};

// Clamps each one-hot label in turn and picks the lowest free energy; ties go
// to the lower class index. `features` excludes the label units.
Classification classify_free_energy(const LabeledRbm& model, std::span<const double> features);

std::vector<std::size_t> classify_batch(const LabeledRbm& model, const Matrix& features,
                                        std::size_t threads = 1);

// Classifies with the label-augmented top layer of a stack.
std::vector<std::size_t> classify_batch(const DbnModel& dbn, const Matrix& features, std::size_t threads = 1);

double error_rate(std::span<const std::size_t> predicted, std::span<const int> labels);

// Copies W and hidden biases of every layer (visible biases and any label
// rows are dropped) and appends a fresh n_classes softmax layer with
// Normal(0, 0.01^2) weights from RngStream(seed, streams::kOutputLayer).
FeedforwardNet unroll_to_network(const DbnModel& dbn, std::size_t n_classes, std::uint64_t seed);

// Activations of every layer; element 0 is the input, the last is the softmax output.
std::vector<Vector> forward(const FeedforwardNet& net, std::span<const double> x);
Vector predict_proba(const FeedforwardNet& net, std::span<const double> x);
std::vector<std::size_t> predict_batch(const FeedforwardNet& net, const Matrix& x, std::size_t threads = 1);

// Mean cross-entropy over `rows`; when `grad` is non-null it receives the
// gradient of that mean with respect to every weight and bias.
double cross_entropy(const FeedforwardNet& net, const Matrix& x, std::span<const int> labels,
                     std::span<const std::size_t> rows, std::vector<DenseLayer>* grad = nullptr);

struct FineTuneMetrics {
    std::size_t epoch = 0;
    double cross_entropy = 0.0;
    double train_error = 0.0;
    double seconds = 0.0;
};

struct FineTuneResult {
    FeedforwardNet net;
    double initial_cross_entropy = 0.0;
    std::vector<FineTuneMetrics> metrics;
};

// Minibatch gradient descent on cross-entropy with momentum and L2 weight
// decay (hp.epsilon, hp.momentum, hp.weight_decay, hp.batch_size, hp.epochs).
// Throws DivergenceError on non-finite weights.
FineTuneResult fine_tune(const FeedforwardNet& net, const Matrix& x, const std::vector<int>& labels,
                         const Hyperparams& hp, std::uint64_t seed);

}  // namespace fepcd
