#include "fepcd/dbn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "fepcd/errors.hpp"
#include "fepcd/math.hpp"
#include "fepcd/parallel.hpp"

namespace fepcd {

void LabeledRbm::validate() const {
    params.validate();
    if (n_classes < 2 || n_classes >= params.n_visible()) {
        throw DimensionError("LabeledRbm: " + std::to_string(n_classes) + " label units on a " +
                             std::to_string(params.n_visible()) + "-unit visible layer");
    }
}

void DbnModel::validate() const {
    if (layers.empty()) throw DimensionError("DbnModel: no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].validate();
        if (l > 0 && layers[l].visible_kind != VisibleKind::Binary) {
            throw DimensionError("DbnModel: only layer 0 may have Gaussian visibles");
        }
        if (l + 1 < layers.size()) {
            const std::size_t extra = (l + 2 == layers.size()) ? top_label_units : 0;
            if (layers[l].n_hidden() + extra != layers[l + 1].n_visible()) {
                throw DimensionError("DbnModel: layer " + std::to_string(l) + " has " +
                                     std::to_string(layers[l].n_hidden()) + " hidden units but layer " +
                                     std::to_string(l + 1) + " expects " +
                                     std::to_string(layers[l + 1].n_visible() - extra));
            }
        }
    }
    if (layers.size() == 1 && top_label_units >= layers[0].n_visible()) {
        throw DimensionError("DbnModel: label units exceed the visible layer");
    }
}

void FeedforwardNet::validate() const {
    if (layers.empty()) throw DimensionError("FeedforwardNet: no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.W.cols() != layer.b.size()) throw DimensionError("FeedforwardNet: bias length");
        if (l > 0 && layers[l - 1].W.cols() != layer.W.rows()) {
            throw DimensionError("FeedforwardNet: layer " + std::to_string(l) + " input width");
        }
        if (!layer.W.all_finite()) throw PreconditionError("FeedforwardNet: non-finite weight");
        for (double x : layer.b) {
            if (!std::isfinite(x)) throw PreconditionError("FeedforwardNet: non-finite bias");
        }
    }
}

namespace {

// Input width seen by layer l, excluding label units.
std::size_t feature_width(const DbnModel& dbn, std::size_t l) {
    const bool top = l + 1 == dbn.layers.size();
    return dbn.layers[l].n_visible() - (top ? dbn.top_label_units : 0);
}

void propagate_layer(const RbmParams& layer, std::span<const double> in, std::span<double> out) {
    std::copy(layer.b.begin(), layer.b.end(), out.begin());
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] != 0.0) axpy(in[i], layer.W.row(i), out);
    }
    for (double& x : out) x = sigmoid(x);
}

}  // namespace

Vector propagate_up(const DbnModel& dbn, std::span<const double> v, std::size_t upto) {
    if (upto >= dbn.layers.size()) {
        throw DimensionError("propagate_up: layer " + std::to_string(upto) + " of " +
                             std::to_string(dbn.layers.size()));
    }
    Vector current(v.begin(), v.end());
    for (std::size_t l = 0; l <= upto; ++l) {
        if (current.size() != feature_width(dbn, l)) throw DimensionError("propagate_up: input width");
        Vector next(dbn.layers[l].n_hidden());
        propagate_layer(dbn.layers[l], current, next);
        current = std::move(next);
    }
    return current;
}

Matrix propagate_up(const DbnModel& dbn, const Matrix& v_batch, std::size_t upto, std::size_t threads) {
    if (upto >= dbn.layers.size()) throw DimensionError("propagate_up: layer index out of range");
    Matrix out(v_batch.rows(), dbn.layers[upto].n_hidden());
    parallel_for(v_batch.rows(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const Vector h = propagate_up(dbn, v_batch.row(r), upto);
            std::copy(h.begin(), h.end(), out.row(r).begin());
        }
    });
    return out;
}

std::uint64_t layer_seed(std::uint64_t seed, std::size_t layer) {
    if (layer == 0) return seed;
    return RngStream(seed, 0x1A7E5EEDull).derive(layer).next_u64();
}

PretrainResult pretrain_stack(const std::vector<std::size_t>& sizes, const Matrix& data,
                              const std::vector<Hyperparams>& hps,
                              const std::vector<Estimator>& estimators, std::uint64_t seed,
                              VisibleKind input_kind) {
    if (sizes.size() < 2) throw DimensionError("pretrain_stack: need an input size and at least one layer");
    if (sizes[0] != data.cols()) {
        throw DimensionError("pretrain_stack: sizes[0]=" + std::to_string(sizes[0]) + " but data has " +
                             std::to_string(data.cols()) + " columns");
    }
    const std::size_t n_layers = sizes.size() - 1;
    if (hps.size() != n_layers || estimators.size() != n_layers) {
        throw DimensionError("pretrain_stack: one hyperparameter set and estimator per layer required");
    }
    PretrainResult result;
    Matrix layer_input = data;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const VisibleKind kind = l == 0 ? input_kind : VisibleKind::Binary;
        const std::uint64_t s = layer_seed(seed, l);
        auto trained = train_rbm(initial_params(sizes[l], sizes[l + 1], kind, s), layer_input, hps[l],
                                 estimators[l], s);
        result.model.layers.push_back(std::move(trained.params));
        result.metrics.push_back(std::move(trained.metrics));
        if (l + 1 < n_layers) {
            layer_input = propagate_up(DbnModel{{result.model.layers.back()}, 0}, layer_input, 0, hps[l].threads);
        }
    }
    return result;
}

Matrix with_one_hot(const Matrix& features, std::span<const int> labels, std::size_t n_classes) {
    if (labels.size() != features.rows()) throw DimensionError("with_one_hot: label count");
    Matrix out(features.rows(), features.cols() + n_classes);
    for (std::size_t r = 0; r < features.rows(); ++r) {
        if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= n_classes) {
            throw PreconditionError("with_one_hot: label " + std::to_string(labels[r]) + " outside [0, " +
                                    std::to_string(n_classes) + ")");
        }
        const auto src = features.row(r);
        std::copy(src.begin(), src.end(), out.row(r).begin());
        out(r, features.cols() + static_cast<std::size_t>(labels[r])) = 1.0;
    }
    return out;
}

DiscriminativeResult train_discriminative_rbm(const Matrix& features, const std::vector<int>& labels,
                                              std::size_t n_classes, std::size_t n_hidden,
                                              const Hyperparams& hp, Estimator estimator,
                                              std::uint64_t seed, VisibleKind kind,
                                              const EpochObserver& observer) {
    if (n_classes < 2) throw PreconditionError("train_discriminative_rbm: need at least 2 classes");
    if (labels.empty()) throw PreconditionError("train_discriminative_rbm: labels required");
    const Matrix visible = with_one_hot(features, labels, n_classes);
    auto trained = train_rbm(initial_params(visible.cols(), n_hidden, kind, seed), visible, hp, estimator,
                             seed, observer);
    return {{std::move(trained.params), n_classes}, std::move(trained.metrics)};
}

PretrainResult pretrain_discriminative_stack(const std::vector<std::size_t>& sizes, const Matrix& data,
                                             const std::vector<int>& labels, std::size_t n_classes,
                                             const std::vector<Hyperparams>& hps,
                                             const std::vector<Estimator>& estimators, std::uint64_t seed,
                                             VisibleKind input_kind) {
    if (sizes.size() < 2) throw DimensionError("pretrain_discriminative_stack: need at least one layer");
    if (hps.size() != sizes.size() - 1 || estimators.size() != sizes.size() - 1) {
        throw DimensionError("pretrain_discriminative_stack: one hyperparameter set and estimator per layer required");
    }
    const std::size_t top = sizes.size() - 2;
    PretrainResult result;
    Matrix top_input = data;
    if (top > 0) {
        result = pretrain_stack(std::vector<std::size_t>(sizes.begin(), sizes.end() - 1), data,
                                std::vector<Hyperparams>(hps.begin(), hps.end() - 1),
                                std::vector<Estimator>(estimators.begin(), estimators.end() - 1), seed, input_kind);
        top_input = propagate_up(result.model, data, top - 1, hps[top].threads);
    } else if (sizes[0] != data.cols()) {
        throw DimensionError("pretrain_discriminative_stack: sizes[0] does not match the data width");
    }
    auto trained = train_discriminative_rbm(top_input, labels, n_classes, sizes.back(), hps[top], estimators[top],
                                            layer_seed(seed, top), top == 0 ? input_kind : VisibleKind::Binary);
    result.model.layers.push_back(std::move(trained.model.params));
    result.model.top_label_units = n_classes;
    result.metrics.push_back(std::move(trained.metrics));
    return result;
}

Classification classify_free_energy(const LabeledRbm& model, std::span<const double> features) {
    const RbmParams& p = model.params;
    const std::size_t d = model.n_features();
    const std::size_t n_classes = model.n_classes;
    if (features.size() != d) {
        throw DimensionError("classify_free_energy: expected " + std::to_string(d) + " features, got " +
                             std::to_string(features.size()));
    }
    // Hidden input and visible energy shared by every label choice.
    Vector input(p.b);
    double visible = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        if (features[i] != 0.0) axpy(features[i], p.W.row(i), input);
        if (p.visible_kind == VisibleKind::Binary) {
            visible -= features[i] * p.a[i];
        } else {
            const double diff = features[i] - p.a[i];
            visible += 0.5 * diff * diff;
        }
    }
    double label_quadratic = 0.0;  // Gaussian: sum_c (0 - a_c)^2 / 2
    if (p.visible_kind == VisibleKind::Gaussian) {
        for (std::size_t c = 0; c < n_classes; ++c) label_quadratic += 0.5 * p.a[d + c] * p.a[d + c];
    }

    Classification out{0, Vector(n_classes), Vector(n_classes)};
    for (std::size_t c = 0; c < n_classes; ++c) {
        const auto label_row = p.W.row(d + c);
        const double ac = p.a[d + c];
        double f = visible;
        if (p.visible_kind == VisibleKind::Binary) {
            f -= ac;
        } else {
            f += label_quadratic - 0.5 * ac * ac + 0.5 * (1.0 - ac) * (1.0 - ac);
        }
        for (std::size_t j = 0; j < input.size(); ++j) f -= log1p_exp(input[j] + label_row[j]);
        out.free_energies[c] = f;
        if (f < out.free_energies[out.label]) out.label = c;
    }
    const double best = out.free_energies[out.label];
    double total = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        out.scores[c] = std::exp(best - out.free_energies[c]);
        total += out.scores[c];
    }
    for (double& s : out.scores) s /= total;
    return out;
}

std::vector<std::size_t> classify_batch(const LabeledRbm& model, const Matrix& features, std::size_t threads) {
    std::vector<std::size_t> out(features.rows());
    parallel_for(features.rows(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) out[r] = classify_free_energy(model, features.row(r)).label;
    });
    return out;
}

std::vector<std::size_t> classify_batch(const DbnModel& dbn, const Matrix& features, std::size_t threads) {
    dbn.validate();
    if (dbn.top_label_units == 0) throw PreconditionError("classify_batch: stack has no label units");
    const LabeledRbm top{dbn.layers.back(), dbn.top_label_units};
    if (dbn.layers.size() == 1) return classify_batch(top, features, threads);
    return classify_batch(top, propagate_up(dbn, features, dbn.layers.size() - 2, threads), threads);
}

double error_rate(std::span<const std::size_t> predicted, std::span<const int> labels) {
    if (predicted.size() != labels.size() || predicted.empty()) {
        throw DimensionError("error_rate: prediction/label count mismatch");
    }
    std::size_t wrong = 0;
    for (std::size_t r = 0; r < predicted.size(); ++r) {
        if (predicted[r] != static_cast<std::size_t>(labels[r])) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

FeedforwardNet unroll_to_network(const DbnModel& dbn, std::size_t n_classes, std::uint64_t seed) {
    dbn.validate();
    if (n_classes < 2) throw PreconditionError("unroll_to_network: need at least 2 classes");
    FeedforwardNet net;
    for (std::size_t l = 0; l < dbn.layers.size(); ++l) {
        const auto& layer = dbn.layers[l];
        const std::size_t width = feature_width(dbn, l);
        DenseLayer dense{Matrix(width, layer.n_hidden()), layer.b};
        for (std::size_t i = 0; i < width; ++i) {
            std::copy(layer.W.row(i).begin(), layer.W.row(i).end(), dense.W.row(i).begin());
        }
        net.layers.push_back(std::move(dense));
    }
    RngStream rng(seed, streams::kOutputLayer);
    DenseLayer output{Matrix(dbn.layers.back().n_hidden(), n_classes), Vector(n_classes, 0.0)};
    for (double& w : output.W.data()) w = 0.01 * gaussian_sample(0.0, rng);
    net.layers.push_back(std::move(output));
    return net;
}

std::vector<Vector> forward(const FeedforwardNet& net, std::span<const double> x) {
    if (x.size() != net.n_inputs()) throw DimensionError("forward: input width");
    std::vector<Vector> acts;
    acts.reserve(net.layers.size() + 1);
    acts.emplace_back(x.begin(), x.end());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        Vector z(layer.b);
        const Vector& in = acts.back();
        for (std::size_t i = 0; i < in.size(); ++i) {
            if (in[i] != 0.0) axpy(in[i], layer.W.row(i), z);
        }
        if (l + 1 < net.layers.size()) {
            for (double& s : z) s = sigmoid(s);
        } else {
            const double m = *std::max_element(z.begin(), z.end());
            double total = 0.0;
            for (double& s : z) {
                s = std::exp(s - m);
                total += s;
            }
            for (double& s : z) s /= total;
        }
        acts.push_back(std::move(z));
    }
    return acts;
}

Vector predict_proba(const FeedforwardNet& net, std::span<const double> x) { return forward(net, x).back(); }

std::vector<std::size_t> predict_batch(const FeedforwardNet& net, const Matrix& x, std::size_t threads) {
    std::vector<std::size_t> out(x.rows());
    parallel_for(x.rows(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const Vector probs = predict_proba(net, x.row(r));
            out[r] = static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
        }
    });
    return out;
}

double cross_entropy(const FeedforwardNet& net, const Matrix& x, std::span<const int> labels,
                     std::span<const std::size_t> rows, std::vector<DenseLayer>* grad) {
    if (labels.size() != x.rows()) throw DimensionError("cross_entropy: label count");
    if (rows.empty()) throw PreconditionError("cross_entropy: no rows");
    if (grad) {
        grad->clear();
        for (const auto& layer : net.layers) {
            grad->push_back({Matrix(layer.W.rows(), layer.W.cols()), Vector(layer.b.size(), 0.0)});
        }
    }
    const double scale = 1.0 / static_cast<double>(rows.size());
    double loss = 0.0;
    for (std::size_t r : rows) {
        const auto label = static_cast<std::size_t>(labels[r]);
        if (labels[r] < 0 || label >= net.n_outputs()) throw PreconditionError("cross_entropy: label out of range");
        const auto acts = forward(net, x.row(r));
        loss -= std::log(std::max(acts.back()[label], 1e-300));
        if (!grad) continue;

        // delta at the softmax pre-activation: p - onehot
        Vector delta = acts.back();
        delta[label] -= 1.0;
        for (std::size_t l = net.layers.size(); l-- > 0;) {
            const Vector& in = acts[l];
            auto& g = (*grad)[l];
            for (std::size_t i = 0; i < in.size(); ++i) {
                if (in[i] != 0.0) axpy(scale * in[i], delta, g.W.row(i));
            }
            axpy(scale, delta, g.b);
            if (l == 0) break;
            Vector prev(in.size());
            const auto& W = net.layers[l].W;
            for (std::size_t i = 0; i < in.size(); ++i) {
                prev[i] = dot(W.row(i), delta) * in[i] * (1.0 - in[i]);
            }
            delta = std::move(prev);
        }
    }
    return loss * scale;
}

FineTuneResult fine_tune(const FeedforwardNet& net, const Matrix& x, const std::vector<int>& labels,
                         const Hyperparams& hp, std::uint64_t seed) {
    net.validate();
    hp.validate();
    if (labels.size() != x.rows() || x.rows() == 0) throw PreconditionError("fine_tune: labeled data required");
    FineTuneResult result{net, 0.0, {}};
    std::vector<std::size_t> order(x.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    result.initial_cross_entropy = cross_entropy(net, x, labels, order);

    std::vector<DenseLayer> velocity;
    for (const auto& layer : net.layers) {
        velocity.push_back({Matrix(layer.W.rows(), layer.W.cols()), Vector(layer.b.size(), 0.0)});
    }
    RngStream shuffle_rng(seed, streams::kShuffle);
    std::vector<DenseLayer> grad;
    using Clock = std::chrono::steady_clock;
    double elapsed = 0.0;
    for (std::size_t epoch = 1; epoch <= hp.epochs; ++epoch) {
        const auto start = Clock::now();
        shuffle(order, shuffle_rng);
        for (std::size_t begin = 0; begin < order.size(); begin += hp.batch_size) {
            const std::size_t end = std::min(order.size(), begin + hp.batch_size);
            cross_entropy(result.net, x, labels, std::span(order).subspan(begin, end - begin), &grad);
            for (std::size_t l = 0; l < grad.size(); ++l) {
                auto& layer = result.net.layers[l];
                auto& vel = velocity[l];
                for (std::size_t k = 0; k < layer.W.size(); ++k) {
                    double& w = layer.W.data()[k];
                    double& v = vel.W.data()[k];
                    v = hp.momentum * v - hp.epsilon * (grad[l].W.data()[k] + hp.weight_decay * w);
                    w += v;
                }
                for (std::size_t j = 0; j < layer.b.size(); ++j) {
                    vel.b[j] = hp.momentum * vel.b[j] - hp.epsilon * grad[l].b[j];
                    layer.b[j] += vel.b[j];
                }
            }
        }
        elapsed += std::chrono::duration<double>(Clock::now() - start).count();
        try {
            result.net.validate();
        } catch (const PreconditionError&) {
            throw DivergenceError("fine_tune diverged at epoch " + std::to_string(epoch));
        }
        std::vector<std::size_t> all(x.rows());
        std::iota(all.begin(), all.end(), std::size_t{0});
        const double ce = cross_entropy(result.net, x, labels, all);
        const auto predicted = predict_batch(result.net, x, hp.threads);
        result.metrics.push_back({epoch, ce, error_rate(predicted, labels), elapsed});
    }
    return result;
}

}  // namespace fepcd
