// fepcd: train, compare and inspect RBM / DBN models.
//
//   fepcd train-rbm        --data mnist --images X --labels Y --hidden 500 --estimator fepcd --out run/
//   fepcd evaluate         --model run/model.json --data mnist --images X --labels Y
//   fepcd compare-samplers --data mnist ... --test-images ... --out compare.csv
//   fepcd sample           --model run/model.json --n 16 --steps 1000 --out samples.pgm
//   fepcd oracle-check     --visible 3 --hidden 3 --trials 25
//
// Every command accepts --config FILE with flat key=value lines (keys are the
// long flag names); flags given on the command line win.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fepcd/data_io.hpp"
#include "fepcd/dbn.hpp"
#include "fepcd/errors.hpp"
#include "fepcd/oracle.hpp"
#include "fepcd/oracle_check.hpp"
#include "fepcd/samplers.hpp"
#include "fepcd/trainer.hpp"

namespace fs = std::filesystem;
using namespace fepcd;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// MNIST defaults when --images is not given (see tools/make_mnist_subset.py).
constexpr const char* kBundledImages = "data/mnist-subset/train-images-idx3-ubyte";
constexpr const char* kBundledLabels = "data/mnist-subset/train-labels-idx1-ubyte";

// Usage, configuration and input-file problems.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataOptions {
    std::string kind = "mnist";
    std::string images, labels, csv;
    std::string test_images, test_labels, test_csv;
    std::size_t subset = 0;
    std::size_t test_subset = 0;
    std::size_t holdout = 0;
    std::string visible = "auto";
};

struct TrainOptions {
    std::string hidden = "500";
    std::string estimator = "fepcd";
    std::size_t k = 1;
    std::size_t chains = 0;  // 0: batch size
    double elite_fraction = 0.5;
    std::size_t epochs = 10;
    std::size_t batch = 20;
    double lr = 0.05;
    double momentum = 0.0;
    double decay = 0.0;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    bool generative = false;
    std::size_t finetune_epochs = 0;
    double finetune_lr = 0.1;
};

void add_data_options(CLI::App* app, DataOptions& d) {
    app->add_option("--data", d.kind, "Dataset format")->check(CLI::IsMember({"mnist", "isolet", "csv"}));
    app->add_option("--images", d.images, "MNIST IDX image file (training)")->default_str(kBundledImages);
    app->add_option("--labels", d.labels, "MNIST IDX label file (training)")->default_str(kBundledLabels);
    app->add_option("--csv", d.csv, "CSV file (training): features then label");
    app->add_option("--test-images", d.test_images, "MNIST IDX image file (test)");
    app->add_option("--test-labels", d.test_labels, "MNIST IDX label file (test)");
    app->add_option("--test-csv", d.test_csv, "CSV file (test)");
    app->add_option("--subset", d.subset, "Keep the first n training samples after a seeded shuffle (0 = all)");
    app->add_option("--test-subset", d.test_subset, "Same for the test set");
    app->add_option("--holdout", d.holdout, "Without a test file, hold out this many training samples as test set");
    app->add_option("--visible", d.visible, "Visible units")->check(CLI::IsMember({"auto", "binary", "gaussian"}));
}

void add_train_options(CLI::App* app, TrainOptions& t) {
    app->add_option("--hidden", t.hidden, "Hidden layer sizes, comma separated (more than one builds a DBN)");
    app->add_option("--estimator", t.estimator, "cd|pcd|fepcd, or a comma list with one entry per layer");
    app->add_option("--k", t.k, "Gibbs sweeps per update");
    app->add_option("--chains", t.chains, "Persistent chains (default: batch size)");
    app->add_option("--elite-fraction", t.elite_fraction, "FEPCD: fraction of chains kept");
    app->add_option("--epochs", t.epochs, "Epochs per RBM");
    app->add_option("--batch", t.batch, "Minibatch size");
    app->add_option("--lr", t.lr, "Learning rate");
    app->add_option("--momentum", t.momentum, "Momentum");
    app->add_option("--decay", t.decay, "Weight decay");
    app->add_option("--seed", t.seed, "Run seed");
    app->add_option("--threads", t.threads, "Worker threads (results do not depend on this)");
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void require_file(const std::string& path, const char* flag) {
    if (path.empty()) throw UsageError(std::string(flag) + " is required");
    if (!fs::is_regular_file(path)) throw UsageError(std::string(flag) + ": no such file '" + path + "'");
}

struct Loaded {
    Dataset train;
    std::optional<Dataset> test;
    VisibleKind kind = VisibleKind::Binary;
};

Dataset load_one(const DataOptions& d, const std::string& images, const std::string& labels,
                 const std::string& csv, bool test) {
    if (d.kind == "mnist") {
        require_file(images, test ? "--test-images" : "--images");
        if (!labels.empty()) require_file(labels, test ? "--test-labels" : "--labels");
        return load_mnist_idx(images, labels.empty() ? std::nullopt : std::optional<fs::path>(labels));
    }
    require_file(csv, test ? "--test-csv" : "--csv");
    return d.kind == "isolet" ? load_isolet_csv(csv) : load_labeled_csv(csv, 0, 0);
}

Loaded load_data(const DataOptions& d, std::uint64_t seed) {
    Loaded out;
    const bool bundled = d.kind == "mnist" && d.images.empty();
    Dataset train = bundled ? load_one(d, kBundledImages, kBundledLabels, "", false)
                            : load_one(d, d.images, d.labels, d.csv, false);
    if (d.subset > 0) train = take_subset(train, d.subset, seed);
    const bool has_test_file = d.kind == "mnist" ? !d.test_images.empty() : !d.test_csv.empty();
    std::optional<Dataset> test;
    if (has_test_file) {
        test = load_one(d, d.test_images, d.test_labels, d.test_csv, true);
        if (d.test_subset > 0) test = take_subset(*test, d.test_subset, seed);
    } else if (d.holdout > 0) {
        if (d.holdout >= train.size()) throw UsageError("--holdout must be smaller than the training set");
        const Dataset shuffled = take_subset(train, train.size(), seed ^ 0x5eedull);
        std::vector<std::size_t> head(shuffled.size() - d.holdout), tail(d.holdout);
        std::iota(head.begin(), head.end(), std::size_t{0});
        std::iota(tail.begin(), tail.end(), head.size());
        auto slice = [&](const std::vector<std::size_t>& rows) {
            Dataset s;
            s.features = shuffled.features.gather_rows(rows);
            if (shuffled.labels) {
                std::vector<int> y;
                for (std::size_t r : rows) y.push_back((*shuffled.labels)[r]);
                s.labels = std::move(y);
            }
            return s;
        };
        train = slice(head);
        test = slice(tail);
    }
    out.train = minmax_normalize(train);
    if (test) {
        if (test->dim() != out.train.dim()) throw UsageError("test set width differs from training set");
        out.test = apply_normalization(*test, *out.train.normalization);
    }
    if (d.visible == "auto") {
        out.kind = d.kind == "isolet" ? VisibleKind::Gaussian : VisibleKind::Binary;
    } else {
        out.kind = parse_visible_kind(d.visible);
    }
    return out;
}

std::size_t n_classes_of(const Loaded& data) {
    std::size_t n = data.train.n_classes();
    if (data.test && data.test->labels) n = std::max(n, data.test->n_classes());
    return n;
}

Hyperparams make_hp(const TrainOptions& t) {
    Hyperparams hp;
    hp.epsilon = t.lr;
    hp.momentum = t.momentum;
    hp.weight_decay = t.decay;
    hp.batch_size = t.batch;
    hp.epochs = t.epochs;
    hp.k = t.k;
    hp.n_chains = t.chains == 0 ? t.batch : t.chains;
    hp.elite_fraction = t.elite_fraction;
    hp.threads = t.threads;
    hp.validate();
    return hp;
}

std::string metrics_csv(const std::vector<EpochMetrics>& m, Estimator e, std::uint64_t seed) {
    std::ostringstream out;
    write_metrics_csv(out, m, e, seed);
    return out.str();
}

std::string echo_config(const CLI::App& app) { return app.config_to_str(true, false); }

// ---- train-rbm --------------------------------------------------------------

int cmd_train_rbm(const CLI::App& app, const DataOptions& d, const TrainOptions& t, const std::string& out_dir) {
    if (out_dir.empty()) throw UsageError("--out is required");
    std::vector<std::size_t> sizes;
    for (const auto& s : split(t.hidden, ',')) sizes.push_back(std::stoul(s));
    if (sizes.empty()) throw UsageError("--hidden needs at least one size");
    std::vector<Estimator> estimators;
    for (const auto& s : split(t.estimator, ',')) estimators.push_back(parse_estimator(s));
    if (estimators.size() == 1) estimators.resize(sizes.size(), estimators.front());
    if (estimators.size() != sizes.size()) throw UsageError("--estimator needs one entry or one per layer");
    const Hyperparams hp = make_hp(t);

    const Loaded data = load_data(d, t.seed);
    const bool discriminative = !t.generative && data.train.labels.has_value();
    std::map<std::string, std::string> artifacts;
    std::ostringstream summary;

    sizes.insert(sizes.begin(), data.train.dim());
    const std::vector<Hyperparams> hps(sizes.size() - 1, hp);
    DbnModel dbn;
    std::size_t n_classes = 0;
    if (sizes.size() == 2 && discriminative) {
        n_classes = n_classes_of(data);
        auto r = train_discriminative_rbm(data.train.features, *data.train.labels, n_classes, sizes[1], hp,
                                          estimators[0], t.seed, data.kind);
        artifacts["model.json"] = model_to_json(r.model);
        artifacts["metrics.csv"] = metrics_csv(r.metrics, estimators[0], t.seed);
        const double train_err = error_rate(classify_batch(r.model, data.train.features, hp.threads), *data.train.labels);
        summary << "train_error=" << train_err << '\n';
        if (data.test && data.test->labels) {
            const double test_err = error_rate(classify_batch(r.model, data.test->features, hp.threads), *data.test->labels);
            summary << "test_error=" << test_err << '\n';
        }
    } else if (sizes.size() == 2) {
        auto r = train_rbm(initial_params(sizes[0], sizes[1], data.kind, t.seed), data.train.features, hp,
                           estimators[0], t.seed);
        artifacts["model.json"] = model_to_json(r.params);
        artifacts["metrics.csv"] = metrics_csv(r.metrics, estimators[0], t.seed);
    } else {
        PretrainResult r;
        if (discriminative) {
            n_classes = n_classes_of(data);
            r = pretrain_discriminative_stack(sizes, data.train.features, *data.train.labels, n_classes, hps,
                                              estimators, t.seed, data.kind);
        } else {
            r = pretrain_stack(sizes, data.train.features, hps, estimators, t.seed, data.kind);
        }
        dbn = r.model;
        artifacts["model.json"] = model_to_json(dbn);
        for (std::size_t l = 0; l < r.metrics.size(); ++l) {
            artifacts["metrics_layer" + std::to_string(l) + ".csv"] =
                metrics_csv(r.metrics[l], estimators[l], layer_seed(t.seed, l));
        }
        if (discriminative && data.test && data.test->labels) {
            const double err = error_rate(classify_batch(dbn, data.test->features, hp.threads), *data.test->labels);
            summary << "test_error_before_bp=" << err << '\n';
        }
    }

    if (t.finetune_epochs > 0) {
        if (!data.train.labels) throw UsageError("--finetune-epochs needs labels");
        if (sizes.size() == 2 && !discriminative) dbn = DbnModel{{std::get<RbmParams>(model_from_json(artifacts["model.json"]))}, 0};
        if (sizes.size() == 2 && discriminative) {
            dbn = DbnModel{{std::get<LabeledRbm>(model_from_json(artifacts["model.json"])).params}, n_classes};
        }
        if (n_classes == 0) n_classes = n_classes_of(data);
        Hyperparams ft = hp;
        ft.epochs = t.finetune_epochs;
        ft.epsilon = t.finetune_lr;
        auto tuned = fine_tune(unroll_to_network(dbn, n_classes, t.seed), data.train.features, *data.train.labels, ft,
                               t.seed);
        artifacts["network.json"] = model_to_json(tuned.net);
        std::ostringstream csv;
        csv << "epoch,cross_entropy,train_error,seconds\n";
        for (const auto& m : tuned.metrics) {
            csv << m.epoch << ',' << format_double(m.cross_entropy) << ',' << format_double(m.train_error) << ','
                << m.seconds << '\n';
        }
        artifacts["finetune.csv"] = csv.str();
        if (data.test && data.test->labels) {
            const double err = error_rate(predict_batch(tuned.net, data.test->features, hp.threads), *data.test->labels);
            summary << "test_error_after_bp=" << err << '\n';
        }
    }

    artifacts["config.txt"] = echo_config(app) + summary.str();
    fs::create_directories(out_dir);
    for (const auto& [name, content] : artifacts) write_file_atomic(fs::path(out_dir) / name, content);
    std::cout << summary.str() << "wrote " << artifacts.size() << " files to " << out_dir << '\n';
    return 0;
}

// ---- evaluate -------------------------------------------------------------

int cmd_evaluate(const DataOptions& d, const std::string& model_path, std::uint64_t seed, std::size_t threads) {
    require_file(model_path, "--model");
    const Model model = load_model(model_path);
    const Loaded data = load_data(d, seed);
    const Dataset& ds = data.test ? *data.test : data.train;
    const auto& labels = ds.require_labels();
    std::vector<std::size_t> predicted;
    if (const auto* m = std::get_if<LabeledRbm>(&model)) {
        predicted = classify_batch(*m, ds.features, threads);
    } else if (const auto* dbn = std::get_if<DbnModel>(&model)) {
        predicted = classify_batch(*dbn, ds.features, threads);
    } else if (const auto* net = std::get_if<FeedforwardNet>(&model)) {
        predicted = predict_batch(*net, ds.features, threads);
    } else {
        throw UsageError("evaluate: model has no label units");
    }
    std::cout << "error=" << error_rate(predicted, labels) << " samples=" << ds.size() << '\n';
    return 0;
}

// ---- compare-samplers -----------------------------------------------------

int cmd_compare(const CLI::App& app, const DataOptions& d, const TrainOptions& t, const std::string& out_path) {
    if (out_path.empty()) throw UsageError("--out is required");
    std::vector<Estimator> estimators;
    for (const auto& s : split(t.estimator, ',')) estimators.push_back(parse_estimator(s));
    const std::size_t hidden = std::stoul(t.hidden);
    const Hyperparams hp = make_hp(t);
    const Loaded data = load_data(d, t.seed);
    if (!data.train.labels) throw UsageError("compare-samplers needs labeled data");
    if (!data.test || !data.test->labels) throw UsageError("compare-samplers needs a labeled test set (test file or --holdout)");
    const std::size_t n_classes = n_classes_of(data);

    std::ostringstream csv;
    csv << "estimator,epoch,seconds,error\n";
    for (Estimator e : estimators) {
        std::vector<EpochMetrics> metrics;
        std::vector<double> errors;
        auto observe = [&](std::size_t, const RbmParams& p) {
            const LabeledRbm m{p, n_classes};
            errors.push_back(error_rate(classify_batch(m, data.test->features, hp.threads), *data.test->labels));
        };
        metrics = train_discriminative_rbm(data.train.features, *data.train.labels, n_classes, hidden, hp, e, t.seed,
                                           data.kind, observe)
                      .metrics;
        for (std::size_t i = 0; i < metrics.size(); ++i) {
            csv << to_string(e) << ',' << metrics[i].epoch << ',' << format_double(metrics[i].seconds) << ','
                << format_double(errors[i]) << '\n';
        }
        std::cerr << to_string(e) << ": final test error " << (errors.empty() ? 0.0 : errors.back()) << '\n';
    }
    write_file_atomic(out_path + ".config.txt", echo_config(app));
    write_file_atomic(out_path, csv.str());
    return 0;
}

// ---- sample ---------------------------------------------------------------

int cmd_sample(const CLI::App& app, const std::string& model_path, std::size_t n, std::size_t steps, std::uint64_t seed,
               std::size_t width, const std::string& out_path, std::size_t threads) {
    if (out_path.empty()) throw UsageError("--out is required");
    if (n == 0) throw UsageError("--n must be positive");
    require_file(model_path, "--model");
    const Model model = load_model(model_path);
    RbmParams p;
    std::size_t shown = 0;
    if (const auto* rbm = std::get_if<RbmParams>(&model)) {
        p = *rbm;
        shown = p.n_visible();
    } else if (const auto* m = std::get_if<LabeledRbm>(&model)) {
        p = m->params;
        shown = m->n_features();
    } else {
        throw UsageError("sample: model must be a single RBM");
    }

    Matrix init(n, p.n_visible(), p.visible_kind == VisibleKind::Binary ? 0.5 : 0.0);
    ChainPool pool = ChainPool::from_data(init, n, p.visible_kind, seed, streams::kChainBase);
    if (steps > 0) advance_chains(p, pool, steps, threads);
    // Visible means E[v | h] with h drawn from each chain's final state.
    const Conditionals cond(p);
    Matrix means(n, p.n_visible());
    for (std::size_t c = 0; c < n; ++c) {
        Vector h = hidden_probs(p, pool.states.row(c));
        for (double& x : h) x = bernoulli_sample(x, pool.streams[c]) ? 1.0 : 0.0;
        cond.visible_probs(h, means.row(c));
    }
    const Vector f = free_energies(p, pool.states, threads);

    if (width == 0) {
        const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(shown))));
        if (side * side == shown && p.visible_kind == VisibleKind::Binary) width = side;
    }
    std::string content;
    if (width > 0 && shown % width == 0) {
        const std::size_t height = shown / width;
        const auto grid = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
        const std::size_t grid_rows = (n + grid - 1) / grid;
        const std::size_t img_w = grid * width, img_h = grid_rows * height;
        std::vector<unsigned char> pixels(img_w * img_h, 0);
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t ox = (c % grid) * width, oy = (c / grid) * height;
            for (std::size_t i = 0; i < shown; ++i) {
                const double x = std::clamp(means(c, i), 0.0, 1.0);
                pixels[(oy + i / width) * img_w + ox + i % width] = static_cast<unsigned char>(std::lround(255.0 * x));
            }
        }
        std::ostringstream head;
        head << "P5\n";
        for (const auto& line : split(echo_config(app), '\n')) head << "# " << line << '\n';
        head << img_w << ' ' << img_h << "\n255\n";
        content = head.str() + std::string(pixels.begin(), pixels.end());
    } else {
        std::ostringstream csv;
        for (std::size_t c = 0; c < n; ++c) {
            for (std::size_t i = 0; i < shown; ++i) csv << (i ? "," : "") << format_double(means(c, i));
            csv << '\n';
        }
        content = csv.str();
    }
    // Free energies, lowest first (the elite ordering).
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return f[x] < f[y]; });
    std::ostringstream fcsv;
    fcsv << "chain,free_energy\n";
    for (std::size_t c : order) fcsv << c << ',' << format_double(f[c]) << '\n';

    write_file_atomic(out_path + ".free_energy.csv", fcsv.str());
    write_file_atomic(out_path, content);
    return 0;
}

// ---- oracle-check ---------------------------------------------------------

int cmd_oracle_check(oracle::CheckConfig config, double inject_offset) {
    if (config.n_visible + config.n_hidden > oracle::kMaxUnits) {
        throw UsageError("oracle-check: visible + hidden must not exceed " + std::to_string(oracle::kMaxUnits));
    }
    if (inject_offset != 0.0) {
        config.free_energy = [inject_offset](const RbmParams& p, std::span<const double> v) {
            return free_energy(p, v) + inject_offset;
        };
    }
    const auto report = oracle::run_check(config);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& r : report.invariants) {
        std::printf("%-24s %s  worst=%.3e  tol=%.1e\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.worst, r.tolerance);
    }
    std::printf("%s (%zu trials, %zux%zu)\n", report.passed() ? "PASS" : "FAIL", config.trials, config.n_visible,
                config.n_hidden);
    return report.passed() ? 0 : kExitFailure;
}

// Turns key=value lines of --config files into --key=value arguments placed
// before the command-line flags, so explicit flags take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::vector<std::string> out;
    std::vector<std::string> from_file;
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
            continue;
        }
        std::ifstream in(path);
        if (!in) throw UsageError("--config: cannot open '" + path + "'");
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            const auto eq = line.find('=');
            auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r");
                const auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
            };
            if (trim(line).empty()) continue;
            if (eq == std::string::npos) throw UsageError("--config: expected key=value, got '" + line + "'");
            from_file.push_back("--" + trim(line.substr(0, eq)) + "=" + trim(line.substr(eq + 1)));
        }
    }
    // Subcommand name first, then file values, then explicit flags.
    if (!out.empty() && out[0].rfind("-", 0) != 0) {
        out.insert(out.begin() + 1, from_file.begin(), from_file.end());
    } else {
        out.insert(out.begin(), from_file.begin(), from_file.end());
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RBM / DBN training with CD, PCD and free-energy elite PCD (FEPCD)"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

    DataOptions data;
    TrainOptions train;
    std::string out;

    auto* train_cmd = app.add_subcommand("train-rbm", "Train an RBM, a discriminative RBM or a DBN");
    add_data_options(train_cmd, data);
    add_train_options(train_cmd, train);
    train_cmd->add_flag("--generative", train.generative, "Ignore labels: plain generative RBM / DBN");
    train_cmd->add_option("--finetune-epochs", train.finetune_epochs, "Backprop epochs after pretraining (0 = none)");
    train_cmd->add_option("--finetune-lr", train.finetune_lr, "Backprop learning rate");
    train_cmd->add_option("--out", out, "Output directory");

    std::string model_path;
    auto* eval_cmd = app.add_subcommand("evaluate", "Classification error of a saved model");
    add_data_options(eval_cmd, data);
    eval_cmd->add_option("--model", model_path, "Model JSON");
    eval_cmd->add_option("--seed", train.seed, "Seed for --subset");
    eval_cmd->add_option("--threads", train.threads, "Worker threads");

    auto* compare_cmd = app.add_subcommand("compare-samplers", "Per-epoch test error and time for each estimator");
    add_data_options(compare_cmd, data);
    add_train_options(compare_cmd, train);
    compare_cmd->get_option("--estimator")->default_str("cd,pcd,fepcd");
    compare_cmd->add_option("--out", out, "Output CSV");

    std::size_t n = 16, steps = 1000, width = 0;
    auto* sample_cmd = app.add_subcommand("sample", "Run Gibbs chains from a saved RBM");
    sample_cmd->add_option("--model", model_path, "Model JSON");
    sample_cmd->add_option("--n", n, "Number of chains");
    sample_cmd->add_option("--steps", steps, "Gibbs sweeps per chain");
    sample_cmd->add_option("--seed", train.seed, "Seed");
    sample_cmd->add_option("--width", width, "Image width (default: square images when possible)");
    sample_cmd->add_option("--threads", train.threads, "Worker threads");
    sample_cmd->add_option("--out", out, "Output PGM (image data) or CSV");

    oracle::CheckConfig check;
    double inject = 0.0;
    auto* oracle_cmd = app.add_subcommand("oracle-check", "Verify closed-form identities against exact enumeration");
    oracle_cmd->add_option("--visible", check.n_visible, "Visible units");
    oracle_cmd->add_option("--hidden", check.n_hidden, "Hidden units");
    oracle_cmd->add_option("--trials", check.trials, "Random models");
    oracle_cmd->add_option("--seed", check.seed, "Seed");
    oracle_cmd->add_option("--chains", check.chains, "Chains for the stationarity check");
    oracle_cmd->add_option("--steps", check.steps, "Sweeps per chain for the stationarity check");
    oracle_cmd->add_option("--threads", check.threads, "Worker threads");
    oracle_cmd->add_option("--inject-free-energy-offset", inject, "Testing: perturb the free energy under test")
        ->group("");

    try {
        const auto args = expand_config(argc, argv);
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*train_cmd) return cmd_train_rbm(*train_cmd, data, train, out);
        if (*eval_cmd) return cmd_evaluate(data, model_path, train.seed, train.threads);
        if (*compare_cmd) {
            if (compare_cmd->count("--estimator") == 0) train.estimator = "cd,pcd,fepcd";
            return cmd_compare(*compare_cmd, data, train, out);
        }
        if (*sample_cmd) return cmd_sample(*sample_cmd, model_path, n, steps, train.seed, width, out, train.threads);
        if (*oracle_cmd) return cmd_oracle_check(check, inject);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
