// Acceptance suite: one [PASS]/[FAIL] line per criterion, exit code 1 if any fails.
//
//   acceptance            run everything
//   acceptance 3 5        run only criteria 3 and 5 (9 reruns whatever it depends on)
//
// Criterion 6 draws fresh random probes each run; set FEPCD_PROBE_SEED to replay one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fepcd/data_io.hpp"
#include "fepcd/dbn.hpp"
#include "fepcd/errors.hpp"
#include "fepcd/oracle.hpp"
#include "fepcd/oracle_check.hpp"
#include "fepcd/samplers.hpp"
#include "fepcd/trainer.hpp"

using namespace fepcd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    std::string artifact;  // compared bit for bit by criterion 9
};

RbmParams t1() {
    RbmParams p;
    p.W = Matrix(2, 2, {1.0, -1.0, 0.5, 0.2});
    p.a = {0.1, -0.2};
    p.b = {0.3, 0.0};
    return p;
}

RbmParams random_params(std::size_t nv, std::size_t nh, RngStream& rng) {
    RbmParams p = RbmParams::zeros(nv, nh);
    for (double& w : p.W.data()) w = gaussian_sample(0.0, rng);
    for (double& x : p.a) x = gaussian_sample(0.0, rng);
    for (double& x : p.b) x = gaussian_sample(0.0, rng);
    return p;
}

std::string hex(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%a", x);
    return buf;
}

std::string hex(const std::vector<double>& xs) {
    std::string s;
    for (double x : xs) s += hex(x) + ' ';
    return s;
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// ---- 1 --------------------------------------------------------------------

Outcome oracle_identities() {
    oracle::CheckConfig config;  // 3x3, 25 trials, seed 1
    const auto start = std::chrono::steady_clock::now();
    const auto report = oracle::run_check(config);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Outcome out{true, "", ""};
    for (const char* name : {"normalization", "free_energy_identity", "free_energy_forms", "gradient_equivalence"}) {
        const auto* r = report.find(name);
        out.pass = out.pass && r && r->passed;
        out.detail += std::string(name) + "=" + (r ? fmt("%.1e", r->worst) : "missing") + " ";
    }
    out.pass = out.pass && secs < 10.0;
    out.detail += "in " + fmt("%.2f", secs) + " s (limit 10 s)";
    return out;
}

// ---- 2 --------------------------------------------------------------------

Outcome gibbs_stationarity(std::size_t threads) {
    const auto start = std::chrono::steady_clock::now();
    const RbmParams p = t1();
    const auto target = oracle::visible_marginal(p);
    ChainPool pool = ChainPool::from_data(Matrix(1, 2, 0.5), 64, VisibleKind::Binary, 2, 0);
    std::vector<double> counts(4, 0.0);
    for (int step = 0; step < 2000; ++step) {
        advance_chains(p, pool, 1, threads);
        for (std::size_t c = 0; c < pool.size(); ++c) counts[oracle::index_from_state(pool.states.row(c))] += 1;
    }
    const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    double tv = 0.0;
    for (std::size_t s = 0; s < 4; ++s) tv += std::abs(counts[s] / n - target[s]) / 2;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {tv <= 0.03 && secs < 5.0,
            "TV=" + fmt("%.4f", tv) + " (limit 0.03) in " + fmt("%.2f", secs) + " s (limit 5 s)",
            hex(counts) + hex(pool.states.data())};
}

// ---- 3 --------------------------------------------------------------------

double stats_gap(const GradientStats& x, const GradientStats& y) { return oracle::max_abs_diff(x, y); }

// Expected CD-k negative statistics from the exact k-step transition kernel.
GradientStats exact_cd_negative(const RbmParams& p, const Vector& start, std::size_t k) {
    const std::size_t nv = p.n_visible(), nh = p.n_hidden();
    const std::size_t sv = std::size_t{1} << nv, sh = std::size_t{1} << nh;
    std::vector<double> dist(sv, 0.0);
    dist[oracle::index_from_state(start)] = 1.0;
    for (std::size_t step = 0; step < k; ++step) {
        std::vector<double> next(sv, 0.0);
        for (std::size_t v = 0; v < sv; ++v) {
            if (dist[v] == 0.0) continue;
            const Vector q = hidden_probs(p, oracle::state_from_index(v, nv));
            for (std::size_t h = 0; h < sh; ++h) {
                const Vector hs = oracle::state_from_index(h, nh);
                double ph = 1.0;
                for (std::size_t j = 0; j < nh; ++j) ph *= hs[j] == 1.0 ? q[j] : 1.0 - q[j];
                const Vector r = visible_probs(p, hs);
                for (std::size_t w = 0; w < sv; ++w) {
                    const Vector vs = oracle::state_from_index(w, nv);
                    double pv = 1.0;
                    for (std::size_t i = 0; i < nv; ++i) pv *= vs[i] == 1.0 ? r[i] : 1.0 - r[i];
                    next[w] += dist[v] * ph * pv;
                }
            }
        }
        dist = next;
    }
    GradientStats s{Matrix(nv, nh), Vector(nv), Vector(nh), 1};
    for (std::size_t v = 0; v < sv; ++v) {
        const Vector vs = oracle::state_from_index(v, nv);
        const Vector q = hidden_probs(p, vs);
        for (std::size_t i = 0; i < nv; ++i) {
            s.v[i] += dist[v] * vs[i];
            for (std::size_t j = 0; j < nh; ++j) s.vh(i, j) += dist[v] * vs[i] * q[j];
        }
        for (std::size_t j = 0; j < nh; ++j) s.h[j] += dist[v] * q[j];
    }
    return s;
}

Outcome cd_bias_trend(std::size_t threads) {
    const RbmParams p = t1();
    const Vector start{1.0, 1.0};
    const Matrix batch(20, 2, 1.0);
    const auto exact = oracle::exact_gradient(p, Matrix(1, 2, start)).negative;
    constexpr int kBatches = 10000;
    std::vector<double> gaps, exact_gaps;
    std::string artifact;
    for (std::size_t k : {1u, 5u, 20u}) {
        RngStream rng(3, k);
        GradientStats mean{Matrix(2, 2), Vector(2), Vector(2), 1};
        for (int b = 0; b < kBatches; ++b) {
            const auto s = cd_k(p, batch, k, rng, threads).neg;
            for (std::size_t i = 0; i < 4; ++i) mean.vh.data()[i] += s.vh.data()[i] / kBatches;
            for (std::size_t i = 0; i < 2; ++i) mean.v[i] += s.v[i] / kBatches;
            for (std::size_t j = 0; j < 2; ++j) mean.h[j] += s.h[j] / kBatches;
        }
        gaps.push_back(stats_gap(mean, exact));
        exact_gaps.push_back(stats_gap(exact_cd_negative(p, start, k), exact));
        artifact += hex(mean.vh.data()) + hex(mean.v) + hex(mean.h);
    }
    const bool pass = gaps[0] > gaps[1] && gaps[1] > gaps[2];
    std::string detail = "sampled gap k=1,5,20: " + fmt("%.2e", gaps[0]) + " " + fmt("%.2e", gaps[1]) + " " +
                         fmt("%.2e", gaps[2]) + "; exact-kernel gap: " + fmt("%.2e", exact_gaps[0]) + " " +
                         fmt("%.2e", exact_gaps[1]) + " " + fmt("%.2e", exact_gaps[2]) +
                         "; Monte Carlo standard error ~" + fmt("%.0e", 0.5 / std::sqrt(20.0 * kBatches));
    return {pass, detail, artifact};
}

// ---- 4 --------------------------------------------------------------------

Outcome selection_law(std::size_t threads) {
    std::string artifact;
    // (a) elite set equals the exact bottom half, using enumerated free energies.
    int mismatches = 0;
    RngStream rng(4, 0);
    constexpr int kSelectTrials = 1000;
    for (int t = 0; t < kSelectTrials; ++t) {
        const RbmParams p = random_params(6, 4, rng);
        Matrix states(20, 6);
        for (double& x : states.data()) x = bernoulli_sample(0.5, rng) ? 1.0 : 0.0;
        std::vector<std::pair<double, std::size_t>> exact;
        for (std::size_t r = 0; r < states.rows(); ++r) {
            exact.emplace_back(-oracle::log_unnormalized_marginal(p, states.row(r)), r);
        }
        std::sort(exact.begin(), exact.end());
        std::vector<std::size_t> want;
        for (std::size_t i = 0; i < 10; ++i) want.push_back(exact[i].second);
        std::sort(want.begin(), want.end());
        mismatches += select_elite(p, states, 0.5, threads) != want;
    }

    // (b) elite fraction 1 trains exactly like PCD.
    RngStream data_rng(4, 1);
    Matrix data(60, 8);
    for (double& x : data.data()) x = bernoulli_sample(0.3, data_rng) ? 1.0 : 0.0;
    Hyperparams hp;
    hp.epochs = 5;
    hp.batch_size = 10;
    hp.n_chains = 10;
    hp.epsilon = 0.1;
    hp.elite_fraction = 1.0;
    hp.threads = threads;
    const RbmParams init = initial_params(8, 5, VisibleKind::Binary, 4);
    const auto pcd = train_rbm(init, data, hp, Estimator::PCD, 4);
    const auto fe = train_rbm(init, data, hp, Estimator::FEPCD, 4);
    bool same = pcd.params == fe.params;
    for (std::size_t e = 0; e < pcd.metrics.size(); ++e) {
        same = same && pcd.metrics[e].recon_error == fe.metrics[e].recon_error &&
               pcd.metrics[e].mean_free_energy == fe.metrics[e].mean_free_energy;
    }
    artifact += hex(fe.params.W.data());

    // (c) on T1, elite chains carry at least the average model probability.
    const RbmParams p = t1();
    const auto pv = oracle::visible_marginal(p);
    ChainPool pool = ChainPool::from_data(Matrix(1, 2, 0.5), 20, VisibleKind::Binary, 4, 0);
    int below = 0;
    double margin = 0.0;
    constexpr int kMassTrials = 1000;
    for (int t = 0; t < kMassTrials; ++t) {
        advance_chains(p, pool, 1, threads);
        const auto elite = select_elite(p, pool.states, 0.5, threads);
        double all = 0.0, top = 0.0;
        for (std::size_t c = 0; c < pool.size(); ++c) all += pv[oracle::index_from_state(pool.states.row(c))];
        for (auto c : elite) top += pv[oracle::index_from_state(pool.states.row(c))];
        below += top / elite.size() < all / pool.size();
        margin += (top / elite.size() - all / pool.size()) / kMassTrials;
    }
    artifact += hex(pool.states.data());
    return {mismatches == 0 && same && below == 0,
            "selection mismatches " + std::to_string(mismatches) + "/" + std::to_string(kSelectTrials) +
                "; fraction-1 trajectory " + (same ? "bit-identical" : "DIFFERS") + "; elite mass below mean in " +
                std::to_string(below) + "/" + std::to_string(kMassTrials) + " trials (mean margin " +
                fmt("%.3f", margin) + ")",
            artifact};
}

// ---- 5 --------------------------------------------------------------------

struct MnistSplit {
    Dataset train, test;
};

MnistSplit load_subset() {
    const fs::path dir = fs::path(FEPCD_SOURCE_DIR) / "data" / "mnist-subset";
    MnistSplit s;
    s.train = minmax_normalize(load_mnist_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte"));
    s.test = apply_normalization(load_mnist_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte"),
                                 *s.train.normalization);
    return s;
}

Hyperparams desk_hp(std::size_t threads) {
    Hyperparams hp;  // epsilon 0.05, batch 20, chains 20, k 1, elite 0.5
    hp.epochs = 30;
    hp.threads = threads;
    return hp;
}

struct DeskRun {
    LabeledRbm model;
    double error = 0.0;
    double seconds = 0.0;
};

DeskRun desk_run(const MnistSplit& d, Estimator e, std::uint64_t seed, std::size_t threads) {
    const auto r = train_discriminative_rbm(d.train.features, d.train.require_labels(), 10, 64, desk_hp(threads), e,
                                            seed);
    return {r.model, error_rate(classify_batch(r.model, d.test.features, threads), d.test.require_labels()),
            r.metrics.back().seconds};
}

double mean(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); }

double sample_variance(const std::vector<double>& x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / (x.size() - 1);
}

std::vector<DeskRun> g_desk_seed1;  // seed-1 runs reused by criterion 9

Outcome desk_comparison() {
    const auto start = std::chrono::steady_clock::now();
    const MnistSplit d = load_subset();
    std::vector<double> err[3], secs[3];
    const Estimator order[3] = {Estimator::CD, Estimator::PCD, Estimator::FEPCD};
    std::string artifact;
    g_desk_seed1.clear();
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        for (int e = 0; e < 3; ++e) {
            const DeskRun r = desk_run(d, order[e], seed, 1);
            err[e].push_back(r.error);
            secs[e].push_back(r.seconds);
            artifact += hex(r.error);
            if (seed == 1) g_desk_seed1.push_back(r);
        }
    }
    const double secs_total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double cd = mean(err[0]), pcd = mean(err[1]), fe = mean(err[2]);
    const bool soft = fe <= pcd + 0.01;
    const bool chance = pcd < 0.90 && fe < 0.90;
    std::string detail = "mean test error CD " + fmt("%.4f", cd) + " PCD " + fmt("%.4f", pcd) + " FEPCD " +
                         fmt("%.4f", fe) + " (sample var " + fmt("%.2e", sample_variance(err[0])) + " " +
                         fmt("%.2e", sample_variance(err[1])) + " " + fmt("%.2e", sample_variance(err[2])) +
                         "); FEPCD <= PCD + 0.01: " + (soft ? "yes" : "no") + "; both below 0.90 chance error: " +
                         (chance ? "yes" : "no") + "; ordering FEPCD <= PCD < CD " +
                         (fe <= pcd && pcd < cd ? "holds" : "does not hold") + " (reported only); train s/run CD " +
                         fmt("%.1f", mean(secs[0])) + " PCD " + fmt("%.1f", mean(secs[1])) + " FEPCD " +
                         fmt("%.1f", mean(secs[2])) + "; total " + fmt("%.0f", secs_total) + " s (limit 600 s)";
    return {soft && chance && secs_total < 600.0, detail, artifact};
}

// ---- 6 --------------------------------------------------------------------

Outcome backprop_check() {
    std::uint64_t seed = std::random_device{}();
    if (const char* env = std::getenv("FEPCD_PROBE_SEED")) seed = std::strtoull(env, nullptr, 10);
    RngStream rng(seed, 6);
    FeedforwardNet net;
    for (auto [in, out] : {std::pair<std::size_t, std::size_t>{4, 3}, {3, 2}}) {
        DenseLayer layer{Matrix(in, out), Vector(out)};
        for (double& w : layer.W.data()) w = gaussian_sample(0.0, rng);
        for (double& b : layer.b) b = gaussian_sample(0.0, rng);
        net.layers.push_back(layer);
    }
    Matrix x(8, 4);
    for (double& v : x.data()) v = rng.uniform();
    std::vector<int> y(8);
    for (int& c : y) c = static_cast<int>(rng.below(2));
    std::vector<std::size_t> rows(8);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::vector<DenseLayer> grad;
    cross_entropy(net, x, y, rows, &grad);
    double worst = 0.0;
    for (int probe = 0; probe < 10; ++probe) {
        const std::size_t l = rng.below(2);
        const std::size_t n_w = net.layers[l].W.size();
        const std::size_t idx = rng.below(n_w + net.layers[l].b.size());
        auto param = [&](FeedforwardNet& n) -> double& {
            return idx < n_w ? n.layers[l].W.data()[idx] : n.layers[l].b[idx - n_w];
        };
        const double analytic = idx < n_w ? grad[l].W.data()[idx] : grad[l].b[idx - n_w];
        const double h = 1e-6;
        FeedforwardNet up = net, down = net;
        param(up) += h;
        param(down) -= h;
        const double numeric = (cross_entropy(up, x, y, rows) - cross_entropy(down, x, y, rows)) / (2 * h);
        const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-4});
        worst = std::max(worst, rel);
    }
    return {worst <= 1e-5, "worst relative error " + fmt("%.2e", worst) + " over 10 probes (limit 1e-5), seed " +
                               std::to_string(seed), ""};
}

// ---- 7 --------------------------------------------------------------------

Outcome classification_exactness() {
    RngStream rng(7, 0);
    double worst = 0.0;
    int argmax_mismatch = 0, checked = 0;
    struct Shape { std::size_t features, classes, hidden; };
    for (const Shape s : {Shape{6, 3, 5}, Shape{4, 4, 6}, Shape{9, 2, 3}, Shape{2, 10, 2}}) {
        for (int t = 0; t < 10; ++t) {
            const LabeledRbm m{random_params(s.features + s.classes, s.hidden, rng), s.classes};
            for (std::size_t f = 0; f < (std::size_t{1} << s.features); ++f) {
                const Vector v = oracle::state_from_index(f, s.features);
                std::vector<double> logits(s.classes);
                for (std::size_t c = 0; c < s.classes; ++c) {
                    Vector full = v;
                    for (std::size_t k = 0; k < s.classes; ++k) full.push_back(k == c ? 1.0 : 0.0);
                    std::vector<double> terms;
                    for (std::size_t h = 0; h < (std::size_t{1} << s.hidden); ++h) {
                        terms.push_back(-energy(m.params, full, oracle::state_from_index(h, s.hidden)));
                    }
                    logits[c] = oracle::log_sum_exp(terms);
                }
                const double lse = oracle::log_sum_exp(logits);
                const auto got = classify_free_energy(m, v);
                std::size_t best = 0;
                for (std::size_t c = 0; c < s.classes; ++c) {
                    worst = std::max(worst, std::abs(got.scores[c] - std::exp(logits[c] - lse)));
                    if (logits[c] > logits[best]) best = c;
                }
                argmax_mismatch += got.label != best;
                ++checked;
            }
        }
    }
    return {worst <= 1e-8 && argmax_mismatch == 0,
            "worst |P - exact| " + fmt("%.2e", worst) + " (limit 1e-8), argmax mismatches " +
                std::to_string(argmax_mismatch) + " over " + std::to_string(checked) + " inputs",
            ""};
}

// ---- 8 --------------------------------------------------------------------

template <typename Error, typename Fn>
bool throws(Fn&& fn) {
    try {
        fn();
    } catch (const Error&) {
        return true;
    } catch (...) {
        return false;
    }
    return false;
}

bool bits_equal(const std::vector<double>& x, const std::vector<double>& y) {
    return x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
}

Outcome format_fidelity() {
    const fs::path fx = FEPCD_FIXTURE_DIR;
    const fs::path tmp = fs::temp_directory_path() / "fepcd-acceptance";
    fs::create_directories(tmp);

    write_idx_images(tmp / "images", read_idx_images(fx / "two-images-idx3-ubyte"));
    write_idx_labels(tmp / "labels", read_idx_labels(fx / "two-labels-idx1-ubyte"));
    const bool idx_ok = slurp(tmp / "images") == slurp(fx / "two-images-idx3-ubyte") &&
                        slurp(tmp / "labels") == slurp(fx / "two-labels-idx1-ubyte");

    RngStream rng(8, 0);
    RbmParams p = random_params(7, 5, rng);
    p.W(0, 0) = std::numeric_limits<double>::denorm_min();
    p.W(3, 1) = -1e-310;
    p.a[1] = std::numeric_limits<double>::max();
    p.b[0] = -0.0;
    const DbnModel dbn{{p, random_params(5, 4, rng), random_params(4, 3, rng)}, 0};
    save_model(tmp / "dbn.json", dbn);
    const auto back = std::get<DbnModel>(load_model(tmp / "dbn.json"));
    bool json_ok = back.layers.size() == 3;
    for (std::size_t l = 0; json_ok && l < 3; ++l) {
        json_ok = bits_equal(back.layers[l].W.data(), dbn.layers[l].W.data()) &&
                  bits_equal(back.layers[l].a, dbn.layers[l].a) && bits_equal(back.layers[l].b, dbn.layers[l].b);
    }

    int typed = 0;
    typed += throws<BadMagicError>([&] { read_idx_images(fx / "bad-magic-idx3-ubyte"); });
    typed += throws<TruncatedFileError>([&] { read_idx_images(fx / "truncated-idx3-ubyte"); });
    typed += throws<CountMismatchError>(
        [&] { load_mnist_idx(fx / "two-images-idx3-ubyte", fx / "three-labels-idx1-ubyte"); });
    typed += throws<CsvError>([&] { load_isolet_csv(fx / "isolet-short.csv"); });
    typed += throws<SchemaError>([&] { load_model(fx / "tampered-dims.json"); });
    typed += throws<VersionError>([&] { load_model(fx / "future-version.json"); });
    typed += throws<SchemaError>([&] { load_model(fx / "non-finite.json"); });
    return {idx_ok && json_ok && typed == 7,
            std::string("IDX byte-exact ") + (idx_ok ? "yes" : "no") + "; JSON bit-exact " + (json_ok ? "yes" : "no") +
                "; typed errors " + std::to_string(typed) + "/7",
            ""};
}

// ---- 9 --------------------------------------------------------------------

Outcome reproducibility() {
    int differ = 0;
    std::string detail;
    auto compare = [&](const char* name, const std::function<Outcome(std::size_t)>& fn) {
        const std::string a = fn(1).artifact, b = fn(1).artifact, c = fn(4).artifact;
        const bool ok = a == b && a == c;
        differ += !ok;
        detail += std::string(name) + (ok ? " ok; " : " DIFFERS; ");
    };
    compare("criterion 2", gibbs_stationarity);
    compare("criterion 3", cd_bias_trend);
    compare("criterion 4", selection_law);

    // Criterion 5 at reduced cost: seed 1 again with one and four threads.
    const MnistSplit d = load_subset();
    if (g_desk_seed1.empty()) {
        for (Estimator e : {Estimator::CD, Estimator::PCD, Estimator::FEPCD}) g_desk_seed1.push_back(desk_run(d, e, 1, 1));
    }
    bool desk_ok = true;
    for (std::size_t threads : {1u, 4u}) {
        for (std::size_t e : {1u, 2u}) {
            const DeskRun r = desk_run(d, e == 1 ? Estimator::PCD : Estimator::FEPCD, 1, threads);
            desk_ok = desk_ok && r.model == g_desk_seed1[e].model && r.error == g_desk_seed1[e].error;
        }
    }
    differ += !desk_ok;
    detail += std::string("criterion 5 (seed 1, PCD and FEPCD) ") + (desk_ok ? "ok" : "DIFFERS");
    return {differ == 0, "two runs and --threads 1 vs 4: " + detail, ""};
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all = {
        {1, "oracle identity suite", oracle_identities},
        {2, "Gibbs stationarity on T1", [] { return gibbs_stationarity(1); }},
        {3, "CD-k bias shrinks with k on T1", [] { return cd_bias_trend(1); }},
        {4, "FEPCD selection law", [] { return selection_law(1); }},
        {5, "desk-scale estimator comparison", desk_comparison},
        {6, "backprop gradient check", backprop_check},
        {7, "discriminative classification exactness", classification_exactness},
        {8, "format fidelity", format_fidelity},
        {9, "reproducibility", reproducibility},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what(), ""};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
