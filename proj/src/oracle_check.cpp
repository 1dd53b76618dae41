#include "fepcd/oracle_check.hpp"

#include <algorithm>
#include <cmath>

#include "fepcd/oracle.hpp"
#include "fepcd/samplers.hpp"

namespace fepcd::oracle {

bool CheckReport::passed() const {
    return std::all_of(invariants.begin(), invariants.end(), [](const auto& r) { return r.passed; });
}

const InvariantResult* CheckReport::find(const std::string& name) const {
    for (const auto& r : invariants) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

namespace {

RbmParams random_model(std::size_t nv, std::size_t nh, RngStream& rng) {
    RbmParams p = RbmParams::zeros(nv, nh);
    for (double& w : p.W.data()) w = gaussian_sample(0.0, rng);
    for (double& x : p.a) x = gaussian_sample(0.0, rng);
    for (double& x : p.b) x = gaussian_sample(0.0, rng);
    return p;
}

// Enumerated P(h_j = 1 | v).
Vector enumerated_hidden_probs(const RbmParams& p, std::span<const double> v) {
    const double log_norm = log_unnormalized_marginal(p, v);
    std::vector<CompensatedSum> acc(p.n_hidden());
    for (std::size_t hi = 0; hi < (std::size_t{1} << p.n_hidden()); ++hi) {
        const Vector h = state_from_index(hi, p.n_hidden());
        const double w = std::exp(-energy(p, v, h) - log_norm);
        for (std::size_t j = 0; j < h.size(); ++j) acc[j].add(w * h[j]);
    }
    Vector out(p.n_hidden());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = acc[j].value();
    return out;
}

}  // namespace

CheckReport run_check(const CheckConfig& config) {
    CheckReport report;
    report.invariants = {{"normalization", 0.0, 1e-10},
                         {"free_energy_identity", 0.0, 1e-10},
                         {"free_energy_forms", 0.0, 1e-8},
                         {"conditional_consistency", 0.0, 1e-10},
                         {"gradient_equivalence", 0.0, 1e-6},
                         {"gibbs_stationarity", 0.0, config.tv_tolerance}};
    auto record = [&](std::size_t index, double value) {
        auto& r = report.invariants[index];
        r.worst = std::max(r.worst, std::isnan(value) ? HUGE_VAL : value);
    };
    if (config.trials == 0) {
        report.warnings.push_back("trials=0: no models checked, report passes vacuously");
    }
    const std::size_t nv = config.n_visible;
    const std::size_t nh = config.n_hidden;

    for (std::size_t trial = 0; trial < config.trials; ++trial) {
        RngStream rng(config.seed, trial);
        const RbmParams p = random_model(nv, nh, rng);
        const auto marginal = visible_marginal(p);

        CompensatedSum total;
        for (double x : marginal) total.add(x);
        record(0, std::abs(total.value() - 1.0));

        for (std::size_t vi = 0; vi < marginal.size(); ++vi) {
            const Vector v = state_from_index(vi, nv);
            const double f = config.free_energy(p, v);
            record(1, std::abs(f + log_unnormalized_marginal(p, v)));
            record(2, std::abs(f - free_energy_entropy_form(p, v)));
            const Vector fast = hidden_probs(p, v);
            const Vector slow = enumerated_hidden_probs(p, v);
            for (std::size_t j = 0; j < nh; ++j) record(3, std::abs(fast[j] - slow[j]));
        }

        Matrix data(config.data_rows, nv);
        for (double& x : data.data()) x = rng.uniform() < 0.5 ? 1.0 : 0.0;
        const auto exact = exact_gradient(p, data);
        record(4, max_abs_diff(difference(exact.positive, exact.negative), finite_diff_loglik_grad(p, data, 1e-5)));

        Matrix init(config.chains, nv);
        for (double& x : init.data()) x = rng.uniform();
        ChainPool pool = ChainPool::from_data(init, config.chains, VisibleKind::Binary, config.seed,
                                              (trial + 1) << 32);
        std::vector<double> counts(marginal.size(), 0.0);
        for (std::size_t step = 0; step < config.steps; ++step) {
            advance_chains(p, pool, 1, config.threads);
            for (std::size_t c = 0; c < pool.size(); ++c) counts[index_from_state(pool.states.row(c))] += 1.0;
        }
        if (config.steps > 0) {
            const double n = static_cast<double>(config.steps * config.chains);
            double tv = 0.0;
            for (std::size_t s = 0; s < counts.size(); ++s) tv += std::abs(counts[s] / n - marginal[s]);
            record(5, 0.5 * tv);
        }
    }
    for (auto& r : report.invariants) r.passed = r.worst <= r.tolerance;
    return report;
}

}  // namespace fepcd::oracle
