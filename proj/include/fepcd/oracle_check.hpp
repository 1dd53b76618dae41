#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fepcd/rbm.hpp"

namespace fepcd::oracle {

using FreeEnergyFn = std::function<double(const RbmParams&, std::span<const double>)>;

struct CheckConfig {
    std::size_t n_visible = 3;
    std::size_t n_hidden = 3;
    std::size_t trials = 25;
    std::uint64_t seed = 1;
    std::size_t chains = 64;
    std::size_t steps = 2000;
    std::size_t data_rows = 5;
    double tv_tolerance = 0.03;
    std::size_t threads = 1;
    // Implementation under test; replaced by fault-injection fixtures.
    FreeEnergyFn free_energy = [](const RbmParams& p, std::span<const double> v) { return fepcd::free_energy(p, v); };
};

struct InvariantResult {
    std::string name;
    double worst = 0.0;      // largest observed violation measure
    double tolerance = 0.0;
    bool passed = true;
};

struct CheckReport {
    std::vector<InvariantResult> invariants;
    std::vector<std::string> warnings;

    bool passed() const;
    const InvariantResult* find(const std::string& name) const;
};

/// Runs the identity suite on `trials` random binary models with
/// parameters ~ Normal(0, 1):
///   normalization           |sum_v P(v) - 1|                    <= 1e-10
///   free_energy_identity    |F(v) + log sum_h e^{-E(v,h)}|       <= 1e-10
///   free_energy_forms       |F(v) - entropy-form F(v)|          <= 1e-8
///   conditional_consistency |hidden_probs - enumerated P(h|v)|  <= 1e-10
///   gradient_equivalence    |exact - finite-difference grad|    <= 1e-6
///   gibbs_stationarity      TV(chain histogram, P(v))           <= tv_tolerance
CheckReport run_check(const CheckConfig& config);

}  // namespace fepcd::oracle
