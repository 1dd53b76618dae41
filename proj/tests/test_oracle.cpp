#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "fepcd/errors.hpp"
#include "fepcd/oracle.hpp"
#include "fepcd/oracle_check.hpp"
#include "support.hpp"

using namespace fepcd;
using namespace fepcd::oracle;
using fepcd::test::t1;

namespace {

// Probability of each T1 visible state, indexed by (v0, v1).
double t1_marginal(int v0, int v1) {
    static const double table[2][2] = {{0.17490685479678995333, 0.21832628941397131969},
                                       {0.26270225753554023083, 0.34406459825369849615}};
    return table[v0][v1];
}

}  // namespace

TEST_CASE("state indexing round-trips") {
    for (std::size_t s = 0; s < 32; ++s) CHECK(index_from_state(state_from_index(s, 5)) == s);
    CHECK(state_from_index(1, 2) == Vector{1, 0});
}

TEST_CASE("log partition function") {
    CHECK(log_partition_function(RbmParams::zeros(2, 2)) == doctest::Approx(4 * std::log(2.0)).epsilon(1e-15));
    CHECK(log_partition_function(t1()) == doctest::Approx(3.2910041300908867587).epsilon(1e-14));

    RbmParams p = t1();
    double prev = log_partition_function(p);
    for (int step = 0; step < 10; ++step) {
        for (double& b : p.b) b += 0.25;
        const double now = log_partition_function(p);
        CHECK(now > prev);
        prev = now;
    }
}

TEST_CASE("visible marginal") {
    for (double x : visible_marginal(RbmParams::zeros(3, 2))) CHECK(x == doctest::Approx(0.125).epsilon(1e-15));
    const auto m = visible_marginal(t1());
    for (std::size_t s = 0; s < 4; ++s) {
        const Vector v = state_from_index(s, 2);
        CHECK(m[s] == doctest::Approx(t1_marginal(int(v[0]), int(v[1]))).epsilon(1e-14));
    }
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const RbmParams p = test::random_params(5, 4, seed, 2.0);
        const auto pv = visible_marginal(p);
        CHECK(std::abs(std::accumulate(pv.begin(), pv.end(), 0.0) - 1.0) <= 1e-10);
        const double log_z = log_partition_function(p);
        for (std::size_t s = 0; s < pv.size(); ++s) {
            CHECK(std::abs(std::exp(-free_energy(p, state_from_index(s, 5)) - log_z) - pv[s]) <= 1e-10);
        }
    }
}

TEST_CASE("exact gradient on a single data point") {
    const auto g = exact_gradient(t1(), Matrix(1, 2, {1, 1}));
    const double neg_vh[2][2] = {{0.50169929269253597577, 0.17732032413793714731},
                                 {0.44589823685177465951, 0.22671202202610722678}};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) CHECK(g.negative.vh(i, j) == doctest::Approx(neg_vh[i][j]).epsilon(1e-14));
    }
    CHECK(g.negative.v[0] == doctest::Approx(0.60676685578923872698).epsilon(1e-14));
    CHECK(g.negative.v[1] == doctest::Approx(0.56239088766766981584).epsilon(1e-14));
    CHECK(g.negative.h[0] == doctest::Approx(0.75281279482453719243).epsilon(1e-14));
    CHECK(g.negative.h[1] == doctest::Approx(0.38481696796321690462).epsilon(1e-14));
    CHECK(g.positive.v == Vector{1, 1});
    CHECK(g.positive.h[0] == doctest::Approx(0.85814893509951221041).epsilon(1e-14));
    CHECK(g.positive.h[1] == doctest::Approx(0.31002551887238755737).epsilon(1e-14));
    CHECK(g.positive.vh(1, 0) == doctest::Approx(0.85814893509951221041).epsilon(1e-14));
}

TEST_CASE("data from the model distribution gives zero gradient") {
    const RbmParams p = test::random_params(3, 2, 4);
    const auto pv = visible_marginal(p);
    GradientStats weighted{Matrix(3, 2), Vector(3), Vector(2), 1};
    GradientStats neg;
    for (std::size_t s = 0; s < 8; ++s) {
        const auto g = exact_gradient(p, Matrix(1, 3, state_from_index(s, 3)));
        neg = g.negative;
        for (std::size_t k = 0; k < 6; ++k) weighted.vh.data()[k] += pv[s] * g.positive.vh.data()[k];
        for (std::size_t i = 0; i < 3; ++i) weighted.v[i] += pv[s] * g.positive.v[i];
        for (std::size_t j = 0; j < 2; ++j) weighted.h[j] += pv[s] * g.positive.h[j];
    }
    CHECK(max_abs_diff(weighted, neg) <= 1e-12);
}

TEST_CASE("negative statistics have the Rao-Blackwellized form") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const RbmParams p = test::random_params(4, 3, seed);
        const auto pv = visible_marginal(p);
        Matrix vh(4, 3);
        for (std::size_t s = 0; s < pv.size(); ++s) {
            const Vector v = state_from_index(s, 4);
            const Vector q = hidden_probs(p, v);
            for (std::size_t i = 0; i < 4; ++i) {
                for (std::size_t j = 0; j < 3; ++j) vh(i, j) += pv[s] * v[i] * q[j];
            }
        }
        const auto g = exact_gradient(p, Matrix(1, 4, 1.0));
        for (std::size_t k = 0; k < vh.size(); ++k) CHECK(std::abs(vh.data()[k] - g.negative.vh.data()[k]) <= 1e-10);
    }
}

TEST_CASE("log Z derivative equals the negative statistic") {
    const RbmParams p = test::random_params(3, 3, 8);
    const auto g = exact_gradient(p, Matrix(1, 3, 0.0));
    const double step = 1e-5;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            RbmParams up = p, down = p;
            up.W(i, j) += step;
            down.W(i, j) -= step;
            const double d = (log_partition_function(up) - log_partition_function(down)) / (2 * step);
            CHECK(std::abs(d - g.negative.vh(i, j)) <= 1e-8);
        }
    }
}

TEST_CASE("exact gradient matches finite differences") {
    const Matrix data(3, 2, {1, 1, 0, 1, 1, 1});
    const auto g = exact_gradient(t1(), data);
    CHECK(max_abs_diff(difference(g.positive, g.negative), finite_diff_loglik_grad(t1(), data, 1e-5)) <= 1e-6);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const RbmParams p = test::random_params(3, 3, seed);
        const Matrix d = test::random_binary(5, 3, seed);
        const auto e = exact_gradient(p, d);
        CHECK(max_abs_diff(difference(e.positive, e.negative), finite_diff_loglik_grad(p, d, 1e-5)) <= 1e-6);
    }
}

TEST_CASE("finite difference gradient properties") {
    const auto g = finite_diff_loglik_grad(RbmParams::zeros(3, 2), Matrix(1, 3, 1.0), 1e-5);
    for (double x : g.a) CHECK(x > 0.0);

    const Matrix once(2, 2, {1, 0, 0, 1});
    const Matrix twice(4, 2, {1, 0, 0, 1, 1, 0, 0, 1});
    CHECK(max_abs_diff(finite_diff_loglik_grad(t1(), once, 1e-5), finite_diff_loglik_grad(t1(), twice, 1e-5)) <=
          1e-12);
    CHECK_THROWS_AS(finite_diff_loglik_grad(t1(), once, 1e-2), PreconditionError);
    CHECK_THROWS_AS(finite_diff_loglik_grad(t1(), once, 1e-9), PreconditionError);
}

TEST_CASE("enumeration limits") {
    CHECK_NOTHROW(log_partition_function(RbmParams::zeros(10, 10)));
    CHECK_THROWS_AS(log_partition_function(RbmParams::zeros(11, 10)), SizeLimitError);
    CHECK_THROWS_AS(visible_marginal(RbmParams::zeros(2, 2, VisibleKind::Gaussian)), PreconditionError);
    CHECK_THROWS_AS(exact_gradient(RbmParams::zeros(15, 6), Matrix(1, 15)), SizeLimitError);
}

TEST_CASE("log_sum_exp and compensated sum") {
    const std::vector<double> xs{1000.0, 1000.0};
    CHECK(log_sum_exp(xs) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
    CompensatedSum s;
    s.add(1.0);
    for (int i = 0; i < 1000; ++i) s.add(1e-16);
    CHECK(s.value() == doctest::Approx(1.0 + 1e-13).epsilon(1e-15));
}

TEST_CASE("identity suite passes and catches an injected fault") {
    CheckConfig config;
    config.trials = 5;
    const auto ok = run_check(config);
    CHECK(ok.passed());
    CHECK(ok.find("gibbs_stationarity") != nullptr);

    config.free_energy = [](const RbmParams& p, std::span<const double> v) { return free_energy(p, v) + 1e-3; };
    const auto bad = run_check(config);
    CHECK_FALSE(bad.passed());
    REQUIRE(bad.find("free_energy_identity") != nullptr);
    CHECK_FALSE(bad.find("free_energy_identity")->passed);

    CheckConfig none;
    none.trials = 0;
    const auto empty = run_check(none);
    CHECK(empty.passed());
    CHECK_FALSE(empty.warnings.empty());
}
