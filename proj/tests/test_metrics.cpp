#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "plab/metrics.hpp"
#include "plab/optim.hpp"
#include "plab/ppo.hpp"

using namespace plab;

namespace {

// Zero-weight tree with a chosen bias on the actor output layer.
ParamTree chain_policy(int n_states, double left_bias, double right_bias) {
    MlpSpec spec{n_states, {}, Activation::tanh, HeadKind::categorical, 2};
    ParamTree p;
    p.spec = spec;
    p.layout = make_layout(spec);
    p.data.assign(p.layout.total, 0.0);
    const LayerShape& out = p.layout.actor.back();
    p.data[out.b_off + 0] = left_bias;
    p.data[out.b_off + 1] = right_bias;
    return p;
}

std::vector<std::uint64_t> seeds(int n) {
    std::vector<std::uint64_t> s(n);
    for (int i = 0; i < n; ++i) s[i] = 1000 + i;
    return s;
}

}  // namespace

TEST_CASE("kl to behavior is zero when the policy has not moved") {
    MlpSpec spec{kPointNavObsDim, {8}, Activation::tanh, HeadKind::diagonal_gaussian, 2};
    ParamTree params = init_params(spec, 3);
    VecEnv env = make_pointnav_venv(4, 9);
    auto streams = make_policy_streams(10, 4);
    RolloutBatch b = collect(params, env, 8, streams);
    CHECK(kl_to_behavior(b, params) == 0.0);
    CHECK(mean_entropy(b, params) > 0.0);
}

TEST_CASE("kl to behavior is positive after the policy moves") {
    MlpSpec spec{kPointNavObsDim, {8}, Activation::tanh, HeadKind::diagonal_gaussian, 2};
    ParamTree params = init_params(spec, 3);
    VecEnv env = make_pointnav_venv(4, 9);
    auto streams = make_policy_streams(10, 4);
    RolloutBatch b = collect(params, env, 8, streams);
    RngStream rng{11, 0};
    for (auto& v : params.data) v += 0.05 * rng.normal();
    CHECK(kl_to_behavior(b, params) > 0.0);
}

TEST_CASE("ddr arithmetic") {
    CHECK(ddr(524288, 0.01) == doctest::Approx(5.24288e7).epsilon(1e-12));
    CHECK(ddr(100, 0.0) == std::numeric_limits<double>::infinity());
    CHECK(ddr(2 * 4096, 0.5) == doctest::Approx(2.0 * ddr(4096, 0.5)).epsilon(1e-12));
    CHECK_THROWS(ddr(-1, 0.5));
    CHECK_THROWS(ddr(10, -0.5));
    // finite case: ddr * kl = n exactly
    CHECK(ddr(4096, 0.37) * 0.37 == doctest::Approx(4096.0).epsilon(1e-12));
}

TEST_CASE("per-run ddr aggregate is a geometric mean over finite entries") {
    std::vector<double> v{10.0, 1000.0};
    CHECK(run_ddr_aggregate(v) == doctest::Approx(100.0).epsilon(1e-12));
    std::vector<double> c{42.0, 42.0, 42.0};
    CHECK(run_ddr_aggregate(c) == doctest::Approx(42.0).epsilon(1e-12));
    std::vector<double> shuffled{1000.0, 10.0};
    CHECK(run_ddr_aggregate(shuffled) == doctest::Approx(run_ddr_aggregate(v)).epsilon(1e-12));
    std::vector<double> with_inf{10.0, std::numeric_limits<double>::infinity(), 1000.0};
    CHECK(run_ddr_aggregate(with_inf) == doctest::Approx(100.0).epsilon(1e-12));
    CHECK_THROWS(run_ddr_aggregate(std::span<const double>{}));
}

TEST_CASE("an always-right chain policy solves every episode") {
    ParamTree p = chain_policy(4, -10.0, 10.0);
    ChainParams chain{4, 10, 0.0};
    double sr = evaluate_solve_rate(p, EnvKind::chain, chain, seeds(8), 4, 77, 10);
    CHECK(sr == 1.0);
}

TEST_CASE("an always-left chain policy solves nothing") {
    ParamTree p = chain_policy(4, 10.0, -10.0);
    ChainParams chain{4, 10, 0.0};
    double mean_ret = -1;
    double sr = evaluate_solve_rate(p, EnvKind::chain, chain, seeds(8), 4, 78, 10, &mean_ret);
    CHECK(sr == 0.0);
    CHECK(mean_ret == 0.0);
}

TEST_CASE("uniform random chain policy matches the exact success probability") {
    // n=8, cap 8, slip 0: success needs 7 straight rights (2^-7), or one
    // leading no-op left at state 0 followed by 7 rights (2^-8)
    ParamTree p = chain_policy(8, 0.0, 0.0);
    ChainParams chain{8, 8, 0.0};
    const int n_episodes = 10000;
    double sr = evaluate_solve_rate(p, EnvKind::chain, chain, seeds(100), 100, 79, 8);
    double expect = std::pow(0.5, 7) + std::pow(0.5, 8);
    double se = std::sqrt(expect * (1 - expect) / n_episodes);
    CHECK(std::abs(sr - expect) < 3 * se);
}

TEST_CASE("evaluation is deterministic in the eval seed") {
    MlpSpec spec{kPointNavObsDim, {8}, Activation::tanh, HeadKind::diagonal_gaussian, 2};
    ParamTree p = init_params(spec, 5);
    double a = evaluate_solve_rate(p, EnvKind::pointnav, ChainParams{}, seeds(16), 2, 55, 256);
    double b = evaluate_solve_rate(p, EnvKind::pointnav, ChainParams{}, seeds(16), 2, 55, 256);
    CHECK(a == b);
}

TEST_CASE("kl to behavior stays at zero through an lr=0 update") {
    MlpSpec spec{kPointNavObsDim, {8}, Activation::tanh, HeadKind::diagonal_gaussian, 2};
    ParamTree params = init_params(spec, 6);
    VecEnv env = make_pointnav_venv(4, 12);
    auto streams = make_policy_streams(13, 4);
    RolloutBatch b = collect(params, env, 8, streams);
    compute_gae(b, 0.995, 0.9);
    PpoConfig cfg;
    cfg.n_envs = 4;
    cfg.k_steps = 8;
    cfg.n_epochs = 2;
    cfg.n_minibatches = 2;
    cfg.lr = 0.0;
    AdamState adam = AdamState::make(params.layout.total, 0.0);
    RngStream upd{14, 0};
    update(b, params, adam, nullptr, cfg, upd);
    CHECK(kl_to_behavior(b, params) <= 1e-8);
}
