// Serial vs OpenMP-parallel kernels: vectorized env stepping and batched
// MLP forward/backward. Run with --benchmark_filter=... to narrow.
#include <benchmark/benchmark.h>

#include "plab/env.hpp"
#include "plab/mlp.hpp"

namespace {

using namespace plab;

void bench_env_step(benchmark::State& state, bool parallel) {
    const int n = static_cast<int>(state.range(0));
    VecEnv env = make_pointnav_venv(n, 0xBE7C1u);
    std::vector<double> actions(static_cast<std::size_t>(n) * kPointNavActDim, 0.3);
    std::vector<double> obs(static_cast<std::size_t>(n) * kPointNavObsDim);
    std::vector<double> rewards(n);
    std::vector<std::uint8_t> dones(n), succ(n);
    for (auto _ : state) {
        if (parallel)
            venv_step_all(env, actions, obs, rewards, dones, succ);
        else
            venv_step_all_serial(env, actions, obs, rewards, dones, succ);
        benchmark::DoNotOptimize(obs.data());
        env.completed.clear();
    }
    state.SetItemsProcessed(state.iterations() * n);
}

void bench_mlp(benchmark::State& state, bool forward_only) {
    const int batch = static_cast<int>(state.range(0));
    MlpSpec spec{kPointNavObsDim, {64, 64}, Activation::tanh, HeadKind::diagonal_gaussian, 2};
    ParamTree params = init_params(spec, 0xBE7C2u);
    std::vector<double> obs(static_cast<std::size_t>(batch) * spec.input_dim);
    RngStream rng{0xBE7C3u, 0};
    for (auto& v : obs) v = rng.uniform(-1.0, 1.0);
    DistParams dist;
    std::vector<double> values;
    ForwardCache cache;
    GradTree grad(params.data.size());
    std::vector<double> d_param(static_cast<std::size_t>(batch) * 2, 0.01);
    std::vector<double> d_log_std(2, 0.0);
    std::vector<double> d_value(batch, 0.01);
    for (auto _ : state) {
        forward(params, obs, batch, dist, values, forward_only ? nullptr : &cache);
        if (!forward_only) {
            std::fill(grad.begin(), grad.end(), 0.0);
            backward(params, cache, d_param, d_log_std, d_value, grad);
        }
        benchmark::DoNotOptimize(dist.param.data());
    }
    state.SetItemsProcessed(state.iterations() * batch);
}

}  // namespace

BENCHMARK_CAPTURE(bench_env_step, serial, false)->Arg(256)->Arg(2048)->Arg(8192);
BENCHMARK_CAPTURE(bench_env_step, openmp, true)->Arg(256)->Arg(2048)->Arg(8192);
BENCHMARK_CAPTURE(bench_mlp, forward, true)->Arg(256)->Arg(4096);
BENCHMARK_CAPTURE(bench_mlp, forward_backward, false)->Arg(256)->Arg(4096);

BENCHMARK_MAIN();
