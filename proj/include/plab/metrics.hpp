#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "plab/env.hpp"
#include "plab/mlp.hpp"
#include "plab/rollout.hpp"

namespace plab {

// One CSV row per outer update.
struct MetricsRecord {
    std::int64_t update_index = 0;
    std::int64_t env_steps = 0;
    double mean_return = 0;
    double solve_rate = 0;
    double mean_kl_behavior = 0;  // nats
    double ddr = 0;               // transitions per nat
    double grad_norm_pre = 0;
    double grad_norm_post = 0;
    double param_update_l2 = 0;
    double entropy = 0;
    double lr = 0;
};

// Mean over all N*K visited states of closed-form KL(pi_behavior || pi_theta),
// from the stored behavior dist params.
double kl_to_behavior(const RolloutBatch& batch, const ParamTree& params);

// Mean policy entropy of the current params over the batch states.
double mean_entropy(const RolloutBatch& batch, const ParamTree& params);

// n_transitions / mean_kl; +infinity when mean_kl is zero.
double ddr(std::int64_t n_transitions, double mean_kl);

// Per-run scalar: geometric mean of the finite per-update DDR values.
double run_ddr_aggregate(std::span<const double> ddrs);

// Fraction of eval episodes ending in success, sampling actions
// stochastically; deterministic given eval_seed.
double evaluate_solve_rate(const ParamTree& params, EnvKind kind, const ChainParams& chain,
                           std::span<const std::uint64_t> level_seeds, int episodes_per_level,
                           std::uint64_t eval_seed, int episode_cap,
                           double* mean_return_out = nullptr);

}  // namespace plab
