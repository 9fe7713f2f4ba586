#pragma once

#include <cstdint>
#include <vector>

#include "plab/dist.hpp"
#include "plab/env.hpp"
#include "plab/mlp.hpp"

namespace plab {

// One outer-loop dataset: N envs x K steps, step-major (index t*N + n).
struct RolloutBatch {
    int n_envs = 0;
    int k_steps = 0;
    int obs_dim = 0;
    int act_dim = 0;
    int dist_dim = 0;
    HeadKind head = HeadKind::categorical;

    std::vector<double> obs;                 // N*K*obs_dim
    std::vector<double> actions;             // N*K*act_dim
    std::vector<double> rewards;             // N*K
    std::vector<std::uint8_t> dones;         // N*K
    std::vector<std::uint8_t> successes;     // N*K
    std::vector<double> behavior_log_probs;  // N*K
    std::vector<double> behavior_dist;       // N*K*dist_dim (logits or mean)
    std::vector<double> behavior_log_std;    // dist_dim (gaussian only)
    std::vector<double> values;              // N*K
    std::vector<double> bootstrap_values;    // N
    std::vector<double> advantages;          // N*K, filled by compute_gae
    std::vector<double> targets;             // N*K

    int size() const { return n_envs * k_steps; }
    std::size_t idx(int t, int n) const {
        return static_cast<std::size_t>(t) * n_envs + n;
    }
};

// Rolls the behavior policy for K steps across all slots. Actions are sampled
// from per-slot counter streams derived from (policy_seed, slot), so slot
// trajectories do not depend on the total slot count.
RolloutBatch collect(const ParamTree& params, VecEnv& env, int k_steps,
                     std::vector<RngStream>& policy_rng);

std::vector<RngStream> make_policy_streams(std::uint64_t policy_seed, int n_slots);

// GAE: delta_t = r_t + gamma*(1-done_t)*V_{t+1} - V_t with the bootstrap as
// V_K; advantages by the backward recurrence, targets = values + advantages.
void compute_gae(RolloutBatch& batch, double gamma, double lambda);

// Zero-mean unit-std advantages over the whole N*K batch.
void normalize_advantages(RolloutBatch& batch);

}  // namespace plab
