#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plab/curriculum.hpp"
#include "plab/ppo.hpp"

namespace plab {

// Full run configuration. Serializes to a flat key-value text format
// ("key = value", '#' comments); unknown keys are rejected.
struct TrainConfig {
    // environment
    std::string env = "pointnav";  // pointnav | chain
    int chain_n_states = 8;
    int chain_episode_cap = 32;
    double chain_slip_prob = 0.0;
    int pointnav_episode_cap = 256;

    // network
    std::vector<int> hidden = {32, 32};
    std::string activation = "tanh";  // tanh | relu

    // ppo
    double gamma = 0.995;
    double lam = 0.9;
    double eps_clip = 0.2;
    double c1 = 0.5;
    double c2 = 0.01;
    int n_envs = 64;
    int k_steps = 64;
    int n_epochs = 8;
    int n_minibatches = 8;
    double lr = 3e-4;
    double max_grad_norm = 0.5;
    std::string mode = "ppo";  // ppo | ppo_ewma
    double com = 8.0;
    bool value_clip = true;
    bool lr_anneal = false;
    bool adv_norm = true;

    // budget and logging
    std::int64_t total_env_steps = 1000000;
    int eval_levels = 64;
    int eval_episodes_per_level = 1;
    int eval_period = 0;        // updates between evals; 0 = initial/final only
    int checkpoint_period = 0;  // updates between checkpoints; 0 = final only

    // curriculum
    bool curriculum = false;
    int sfl_rollout_length = 256;
    double sfl_rho = 0.5;
    int sfl_filter_batch = 64;
    int sfl_buffer_size = 16;
    int sfl_update_period = 16;
    int sfl_episodes_per_level = 4;

    // parallelization scaling strategy
    // none | more_minibatches | bigger_minibatches_fixed_lr | bigger_minibatches_sqrt_lr
    std::string strategy = "none";
    int minibatch_size = 0;        // strategy 1: fixed minibatch size
    int strategy_n_minibatches = 0;  // strategies 2-3: fixed minibatch count
    int base_minibatch_size = 0;   // strategy 3 reference point
    double base_lr = 0.0;

    std::uint64_t seed = 0;

    SflConfig sfl() const;
    PpoConfig ppo(int effective_n_minibatches, double effective_lr) const;
    MlpSpec mlp_spec() const;
    std::int64_t total_updates() const;
};

// Parse "key = value" lines; '#' starts a comment. Throws on unknown keys or
// malformed values.
TrainConfig parse_config_text(const std::string& text);
TrainConfig load_config_file(const std::string& path);

// Apply a single "key=value" override.
void apply_override(TrainConfig& cfg, const std::string& key, const std::string& value);

// Canonical serialization (every key, fixed order); input for config_hash.
std::string serialize_config(const TrainConfig& cfg);

// FNV-1a over the canonical serialization.
std::uint64_t config_hash(const TrainConfig& cfg);

// Derived inner-loop schedule under the selected scaling strategy.
struct DerivedSchedule {
    int n_minibatches = 0;
    int minibatch_size = 0;
    double lr = 0;
};
DerivedSchedule derive_schedule(const TrainConfig& cfg);

}  // namespace plab
