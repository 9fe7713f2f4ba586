#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "plab/env.hpp"
#include "plab/mlp.hpp"
#include "plab/rng.hpp"

namespace plab {

// Learnability-filtered level sampling: periodically score a batch of fresh
// procedural levels with the current policy and keep the ones closest to a
// 50% success rate.
struct SflConfig {
    int rollout_length = 512;     // L: per-episode step cap while scoring
    double sample_ratio = 0.5;    // rho: fraction of slots fed from the buffer
    int filter_batch = 64;        // N: levels scored per refresh
    int buffer_size = 16;         // K: levels kept
    int update_period = 16;       // T: PPO updates between refreshes
    int episodes_per_level = 4;

    void validate() const;
};

struct LevelEntry {
    std::uint64_t level_seed = 0;
    double score = 0;             // p_hat * (1 - p_hat), in [0, 0.25]
    std::int64_t scored_at = 0;   // update index
};

struct LevelBuffer {
    std::vector<LevelEntry> entries;  // sorted by score descending
};

// Empirical success rate p_hat per level over sampled-action episodes capped
// at rollout_length steps; score = p_hat * (1 - p_hat).
std::vector<double> score_learnability(const ParamTree& params,
                                       std::span<const PointNavParams> levels,
                                       int rollout_length, int episodes_per_level,
                                       std::uint64_t seed);

// Seed-based overload: levels come from pointnav_level(seed).
std::vector<double> score_learnability_seeds(const ParamTree& params,
                                             std::span<const std::uint64_t> level_seeds,
                                             int rollout_length, int episodes_per_level,
                                             std::uint64_t seed);

// Samples cfg.filter_batch fresh level seeds, scores them, and replaces the
// buffer with the top cfg.buffer_size by score (ties by seed ascending).
LevelBuffer refresh_buffer(const ParamTree& params, const SflConfig& cfg,
                           RngStream& level_rng, std::int64_t update_index);

// round(rho * n_slots) slots drawn uniformly with replacement from the
// buffer; the rest get fresh random seeds.
std::vector<std::uint64_t> sample_training_levels(const LevelBuffer& buffer, int n_slots,
                                                  double rho, RngStream& rng);

}  // namespace plab
