#include "plab/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "plab/dist.hpp"

namespace plab {

void SflConfig::validate() const {
    if (buffer_size > filter_batch)
        throw std::invalid_argument("SflConfig: buffer_size must be <= filter_batch");
    if (sample_ratio < 0 || sample_ratio > 1)
        throw std::invalid_argument("SflConfig: sample_ratio must be in [0,1]");
    if (rollout_length < 1 || episodes_per_level < 1 || update_period < 1)
        throw std::invalid_argument("SflConfig: counts must be >= 1");
}

std::vector<double> score_learnability(const ParamTree& params,
                                       std::span<const PointNavParams> levels,
                                       int rollout_length, int episodes_per_level,
                                       std::uint64_t seed) {
    if (episodes_per_level < 1)
        throw std::invalid_argument("score_learnability: episodes_per_level must be >= 1");
    const int n_levels = static_cast<int>(levels.size());
    const int total = n_levels * episodes_per_level;
    std::vector<std::uint8_t> succ(total, 0);

#pragma omp parallel for if (total >= 8)
    for (int e = 0; e < total; ++e) {
        int li = e / episodes_per_level;
        PointNavParams pn = levels[li];
        pn.episode_cap = rollout_length;
        RngStream policy_rng = substream(seed, 0xA0000ULL + static_cast<std::uint64_t>(e));
        RngStream env_rng = substream(seed, 0xB0000ULL + static_cast<std::uint64_t>(e));
        PointNavState s = pointnav_reset(pn, env_rng.next_u64());
        std::vector<double> obs(kPointNavObsDim), act(kPointNavActDim);
        DistParams dist;
        std::vector<double> values;
        for (int t = 0; t < rollout_length; ++t) {
            pointnav_obs(pn, s, obs);
            forward(params, obs, 1, dist, values, nullptr);
            sample_action(dist, 0, policy_rng, act);
            StepResult r = pointnav_step(pn, s, act);
            if (r.done) {
                succ[e] = r.success ? 1 : 0;
                break;
            }
        }
    }
    std::vector<double> scores(n_levels);
    for (int li = 0; li < n_levels; ++li) {
        int n = 0;
        for (int e = li * episodes_per_level; e < (li + 1) * episodes_per_level; ++e)
            n += succ[e];
        double p = static_cast<double>(n) / episodes_per_level;
        scores[li] = p * (1.0 - p);
    }
    return scores;
}

std::vector<double> score_learnability_seeds(const ParamTree& params,
                                             std::span<const std::uint64_t> level_seeds,
                                             int rollout_length, int episodes_per_level,
                                             std::uint64_t seed) {
    std::vector<PointNavParams> levels;
    levels.reserve(level_seeds.size());
    for (std::uint64_t s : level_seeds) levels.push_back(pointnav_level(s));
    return score_learnability(params, levels, rollout_length, episodes_per_level, seed);
}

LevelBuffer refresh_buffer(const ParamTree& params, const SflConfig& cfg,
                           RngStream& level_rng, std::int64_t update_index) {
    cfg.validate();
    std::vector<std::uint64_t> seeds(cfg.filter_batch);
    for (auto& s : seeds) s = level_rng.next_u64();
    std::uint64_t score_seed = level_rng.next_u64();
    std::vector<double> scores =
        score_learnability_seeds(params, seeds, cfg.rollout_length,
                                 cfg.episodes_per_level, score_seed);

    std::vector<LevelEntry> entries(cfg.filter_batch);
    for (int i = 0; i < cfg.filter_batch; ++i)
        entries[i] = {seeds[i], scores[i], update_index};
    std::sort(entries.begin(), entries.end(), [](const LevelEntry& a, const LevelEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.level_seed < b.level_seed;
    });
    entries.resize(cfg.buffer_size);
    return LevelBuffer{std::move(entries)};
}

std::vector<std::uint64_t> sample_training_levels(const LevelBuffer& buffer, int n_slots,
                                                  double rho, RngStream& rng) {
    int from_buffer = static_cast<int>(std::lround(rho * n_slots));
    if (from_buffer > 0 && buffer.entries.empty())
        throw std::invalid_argument("sample_training_levels: rho > 0 with empty buffer");
    std::vector<std::uint64_t> out(n_slots);
    for (int i = 0; i < n_slots; ++i) {
        if (i < from_buffer) {
            std::size_t j = rng.uniform_int(buffer.entries.size());
            out[i] = buffer.entries[j].level_seed;
        } else {
            out[i] = rng.next_u64();
        }
    }
    return out;
}

}  // namespace plab
