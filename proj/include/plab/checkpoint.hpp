#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "plab/curriculum.hpp"
#include "plab/env.hpp"
#include "plab/optim.hpp"
#include "plab/rng.hpp"

namespace plab {

// Binary run snapshot. Layout (little-endian):
//   magic "PLAB", u32 version, u64 config hash, then length-prefixed
//   sections (u32 tag, u64 payload bytes). See docs/checkpoint_format.md.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    std::string config_text;
    std::uint64_t cfg_hash = 0;
    std::int64_t update_index = 0;
    std::int64_t env_steps = 0;

    std::vector<double> params;
    std::vector<double> prox;   // empty in standard mode
    double ewma_beta = 0;

    AdamState adam;

    VecEnv venv;
    std::vector<RngStream> policy_rng;
    RngStream update_rng;
    RngStream level_rng;

    LevelBuffer buffer;         // empty when the curriculum is off

    // metrics cursor: rows already written plus the carried episode stats
    std::int64_t metrics_rows = 0;
    double last_mean_return = 0;
    double last_solve_rate = 0;
};

// Atomic: writes to "<path>.tmp" and renames, so a killed writer never
// leaves a truncated checkpoint visible.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);

// Throws on bad magic, unsupported version, or hash/section corruption.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace plab
