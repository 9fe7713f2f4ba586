#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "plab/rng.hpp"

namespace plab {

struct StepResult {
    double reward = 0;
    bool done = false;
    bool success = false;
};

// ---------------------------------------------------------------------------
// Point-mass navigation: reach a goal in [-1,1]^2 under damped dynamics.
// Dense reward = decrease in goal distance, +1 on success.

struct PointNavParams {
    std::array<double, 2> goal{};
    double force_gain = 1.0;
    double friction = 0.1;
    double success_radius = 0.2;
    int episode_cap = 256;
    std::uint64_t level_seed = 0;
};

struct PointNavState {
    std::array<double, 2> pos{};
    std::array<double, 2> vel{};
    int steps = 0;
};

inline constexpr int kPointNavObsDim = 6;   // pos, vel, goal - pos
inline constexpr int kPointNavActDim = 2;
inline constexpr double kPointNavDt = 0.1;

// Level parameters as a deterministic function of the level seed. Success
// radius spans an order of magnitude so procedural levels cover a range of
// difficulties.
PointNavParams pointnav_level(std::uint64_t level_seed, int episode_cap = 256);

PointNavState pointnav_reset(const PointNavParams& p, std::uint64_t episode_seed);
StepResult pointnav_step(const PointNavParams& p, PointNavState& s, std::span<const double> action);
void pointnav_obs(const PointNavParams& p, const PointNavState& s, std::span<double> out);

// ---------------------------------------------------------------------------
// Chain MDP: states 0..n-1, start at 0, actions {left=0, right=1}, the
// intended move flips with slip_prob. Reward 1 and done at state n-1.

struct ChainParams {
    int n_states = 8;
    int episode_cap = 32;
    double slip_prob = 0.0;
};

struct ChainState {
    int state = 0;
    int steps = 0;
};

ChainState chain_reset(const ChainParams& p);
StepResult chain_step(const ChainParams& p, ChainState& s, int action, RngStream& rng);
void chain_obs(const ChainParams& p, const ChainState& s, std::span<double> out);  // one-hot

// Undiscounted value-iteration optimum from the start state (oracle).
double chain_optimal_return(const ChainParams& p);

// ---------------------------------------------------------------------------
// Vectorized facade: N independent slots with auto-reset. Slots never share
// mutable state, so stepping is data-parallel; episode seeds come from
// per-slot counter streams, so the trajectory of slot i does not depend on N.

enum class EnvKind { pointnav, chain };

struct EpisodeRecord {
    double ret = 0;
    bool success = false;
    int length = 0;
};

struct VecEnv {
    EnvKind kind = EnvKind::pointnav;
    int n_slots = 0;
    ChainParams chain;                       // shared by all slots (chain)
    std::vector<PointNavParams> pn_params;   // per slot (pointnav)
    std::vector<PointNavState> pn_state;
    std::vector<ChainState> ch_state;
    std::vector<RngStream> slot_rng;         // episode seeds + slip draws
    std::vector<double> ep_return;           // running return per slot
    std::vector<int> ep_steps;
    // fixed level assignment (curriculum); empty = fresh procedural level
    // per episode
    std::vector<std::uint64_t> fixed_levels;
    int episode_cap = 256;

    std::vector<EpisodeRecord> completed;    // drained by the caller

    int obs_dim() const { return kind == EnvKind::pointnav ? kPointNavObsDim : chain.n_states; }
    int act_dim() const { return kind == EnvKind::pointnav ? kPointNavActDim : 1; }
    bool discrete() const { return kind == EnvKind::chain; }
};

VecEnv make_pointnav_venv(int n_slots, std::uint64_t seed, int episode_cap = 256);
VecEnv make_chain_venv(int n_slots, const ChainParams& p, std::uint64_t seed);

// Assign fixed levels (one seed per slot); takes effect at each slot's next
// reset. Pass empty to return to procedural sampling.
void venv_set_levels(VecEnv& env, std::span<const std::uint64_t> level_seeds);

void venv_obs_all(const VecEnv& env, std::span<double> out);  // n_slots*obs_dim

// Steps every slot; on done the slot auto-resets and the returned obs row is
// the post-reset observation. Completed episodes are appended to
// env.completed in slot order.
void venv_step_all(VecEnv& env, std::span<const double> actions,
                   std::span<double> obs_out, std::span<double> rewards,
                   std::span<std::uint8_t> dones, std::span<std::uint8_t> successes);

// Serial reference for the OpenMP kernel above; must match it bitwise.
void venv_step_all_serial(VecEnv& env, std::span<const double> actions,
                          std::span<double> obs_out, std::span<double> rewards,
                          std::span<std::uint8_t> dones, std::span<std::uint8_t> successes);

}  // namespace plab
