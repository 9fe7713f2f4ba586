#include "plab/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace plab {

namespace {

double dist_to_goal(const PointNavParams& p, const std::array<double, 2>& pos) {
    double dx = pos[0] - p.goal[0];
    double dy = pos[1] - p.goal[1];
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

PointNavParams pointnav_level(std::uint64_t level_seed, int episode_cap) {
    RngStream rng = substream(level_seed, 0x4C56);
    PointNavParams p;
    p.goal = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    p.force_gain = rng.uniform(0.7, 1.3);
    p.friction = rng.uniform(0.05, 0.2);
    // log-uniform radius: levels span easy to hard
    p.success_radius = 0.04 * std::exp(rng.uniform(0.0, std::log(10.0)));
    p.episode_cap = episode_cap;
    p.level_seed = level_seed;
    return p;
}

PointNavState pointnav_reset(const PointNavParams& p, std::uint64_t episode_seed) {
    (void)p;
    RngStream rng = substream(episode_seed, 0x5253);
    PointNavState s;
    s.pos = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    s.vel = {0.0, 0.0};
    s.steps = 0;
    return s;
}

void pointnav_obs(const PointNavParams& p, const PointNavState& s, std::span<double> out) {
    out[0] = s.pos[0];
    out[1] = s.pos[1];
    out[2] = s.vel[0];
    out[3] = s.vel[1];
    out[4] = p.goal[0] - s.pos[0];
    out[5] = p.goal[1] - s.pos[1];
}

StepResult pointnav_step(const PointNavParams& p, PointNavState& s, std::span<const double> action) {
    double prev_dist = dist_to_goal(p, s.pos);
    for (int i = 0; i < 2; ++i) {
        double a = std::clamp(action[i], -1.0, 1.0);
        s.vel[i] = (1.0 - p.friction) * s.vel[i] + p.force_gain * a * kPointNavDt;
        s.pos[i] += s.vel[i] * kPointNavDt;
    }
    s.steps += 1;
    double new_dist = dist_to_goal(p, s.pos);
    StepResult r;
    r.success = new_dist <= p.success_radius;
    r.done = r.success || s.steps >= p.episode_cap;
    r.reward = (prev_dist - new_dist) + (r.success ? 1.0 : 0.0);
    return r;
}

ChainState chain_reset(const ChainParams& p) {
    (void)p;
    return ChainState{};
}

void chain_obs(const ChainParams& p, const ChainState& s, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[s.state] = 1.0;
}

StepResult chain_step(const ChainParams& p, ChainState& s, int action, RngStream& rng) {
    int move = action == 1 ? 1 : -1;
    if (p.slip_prob > 0 && rng.uniform() < p.slip_prob) move = -move;
    s.state = std::clamp(s.state + move, 0, p.n_states - 1);
    s.steps += 1;
    StepResult r;
    r.success = s.state == p.n_states - 1;
    r.done = r.success || s.steps >= p.episode_cap;
    r.reward = r.success ? 1.0 : 0.0;
    return r;
}

double chain_optimal_return(const ChainParams& p) {
    // finite-horizon value iteration; reward only on reaching the last state
    int n = p.n_states;
    std::vector<double> v(n, 0.0), nv(n);
    for (int h = 0; h < p.episode_cap; ++h) {
        for (int s = 0; s < n - 1; ++s) {
            double best = -1;
            for (int a = 0; a < 2; ++a) {
                int move = a == 1 ? 1 : -1;
                int s_int = std::clamp(s + move, 0, n - 1);
                int s_flip = std::clamp(s - move, 0, n - 1);
                auto val = [&](int ns) {
                    return ns == n - 1 ? 1.0 : v[ns];
                };
                double q = (1.0 - p.slip_prob) * val(s_int) + p.slip_prob * val(s_flip);
                best = std::max(best, q);
            }
            nv[s] = best;
        }
        nv[n - 1] = 0.0;
        v = nv;
    }
    return v[0];
}

// ---------------------------------------------------------------------------

static void reset_slot(VecEnv& env, int i) {
    if (env.kind == EnvKind::pointnav) {
        std::uint64_t level = env.fixed_levels.empty() ? env.slot_rng[i].next_u64()
                                                       : env.fixed_levels[i];
        env.pn_params[i] = pointnav_level(level, env.episode_cap);
        env.pn_state[i] = pointnav_reset(env.pn_params[i], env.slot_rng[i].next_u64());
    } else {
        env.ch_state[i] = chain_reset(env.chain);
    }
    env.ep_return[i] = 0;
    env.ep_steps[i] = 0;
}

VecEnv make_pointnav_venv(int n_slots, std::uint64_t seed, int episode_cap) {
    VecEnv env;
    env.kind = EnvKind::pointnav;
    env.n_slots = n_slots;
    env.episode_cap = episode_cap;
    env.pn_params.resize(n_slots);
    env.pn_state.resize(n_slots);
    env.slot_rng.resize(n_slots);
    env.ep_return.assign(n_slots, 0.0);
    env.ep_steps.assign(n_slots, 0);
    for (int i = 0; i < n_slots; ++i) {
        env.slot_rng[i] = substream(seed, static_cast<std::uint64_t>(i));
        reset_slot(env, i);
    }
    return env;
}

VecEnv make_chain_venv(int n_slots, const ChainParams& p, std::uint64_t seed) {
    VecEnv env;
    env.kind = EnvKind::chain;
    env.n_slots = n_slots;
    env.chain = p;
    env.episode_cap = p.episode_cap;
    env.ch_state.resize(n_slots);
    env.slot_rng.resize(n_slots);
    env.ep_return.assign(n_slots, 0.0);
    env.ep_steps.assign(n_slots, 0);
    for (int i = 0; i < n_slots; ++i) {
        env.slot_rng[i] = substream(seed, static_cast<std::uint64_t>(i));
        reset_slot(env, i);
    }
    return env;
}

void venv_set_levels(VecEnv& env, std::span<const std::uint64_t> level_seeds) {
    if (!level_seeds.empty() && level_seeds.size() != static_cast<std::size_t>(env.n_slots))
        throw std::invalid_argument("venv_set_levels: need one seed per slot");
    env.fixed_levels.assign(level_seeds.begin(), level_seeds.end());
}

void venv_obs_all(const VecEnv& env, std::span<double> out) {
    int od = env.obs_dim();
    for (int i = 0; i < env.n_slots; ++i) {
        auto row = out.subspan(static_cast<std::size_t>(i) * od, od);
        if (env.kind == EnvKind::pointnav)
            pointnav_obs(env.pn_params[i], env.pn_state[i], row);
        else
            chain_obs(env.chain, env.ch_state[i], row);
    }
}

namespace {

// One slot step + auto-reset; returns the completed episode, if any.
bool step_slot(VecEnv& env, int i, std::span<const double> actions,
               std::span<double> obs_out, std::span<double> rewards,
               std::span<std::uint8_t> dones, std::span<std::uint8_t> successes,
               EpisodeRecord& rec) {
    int od = env.obs_dim();
    int ad = env.act_dim();
    auto act = actions.subspan(static_cast<std::size_t>(i) * ad, ad);
    StepResult r;
    if (env.kind == EnvKind::pointnav)
        r = pointnav_step(env.pn_params[i], env.pn_state[i], act);
    else
        r = chain_step(env.chain, env.ch_state[i], static_cast<int>(act[0]), env.slot_rng[i]);
    env.ep_return[i] += r.reward;
    env.ep_steps[i] += 1;
    rewards[i] = r.reward;
    dones[i] = r.done ? 1 : 0;
    successes[i] = r.success ? 1 : 0;
    bool completed = false;
    if (r.done) {
        rec = {env.ep_return[i], r.success, env.ep_steps[i]};
        completed = true;
        reset_slot(env, i);
    }
    auto row = obs_out.subspan(static_cast<std::size_t>(i) * od, od);
    if (env.kind == EnvKind::pointnav)
        pointnav_obs(env.pn_params[i], env.pn_state[i], row);
    else
        chain_obs(env.chain, env.ch_state[i], row);
    return completed;
}

void check_sizes(const VecEnv& env, std::span<const double> actions,
                 std::span<double> obs_out, std::span<double> rewards,
                 std::span<std::uint8_t> dones, std::span<std::uint8_t> successes) {
    std::size_t n = static_cast<std::size_t>(env.n_slots);
    if (actions.size() != n * env.act_dim() || obs_out.size() != n * env.obs_dim() ||
        rewards.size() != n || dones.size() != n || successes.size() != n)
        throw std::invalid_argument("venv_step_all: slot count mismatch");
}

}  // namespace

void venv_step_all(VecEnv& env, std::span<const double> actions,
                   std::span<double> obs_out, std::span<double> rewards,
                   std::span<std::uint8_t> dones, std::span<std::uint8_t> successes) {
    check_sizes(env, actions, obs_out, rewards, dones, successes);
    int n = env.n_slots;
    std::vector<EpisodeRecord> recs(n);
    std::vector<std::uint8_t> has(n, 0);
#pragma omp parallel for if (n >= 16)
    for (int i = 0; i < n; ++i)
        has[i] = step_slot(env, i, actions, obs_out, rewards, dones, successes, recs[i]) ? 1 : 0;
    // completions appended in slot order regardless of thread schedule
    for (int i = 0; i < n; ++i)
        if (has[i]) env.completed.push_back(recs[i]);
}

void venv_step_all_serial(VecEnv& env, std::span<const double> actions,
                          std::span<double> obs_out, std::span<double> rewards,
                          std::span<std::uint8_t> dones, std::span<std::uint8_t> successes) {
    check_sizes(env, actions, obs_out, rewards, dones, successes);
    for (int i = 0; i < env.n_slots; ++i) {
        EpisodeRecord rec;
        if (step_slot(env, i, actions, obs_out, rewards, dones, successes, rec))
            env.completed.push_back(rec);
    }
}

}  // namespace plab
