#include "plab/rollout.hpp"

#include <cmath>
#include <stdexcept>

namespace plab {

std::vector<RngStream> make_policy_streams(std::uint64_t policy_seed, int n_slots) {
    std::vector<RngStream> streams(n_slots);
    for (int i = 0; i < n_slots; ++i)
        streams[i] = substream(policy_seed, 0xAC0000ULL + static_cast<std::uint64_t>(i));
    return streams;
}

RolloutBatch collect(const ParamTree& params, VecEnv& env, int k_steps,
                     std::vector<RngStream>& policy_rng) {
    const int N = env.n_slots;
    const int od = env.obs_dim();
    const int ad = env.act_dim();
    const int dd = params.spec.head_dim;
    if (static_cast<int>(policy_rng.size()) != N)
        throw std::invalid_argument("collect: one policy stream per slot required");
    if (od != params.spec.input_dim)
        throw std::invalid_argument("collect: env obs dim does not match network input dim");

    RolloutBatch b;
    b.n_envs = N;
    b.k_steps = k_steps;
    b.obs_dim = od;
    b.act_dim = ad;
    b.dist_dim = dd;
    b.head = params.spec.head;
    const std::size_t nk = static_cast<std::size_t>(N) * k_steps;
    b.obs.resize(nk * od);
    b.actions.resize(nk * ad);
    b.rewards.resize(nk);
    b.dones.resize(nk);
    b.successes.resize(nk);
    b.behavior_log_probs.resize(nk);
    b.behavior_dist.resize(nk * dd);
    b.values.resize(nk);
    b.advantages.assign(nk, 0.0);
    b.targets.assign(nk, 0.0);
    b.bootstrap_values.resize(N);

    std::vector<double> cur_obs(static_cast<std::size_t>(N) * od);
    venv_obs_all(env, cur_obs);

    DistParams dist;
    std::vector<double> values;
    for (int t = 0; t < k_steps; ++t) {
        forward(params, cur_obs, N, dist, values, nullptr);
        if (t == 0 && b.head == HeadKind::diagonal_gaussian) b.behavior_log_std = dist.log_std;

        std::size_t base = static_cast<std::size_t>(t) * N;
        std::copy(cur_obs.begin(), cur_obs.end(), b.obs.begin() + base * od);
        std::copy(dist.param.begin(), dist.param.end(), b.behavior_dist.begin() + base * dd);
        std::copy(values.begin(), values.end(), b.values.begin() + base);

        for (int n = 0; n < N; ++n)
            sample_action(dist, n, policy_rng[n],
                          {b.actions.data() + (base + n) * ad, static_cast<std::size_t>(ad)});
        auto lp = log_prob(dist, {b.actions.data() + base * ad, static_cast<std::size_t>(N) * ad});
        std::copy(lp.begin(), lp.end(), b.behavior_log_probs.begin() + base);

        venv_step_all(env, {b.actions.data() + base * ad, static_cast<std::size_t>(N) * ad},
                      cur_obs,
                      {b.rewards.data() + base, static_cast<std::size_t>(N)},
                      {b.dones.data() + base, static_cast<std::size_t>(N)},
                      {b.successes.data() + base, static_cast<std::size_t>(N)});
    }
    forward(params, cur_obs, N, dist, values, nullptr);
    b.bootstrap_values = values;
    return b;
}

void compute_gae(RolloutBatch& b, double gamma, double lambda) {
    if (gamma < 0 || gamma > 1 || lambda < 0 || lambda > 1)
        throw std::invalid_argument("compute_gae: gamma and lambda must be in [0,1]");
    const int N = b.n_envs, K = b.k_steps;
    b.advantages.resize(b.values.size());
    b.targets.resize(b.values.size());
#pragma omp parallel for if (N >= 16)
    for (int n = 0; n < N; ++n) {
        double next_adv = 0;
        for (int t = K - 1; t >= 0; --t) {
            std::size_t i = b.idx(t, n);
            double not_done = b.dones[i] ? 0.0 : 1.0;
            double next_v = (t == K - 1) ? b.bootstrap_values[n] : b.values[b.idx(t + 1, n)];
            double delta = b.rewards[i] + gamma * not_done * next_v - b.values[i];
            next_adv = delta + gamma * lambda * not_done * next_adv;
            b.advantages[i] = next_adv;
            b.targets[i] = b.values[i] + next_adv;
        }
    }
}

void normalize_advantages(RolloutBatch& b) {
    double mean = 0;
    for (double a : b.advantages) mean += a;
    mean /= static_cast<double>(b.advantages.size());
    double var = 0;
    for (double a : b.advantages) var += (a - mean) * (a - mean);
    var /= static_cast<double>(b.advantages.size());
    double inv = 1.0 / (std::sqrt(var) + 1e-8);
    for (double& a : b.advantages) a = (a - mean) * inv;
}

}  // namespace plab
