#include "plab/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "plab/dist.hpp"

namespace plab {

static DistParams behavior_dist_params(const RolloutBatch& b) {
    DistParams d;
    d.head = b.head;
    d.dim = b.dist_dim;
    d.batch = b.size();
    d.param = b.behavior_dist;
    d.log_std = b.behavior_log_std;
    return d;
}

double kl_to_behavior(const RolloutBatch& batch, const ParamTree& params) {
    DistParams cur;
    std::vector<double> values;
    forward(params, batch.obs, batch.size(), cur, values, nullptr);
    DistParams behavior = behavior_dist_params(batch);
    std::vector<double> k = kl(behavior, cur);
    double acc = 0;
    for (double v : k) acc += v;
    return acc / static_cast<double>(k.size());
}

double mean_entropy(const RolloutBatch& batch, const ParamTree& params) {
    DistParams cur;
    std::vector<double> values;
    forward(params, batch.obs, batch.size(), cur, values, nullptr);
    std::vector<double> h = entropy(cur);
    double acc = 0;
    for (double v : h) acc += v;
    return acc / static_cast<double>(h.size());
}

double ddr(std::int64_t n_transitions, double mean_kl) {
    if (n_transitions < 0 || mean_kl < 0)
        throw std::invalid_argument("ddr: negative input");
    if (mean_kl == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(n_transitions) / mean_kl;
}

double run_ddr_aggregate(std::span<const double> ddrs) {
    if (ddrs.empty()) throw std::invalid_argument("run_ddr_aggregate: empty input");
    double log_sum = 0;
    std::size_t n = 0;
    for (double d : ddrs) {
        if (std::isfinite(d) && d > 0) {
            log_sum += std::log(d);
            ++n;
        }
    }
    if (n == 0) return std::numeric_limits<double>::infinity();
    return std::exp(log_sum / static_cast<double>(n));
}

double evaluate_solve_rate(const ParamTree& params, EnvKind kind, const ChainParams& chain,
                           std::span<const std::uint64_t> level_seeds, int episodes_per_level,
                           std::uint64_t eval_seed, int episode_cap,
                           double* mean_return_out) {
    if (level_seeds.empty()) throw std::invalid_argument("evaluate_solve_rate: empty eval set");
    if (episodes_per_level < 1)
        throw std::invalid_argument("evaluate_solve_rate: episodes_per_level must be >= 1");
    const int n_levels = static_cast<int>(level_seeds.size());
    const int total = n_levels * episodes_per_level;
    std::vector<std::uint8_t> succ(total, 0);
    std::vector<double> rets(total, 0.0);

#pragma omp parallel for if (total >= 8)
    for (int e = 0; e < total; ++e) {
        int li = e / episodes_per_level;
        RngStream policy_rng = substream(eval_seed, 0xE0000ULL + static_cast<std::uint64_t>(e));
        RngStream env_rng = substream(eval_seed, 0xF0000ULL + static_cast<std::uint64_t>(e));

        PointNavParams pn{};
        PointNavState pns{};
        ChainState chs{};
        int od, ad;
        if (kind == EnvKind::pointnav) {
            pn = pointnav_level(level_seeds[li], episode_cap);
            pns = pointnav_reset(pn, env_rng.next_u64());
            od = kPointNavObsDim;
            ad = kPointNavActDim;
        } else {
            chs = chain_reset(chain);
            od = chain.n_states;
            ad = 1;
        }
        std::vector<double> obs(od), act(ad);
        DistParams dist;
        std::vector<double> values;
        double ret = 0;
        int cap = kind == EnvKind::pointnav ? pn.episode_cap : chain.episode_cap;
        for (int t = 0; t < cap; ++t) {
            if (kind == EnvKind::pointnav)
                pointnav_obs(pn, pns, obs);
            else
                chain_obs(chain, chs, obs);
            forward(params, obs, 1, dist, values, nullptr);
            sample_action(dist, 0, policy_rng, act);
            StepResult r = kind == EnvKind::pointnav
                               ? pointnav_step(pn, pns, act)
                               : chain_step(chain, chs, static_cast<int>(act[0]), env_rng);
            ret += r.reward;
            if (r.done) {
                succ[e] = r.success ? 1 : 0;
                break;
            }
        }
        rets[e] = ret;
    }
    int n_succ = 0;
    double ret_sum = 0;
    for (int e = 0; e < total; ++e) {
        n_succ += succ[e];
        ret_sum += rets[e];
    }
    if (mean_return_out) *mean_return_out = ret_sum / total;
    return static_cast<double>(n_succ) / total;
}

}  // namespace plab
