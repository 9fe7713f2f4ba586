#include "plab/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "plab/dist.hpp"

namespace plab {

void PpoConfig::validate() const {
    if (eps_clip < 0) throw std::invalid_argument("PpoConfig: eps_clip must be >= 0");
    if (mode == PpoMode::ppo_ewma && com < 0)
        throw std::invalid_argument("PpoConfig: com must be >= 0");
    if (n_envs < 1 || k_steps < 1 || n_epochs < 1 || n_minibatches < 1)
        throw std::invalid_argument("PpoConfig: counts must be >= 1");
    if ((static_cast<std::int64_t>(n_envs) * k_steps) % n_minibatches != 0)
        throw std::invalid_argument("PpoConfig: n_envs*k_steps must be divisible by n_minibatches");
}

double com_to_beta(double com) {
    if (com < 0) throw std::invalid_argument("com_to_beta: com must be >= 0");
    return com / (com + 1.0);
}

double beta_to_com(double beta) {
    if (beta < 0 || beta >= 1) throw std::invalid_argument("beta_to_com: beta must be in [0,1)");
    return 1.0 / (1.0 - beta) - 1.0;
}

EwmaState make_ewma(const ParamTree& params, double com) {
    EwmaState s;
    s.prox = params.data;
    s.beta = com_to_beta(com);
    return s;
}

void ewma_update(EwmaState& state, const std::vector<double>& theta) {
    if (state.prox.size() != theta.size())
        throw std::invalid_argument("ewma_update: shape mismatch");
    double b = state.beta;
    for (std::size_t i = 0; i < theta.size(); ++i)
        state.prox[i] = b * state.prox[i] + (1.0 - b) * theta[i];
}

namespace {

// Gathered minibatch views.
struct Gather {
    int m = 0;
    std::vector<double> obs, actions, adv, targets, blp, v_old;
};

Gather gather(const RolloutBatch& b, std::span<const int> idx) {
    Gather g;
    g.m = static_cast<int>(idx.size());
    g.obs.resize(static_cast<std::size_t>(g.m) * b.obs_dim);
    g.actions.resize(static_cast<std::size_t>(g.m) * b.act_dim);
    g.adv.resize(g.m);
    g.targets.resize(g.m);
    g.blp.resize(g.m);
    g.v_old.resize(g.m);
    for (int i = 0; i < g.m; ++i) {
        std::size_t s = static_cast<std::size_t>(idx[i]);
        std::copy_n(b.obs.begin() + s * b.obs_dim, b.obs_dim,
                    g.obs.begin() + static_cast<std::size_t>(i) * b.obs_dim);
        std::copy_n(b.actions.begin() + s * b.act_dim, b.act_dim,
                    g.actions.begin() + static_cast<std::size_t>(i) * b.act_dim);
        g.adv[i] = b.advantages[s];
        g.targets[i] = b.targets[s];
        g.blp[i] = b.behavior_log_probs[s];
        g.v_old[i] = b.values[s];
    }
    return g;
}

// Eq. 2 / Eq. 4 clip term per sample. Returns the objective value and the
// derivative of the objective with respect to log pi_theta (zero on the
// clipped branch).
inline void clip_term_sample(double lp, double blp, const double* lpp, double adv,
                             double eps, double& obj, double& dlp) {
    if (lpp) {
        double w = std::exp(*lpp - blp);        // importance weight, constant
        double rp = std::exp(lp - *lpp);        // regularization ratio
        bool clipped = (adv > 0 && rp > 1.0 + eps) || (adv < 0 && rp < 1.0 - eps);
        double rc = std::clamp(rp, 1.0 - eps, 1.0 + eps);
        obj = w * std::min(rp * adv, rc * adv);
        dlp = clipped ? 0.0 : w * rp * adv;
    } else {
        double r = std::exp(lp - blp);
        bool clipped = (adv > 0 && r > 1.0 + eps) || (adv < 0 && r < 1.0 - eps);
        double rc = std::clamp(r, 1.0 - eps, 1.0 + eps);
        obj = std::min(r * adv, rc * adv);
        dlp = clipped ? 0.0 : r * adv;
    }
}

// Eq. 3 value term per sample; dv is d loss / d V.
inline void value_term_sample(double v, double v_old, double target, bool clip,
                              double eps, double& loss, double& dv) {
    double d = v - target;
    if (!clip) {
        loss = d * d;
        dv = 2.0 * d;
        return;
    }
    double vc = v_old + std::clamp(v - v_old, -eps, eps);
    double dc = vc - target;
    if (d * d >= dc * dc) {
        loss = d * d;
        dv = 2.0 * d;
    } else {
        loss = dc * dc;
        dv = std::abs(v - v_old) < eps ? 2.0 * dc : 0.0;
    }
}

LossTerms loss_impl(const ParamTree& params, const EwmaState* prox,
                    const RolloutBatch& batch, std::span<const int> idx,
                    const PpoConfig& cfg, GradTree* grad) {
    Gather g = gather(batch, idx);
    const int M = g.m;

    ForwardCache cache;
    DistParams dist;
    std::vector<double> values;
    forward(params, g.obs, M, dist, values, grad ? &cache : nullptr);
    std::vector<double> lp = log_prob(dist, g.actions);
    std::vector<double> ent = entropy(dist);

    std::vector<double> lpp;
    bool decoupled = cfg.mode == PpoMode::ppo_ewma;
    if (decoupled) {
        if (!prox) throw std::invalid_argument("ppo_loss: ewma mode requires a prox state");
        ParamTree prox_tree{params.spec, params.layout, prox->prox};
        DistParams pdist;
        std::vector<double> pvals;
        forward(prox_tree, g.obs, M, pdist, pvals, nullptr);
        lpp = log_prob(pdist, g.actions);
    }

    LossTerms out;
    std::vector<double> clip_coeff(M), dval(M);
    for (int i = 0; i < M; ++i) {
        double obj, dlp;
        clip_term_sample(lp[i], g.blp[i], decoupled ? &lpp[i] : nullptr, g.adv[i],
                         cfg.eps_clip, obj, dlp);
        if (!std::isfinite(obj)) throw std::runtime_error("ppo_loss: non-finite ratio");
        out.clip += obj;
        clip_coeff[i] = dlp;
        double vloss, dv;
        value_term_sample(values[i], g.v_old[i], g.targets[i], cfg.value_clip,
                          cfg.eps_clip, vloss, dv);
        out.value += vloss;
        dval[i] = dv;
        out.entropy += ent[i];
    }
    out.clip /= M;
    out.value /= M;
    out.entropy /= M;
    out.total = -(out.clip - cfg.c1 * out.value + cfg.c2 * out.entropy);
    if (!std::isfinite(out.total)) throw std::runtime_error("ppo_loss: non-finite loss");

    if (grad) {
        const int dd = dist.dim;
        std::vector<double> d_param(static_cast<std::size_t>(M) * dd, 0.0);
        std::vector<double> d_log_std(dd, 0.0);
        std::vector<double> lp_coeff(M), ent_coeff(M);
        for (int i = 0; i < M; ++i) {
            lp_coeff[i] = -clip_coeff[i] / M;
            ent_coeff[i] = -cfg.c2 / M;
            dval[i] = cfg.c1 * dval[i] / M;
        }
        log_prob_backward(dist, g.actions, lp_coeff, d_param, d_log_std);
        entropy_backward(dist, ent_coeff, d_param, d_log_std);
        backward(params, cache, d_param, d_log_std, dval, *grad);
    }
    return out;
}

}  // namespace

LossTerms ppo_loss(const ParamTree& params, const EwmaState* prox,
                   const RolloutBatch& batch, std::span<const int> indices,
                   const PpoConfig& cfg) {
    return loss_impl(params, prox, batch, indices, cfg, nullptr);
}

LossTerms ppo_loss_grad(const ParamTree& params, const EwmaState* prox,
                        const RolloutBatch& batch, std::span<const int> indices,
                        const PpoConfig& cfg, GradTree& grad) {
    return loss_impl(params, prox, batch, indices, cfg, &grad);
}

double clip_loss(const ParamTree& params, const RolloutBatch& batch,
                 std::span<const int> indices, double eps_clip) {
    PpoConfig cfg;
    cfg.eps_clip = eps_clip;
    cfg.mode = PpoMode::standard_ppo;
    cfg.c1 = 0;
    cfg.c2 = 0;
    return loss_impl(params, nullptr, batch, indices, cfg, nullptr).clip;
}

double decoupled_clip_loss(const ParamTree& params, const std::vector<double>& prox,
                           const RolloutBatch& batch, std::span<const int> indices,
                           double eps_clip) {
    PpoConfig cfg;
    cfg.eps_clip = eps_clip;
    cfg.mode = PpoMode::ppo_ewma;
    cfg.c1 = 0;
    cfg.c2 = 0;
    EwmaState st;
    st.prox = prox;
    return loss_impl(params, &st, batch, indices, cfg, nullptr).clip;
}

double value_loss(const ParamTree& params, const RolloutBatch& batch,
                  std::span<const int> indices, bool value_clip, double eps_clip) {
    PpoConfig cfg;
    cfg.eps_clip = eps_clip;
    cfg.value_clip = value_clip;
    cfg.mode = PpoMode::standard_ppo;
    return loss_impl(params, nullptr, batch, indices, cfg, nullptr).value;
}

double anneal_scale(std::int64_t update_index, std::int64_t final_update) {
    if (final_update <= 0) return 1.0;
    double s = 1.0 - static_cast<double>(update_index) / static_cast<double>(final_update);
    return std::max(s, 0.0);
}

UpdateMetrics update(const RolloutBatch& batch, ParamTree& params, AdamState& adam,
                     EwmaState* ewma, const PpoConfig& cfg, RngStream& update_rng,
                     double lr_scale) {
    cfg.validate();
    if (cfg.mode == PpoMode::ppo_ewma && ewma == nullptr)
        throw std::invalid_argument("update: ewma mode requires an EwmaState");
    const int total = batch.size();
    const int mb_size = total / cfg.n_minibatches;

    RolloutBatch work = batch;
    if (cfg.advantage_norm) normalize_advantages(work);

    std::vector<double> theta_before = params.data;
    std::vector<int> order(total);
    for (int i = 0; i < total; ++i) order[i] = i;

    UpdateMetrics m;
    m.lr_effective = cfg.lr * lr_scale;
    adam.lr = m.lr_effective;

    GradTree grad(params.layout.total);
    for (int epoch = 0; epoch < cfg.n_epochs; ++epoch) {
        // Fisher-Yates reshuffle per epoch
        for (int i = total - 1; i > 0; --i) {
            int j = static_cast<int>(update_rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
            std::swap(order[i], order[j]);
        }
        for (int mb = 0; mb < cfg.n_minibatches; ++mb) {
            std::span<const int> idx(order.data() + static_cast<std::size_t>(mb) * mb_size,
                                     static_cast<std::size_t>(mb_size));
            std::fill(grad.begin(), grad.end(), 0.0);
            LossTerms lt = ppo_loss_grad(params, ewma, work, idx, cfg, grad);
            m.last_total_loss = lt.total;
            double pre = global_norm_clip(grad, cfg.max_grad_norm);
            m.mean_pre_clip_grad_norm += pre;
            m.mean_post_clip_grad_norm += std::min(pre, cfg.max_grad_norm);
            adam_step(adam, params.data, grad);
            if (ewma) ewma_update(*ewma, params.data);
            m.gradient_steps += 1;
        }
    }
    m.mean_pre_clip_grad_norm /= m.gradient_steps;
    m.mean_post_clip_grad_norm /= m.gradient_steps;

    double upd = 0;
    for (std::size_t i = 0; i < theta_before.size(); ++i) {
        double d = params.data[i] - theta_before[i];
        upd += d * d;
    }
    m.param_update_l2 = std::sqrt(upd);
    return m;
}

}  // namespace plab
