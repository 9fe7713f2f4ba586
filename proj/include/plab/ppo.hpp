#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "plab/mlp.hpp"
#include "plab/optim.hpp"
#include "plab/rng.hpp"
#include "plab/rollout.hpp"

namespace plab {

enum class PpoMode { standard_ppo, ppo_ewma };

struct PpoConfig {
    double gamma = 0.995;
    double lambda = 0.9;
    double eps_clip = 0.2;       // may be +infinity
    double c1 = 0.5;             // value loss coefficient
    double c2 = 0.01;            // entropy coefficient
    int n_envs = 2048;
    int k_steps = 256;
    int n_epochs = 8;
    int n_minibatches = 32;
    double lr = 3e-4;
    double max_grad_norm = 0.5;
    PpoMode mode = PpoMode::standard_ppo;
    double com = 8.0;            // ppo_ewma only
    bool value_clip = true;
    bool lr_anneal = false;
    bool advantage_norm = true;

    void validate() const;
};

// com = 1/(1-beta) - 1, measured in minibatch update steps
double com_to_beta(double com);
double beta_to_com(double beta);

struct EwmaState {
    std::vector<double> prox;  // theta_prox, same flat layout as theta
    double beta = 0;
};

EwmaState make_ewma(const ParamTree& params, double com);

// theta_prox <- beta*theta_prox + (1-beta)*theta, once per minibatch step
void ewma_update(EwmaState& state, const std::vector<double>& theta);

// Scalar loss terms over a set of transition indices into the batch.
struct LossTerms {
    double total = 0;      // minimized: -(clip - c1*vf + c2*entropy)
    double clip = 0;
    double value = 0;
    double entropy = 0;
};

// Value-only evaluation (used by the finite-difference oracle and tests).
// prox is ignored in standard mode.
LossTerms ppo_loss(const ParamTree& params, const EwmaState* prox,
                   const RolloutBatch& batch, std::span<const int> indices,
                   const PpoConfig& cfg);

// Fused loss + exact gradient; grad must be zero-initialized with the
// parameter layout size.
LossTerms ppo_loss_grad(const ParamTree& params, const EwmaState* prox,
                        const RolloutBatch& batch, std::span<const int> indices,
                        const PpoConfig& cfg, GradTree& grad);

// Individual loss values for unit tests.
double clip_loss(const ParamTree& params, const RolloutBatch& batch,
                 std::span<const int> indices, double eps_clip);
double decoupled_clip_loss(const ParamTree& params, const std::vector<double>& prox,
                           const RolloutBatch& batch, std::span<const int> indices,
                           double eps_clip);
double value_loss(const ParamTree& params, const RolloutBatch& batch,
                  std::span<const int> indices, bool value_clip, double eps_clip);

struct UpdateMetrics {
    double mean_pre_clip_grad_norm = 0;
    double mean_post_clip_grad_norm = 0;
    double param_update_l2 = 0;
    double mean_kl_behavior = 0;   // full batch, after the final minibatch
    double mean_entropy = 0;       // full batch, after the final minibatch
    double last_total_loss = 0;
    int gradient_steps = 0;
    double lr_effective = 0;
};

// One full inner optimization pass: N_epochs x N_minibatches minibatch steps
// with per-epoch reshuffles driven by update_rng. ewma may be null in
// standard mode. lr_scale multiplies cfg.lr (annealing hook).
UpdateMetrics update(const RolloutBatch& batch, ParamTree& params, AdamState& adam,
                     EwmaState* ewma, const PpoConfig& cfg, RngStream& update_rng,
                     double lr_scale = 1.0);

// Linear decay reaching exactly zero at final_update.
double anneal_scale(std::int64_t update_index, std::int64_t final_update);

}  // namespace plab
