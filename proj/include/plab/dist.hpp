#pragma once

#include <span>
#include <vector>

#include "plab/mlp.hpp"
#include "plab/rng.hpp"

namespace plab {

// Actions are stored as doubles throughout: a categorical action is a single
// element holding the index, a gaussian action is action_dim elements.

// Per-sample log pi(a|s). actions is batch*act_dim, act_dim = 1 (categorical)
// or dist.dim (gaussian).
std::vector<double> log_prob(const DistParams& dist, std::span<const double> actions);

// Gradient of sum_b coeff[b] * log_prob[b] with respect to the dist params.
// Accumulates into d_param (batch*dim) and d_log_std (dim).
void log_prob_backward(const DistParams& dist, std::span<const double> actions,
                       std::span<const double> coeff,
                       std::span<double> d_param, std::span<double> d_log_std);

std::vector<double> entropy(const DistParams& dist);

// Gradient of sum_b coeff[b] * entropy[b].
void entropy_backward(const DistParams& dist, std::span<const double> coeff,
                      std::span<double> d_param, std::span<double> d_log_std);

// Exact closed-form KL(p || q) per state. Heads and dims must match.
std::vector<double> kl(const DistParams& p, const DistParams& q);

// Sample one action from row b of the distribution into out (act_dim values).
void sample_action(const DistParams& dist, int b, RngStream& rng, std::span<double> out);

int action_dim(HeadKind head, int dist_dim);

// log softmax of one row, written to out (size n)
void log_softmax(std::span<const double> logits, std::span<double> out);

}  // namespace plab
