#pragma once

#include <cstdint>
#include <vector>

#include "plab/mlp.hpp"

namespace plab {

struct AdamState {
    std::vector<double> m, v;
    std::int64_t t = 0;
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState make(std::size_t n, double lr);
};

// Bias-corrected Adam update in place; increments t. Throws on non-finite
// gradients.
void adam_step(AdamState& state, std::vector<double>& params, const GradTree& grads);

// Scales grads to max_norm when the global L2 norm exceeds it. Returns the
// pre-clip norm.
double global_norm_clip(GradTree& grads, double max_norm);

double l2_norm(const std::vector<double>& v);

}  // namespace plab
