#include "plab/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace plab {

AdamState AdamState::make(std::size_t n, double lr) {
    AdamState s;
    s.m.assign(n, 0.0);
    s.v.assign(n, 0.0);
    s.lr = lr;
    return s;
}

void adam_step(AdamState& state, std::vector<double>& params, const GradTree& grads) {
    if (params.size() != grads.size() || state.m.size() != params.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    for (double g : grads)
        if (!std::isfinite(g)) throw std::runtime_error("adam_step: non-finite gradient");
    state.t += 1;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        double g = grads[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        double mhat = state.m[i] / bc1;
        double vhat = state.v[i] / bc2;
        params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
}

double l2_norm(const std::vector<double>& v) {
    double acc = 0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

double global_norm_clip(GradTree& grads, double max_norm) {
    if (max_norm <= 0) throw std::invalid_argument("global_norm_clip: max_norm must be > 0");
    double nrm = l2_norm(grads);
    if (nrm > max_norm) {
        double scale = max_norm / nrm;
        for (double& g : grads) g *= scale;
    }
    return nrm;
}

}  // namespace plab
