#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace plab {

// Noisy gradient descent on x^T x: the stochastic-optimization counterpart
// of the outer training loop, with a closed-form stationary oracle.
struct QuadConfig {
    int dim = 50;
    double noise_std = 3.0 / 7.0710678118654755;  // 3/sqrt(50)
    std::vector<std::pair<std::int64_t, double>> lr_schedule = {{0, 0.1}};  // (step, eta)
    std::int64_t total_steps = 10000;
    std::uint64_t seed = 0;
    double x0_norm = 5.0;
};

struct QuadSample {
    std::int64_t step = 0;
    double x_norm = 0;  // ||x_t||
};

// x_{t+1} = x_t - eta_t (2 x_t + xi_t), xi ~ N(0, sigma^2 I);
// x_0 standard normal rescaled to ||x_0|| = x0_norm. Aborts on divergence.
std::vector<QuadSample> run_quad(const QuadConfig& cfg);

// Stationary E||x||^2 = d * eta^2 sigma^2 / (1 - (1-2 eta)^2).
double stationary_second_moment(double eta, double sigma, int dim);

// Mean of ||x||^2 over trace steps in [from, to).
double mean_sq_norm(const std::vector<QuadSample>& trace, std::int64_t from, std::int64_t to);

}  // namespace plab
