#include "plab/sgd_analog.hpp"

#include <cmath>
#include <stdexcept>

#include "plab/rng.hpp"

namespace plab {

std::vector<QuadSample> run_quad(const QuadConfig& cfg) {
    if (cfg.dim < 1) throw std::invalid_argument("run_quad: dim must be >= 1");
    if (cfg.noise_std < 0) throw std::invalid_argument("run_quad: noise_std must be >= 0");
    if (cfg.lr_schedule.empty() || cfg.lr_schedule.front().first != 0)
        throw std::invalid_argument("run_quad: schedule must start at step 0");
    for (std::size_t i = 1; i < cfg.lr_schedule.size(); ++i)
        if (cfg.lr_schedule[i].first <= cfg.lr_schedule[i - 1].first)
            throw std::invalid_argument("run_quad: schedule steps must be increasing");

    RngStream rng = substream(cfg.seed, 0x5153);
    std::vector<double> x(cfg.dim);
    double nrm = 0;
    for (double& v : x) {
        v = rng.normal();
        nrm += v * v;
    }
    nrm = std::sqrt(nrm);
    for (double& v : x) v *= cfg.x0_norm / nrm;

    std::vector<QuadSample> trace;
    trace.reserve(cfg.total_steps + 1);
    auto record = [&](std::int64_t step) {
        double n2 = 0;
        for (double v : x) n2 += v * v;
        trace.push_back({step, std::sqrt(n2)});
    };
    record(0);

    std::size_t sched_pos = 0;
    for (std::int64_t t = 0; t < cfg.total_steps; ++t) {
        while (sched_pos + 1 < cfg.lr_schedule.size() &&
               cfg.lr_schedule[sched_pos + 1].first <= t)
            ++sched_pos;
        double eta = cfg.lr_schedule[sched_pos].second;
        for (double& v : x) v -= eta * (2.0 * v + cfg.noise_std * rng.normal());
        record(t + 1);
        if (trace.back().x_norm > 1e6)
            throw std::runtime_error("run_quad: diverged (||x|| > 1e6) at step " +
                                     std::to_string(t + 1));
    }
    return trace;
}

double stationary_second_moment(double eta, double sigma, int dim) {
    if (eta <= 0 || eta >= 1)
        throw std::invalid_argument("stationary_second_moment: eta must be in (0,1)");
    double c = 1.0 - 2.0 * eta;
    double v = eta * eta * sigma * sigma / (1.0 - c * c);
    return dim * v;
}

double mean_sq_norm(const std::vector<QuadSample>& trace, std::int64_t from, std::int64_t to) {
    double acc = 0;
    std::int64_t n = 0;
    for (const QuadSample& s : trace) {
        if (s.step >= from && s.step < to) {
            acc += s.x_norm * s.x_norm;
            ++n;
        }
    }
    if (n == 0) throw std::invalid_argument("mean_sq_norm: empty window");
    return acc / static_cast<double>(n);
}

}  // namespace plab
