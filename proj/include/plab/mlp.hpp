#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "plab/rng.hpp"

namespace plab {

enum class Activation { tanh, relu };
enum class HeadKind { categorical, diagonal_gaussian };

struct MlpSpec {
    int input_dim = 0;
    std::vector<int> hidden;
    Activation act = Activation::tanh;
    HeadKind head = HeadKind::categorical;
    int head_dim = 0;  // n_actions (>= 2) or action_dim

    void validate() const;
    int dist_dim() const { return head_dim; }
};

// Flat parameter storage: actor layers, critic layers, then the
// state-independent log-std (gaussian head only). A single contiguous
// vector keeps Adam, EWMA, clipping and checkpointing trivial.
struct LayerShape {
    int out = 0, in = 0;
    std::size_t w_off = 0, b_off = 0;
};

struct ParamLayout {
    std::vector<LayerShape> actor;
    std::vector<LayerShape> critic;
    std::size_t log_std_off = 0;
    int log_std_dim = 0;
    std::size_t total = 0;
};

ParamLayout make_layout(const MlpSpec& spec);

struct ParamTree {
    MlpSpec spec;
    ParamLayout layout;
    std::vector<double> data;

    std::span<double> log_std() {
        return {data.data() + layout.log_std_off, static_cast<std::size_t>(layout.log_std_dim)};
    }
    std::span<const double> log_std() const {
        return {data.data() + layout.log_std_off, static_cast<std::size_t>(layout.log_std_dim)};
    }
};

// Same flat layout as the ParamTree it was taken against.
using GradTree = std::vector<double>;

// Orthogonal weights (gain sqrt(2) hidden, 0.01 policy output, 1.0 value
// output), zero biases, zero log-std. Deterministic in the seed.
ParamTree init_params(const MlpSpec& spec, std::uint64_t seed);

// log-std entries are clamped to this range wherever they are consumed
inline constexpr double kLogStdMin = -10.0;
inline constexpr double kLogStdMax = 2.0;

// Batched distribution parameters produced by a forward pass.
struct DistParams {
    HeadKind head = HeadKind::categorical;
    int dim = 0;
    int batch = 0;
    std::vector<double> param;    // batch*dim: logits, or mean
    std::vector<double> log_std;  // dim (already clamped), gaussian only

    std::span<const double> row(int b) const {
        return {param.data() + static_cast<std::size_t>(b) * dim, static_cast<std::size_t>(dim)};
    }
};

// Per-layer activations kept for the backward pass.
struct ForwardCache {
    int batch = 0;
    // h[0] is the input; z[l] pre-activation, h[l+1] post-activation of layer l
    std::vector<std::vector<double>> actor_z, actor_h;
    std::vector<std::vector<double>> critic_z, critic_h;
};

// Forward through both networks. obs is batch*input_dim, row-major.
// cache may be null when no backward pass will follow.
void forward(const ParamTree& params, std::span<const double> obs, int batch,
             DistParams& dist, std::vector<double>& values, ForwardCache* cache);

// Upstream gradients for a backward pass: d_param is batch*dist_dim
// (d loss / d logits or d mean), d_log_std is dist_dim, d_value is batch.
// Accumulates into grad (same layout as params.data). The log-std clamp
// passes gradient only where the raw value is strictly inside the bounds.
void backward(const ParamTree& params, const ForwardCache& cache,
              std::span<const double> d_param, std::span<const double> d_log_std,
              std::span<const double> d_value, GradTree& grad);

}  // namespace plab
