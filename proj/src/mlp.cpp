#include "plab/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace plab {

void MlpSpec::validate() const {
    if (input_dim < 1) throw std::invalid_argument("MlpSpec: input_dim must be >= 1");
    for (int w : hidden)
        if (w < 1) throw std::invalid_argument("MlpSpec: hidden widths must be >= 1");
    if (head == HeadKind::categorical && head_dim < 2)
        throw std::invalid_argument("MlpSpec: categorical head requires n_actions >= 2");
    if (head == HeadKind::diagonal_gaussian && head_dim < 1)
        throw std::invalid_argument("MlpSpec: gaussian head requires action_dim >= 1");
}

static std::vector<LayerShape> net_shapes(int input_dim, const std::vector<int>& hidden,
                                          int out_dim, std::size_t& off) {
    std::vector<int> dims;
    dims.push_back(input_dim);
    for (int w : hidden) dims.push_back(w);
    dims.push_back(out_dim);
    std::vector<LayerShape> shapes;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        LayerShape s;
        s.in = dims[l];
        s.out = dims[l + 1];
        s.w_off = off;
        off += static_cast<std::size_t>(s.out) * s.in;
        s.b_off = off;
        off += static_cast<std::size_t>(s.out);
        shapes.push_back(s);
    }
    return shapes;
}

ParamLayout make_layout(const MlpSpec& spec) {
    spec.validate();
    ParamLayout layout;
    std::size_t off = 0;
    layout.actor = net_shapes(spec.input_dim, spec.hidden, spec.head_dim, off);
    layout.critic = net_shapes(spec.input_dim, spec.hidden, 1, off);
    layout.log_std_off = off;
    layout.log_std_dim = spec.head == HeadKind::diagonal_gaussian ? spec.head_dim : 0;
    off += static_cast<std::size_t>(layout.log_std_dim);
    layout.total = off;
    return layout;
}

// Orthogonal rows (out <= in) or columns (out > in) via twice-applied
// modified Gram-Schmidt on a gaussian matrix.
static void orthogonal_fill(double* w, int out, int in, double gain, RngStream& rng) {
    int rows = out, cols = in;
    bool by_rows = out <= in;
    // work on vectors of length `len`, `num` of them
    int num = by_rows ? rows : cols;
    int len = by_rows ? cols : rows;
    std::vector<double> v(static_cast<std::size_t>(num) * len);
    for (double& x : v) x = rng.normal();

    auto vec = [&](int i) { return v.data() + static_cast<std::size_t>(i) * len; };
    for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i < num; ++i) {
            double* vi = vec(i);
            for (int j = 0; j < i; ++j) {
                const double* vj = vec(j);
                double dot = 0;
                for (int k = 0; k < len; ++k) dot += vi[k] * vj[k];
                for (int k = 0; k < len; ++k) vi[k] -= dot * vj[k];
            }
            double nrm = 0;
            for (int k = 0; k < len; ++k) nrm += vi[k] * vi[k];
            nrm = std::sqrt(nrm);
            for (int k = 0; k < len; ++k) vi[k] /= nrm;
        }
    }
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            w[static_cast<std::size_t>(i) * cols + j] =
                gain * (by_rows ? vec(i)[j] : vec(j)[i]);
}

ParamTree init_params(const MlpSpec& spec, std::uint64_t seed) {
    ParamTree p;
    p.spec = spec;
    p.layout = make_layout(spec);
    p.data.assign(p.layout.total, 0.0);

    RngStream rng = substream(seed, 0x1717);
    auto init_net = [&](const std::vector<LayerShape>& shapes, double out_gain) {
        for (std::size_t l = 0; l < shapes.size(); ++l) {
            const LayerShape& s = shapes[l];
            double gain = (l + 1 == shapes.size()) ? out_gain : std::sqrt(2.0);
            orthogonal_fill(p.data.data() + s.w_off, s.out, s.in, gain, rng);
            // biases stay zero
        }
    };
    init_net(p.layout.actor, 0.01);
    init_net(p.layout.critic, 1.0);
    // log-std stays zero
    return p;
}

static inline double activate(double z, Activation a) {
    return a == Activation::tanh ? std::tanh(z) : (z > 0 ? z : 0.0);
}

// forward one network; fills z/h when caches given, out holds the last layer
static void net_forward(const ParamTree& p, const std::vector<LayerShape>& shapes,
                        std::span<const double> obs, int batch,
                        std::vector<double>& out,
                        std::vector<std::vector<double>>* zs,
                        std::vector<std::vector<double>>* hs) {
    const Activation act = p.spec.act;
    std::vector<double> cur(obs.begin(), obs.end());
    if (hs) {
        hs->clear();
        hs->push_back(cur);
        zs->clear();
    }
    for (std::size_t l = 0; l < shapes.size(); ++l) {
        const LayerShape& s = shapes[l];
        const double* W = p.data.data() + s.w_off;
        const double* b = p.data.data() + s.b_off;
        std::vector<double> z(static_cast<std::size_t>(batch) * s.out);
#pragma omp parallel for if (batch >= 64)
        for (int bi = 0; bi < batch; ++bi) {
            const double* x = cur.data() + static_cast<std::size_t>(bi) * s.in;
            double* zr = z.data() + static_cast<std::size_t>(bi) * s.out;
            for (int i = 0; i < s.out; ++i) {
                const double* wr = W + static_cast<std::size_t>(i) * s.in;
                double acc = b[i];
                for (int j = 0; j < s.in; ++j) acc += wr[j] * x[j];
                zr[i] = acc;
            }
        }
        bool last = (l + 1 == shapes.size());
        std::vector<double> h;
        if (last) {
            h = z;
        } else {
            h.resize(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) h[i] = activate(z[i], act);
        }
        if (zs) {
            zs->push_back(std::move(z));
            hs->push_back(h);
        }
        cur = std::move(h);
    }
    out = std::move(cur);
}

void forward(const ParamTree& params, std::span<const double> obs, int batch,
             DistParams& dist, std::vector<double>& values, ForwardCache* cache) {
    const MlpSpec& spec = params.spec;
    if (obs.size() != static_cast<std::size_t>(batch) * spec.input_dim)
        throw std::invalid_argument("forward: obs size does not match batch*input_dim");

    std::vector<double> actor_out;
    net_forward(params, params.layout.actor, obs, batch, actor_out,
                cache ? &cache->actor_z : nullptr, cache ? &cache->actor_h : nullptr);
    net_forward(params, params.layout.critic, obs, batch, values,
                cache ? &cache->critic_z : nullptr, cache ? &cache->critic_h : nullptr);
    if (cache) cache->batch = batch;

    dist.head = spec.head;
    dist.dim = spec.head_dim;
    dist.batch = batch;
    dist.param = std::move(actor_out);
    dist.log_std.clear();
    if (spec.head == HeadKind::diagonal_gaussian) {
        auto ls = params.log_std();
        dist.log_std.resize(ls.size());
        for (std::size_t i = 0; i < ls.size(); ++i)
            dist.log_std[i] = std::clamp(ls[i], kLogStdMin, kLogStdMax);
    }
    for (double v : dist.param)
        if (!std::isfinite(v)) throw std::runtime_error("forward: non-finite policy output");
    for (double v : values)
        if (!std::isfinite(v)) throw std::runtime_error("forward: non-finite value output");
}

static void net_backward(const ParamTree& p, const std::vector<LayerShape>& shapes,
                         const std::vector<std::vector<double>>& zs,
                         const std::vector<std::vector<double>>& hs,
                         int batch, std::vector<double> delta, GradTree& grad) {
    const Activation act = p.spec.act;
    for (int l = static_cast<int>(shapes.size()) - 1; l >= 0; --l) {
        const LayerShape& s = shapes[l];
        const std::vector<double>& hin = hs[l];
        // weight and bias grads; each output row sums over the batch in index
        // order, so the reduction is deterministic under any thread count
#pragma omp parallel for if (s.out >= 8)
        for (int i = 0; i < s.out; ++i) {
            double* gw = grad.data() + s.w_off + static_cast<std::size_t>(i) * s.in;
            double gb = 0;
            for (int bi = 0; bi < batch; ++bi) {
                double d = delta[static_cast<std::size_t>(bi) * s.out + i];
                gb += d;
                const double* x = hin.data() + static_cast<std::size_t>(bi) * s.in;
                for (int j = 0; j < s.in; ++j) gw[j] += d * x[j];
            }
            grad[s.b_off + i] += gb;
        }
        if (l == 0) break;
        const double* W = p.data.data() + s.w_off;
        const std::vector<double>& zprev = zs[l - 1];
        const std::vector<double>& hprev = hs[l];  // post-activation of layer l-1
        std::vector<double> prev(static_cast<std::size_t>(batch) * s.in);
#pragma omp parallel for if (batch >= 64)
        for (int bi = 0; bi < batch; ++bi) {
            const double* dr = delta.data() + static_cast<std::size_t>(bi) * s.out;
            double* pr = prev.data() + static_cast<std::size_t>(bi) * s.in;
            for (int j = 0; j < s.in; ++j) {
                double acc = 0;
                for (int i = 0; i < s.out; ++i)
                    acc += dr[i] * W[static_cast<std::size_t>(i) * s.in + j];
                double dact;
                if (act == Activation::tanh) {
                    double h = hprev[static_cast<std::size_t>(bi) * s.in + j];
                    dact = 1.0 - h * h;
                } else {
                    dact = zprev[static_cast<std::size_t>(bi) * s.in + j] > 0 ? 1.0 : 0.0;
                }
                pr[j] = acc * dact;
            }
        }
        delta = std::move(prev);
    }
}

void backward(const ParamTree& params, const ForwardCache& cache,
              std::span<const double> d_param, std::span<const double> d_log_std,
              std::span<const double> d_value, GradTree& grad) {
    if (grad.size() != params.layout.total)
        throw std::invalid_argument("backward: grad tree size mismatch");
    int batch = cache.batch;
    net_backward(params, params.layout.actor, cache.actor_z, cache.actor_h, batch,
                 std::vector<double>(d_param.begin(), d_param.end()), grad);
    net_backward(params, params.layout.critic, cache.critic_z, cache.critic_h, batch,
                 std::vector<double>(d_value.begin(), d_value.end()), grad);
    if (params.layout.log_std_dim > 0) {
        auto ls = params.log_std();
        for (int i = 0; i < params.layout.log_std_dim; ++i)
            if (ls[i] > kLogStdMin && ls[i] < kLogStdMax)
                grad[params.layout.log_std_off + i] += d_log_std[i];
    }
}

}  // namespace plab
