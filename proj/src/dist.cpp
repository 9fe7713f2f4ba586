#include "plab/dist.hpp"

#include <cmath>
#include <stdexcept>

namespace plab {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)
}

int action_dim(HeadKind head, int dist_dim) {
    return head == HeadKind::categorical ? 1 : dist_dim;
}

void log_softmax(std::span<const double> logits, std::span<double> out) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0;
    for (std::size_t i = 0; i < logits.size(); ++i) sum += std::exp(logits[i] - mx);
    double lse = mx + std::log(sum);
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
}

std::vector<double> log_prob(const DistParams& dist, std::span<const double> actions) {
    int B = dist.batch, d = dist.dim;
    std::vector<double> lp(B);
    if (dist.head == HeadKind::categorical) {
        std::vector<double> lsm(d);
        for (int b = 0; b < B; ++b) {
            int a = static_cast<int>(actions[b]);
            if (a < 0 || a >= d) throw std::out_of_range("log_prob: action index out of range");
            log_softmax(dist.row(b), lsm);
            lp[b] = lsm[a];
        }
    } else {
        for (int b = 0; b < B; ++b) {
            auto mu = dist.row(b);
            double acc = 0;
            for (int i = 0; i < d; ++i) {
                double ls = dist.log_std[i];
                double z = (actions[static_cast<std::size_t>(b) * d + i] - mu[i]) * std::exp(-ls);
                acc += -ls - 0.5 * kLog2Pi - 0.5 * z * z;
            }
            lp[b] = acc;
        }
    }
    return lp;
}

void log_prob_backward(const DistParams& dist, std::span<const double> actions,
                       std::span<const double> coeff,
                       std::span<double> d_param, std::span<double> d_log_std) {
    int B = dist.batch, d = dist.dim;
    if (dist.head == HeadKind::categorical) {
        std::vector<double> lsm(d);
        for (int b = 0; b < B; ++b) {
            double c = coeff[b];
            if (c == 0) continue;
            int a = static_cast<int>(actions[b]);
            log_softmax(dist.row(b), lsm);
            double* g = d_param.data() + static_cast<std::size_t>(b) * d;
            for (int i = 0; i < d; ++i) g[i] -= c * std::exp(lsm[i]);
            g[a] += c;
        }
    } else {
        for (int b = 0; b < B; ++b) {
            double c = coeff[b];
            if (c == 0) continue;
            auto mu = dist.row(b);
            double* g = d_param.data() + static_cast<std::size_t>(b) * d;
            for (int i = 0; i < d; ++i) {
                double ls = dist.log_std[i];
                double inv_var = std::exp(-2.0 * ls);
                double diff = actions[static_cast<std::size_t>(b) * d + i] - mu[i];
                g[i] += c * diff * inv_var;
                d_log_std[i] += c * (diff * diff * inv_var - 1.0);
            }
        }
    }
}

std::vector<double> entropy(const DistParams& dist) {
    int B = dist.batch, d = dist.dim;
    std::vector<double> out(B);
    if (dist.head == HeadKind::categorical) {
        std::vector<double> lsm(d);
        for (int b = 0; b < B; ++b) {
            log_softmax(dist.row(b), lsm);
            double h = 0;
            for (int i = 0; i < d; ++i) h -= std::exp(lsm[i]) * lsm[i];
            out[b] = h;
        }
    } else {
        double base = 0;
        for (int i = 0; i < d; ++i) base += dist.log_std[i];
        base += 0.5 * d * (1.0 + kLog2Pi);
        for (int b = 0; b < B; ++b) out[b] = base;
    }
    return out;
}

void entropy_backward(const DistParams& dist, std::span<const double> coeff,
                      std::span<double> d_param, std::span<double> d_log_std) {
    int B = dist.batch, d = dist.dim;
    if (dist.head == HeadKind::categorical) {
        std::vector<double> lsm(d);
        for (int b = 0; b < B; ++b) {
            double c = coeff[b];
            if (c == 0) continue;
            log_softmax(dist.row(b), lsm);
            double h = 0;
            for (int i = 0; i < d; ++i) h -= std::exp(lsm[i]) * lsm[i];
            double* g = d_param.data() + static_cast<std::size_t>(b) * d;
            for (int i = 0; i < d; ++i) g[i] += c * (-std::exp(lsm[i]) * (lsm[i] + h));
        }
    } else {
        double csum = 0;
        for (int b = 0; b < B; ++b) csum += coeff[b];
        for (int i = 0; i < d; ++i) d_log_std[i] += csum;
    }
}

std::vector<double> kl(const DistParams& p, const DistParams& q) {
    if (p.head != q.head || p.dim != q.dim || p.batch != q.batch)
        throw std::invalid_argument("kl: distribution head/shape mismatch");
    int B = p.batch, d = p.dim;
    std::vector<double> out(B);
    if (p.head == HeadKind::categorical) {
        std::vector<double> lp(d), lq(d);
        for (int b = 0; b < B; ++b) {
            log_softmax(p.row(b), lp);
            log_softmax(q.row(b), lq);
            double acc = 0;
            for (int i = 0; i < d; ++i) acc += std::exp(lp[i]) * (lp[i] - lq[i]);
            out[b] = std::max(acc, 0.0);
        }
    } else {
        for (int b = 0; b < B; ++b) {
            auto mp = p.row(b), mq = q.row(b);
            double acc = 0;
            for (int i = 0; i < d; ++i) {
                double lsp = p.log_std[i], lsq = q.log_std[i];
                double vp = std::exp(2.0 * lsp), vq = std::exp(2.0 * lsq);
                double diff = mp[i] - mq[i];
                acc += lsq - lsp + (vp + diff * diff) / (2.0 * vq) - 0.5;
            }
            out[b] = std::max(acc, 0.0);
        }
    }
    return out;
}

void sample_action(const DistParams& dist, int b, RngStream& rng, std::span<double> out) {
    int d = dist.dim;
    if (dist.head == HeadKind::categorical) {
        std::vector<double> lsm(d);
        log_softmax(dist.row(b), lsm);
        double u = rng.uniform();
        double cum = 0;
        int pick = d - 1;
        for (int i = 0; i < d; ++i) {
            cum += std::exp(lsm[i]);
            if (u < cum) {
                pick = i;
                break;
            }
        }
        out[0] = static_cast<double>(pick);
    } else {
        auto mu = dist.row(b);
        for (int i = 0; i < d; ++i)
            out[i] = mu[i] + std::exp(dist.log_std[i]) * rng.normal();
    }
}

}  // namespace plab
