#include <doctest.h>

#include <cmath>
#include <numeric>

#include "plab/mlp.hpp"

using namespace plab;

namespace {

MlpSpec cat_spec() { return {5, {8, 8}, Activation::tanh, HeadKind::categorical, 4}; }
MlpSpec gauss_spec() { return {5, {8, 8}, Activation::tanh, HeadKind::diagonal_gaussian, 3}; }

}  // namespace

TEST_CASE("init is deterministic in the seed") {
    ParamTree a = init_params(cat_spec(), 7);
    ParamTree b = init_params(cat_spec(), 7);
    CHECK(a.data == b.data);
    ParamTree c = init_params(cat_spec(), 8);
    CHECK(a.data != c.data);
}

TEST_CASE("biases and log-std start at zero") {
    ParamTree p = init_params(gauss_spec(), 3);
    auto check_net = [&](const std::vector<LayerShape>& shapes) {
        for (const LayerShape& s : shapes)
            for (int i = 0; i < s.out; ++i) CHECK(p.data[s.b_off + i] == 0.0);
    };
    check_net(p.layout.actor);
    check_net(p.layout.critic);
    for (double v : p.log_std()) CHECK(v == 0.0);
}

TEST_CASE("square hidden layer satisfies W^T W = 2 I within 1e-6") {
    ParamTree p = init_params(cat_spec(), 11);
    const LayerShape& s = p.layout.actor[1];  // 8x8 hidden layer
    REQUIRE(s.out == s.in);
    const int n = s.in;
    const double* W = p.data.data() + s.w_off;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double dot = 0;
            for (int k = 0; k < n; ++k) dot += W[k * n + i] * W[k * n + j];
            CHECK(std::abs(dot - (i == j ? 2.0 : 0.0)) < 1e-6);
        }
}

TEST_CASE("zero parameters give uniform logits and zero value") {
    MlpSpec spec = cat_spec();
    ParamTree p;
    p.spec = spec;
    p.layout = make_layout(spec);
    p.data.assign(p.layout.total, 0.0);
    std::vector<double> obs(spec.input_dim, 0.7);
    DistParams dist;
    std::vector<double> values;
    forward(p, obs, 1, dist, values, nullptr);
    for (double v : dist.param) CHECK(v == 0.0);
    CHECK(values[0] == 0.0);
}

TEST_CASE("batched duplicate observations give identical rows") {
    ParamTree p = init_params(gauss_spec(), 5);
    std::vector<double> row(p.spec.input_dim);
    RngStream rng{9, 0};
    for (double& v : row) v = rng.uniform(-1, 1);
    std::vector<double> batch;
    for (int i = 0; i < 3; ++i) batch.insert(batch.end(), row.begin(), row.end());

    DistParams d1, d3;
    std::vector<double> v1, v3;
    forward(p, row, 1, d1, v1, nullptr);
    forward(p, batch, 3, d3, v3, nullptr);
    for (int b = 0; b < 3; ++b) {
        for (int i = 0; i < d1.dim; ++i) CHECK(d3.param[b * d3.dim + i] == d1.param[i]);
        CHECK(v3[b] == v1[0]);
    }
}

TEST_CASE("forward is permutation-equivariant over the batch") {
    ParamTree p = init_params(cat_spec(), 13);
    const int B = 6, D = p.spec.input_dim;
    std::vector<double> obs(B * D);
    RngStream rng{10, 0};
    for (double& v : obs) v = rng.uniform(-1, 1);
    std::vector<int> perm{3, 0, 5, 1, 4, 2};
    std::vector<double> obs_p(B * D);
    for (int b = 0; b < B; ++b)
        std::copy_n(obs.begin() + perm[b] * D, D, obs_p.begin() + b * D);

    DistParams d, dp;
    std::vector<double> v, vp;
    forward(p, obs, B, d, v, nullptr);
    forward(p, obs_p, B, dp, vp, nullptr);
    for (int b = 0; b < B; ++b) {
        CHECK(vp[b] == v[perm[b]]);
        for (int i = 0; i < d.dim; ++i) CHECK(dp.param[b * d.dim + i] == d.param[perm[b] * d.dim + i]);
    }
}

TEST_CASE("forward rejects mismatched observation size") {
    ParamTree p = init_params(cat_spec(), 1);
    std::vector<double> obs(p.spec.input_dim + 1, 0.0);
    DistParams dist;
    std::vector<double> values;
    CHECK_THROWS(forward(p, obs, 1, dist, values, nullptr));
}

TEST_CASE("spec validation rejects bad shapes") {
    CHECK_THROWS(MlpSpec{0, {4}, Activation::tanh, HeadKind::categorical, 4}.validate());
    CHECK_THROWS(MlpSpec{3, {0}, Activation::tanh, HeadKind::categorical, 4}.validate());
    CHECK_THROWS(MlpSpec{3, {4}, Activation::tanh, HeadKind::categorical, 1}.validate());
    CHECK_NOTHROW(MlpSpec{3, {4}, Activation::relu, HeadKind::diagonal_gaussian, 1}.validate());
}

TEST_CASE("gaussian log-std is clamped in the forward output") {
    ParamTree p = init_params(gauss_spec(), 2);
    for (auto& v : p.log_std()) v = 100.0;
    std::vector<double> obs(p.spec.input_dim, 0.1);
    DistParams dist;
    std::vector<double> values;
    forward(p, obs, 1, dist, values, nullptr);
    for (double v : dist.log_std) CHECK(v == kLogStdMax);
}
