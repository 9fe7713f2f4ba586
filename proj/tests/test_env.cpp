#include <doctest.h>

#include <cmath>

#include "plab/env.hpp"

using namespace plab;

namespace {

double dist_to_goal(const PointNavParams& p, const PointNavState& s) {
    double dx = s.pos[0] - p.goal[0], dy = s.pos[1] - p.goal[1];
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

TEST_CASE("pointnav level parameters are deterministic and in range") {
    for (std::uint64_t seed : {1ull, 99ull, 123456789ull}) {
        PointNavParams a = pointnav_level(seed);
        PointNavParams b = pointnav_level(seed);
        CHECK(a.goal == b.goal);
        CHECK(a.force_gain == b.force_gain);
        CHECK(a.success_radius == b.success_radius);
        CHECK(a.goal[0] >= -1.0);
        CHECK(a.goal[0] <= 1.0);
        CHECK(a.friction > 0.0);
        CHECK(a.friction < 1.0);
        CHECK(a.success_radius > 0.0);
    }
}

TEST_CASE("pointnav reset is deterministic with zero velocity") {
    PointNavParams p = pointnav_level(42);
    PointNavState a = pointnav_reset(p, 7);
    PointNavState b = pointnav_reset(p, 7);
    CHECK(a.pos == b.pos);
    CHECK(a.vel[0] == 0.0);
    CHECK(a.vel[1] == 0.0);
    CHECK(a.steps == 0);
}

TEST_CASE("pointnav reset positions average near the origin") {
    PointNavParams p = pointnav_level(42);
    double mx = 0, my = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        PointNavState s = pointnav_reset(p, i);
        mx += s.pos[0];
        my += s.pos[1];
    }
    CHECK(std::abs(mx / n) < 0.05);
    CHECK(std::abs(my / n) < 0.05);
}

TEST_CASE("zero action from rest leaves the position unchanged with zero reward") {
    PointNavParams p = pointnav_level(3);
    p.success_radius = 1e-9;  // rule out accidental success
    PointNavState s = pointnav_reset(p, 1);
    auto pos0 = s.pos;
    std::vector<double> a{0.0, 0.0};
    StepResult r = pointnav_step(p, s, a);
    CHECK(s.pos == pos0);
    CHECK(r.reward == 0.0);
    CHECK_FALSE(r.success);
}

TEST_CASE("acting toward the goal from rest yields positive reward") {
    PointNavParams p = pointnav_level(3);
    p.success_radius = 1e-9;
    PointNavState s = pointnav_reset(p, 1);
    double dx = p.goal[0] - s.pos[0], dy = p.goal[1] - s.pos[1];
    double n = std::sqrt(dx * dx + dy * dy);
    std::vector<double> a{dx / n, dy / n};
    StepResult r = pointnav_step(p, s, a);
    CHECK(r.reward > 0.0);
}

TEST_CASE("entering the success radius pays the bonus and ends the episode") {
    PointNavParams p = pointnav_level(3);
    p.success_radius = 10.0;  // any step succeeds
    PointNavState s = pointnav_reset(p, 1);
    std::vector<double> a{0.0, 0.0};
    StepResult r = pointnav_step(p, s, a);
    CHECK(r.success);
    CHECK(r.done);
    CHECK(r.reward == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pointnav rewards telescope to the distance decrease") {
    PointNavParams p = pointnav_level(8);
    p.success_radius = 1e-12;
    PointNavState s = pointnav_reset(p, 2);
    double d0 = dist_to_goal(p, s);
    RngStream rng{21, 0};
    double total = 0;
    for (int t = 0; t < 50; ++t) {
        std::vector<double> a{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        StepResult r = pointnav_step(p, s, a);
        REQUIRE_FALSE(r.success);
        total += r.reward;
    }
    CHECK(std::abs(total - (d0 - dist_to_goal(p, s))) < 1e-6);
}

TEST_CASE("actions are clamped to the unit box") {
    PointNavParams p = pointnav_level(5);
    p.success_radius = 1e-12;
    PointNavState s1 = pointnav_reset(p, 4);
    PointNavState s2 = s1;
    std::vector<double> big{100.0, -100.0}, unit{1.0, -1.0};
    pointnav_step(p, s1, big);
    pointnav_step(p, s2, unit);
    CHECK(s1.pos == s2.pos);
    CHECK(s1.vel == s2.vel);
}

TEST_CASE("pointnav observation layout is [pos, vel, goal-pos]") {
    PointNavParams p = pointnav_level(6);
    PointNavState s = pointnav_reset(p, 3);
    std::vector<double> obs(kPointNavObsDim);
    pointnav_obs(p, s, obs);
    CHECK(obs[0] == s.pos[0]);
    CHECK(obs[1] == s.pos[1]);
    CHECK(obs[2] == s.vel[0]);
    CHECK(obs[3] == s.vel[1]);
    CHECK(obs[4] == p.goal[0] - s.pos[0]);
    CHECK(obs[5] == p.goal[1] - s.pos[1]);
}

TEST_CASE("chain: always-right reaches the goal in n-1 steps without slip") {
    ChainParams p{4, 10, 0.0};
    ChainState s = chain_reset(p);
    RngStream rng{1, 0};
    double total = 0;
    int steps = 0;
    StepResult r;
    do {
        r = chain_step(p, s, 1, rng);
        total += r.reward;
        ++steps;
    } while (!r.done);
    CHECK(total == 1.0);
    CHECK(steps == 3);
    CHECK(r.success);
}

TEST_CASE("chain: always-left never succeeds") {
    ChainParams p{4, 10, 0.0};
    ChainState s = chain_reset(p);
    RngStream rng{2, 0};
    double total = 0;
    StepResult r;
    do {
        r = chain_step(p, s, 0, rng);
        total += r.reward;
    } while (!r.done);
    CHECK(total == 0.0);
    CHECK_FALSE(r.success);
}

TEST_CASE("chain value-iteration oracle gives 1 at slip 0 with enough budget") {
    CHECK(chain_optimal_return(ChainParams{8, 32, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(chain_optimal_return(ChainParams{8, 4, 0.0}) == 0.0);  // cap too tight
}

TEST_CASE("chain one-hot observation") {
    ChainParams p{5, 10, 0.0};
    ChainState s = chain_reset(p);
    s.state = 3;
    std::vector<double> obs(5);
    chain_obs(p, s, obs);
    for (int i = 0; i < 5; ++i) CHECK(obs[i] == (i == 3 ? 1.0 : 0.0));
}

TEST_CASE("vec env stepping is bitwise reproducible") {
    auto run = [] {
        VecEnv env = make_pointnav_venv(8, 99);
        std::vector<double> actions(8 * kPointNavActDim, 0.5);
        std::vector<double> obs(8 * kPointNavObsDim), rewards(8);
        std::vector<std::uint8_t> dones(8), succ(8);
        std::vector<double> trace;
        for (int t = 0; t < 20; ++t) {
            venv_step_all(env, actions, obs, rewards, dones, succ);
            trace.insert(trace.end(), obs.begin(), obs.end());
            trace.insert(trace.end(), rewards.begin(), rewards.end());
        }
        return trace;
    };
    CHECK(run() == run());
}

TEST_CASE("parallel and serial vec env stepping match bitwise") {
    VecEnv a = make_pointnav_venv(16, 7);
    VecEnv b = make_pointnav_venv(16, 7);
    std::vector<double> obs_a(16 * kPointNavObsDim), obs_b(16 * kPointNavObsDim);
    std::vector<double> rew_a(16), rew_b(16);
    std::vector<std::uint8_t> d_a(16), d_b(16), s_a(16), s_b(16);
    RngStream rng{11, 0};
    for (int t = 0; t < 300; ++t) {
        std::vector<double> actions(16 * kPointNavActDim);
        for (double& v : actions) v = rng.uniform(-1, 1);
        venv_step_all(a, actions, obs_a, rew_a, d_a, s_a);
        venv_step_all_serial(b, actions, obs_b, rew_b, d_b, s_b);
        REQUIRE(obs_a == obs_b);
        REQUIRE(rew_a == rew_b);
        REQUIRE(d_a == d_b);
    }
    REQUIRE(a.completed.size() == b.completed.size());
    for (std::size_t i = 0; i < a.completed.size(); ++i) {
        CHECK(a.completed[i].ret == b.completed[i].ret);
        CHECK(a.completed[i].success == b.completed[i].success);
    }
}

TEST_CASE("slot trajectories do not depend on the slot count") {
    const int small = 4, large = 16, T = 200;
    VecEnv a = make_pointnav_venv(small, 31);
    VecEnv b = make_pointnav_venv(large, 31);
    std::vector<double> obs_a(small * kPointNavObsDim), obs_b(large * kPointNavObsDim);
    std::vector<double> rew_a(small), rew_b(large);
    std::vector<std::uint8_t> d_a(small), d_b(large), s_a(small), s_b(large);
    RngStream rng{12, 0};
    for (int t = 0; t < T; ++t) {
        std::vector<double> actions(large * kPointNavActDim);
        for (double& v : actions) v = rng.uniform(-1, 1);
        std::vector<double> actions_a(actions.begin(),
                                      actions.begin() + small * kPointNavActDim);
        venv_step_all(a, actions_a, obs_a, rew_a, d_a, s_a);
        venv_step_all(b, actions, obs_b, rew_b, d_b, s_b);
        for (int i = 0; i < small * kPointNavObsDim; ++i) REQUIRE(obs_a[i] == obs_b[i]);
        for (int i = 0; i < small; ++i) REQUIRE(rew_a[i] == rew_b[i]);
    }
}

TEST_CASE("done slots return the post-reset observation") {
    VecEnv env = make_pointnav_venv(1, 13);
    env.pn_params[0].success_radius = 10.0;  // first step succeeds
    std::vector<double> actions{0.0, 0.0};
    std::vector<double> obs(kPointNavObsDim), rewards(1);
    std::vector<std::uint8_t> dones(1), succ(1);
    venv_step_all(env, actions, obs, rewards, dones, succ);
    CHECK(dones[0] == 1);
    CHECK(succ[0] == 1);
    // post-reset: velocity zero and a fresh level/episode in the slot
    CHECK(obs[2] == 0.0);
    CHECK(obs[3] == 0.0);
    CHECK(env.pn_state[0].steps == 0);
    REQUIRE(env.completed.size() == 1);
    CHECK(env.completed[0].success);
    CHECK(env.completed[0].length == 1);
}

TEST_CASE("fixed level assignment takes effect at the next reset") {
    VecEnv env = make_pointnav_venv(2, 17);
    std::vector<std::uint64_t> levels{1234, 5678};
    venv_set_levels(env, levels);
    // force resets by making current levels instantly solvable
    env.pn_params[0].success_radius = 10.0;
    env.pn_params[1].success_radius = 10.0;
    std::vector<double> actions(2 * kPointNavActDim, 0.0);
    std::vector<double> obs(2 * kPointNavObsDim), rewards(2);
    std::vector<std::uint8_t> dones(2), succ(2);
    venv_step_all(env, actions, obs, rewards, dones, succ);
    CHECK(env.pn_params[0].level_seed == 1234);
    CHECK(env.pn_params[1].level_seed == 5678);
    CHECK(env.pn_params[0].goal == pointnav_level(1234).goal);
}

TEST_CASE("chain vec env slips flip moves at slip_prob 1") {
    ChainParams p{4, 100, 1.0};
    VecEnv env = make_chain_venv(1, p, 3);
    std::vector<double> actions{1.0};  // intend right, always flipped to left
    std::vector<double> obs(4), rewards(1);
    std::vector<std::uint8_t> dones(1), succ(1);
    for (int t = 0; t < 10; ++t) {
        venv_step_all(env, actions, obs, rewards, dones, succ);
        CHECK(env.ch_state[0].state == 0);
    }
}
