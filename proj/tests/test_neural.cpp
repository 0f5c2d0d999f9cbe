#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "groupnav/crowd_env.hpp"
#include "groupnav/neural.hpp"
#include "groupnav/rng.hpp"

using namespace groupnav;
using namespace groupnav::net;
using env::Observation;
using geom::Vec2;

namespace {

Observation sample_scene(uint64_t seed, int n_peds = 5) {
    env::EpisodeConfig cfg;
    cfg.n_pedestrians = n_peds;
    env::CrowdEnv scene(cfg, env::RewardConfig{}, sfm::SfmParams{});
    Observation obs = scene.reset(seed);
    // drift the bodies a little so velocities are nonzero
    Rng rng(mix_seed(seed, 99));
    obs.robot.velocity = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    for (env::PedestrianView& p : obs.pedestrians)
        p.velocity = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    return obs;
}

Observation transformed(const Observation& obs, double rot, Vec2 shift) {
    Observation out = obs;
    auto move = [&](const Vec2& v) { return v.rotated(rot) + shift; };
    auto turn = [&](const Vec2& v) { return v.rotated(rot); };
    out.robot.position = move(obs.robot.position);
    out.robot.goal = move(obs.robot.goal);
    out.robot.velocity = turn(obs.robot.velocity);
    out.robot.theta = obs.robot.theta + rot;
    for (size_t i = 0; i < obs.pedestrians.size(); ++i) {
        out.pedestrians[i].position = move(obs.pedestrians[i].position);
        out.pedestrians[i].velocity = turn(obs.pedestrians[i].velocity);
    }
    return out;
}

}  // namespace

TEST_CASE("parameter layout") {
    const PolicyLayout& layout = policy_layout();
    CHECK(layout.total() == 105283);
    CHECK(layout.find("embed.w0").rows == 14);
    CHECK(layout.find("embed.w0").cols == 150);
    CHECK(layout.find("action.w").cols == 81);
    CHECK(layout.find("value.b").size() == 1);
    CHECK_THROWS_AS(layout.find("nope"), std::invalid_argument);

    // tensors tile the flat buffer exactly
    size_t offset = 0;
    for (const TensorSpec& t : layout.tensors()) {
        CHECK(t.offset == offset);
        offset += t.size();
    }
    CHECK(offset == layout.total());
}

TEST_CASE("initialization is seeded and bounded") {
    Rng rng_a(5);
    Rng rng_b(5);
    const PolicyParams a = init_params(rng_a);
    const PolicyParams b = init_params(rng_b);
    CHECK(a.data == b.data);

    Rng rng_c(6);
    const PolicyParams c = init_params(rng_c);
    CHECK(a.data != c.data);

    for (const TensorSpec& t : policy_layout().tensors()) {
        const double* data = a.tensor(t);
        if (t.is_bias) {
            for (size_t i = 0; i < t.size(); ++i) CHECK(data[i] == 0.0);
        } else {
            const double limit = std::sqrt(6.0 / (t.rows + t.cols));
            double extreme = 0.0;
            for (size_t i = 0; i < t.size(); ++i) {
                CHECK(std::abs(data[i]) <= limit);
                extreme = std::max(extreme, std::abs(data[i]));
            }
            CHECK(extreme > 0.25 * limit);  // actually fills the range
        }
    }
}

TEST_CASE("wrap angle") {
    constexpr double pi = std::numbers::pi;
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(pi) == doctest::Approx(pi));
    CHECK(wrap_angle(-pi) == doctest::Approx(pi));  // interval is (-pi, pi]
    CHECK(wrap_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
    CHECK(wrap_angle(5 * pi) == doctest::Approx(pi));
    CHECK(wrap_angle(-7 * pi / 3) == doctest::Approx(-pi / 3));
}

TEST_CASE("robot frame puts the goal on +x") {
    Observation obs;
    obs.robot.position = {0, -4};
    obs.robot.goal = {0, 4};
    obs.robot.velocity = {0.3, 0.1};
    obs.robot.theta = std::numbers::pi / 2;
    obs.pedestrians.push_back({{1, -4}, {0, 1}, 0.3});

    const FrameInput f = to_robot_frame(obs);
    CHECK(f.robot[0] == 0.0);
    CHECK(f.robot[1] == 0.0);
    // goal direction is +y in the world, so world (0.3, 0.1) becomes (0.1, -0.3)
    CHECK(f.robot[2] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(f.robot[3] == doctest::Approx(-0.3).epsilon(1e-12));
    CHECK(f.robot[4] == 0.3);
    CHECK(f.robot[5] == doctest::Approx(8.0));
    CHECK(f.robot[6] == 0.0);
    CHECK(f.robot[7] == 1.0);
    CHECK(f.robot[8] == doctest::Approx(0.0));  // already facing the goal

    REQUIRE(f.pedestrians.size() == 1);
    // pedestrian one meter to the robot's right of the goal axis
    CHECK(f.pedestrians[0][0] == doctest::Approx(0.0));
    CHECK(f.pedestrians[0][1] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(f.pedestrians[0][2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.pedestrians[0][3] == doctest::Approx(0.0));
    CHECK(f.pedestrians[0][4] == 0.3);
}

TEST_CASE("frame features are invariant under rigid motion") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const Observation obs = sample_scene(trial + 1, 4);
        const double rot = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const Vec2 shift{rng.uniform(-10, 10), rng.uniform(-10, 10)};
        const FrameInput base = to_robot_frame(obs);
        const FrameInput moved = to_robot_frame(transformed(obs, rot, shift));
        for (int k = 0; k < kRobotDim; ++k)
            CHECK(moved.robot[static_cast<size_t>(k)] ==
                  doctest::Approx(base.robot[static_cast<size_t>(k)]).epsilon(1e-9));
        for (size_t i = 0; i < base.pedestrians.size(); ++i)
            for (int k = 0; k < kPedDim; ++k)
                CHECK(moved.pedestrians[i][static_cast<size_t>(k)] ==
                      doctest::Approx(base.pedestrians[i][static_cast<size_t>(k)]).epsilon(1e-9));
    }
}

TEST_CASE("forward pass is a distribution with consistent internals") {
    const PolicyParams params = [] {
        Rng rng(3);
        return init_params(rng);
    }();
    const Observation obs = sample_scene(17);
    const ForwardTrace tr = forward(params, obs);

    double psum = 0.0;
    for (double p : tr.probs) {
        CHECK(p > 0.0);
        psum += p;
    }
    CHECK(psum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isfinite(tr.value));

    double asum = 0.0;
    for (double a : tr.alpha) {
        CHECK(a > 0.0);
        asum += a;
    }
    CHECK(asum == doctest::Approx(1.0).epsilon(1e-12));

    // crowd vector is the attention-weighted sum of pair features
    REQUIRE(tr.crowd.size() == 50);
    for (int k = 0; k < 50; ++k) {
        double expect = 0.0;
        for (int i = 0; i < tr.n; ++i)
            expect += tr.alpha[static_cast<size_t>(i)] * tr.pair[static_cast<size_t>(i) * 50 + k];
        CHECK(tr.crowd[static_cast<size_t>(k)] == doctest::Approx(expect).epsilon(1e-12));
    }

    // joint input is [robot features | crowd vector]
    REQUIRE(tr.joint.size() == 59);
    for (int k = 0; k < kRobotDim; ++k)
        CHECK(tr.joint[static_cast<size_t>(k)] == tr.input.robot[static_cast<size_t>(k)]);
    for (int k = 0; k < 50; ++k)
        CHECK(tr.joint[static_cast<size_t>(kRobotDim + k)] == tr.crowd[static_cast<size_t>(k)]);

    // value head recomputed by hand from the trace
    const TensorSpec& vw = policy_layout().find("value.w");
    const TensorSpec& vb = policy_layout().find("value.b");
    double v = params.tensor(vb)[0];
    for (int k = 0; k < 100; ++k) v += params.tensor(vw)[k] * tr.trunk3[static_cast<size_t>(k)];
    CHECK(tr.value == doctest::Approx(v).epsilon(1e-12));

    Observation empty;
    empty.robot = obs.robot;
    CHECK_THROWS_AS(forward(params, empty), std::logic_error);
}

TEST_CASE("policy is equivariant to pedestrian order") {
    const PolicyParams params = [] {
        Rng rng(8);
        return init_params(rng);
    }();
    const Observation obs = sample_scene(23);
    const ForwardTrace base = forward(params, obs);

    Observation shuffled = obs;
    std::rotate(shuffled.pedestrians.begin(), shuffled.pedestrians.begin() + 2,
                shuffled.pedestrians.end());
    std::swap(shuffled.pedestrians[0], shuffled.pedestrians[1]);
    const ForwardTrace moved = forward(params, shuffled);

    CHECK(moved.value == doctest::Approx(base.value).epsilon(1e-12));
    for (int a = 0; a < kActionDim; ++a)
        CHECK(moved.probs[static_cast<size_t>(a)] ==
              doctest::Approx(base.probs[static_cast<size_t>(a)]).epsilon(1e-12));
}

TEST_CASE("identical pedestrians share attention equally") {
    const PolicyParams params = [] {
        Rng rng(9);
        return init_params(rng);
    }();
    Observation obs;
    obs.robot.position = {0, -4};
    obs.robot.goal = {0, 4};
    obs.robot.theta = std::numbers::pi / 2;
    obs.pedestrians.push_back({{1, 0}, {0.4, -0.2}, 0.3});
    obs.pedestrians.push_back({{1, 0}, {0.4, -0.2}, 0.3});

    const ForwardTrace tr = forward(params, obs);
    REQUIRE(tr.alpha.size() == 2);
    CHECK(tr.alpha[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(tr.alpha[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("backward accumulates") {
    const PolicyParams params = [] {
        Rng rng(12);
        return init_params(rng);
    }();
    const Observation obs = sample_scene(31, 3);
    const ForwardTrace tr = forward(params, obs);

    double gl[kActionDim];
    Rng rng(13);
    for (double& g : gl) g = rng.uniform(-1, 1);

    std::vector<double> once(policy_layout().total(), 0.0);
    backward(params, tr, gl, 0.7, once);
    std::vector<double> twice(policy_layout().total(), 0.0);
    backward(params, tr, gl, 0.7, twice);
    backward(params, tr, gl, 0.7, twice);
    for (size_t i = 0; i < once.size(); ++i)
        CHECK(twice[i] == doctest::Approx(2.0 * once[i]).epsilon(1e-12));
}

TEST_CASE("gradients match central finite differences") {
    PolicyParams params = [] {
        Rng rng(14);
        return init_params(rng);
    }();
    const Observation obs = sample_scene(37);

    // scalar objective: fixed random combination of the logits plus the value
    double gl[kActionDim];
    Rng rng(15);
    for (double& g : gl) g = rng.uniform(-1, 1);
    const double gv = rng.uniform(-1, 1);

    auto objective = [&](const PolicyParams& p) {
        const ForwardTrace tr = forward(p, obs);
        double s = gv * tr.value;
        for (int a = 0; a < kActionDim; ++a) s += gl[a] * tr.logits[static_cast<size_t>(a)];
        return s;
    };

    std::vector<double> grad(policy_layout().total(), 0.0);
    backward(params, forward(params, obs), gl, gv, grad);

    const double h = 1e-5;
    int checked = 0;
    for (int k = 0; k < 100; ++k) {
        const size_t idx = static_cast<size_t>(rng.uniform_int(static_cast<int>(grad.size())));
        const double saved = params.data[idx];
        params.data[idx] = saved + h;
        const double up = objective(params);
        params.data[idx] = saved - h;
        const double down = objective(params);
        params.data[idx] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(grad[idx]), 1e-6});
        CHECK(std::abs(fd - grad[idx]) / denom < 1e-4);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("adam first step matches the hand oracle") {
    PolicyParams params;  // zeros
    std::vector<double> grad(policy_layout().total(), 0.0);
    grad[0] = 0.3;
    AdamState state;
    adam_step(params, grad, state, 2.5e-4, 1e-5);
    CHECK(state.t == 1);
    CHECK(params.data[0] == doctest::Approx(-2.4999166694443519e-4).epsilon(1e-12));
    for (size_t i = 1; i < 40; ++i) CHECK(params.data[i] == 0.0);
}

TEST_CASE("adam repeated steps follow the recurrence") {
    PolicyParams params;
    std::vector<double> grad(policy_layout().total(), 0.0);
    grad[7] = -0.9;
    AdamState state;

    // reference recurrence for one coordinate
    double m = 0.0, v = 0.0, x = 0.0;
    const double lr = 1e-3, eps = 1e-5;
    for (int t = 1; t <= 5; ++t) {
        adam_step(params, grad, state, lr, eps);
        m = 0.9 * m + 0.1 * (-0.9);
        v = 0.999 * v + 0.001 * 0.81;
        const double mh = m / (1.0 - std::pow(0.9, t));
        const double vh = v / (1.0 - std::pow(0.999, t));
        x -= lr * mh / (std::sqrt(vh) + eps);
        CHECK(params.data[7] == doctest::Approx(x).epsilon(1e-12));
    }
    CHECK(state.t == 5);
}

TEST_CASE("adam with a zero gradient is a no-op from a fresh state") {
    PolicyParams params = [] {
        Rng rng(19);
        return init_params(rng);
    }();
    const std::vector<double> before = params.data;
    std::vector<double> grad(policy_layout().total(), 0.0);
    AdamState state;
    adam_step(params, grad, state, 1e-3, 1e-5);
    CHECK(params.data == before);
}

TEST_CASE("forward commutes with rigid motion of the scene") {
    const PolicyParams params = [] {
        Rng rng(25);
        return init_params(rng);
    }();
    const Observation obs = sample_scene(41);
    const ForwardTrace base = forward(params, obs);
    const ForwardTrace moved = forward(params, transformed(obs, 1.1, {3, -2}));
    CHECK(moved.value == doctest::Approx(base.value).epsilon(1e-9));
    for (int a = 0; a < kActionDim; ++a)
        CHECK(moved.probs[static_cast<size_t>(a)] ==
              doctest::Approx(base.probs[static_cast<size_t>(a)]).epsilon(1e-9));
}
