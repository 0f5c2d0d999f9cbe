// Acceptance harness. Runs the numbered criteria and prints one PASS/FAIL
// line per criterion on stdout; exits nonzero when any requested criterion
// fails. Criteria 4 and 5 train policies and take a while; the rest finish
// in seconds.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "groupnav/checkpoint.hpp"
#include "groupnav/config.hpp"
#include "groupnav/crowd_env.hpp"
#include "groupnav/evaluation.hpp"
#include "groupnav/geometry.hpp"
#include "groupnav/neural.hpp"
#include "groupnav/ppo.hpp"
#include "groupnav/rng.hpp"
#include "groupnav/social_force.hpp"
#include "groupnav/stats.hpp"
#include "groupnav/thread_pool.hpp"
#include "groupnav/trajectory.hpp"

using namespace groupnav;
using geom::Vec2;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (cond) return;
        ok = false;
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: property suite

// Gift-wrapping hull, independent of the production monotone chain. Points
// are grid-snapped by the caller so orientation tests are exact.
std::vector<Vec2> wrap_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(),
              [](const Vec2& a, const Vec2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() <= 2) return pts;

    Vec2 start = pts[0];
    for (const Vec2& p : pts)
        if (p.y < start.y || (p.y == start.y && p.x < start.x)) start = p;

    std::vector<Vec2> hull;
    Vec2 cur = start;
    for (size_t guard = 0; guard <= pts.size(); ++guard) {
        hull.push_back(cur);
        Vec2 best = pts[0] == cur ? pts[1] : pts[0];
        for (const Vec2& p : pts) {
            if (p == cur) continue;
            const double o = geom::orient(cur, best, p);
            // keep the most clockwise candidate; among collinear ones the farthest
            if (o < 0 || (o == 0 && (p - cur).norm_sq() > (best - cur).norm_sq())) best = p;
        }
        cur = best;
        if (cur == start) return hull;
    }
    return {};  // walk failed to close
}

bool same_cycle(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    if (a.size() != b.size()) return false;
    if (a.empty()) return true;
    auto lex_min = [](const std::vector<Vec2>& v) {
        size_t best = 0;
        for (size_t i = 1; i < v.size(); ++i)
            if (v[i].x < v[best].x || (v[i].x == v[best].x && v[i].y < v[best].y)) best = i;
        return best;
    };
    const size_t ia = lex_min(a), ib = lex_min(b);
    for (size_t k = 0; k < a.size(); ++k)
        if (!(a[(ia + k) % a.size()] == b[(ib + k) % b.size()])) return false;
    return true;
}

void check_hull_oracle(Check& c) {
    Rng rng(1001);
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_int(10));
        std::vector<Vec2> pts;
        for (int i = 0; i < n; ++i)
            pts.push_back({0.25 * (rng.uniform_int(33) - 16.0), 0.25 * (rng.uniform_int(33) - 16.0)});
        const geom::Polygon hull = geom::convex_hull(pts);
        std::vector<Vec2> expect = wrap_hull(pts);
        if (expect.size() <= 2) {
            std::vector<Vec2> got = hull.vertices;
            std::sort(got.begin(), got.end(), [](const Vec2& a, const Vec2& b) {
                return a.x < b.x || (a.x == b.x && a.y < b.y);
            });
            if (got != expect) ++mismatches;
        } else if (!same_cycle(hull.vertices, expect)) {
            ++mismatches;
        }
    }
    c.require(mismatches == 0,
              "hull oracle: " + std::to_string(mismatches) + "/1000 sets disagree");
}

void check_distance_invariance(Check& c) {
    Rng rng(1002);
    double worst = 0.0;
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 3 + static_cast<int>(rng.uniform_int(6));
        std::vector<Vec2> pts;
        for (int i = 0; i < n; ++i) pts.push_back({rng.uniform(-4, 4), rng.uniform(-4, 4)});
        const Vec2 q{rng.uniform(-6, 6), rng.uniform(-6, 6)};
        const double angle = rng.uniform(-3.2, 3.2);
        const Vec2 shift{rng.uniform(-10, 10), rng.uniform(-10, 10)};

        const double d0 = geom::distance_to_polygon(q, geom::convex_hull(pts));
        std::vector<Vec2> moved;
        for (const Vec2& p : pts) moved.push_back(p.rotated(angle) + shift);
        const double d1 = geom::distance_to_polygon(q.rotated(angle) + shift,
                                                    geom::convex_hull(moved));
        worst = std::max(worst, std::abs(d0 - d1));
    }
    c.require(worst <= 1e-9, "distance rigid-motion drift " + fmt(worst));
}

void check_action_table(Check& c) {
    const env::ActionTable table;
    c.require(env::ActionTable::kCount == 81 && table.entries().size() == 81,
              "action table size");
    c.require(table.at(0) == Vec2{0.0, 0.0}, "action 0 is not the stop action");
    bool unique = true;
    for (int i = 0; i < 81 && unique; ++i)
        for (int j = i + 1; j < 81; ++j)
            if (table.at(i) == table.at(j)) { unique = false; break; }
    c.require(unique, "duplicate action entries");
    bool values_ok = true;
    for (int s = 0; s < 5; ++s)
        for (int h = 0; h < 16; ++h) {
            const Vec2 v = table.at(1 + 16 * s + h);
            const double speed = 0.2 * (s + 1);
            const double heading = 2.0 * M_PI * h / 16.0;
            if (std::abs(v.norm() - speed) > 1e-12 ||
                (v - Vec2{speed * std::cos(heading), speed * std::sin(heading)}).norm() > 1e-12)
                values_ok = false;
        }
    c.require(values_ok, "action speeds/headings off the 5x16 grid");
}

void check_reward_substitutions(Check& c) {
    const env::RewardConfig cfg;
    env::GroupLayout empty_layout;
    auto base_obs = [] {
        env::Observation obs;
        obs.robot.position = {0.0, -3.75};
        obs.robot.goal = {0.0, 4.0};
        return obs;
    };

    {  // progress term alone
        const auto [r, br] = env::compute_reward(8.0, base_obs(), empty_layout, cfg);
        c.require(std::abs(r - 0.025) <= 1e-12, "progress reward " + fmt(r));
        c.require(std::abs(br.progress - 0.025) <= 1e-12 && br.goal == 0.0, "progress breakdown");
    }
    {  // goal bonus plus the final progress increment
        env::Observation obs;
        obs.robot.position = {0.0, 3.55};
        obs.robot.goal = {0.0, 4.0};
        const auto [r, br] = env::compute_reward(0.70, obs, empty_layout, cfg);
        c.require(std::abs(r - 1.025) <= 1e-12, "goal-step reward " + fmt(r));
        c.require(br.goal == 1.0, "goal bonus");
    }
    {  // discomfort band
        env::Observation obs = base_obs();
        obs.pedestrians.push_back({{0.7, -3.75}, {0, 0}, 0.3});
        env::GroupLayout layout;
        layout.assignment = {0};
        layout.n_groups = 1;
        layout.group_sizes = {1};
        layout.hulls.push_back(geom::convex_hull(std::vector<Vec2>{{0.7, -3.75}}));
        const auto [r, br] = env::compute_reward(7.75, obs, layout, cfg);
        c.require(std::abs(br.discomfort + 0.05) <= 1e-12, "discomfort term " + fmt(br.discomfort));
        c.require(br.collision == 0.0, "discomfort must not double as collision");
        c.require(std::abs(r + 0.05) <= 1e-12, "discomfort-only reward " + fmt(r));
    }
    {  // collision excludes the discomfort term for the same pedestrian
        env::Observation obs = base_obs();
        obs.pedestrians.push_back({{0.5, -3.75}, {0, 0}, 0.3});
        env::GroupLayout layout;
        layout.assignment = {0};
        layout.n_groups = 1;
        layout.group_sizes = {1};
        layout.hulls.push_back(geom::convex_hull(std::vector<Vec2>{{0.5, -3.75}}));
        const auto [r, br] = env::compute_reward(7.75, obs, layout, cfg);
        c.require(std::abs(br.collision + 0.25) <= 1e-12 && br.discomfort == 0.0,
                  "collision term " + fmt(br.collision));
        c.require(std::abs(r + 0.25) <= 1e-12, "collision-only reward " + fmt(r));
    }
}

void gae_reference(const std::vector<double>& rewards, const std::vector<double>& values,
                   const std::vector<double>& dones, double bootstrap, double gamma,
                   double lambda, std::vector<double>& adv, std::vector<double>& ret) {
    const size_t n = rewards.size();
    adv.assign(n, 0.0);
    ret.assign(n, 0.0);
    for (size_t t = 0; t < n; ++t) {
        double acc = 0.0, w = 1.0;
        for (size_t l = t; l < n; ++l) {
            const double next_v = (l + 1 < n) ? values[l + 1] : bootstrap;
            acc += w * (rewards[l] + gamma * next_v * (1.0 - dones[l]) - values[l]);
            if (dones[l] != 0.0) break;
            w *= gamma * lambda;
        }
        adv[t] = acc;
        ret[t] = acc + values[t];
    }
}

void check_gae(Check& c) {
    Rng rng(1003);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const size_t n = 1 + rng.uniform_int(32);
        std::vector<double> rewards(n), values(n), dones(n, 0.0);
        for (size_t i = 0; i < n; ++i) {
            rewards[i] = rng.uniform(-1, 1);
            values[i] = rng.uniform(-1, 1);
            if (rng.uniform(0, 1) < 0.2) dones[i] = 1.0;
        }
        const double bootstrap = rng.uniform(-1, 1);
        std::vector<double> adv(n), ret(n), eadv, eret;
        ppo::compute_gae(rewards, values, dones, bootstrap, 0.99, 0.95, adv, ret);
        gae_reference(rewards, values, dones, bootstrap, 0.99, 0.95, eadv, eret);
        for (size_t i = 0; i < n; ++i) {
            worst = std::max(worst, std::abs(adv[i] - eadv[i]));
            worst = std::max(worst, std::abs(ret[i] - eret[i]));
        }
    }
    c.require(worst <= 1e-10, "GAE vs discounted sums, worst gap " + fmt(worst));
}

env::Observation random_obs(Rng& rng, int n_peds) {
    env::Observation obs;
    obs.robot.position = {rng.uniform(-4, 4), rng.uniform(-4, 4)};
    obs.robot.velocity = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    obs.robot.goal = {rng.uniform(-4, 4), rng.uniform(-4, 4)};
    obs.robot.theta = rng.uniform(-3.0, 3.0);
    for (int i = 0; i < n_peds; ++i)
        obs.pedestrians.push_back({{rng.uniform(-4, 4), rng.uniform(-4, 4)},
                                   {rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                   0.3});
    return obs;
}

void check_attention(Check& c) {
    const net::PolicyParams params = ppo::init_policy(11);
    Rng rng(1004);
    double worst_alpha = 0.0, worst_probs = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const env::Observation obs = random_obs(rng, 1 + static_cast<int>(rng.uniform_int(8)));
        const net::ForwardTrace tr = net::forward(params, obs);
        double sa = 0.0, sp = 0.0;
        bool positive = true;
        for (double a : tr.alpha) { sa += a; positive = positive && a > 0.0; }
        for (double p : tr.probs) { sp += p; positive = positive && p > 0.0; }
        worst_alpha = std::max(worst_alpha, std::abs(sa - 1.0));
        worst_probs = std::max(worst_probs, std::abs(sp - 1.0));
        if (!positive) c.require(false, "non-positive softmax output");
    }
    c.require(worst_alpha <= 1e-12, "attention normalization drift " + fmt(worst_alpha));
    c.require(worst_probs <= 1e-12, "action softmax drift " + fmt(worst_probs));
}

void check_permutation(Check& c) {
    const net::PolicyParams params = ppo::init_policy(12);
    Rng rng(1005);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        env::Observation obs = random_obs(rng, 2 + static_cast<int>(rng.uniform_int(6)));
        const net::ForwardTrace before = net::forward(params, obs);
        // random cyclic shift plus one swap
        std::rotate(obs.pedestrians.begin(),
                    obs.pedestrians.begin() + 1 + rng.uniform_int(obs.pedestrians.size() - 1),
                    obs.pedestrians.end());
        std::swap(obs.pedestrians.front(), obs.pedestrians.back());
        const net::ForwardTrace after = net::forward(params, obs);
        for (int i = 0; i < net::kActionDim; ++i)
            worst = std::max(worst, std::abs(before.probs[i] - after.probs[i]));
        worst = std::max(worst, std::abs(before.value - after.value));
    }
    c.require(worst <= 1e-12, "permutation equivariance drift " + fmt(worst));
}

void check_gradients(Check& c) {
    const net::PolicyParams params = ppo::init_policy(13);
    Rng rng(1006);
    const env::Observation obs = random_obs(rng, 4);
    const net::ForwardTrace tr = net::forward(params, obs);

    std::array<double, net::kActionDim> gl{};
    for (double& g : gl) g = rng.uniform(-1, 1);
    const double gv = rng.uniform(-1, 1);
    std::vector<double> grad(net::policy_layout().total(), 0.0);
    net::backward(params, tr, gl.data(), gv, grad);

    auto objective = [&](const net::PolicyParams& p) {
        const net::ForwardTrace t = net::forward(p, obs);
        double f = gv * t.value;
        for (int i = 0; i < net::kActionDim; ++i) f += gl[i] * t.logits[i];
        return f;
    };

    const double h = 1e-5;
    int bad = 0;
    double worst = 0.0;
    net::PolicyParams probe = params;
    for (int k = 0; k < 100; ++k) {
        const size_t idx = rng.uniform_int(probe.data.size());
        const double keep = probe.data[idx];
        probe.data[idx] = keep + h;
        const double fp = objective(probe);
        probe.data[idx] = keep - h;
        const double fm = objective(probe);
        probe.data[idx] = keep;
        const double fd = (fp - fm) / (2.0 * h);
        const double rel = std::abs(fd - grad[idx]) /
                           std::max({std::abs(fd), std::abs(grad[idx]), 1e-6});
        worst = std::max(worst, rel);
        if (rel >= 1e-4) ++bad;
    }
    c.require(bad == 0, "finite differences: " + std::to_string(bad) +
                            "/100 coordinates off, worst rel err " + fmt(worst));
}

void check_adam(Check& c) {
    net::PolicyParams params;  // zeros
    std::vector<double> grad(params.data.size(), 0.0);
    grad[123] = 0.3;
    net::AdamState state;
    net::adam_step(params, grad, state, 2.5e-4, 1e-5);
    const double expected = -2.4999166694443519e-4;
    c.require(std::abs(params.data[123] - expected) <= 1e-16,
              "adam first step " + fmt(params.data[123]));
    c.require(state.t == 1, "adam step counter");
    c.require(params.data[124] == 0.0, "adam touched an untouched coordinate");
}

void check_t_test(Check& c) {
    const std::vector<double> a = {1, 2, 3, 4};
    const std::vector<double> b = {3, 4, 5, 6};
    const stats::TTestResult r = stats::pooled_t_test(a, b);
    c.require(r.valid && r.df == 6, "t-test df " + std::to_string(r.df));
    c.require(std::abs(r.t - (-2.1908902300206643)) <= 1e-9, "t statistic " + fmt(r.t));
    c.require(r.p > 0.0 && r.p < 1.0, "t-test p out of range");

    Rng rng(1007);
    std::vector<double> big_a(250), big_b(250);
    for (double& x : big_a) x = rng.uniform(0, 1);
    for (double& x : big_b) x = rng.uniform(0, 1);
    c.require(stats::pooled_t_test(big_a, big_b).df == 498, "df for 250/250 samples");
}

Check criterion1() {
    Check c;
    check_hull_oracle(c);
    check_distance_invariance(c);
    check_action_table(c);
    check_reward_substitutions(c);
    check_gae(c);
    check_attention(c);
    check_permutation(c);
    check_gradients(c);
    check_adam(c);
    check_t_test(c);
    if (c.ok) c.detail = "hull, rewards, GAE, attention, gradients, adam, t-test";
    return c;
}

// ---------------------------------------------------------------------------
// criterion 2: behavioral social force

sfm::AgentState make_agent(Vec2 pos, Vec2 goal, int group) {
    sfm::AgentState agent;
    agent.position = pos;
    agent.goal = goal;
    agent.group_id = group;
    return agent;
}

Check criterion2() {
    Check c;
    const sfm::SfmParams params;
    const double speed_cap = params.max_speed_factor * 1.0 + 1e-9;

    {  // oncoming pair: straight paths would overlap, so they must steer
        std::vector<sfm::AgentState> agents = {make_agent({-4, 0.15}, {4, -0.15}, 0),
                                               make_agent({4, -0.15}, {-4, 0.15}, 1)};
        double min_dist = 1e300;
        bool cap_ok = true;
        for (int i = 0; i < 240; ++i) {
            sfm::step(agents, nullptr, {}, params, 0.25);
            min_dist = std::min(min_dist, (agents[0].position - agents[1].position).norm());
            for (const sfm::AgentState& a : agents)
                cap_ok = cap_ok && a.velocity.norm() <= speed_cap;
            if ((agents[0].position - agents[0].goal).norm() < 0.5 &&
                (agents[1].position - agents[1].goal).norm() < 0.5)
                break;
        }
        c.require((agents[0].position - agents[0].goal).norm() < 0.5 &&
                      (agents[1].position - agents[1].goal).norm() < 0.5,
                  "head-on pair failed to reach goals");
        c.require(min_dist >= 0.6, "head-on pair collided, min distance " + fmt(min_dist));
        c.require(cap_ok, "speed cap violated in head-on transit");
    }

    {  // three-member group on an 8 m crossing stays within 3 m pairwise
        const double radius = 4.0, arc = 0.9 / radius;
        std::vector<sfm::AgentState> agents;
        for (int k = -1; k <= 1; ++k) {
            const double angle = 0.7 + k * arc;
            const Vec2 start{radius * std::cos(angle), radius * std::sin(angle)};
            agents.push_back(make_agent(start, -start, 0));
        }
        double max_spread = 0.0;
        bool cap_ok = true;
        int arrived_step = -1;
        for (int i = 0; i < 400; ++i) {
            sfm::step(agents, nullptr, {}, params, 0.25);
            for (size_t a = 0; a < agents.size(); ++a) {
                cap_ok = cap_ok && agents[a].velocity.norm() <= speed_cap;
                for (size_t b = a + 1; b < agents.size(); ++b)
                    max_spread = std::max(
                        max_spread, (agents[a].position - agents[b].position).norm());
            }
            bool all = true;
            for (const sfm::AgentState& a : agents)
                all = all && (a.position - a.goal).norm() < 0.5;
            if (all) { arrived_step = i; break; }
        }
        c.require(arrived_step >= 0, "group never completed the crossing");
        c.require(max_spread < 3.0, "group spread reached " + fmt(max_spread) + " m");
        c.require(cap_ok, "speed cap violated in group transit");
    }

    {  // cap clamps even absurd initial velocities in one step
        std::vector<sfm::AgentState> agents = {make_agent({0, 0}, {10, 0}, 0)};
        agents[0].velocity = {5, 5};
        sfm::step(agents, nullptr, {}, params, 0.25);
        c.require(agents[0].velocity.norm() <= speed_cap, "speed cap missed a hot start");
    }
    if (c.ok) c.detail = "head-on pass, group cohesion, speed cap";
    return c;
}

// ---------------------------------------------------------------------------
// criterion 3: determinism

bool same_observation(const env::Observation& a, const env::Observation& b) {
    if (!(a.robot.position == b.robot.position) || !(a.robot.velocity == b.robot.velocity) ||
        a.robot.radius != b.robot.radius || !(a.robot.goal == b.robot.goal) ||
        a.robot.v_pref != b.robot.v_pref || a.robot.theta != b.robot.theta)
        return false;
    if (a.pedestrians.size() != b.pedestrians.size()) return false;
    for (size_t i = 0; i < a.pedestrians.size(); ++i) {
        const env::PedestrianView &pa = a.pedestrians[i], &pb = b.pedestrians[i];
        if (!(pa.position == pb.position) || !(pa.velocity == pb.velocity) ||
            pa.radius != pb.radius)
            return false;
    }
    return true;
}

std::vector<std::string> greedy_rollout_lines(const net::PolicyParams& params, uint64_t seed) {
    env::EpisodeConfig episode;
    episode.n_pedestrians = 4;
    env::CrowdEnv env(episode, env::RewardConfig{}, sfm::SfmParams{});
    env.reset(seed);
    std::vector<std::string> lines;
    while (env.outcome() == env::Outcome::running) {
        const net::ForwardTrace tr = net::forward(params, env.observation());
        const env::StepInfo info = env.step(ppo::greedy_action(tr));
        io::TrajectoryRecord rec;
        rec.step = env.step_count();
        rec.robot = env.observation().robot;
        rec.pedestrians = env.observation().pedestrians;
        rec.groups = env.layout().assignment;
        rec.reward = info.breakdown;
        rec.done = env::outcome_name(info.outcome);
        lines.push_back(io::trajectory_line(rec));
    }
    return lines;
}

Check criterion3() {
    Check c;
    const net::PolicyParams params = ppo::init_policy(21);

    c.require(greedy_rollout_lines(params, 31337) == greedy_rollout_lines(params, 31337),
              "re-running a rollout changed the trajectory");

    env::EpisodeConfig episode;
    episode.n_pedestrians = 3;
    ppo::PpoConfig tiny;
    tiny.window = 8;
    tiny.windows_per_batch = 8;
    tiny.epochs_per_batch = 2;
    tiny.minibatches = 4;

    {  // identical batches from serial and parallel collection
        ppo::Trainer serial(episode, env::RewardConfig{}, sfm::SfmParams{}, tiny, 42, 1);
        ppo::Trainer parallel(episode, env::RewardConfig{}, sfm::SfmParams{}, tiny, 42, 3);
        const ppo::RolloutBatch a = serial.collect(params);
        const ppo::RolloutBatch b = parallel.collect(params);
        bool same = a.experiences.size() == b.experiences.size() && a.env_steps == b.env_steps &&
                    a.episode_rewards == b.episode_rewards;
        for (size_t i = 0; same && i < a.experiences.size(); ++i) {
            const ppo::Experience &ea = a.experiences[i], &eb = b.experiences[i];
            same = same_observation(ea.obs, eb.obs) && ea.action == eb.action &&
                   ea.logp == eb.logp && ea.reward == eb.reward && ea.value == eb.value &&
                   ea.done == eb.done && ea.advantage == eb.advantage && ea.ret == eb.ret;
        }
        c.require(same, "serial and parallel batches differ");
    }

    {  // identical parameters after two full iterations
        auto train_with = [&](int threads) {
            net::PolicyParams p = ppo::init_policy(5);
            net::AdamState adam;
            ppo::Trainer trainer(episode, env::RewardConfig{}, sfm::SfmParams{}, tiny, 42,
                                 threads);
            trainer.run(p, adam, 2);
            return p;
        };
        c.require(train_with(1).data == train_with(3).data,
                  "serial and parallel training weights differ");
    }

    {  // identical evaluation reports
        ThreadPool pool1(1), pool3(3);
        const std::vector<eval::TrialRecord> a = eval::run_evaluation(
            params, episode, env::RewardConfig{}, sfm::SfmParams{}, 12, 99, pool1);
        const std::vector<eval::TrialRecord> b = eval::run_evaluation(
            params, episode, env::RewardConfig{}, sfm::SfmParams{}, 12, 99, pool3);
        const std::string ja = eval::report_to_json(eval::compute_metrics(a));
        const std::string jb = eval::report_to_json(eval::compute_metrics(b));
        c.require(ja == jb, "serial and parallel evaluation reports differ");

        eval::TrialFileMeta meta;
        meta.n_pedestrians = episode.n_pedestrians;
        meta.trials = 12;
        meta.seed = 99;
        std::ostringstream ta, tb;
        eval::write_trials(ta, meta, a);
        eval::write_trials(tb, meta, b);
        c.require(ta.str() == tb.str(), "serial and parallel trial files differ");
    }
    if (c.ok) c.detail = "trajectories, batches, reports bitwise-stable";
    return c;
}

// ---------------------------------------------------------------------------
// criteria 4 and 5: desk-scale training

struct TrainResult {
    net::PolicyParams params;
    double best_trailing = 0.0;   // peak of the trailing-window mean episode reward
    double final_trailing = 0.0;
};

struct Lab {
    int iterations = 1500;
    int threads = 0;
    std::string out_dir = "acceptance_out";
    std::optional<TrainResult> group_aware;
    std::optional<TrainResult> baseline;

    TrainResult train(bool group_term, const std::string& tag) {
        env::EpisodeConfig episode;
        episode.n_pedestrians = 5;
        episode.single_group = true;
        env::RewardConfig reward;
        reward.group_term_enabled = group_term;
        ppo::PpoConfig cfg;

        const std::filesystem::path dir = std::filesystem::path(out_dir) / tag;
        std::filesystem::create_directories(dir);
        std::ofstream curve(dir / "learning_curve.jsonl");

        TrainResult result{ppo::init_policy(1), 0.0, 0.0};
        net::AdamState adam;
        ppo::Trainer trainer(episode, reward, sfm::SfmParams{}, cfg, 1, threads);

        // trailing window of (reward sum, episode count) pairs
        std::vector<std::pair<double, int>> window;
        const size_t window_len = 50;
        auto trailing_mean = [&]() {
            double sum = 0.0;
            int count = 0;
            for (const auto& [s, n] : window) { sum += s; count += n; }
            return count > 0 ? sum / count : 0.0;
        };

        trainer.run(result.params, adam, iterations,
                    [&](const ppo::IterationRecord& rec, const net::PolicyParams&,
                        const net::AdamState&) {
                        window.emplace_back(rec.mean_reward * rec.episodes, rec.episodes);
                        if (window.size() > window_len) window.erase(window.begin());
                        const double tm = trailing_mean();
                        result.best_trailing = std::max(result.best_trailing, tm);
                        result.final_trailing = tm;
                        curve << "{\"iteration\":" << rec.iteration
                              << ",\"episodes\":" << rec.episodes
                              << ",\"mean_reward\":" << rec.mean_reward
                              << ",\"trailing_mean\":" << tm << "}\n";
                        if (rec.iteration % 25 == 0) {
                            std::fprintf(stderr,
                                         "[%s] iter %d/%d trailing mean reward %.3f\n",
                                         tag.c_str(), rec.iteration, iterations, tm);
                            std::fflush(stderr);
                        }
                    });
        net::save_checkpoint((dir / "checkpoint_final.ckpt").string(), result.params, adam);
        return result;
    }

    const TrainResult& get_group_aware() {
        if (!group_aware) group_aware = train(true, "group_aware");
        return *group_aware;
    }
    const TrainResult& get_baseline() {
        if (!baseline) baseline = train(false, "baseline");
        return *baseline;
    }
};

Check criterion4(Lab& lab) {
    Check c;
    const TrainResult& r = lab.get_group_aware();
    c.require(r.best_trailing >= 1.0,
              "mean episode reward peaked at " + fmt(r.best_trailing) + " < 1.0");
    if (c.ok)
        c.detail = "mean episode reward reached " + fmt(r.best_trailing) +
                   " (final " + fmt(r.final_trailing) + ")";
    return c;
}

Check criterion5(Lab& lab) {
    Check c;
    const TrainResult& ga = lab.get_group_aware();
    const TrainResult& base = lab.get_baseline();

    env::EpisodeConfig episode;
    episode.n_pedestrians = 5;
    episode.single_group = true;
    const uint64_t eval_seed = 777;
    ThreadPool pool(ThreadPool::resolve(lab.threads));
    const std::vector<eval::TrialRecord> trials_ga = eval::run_evaluation(
        ga.params, episode, env::RewardConfig{}, sfm::SfmParams{}, 100, eval_seed, pool);
    const std::vector<eval::TrialRecord> trials_base = eval::run_evaluation(
        base.params, episode, env::RewardConfig{}, sfm::SfmParams{}, 100, eval_seed, pool);

    const eval::MetricsReport m_ga = eval::compute_metrics(trials_ga);
    const eval::MetricsReport m_base = eval::compute_metrics(trials_base);

    std::fprintf(stderr,
                 "[compare] group-aware: %d successes, %ld intersections, %.2f s mean time\n",
                 m_ga.successes, m_ga.group_intersections, m_ga.time_to_goal.mean);
    std::fprintf(stderr,
                 "[compare] baseline:    %d successes, %ld intersections, %.2f s mean time\n",
                 m_base.successes, m_base.group_intersections, m_base.time_to_goal.mean);

    c.require(2 * m_ga.group_intersections <= m_base.group_intersections,
              "intersections " + std::to_string(m_ga.group_intersections) + " vs baseline " +
                  std::to_string(m_base.group_intersections) + ": drop below 50%");
    c.require(std::abs(m_ga.successes - m_base.successes) <= 5,
              "success counts " + std::to_string(m_ga.successes) + " vs " +
                  std::to_string(m_base.successes) + " differ by more than 5");
    c.require(m_ga.time_to_goal.n > 0 && m_base.time_to_goal.n > 0,
              "a policy never reached the goal");
    if (m_ga.time_to_goal.n > 0 && m_base.time_to_goal.n > 0)
        c.require(m_ga.time_to_goal.mean <= 1.25 * m_base.time_to_goal.mean,
                  "time to goal " + fmt(m_ga.time_to_goal.mean) + " s exceeds baseline " +
                      fmt(m_base.time_to_goal.mean) + " s by more than 25%");
    if (c.ok)
        c.detail = "intersections " + std::to_string(m_ga.group_intersections) + " vs " +
                   std::to_string(m_base.group_intersections) + ", successes " +
                   std::to_string(m_ga.successes) + " vs " + std::to_string(m_base.successes) +
                   ", time " + fmt(m_ga.time_to_goal.mean) + " vs " +
                   fmt(m_base.time_to_goal.mean) + " s";
    return c;
}

// ---------------------------------------------------------------------------
// criterion 6: group sampling statistics

Check criterion6() {
    Check c;
    Rng rng(123);
    double total = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
        total += env::sample_groups(5, false, rng).n_groups;
    const double mean = total / draws;
    c.require(mean >= 2.0 && mean <= 2.9, "mean group count " + fmt(mean) + " outside [2.0, 2.9]");
    if (c.ok) c.detail = "mean group count " + fmt(mean) + " over 10^4 draws";
    return c;
}

// ---------------------------------------------------------------------------
// criterion 7: empty-scene closed form

Check criterion7() {
    Check c;
    env::EpisodeConfig episode;
    episode.n_pedestrians = 0;
    env::CrowdEnv env(episode, env::RewardConfig{}, sfm::SfmParams{});
    env.reset(1);
    double total = 0.0;
    int steps = 0;
    while (env.outcome() == env::Outcome::running && steps < episode.max_steps()) {
        total += env.step(65).reward;  // full speed straight at the goal
        ++steps;
    }
    c.require(env.outcome() == env::Outcome::goal, "straight-line run missed the goal");
    c.require(steps == 30, "straight-line run took " + std::to_string(steps) + " steps, not 30");
    c.require(std::abs(total - 1.75) <= 0.05,
              "total reward " + fmt(total) + " not within 0.05 of 1.75");
    if (c.ok) c.detail = "goal in " + std::to_string(steps) + " steps, total reward " + fmt(total);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria runner"};
    std::string criteria = "1,2,3,4,5,6,7";
    Lab lab;
    app.add_option("--criteria", criteria, "comma-separated criterion numbers to run");
    app.add_option("--out", lab.out_dir, "directory for training artifacts");
    app.add_option("--threads", lab.threads, "worker threads (0 = auto)");
    app.add_option("--train-iterations", lab.iterations,
                   "training length for criteria 4 and 5 (default 1500)");
    CLI11_PARSE(app, argc, argv);

    std::vector<int> requested;
    std::stringstream ss(criteria);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            const int k = std::stoi(item);
            if (k < 1 || k > 7) throw std::out_of_range("range");
            requested.push_back(k);
        } catch (const std::exception&) {
            std::fprintf(stderr, "error: bad criterion '%s' (use 1..7)\n", item.c_str());
            return 2;
        }
    }
    if (requested.empty()) {
        std::fprintf(stderr, "error: no criteria requested\n");
        return 2;
    }

    int failures = 0;
    for (int k : requested) {
        Check result;
        try {
            switch (k) {
                case 1: result = criterion1(); break;
                case 2: result = criterion2(); break;
                case 3: result = criterion3(); break;
                case 4: result = criterion4(lab); break;
                case 5: result = criterion5(lab); break;
                case 6: result = criterion6(); break;
                case 7: result = criterion7(); break;
            }
        } catch (const std::exception& e) {
            result.ok = false;
            result.detail = std::string("exception: ") + e.what();
        }
        if (!result.ok) ++failures;
        std::printf("criterion %d: %s  (%s)\n", k, result.ok ? "PASS" : "FAIL",
                    result.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
