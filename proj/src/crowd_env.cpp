#include "groupnav/crowd_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace groupnav::env {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

ActionTable::ActionTable() {
    entries_.reserve(kCount);
    entries_.push_back({0.0, 0.0});
    const double speeds[5] = {0.2, 0.4, 0.6, 0.8, 1.0};
    for (int s = 0; s < 5; ++s)
        for (int k = 0; k < 16; ++k) {
            const double psi = kTwoPi * k / 16.0;
            entries_.push_back({speeds[s] * std::cos(psi), speeds[s] * std::sin(psi)});
        }
}

Vec2 ActionTable::at(int index) const {
    if (index < 0 || index >= kCount)
        throw std::invalid_argument("action index out of range [0, 81)");
    return entries_[static_cast<size_t>(index)];
}

int ActionTable::nearest_index(const Vec2& command) const {
    int best = 0;
    double best_d = (entries_[0] - command).norm_sq();
    for (int i = 1; i < kCount; ++i) {
        const double d = (entries_[static_cast<size_t>(i)] - command).norm_sq();
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

Vec2 action_from_index(int index) {
    static const ActionTable table;
    return table.at(index);
}

void RewardConfig::validate() const {
    if (c_prog < 0 || c_goal < 0 || c_disc < 0 || c_coll < 0 || c_group < 0)
        throw std::invalid_argument("reward: weights must be >= 0");
    if (!(d_coll > 0) || !(d_disc >= d_coll))
        throw std::invalid_argument("reward: need 0 < d_coll <= d_disc");
}

void EpisodeConfig::validate() const {
    if (n_pedestrians < 0) throw std::invalid_argument("env: n_pedestrians must be >= 0");
    if (!(group_lambda > 0)) throw std::invalid_argument("env: group_lambda must be > 0");
    if (!(circle_radius > 0)) throw std::invalid_argument("env: circle_radius must be > 0");
    if (!(dt > 0)) throw std::invalid_argument("env: dt must be > 0");
    if (!(timeout > 0)) throw std::invalid_argument("env: timeout must be > 0");
    if (!(robot_radius > 0) || !(ped_radius > 0))
        throw std::invalid_argument("env: radii must be > 0");
    if (!(v_pref > 0)) throw std::invalid_argument("env: v_pref must be > 0");
    const double steps = timeout / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9)
        throw std::invalid_argument("env: timeout must be an integral number of steps");
}

int EpisodeConfig::max_steps() const {
    return static_cast<int>(std::llround(timeout / dt));
}

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::running: return "running";
        case Outcome::goal: return "goal";
        case Outcome::collision: return "collision";
        case Outcome::timeout: return "timeout";
    }
    return "?";
}

GroupLayout sample_groups(int n_pedestrians, bool single_group, Rng& rng,
                          double group_lambda) {
    if (n_pedestrians < 1)
        throw std::invalid_argument("sample_groups: need at least one pedestrian");
    GroupLayout layout;
    layout.assignment.assign(static_cast<size_t>(n_pedestrians), 0);
    if (single_group || n_pedestrians == 1) {
        layout.n_groups = 1;
        layout.group_sizes = {n_pedestrians};
        return layout;
    }
    const int n_groups = std::min(n_pedestrians, 1 + rng.poisson(group_lambda));
    layout.n_groups = n_groups;
    // uniform over assignments that leave no group empty
    while (true) {
        layout.group_sizes.assign(static_cast<size_t>(n_groups), 0);
        for (int i = 0; i < n_pedestrians; ++i) {
            const int g = rng.uniform_int(n_groups);
            layout.assignment[static_cast<size_t>(i)] = g;
            ++layout.group_sizes[static_cast<size_t>(g)];
        }
        const bool surjective = std::all_of(layout.group_sizes.begin(), layout.group_sizes.end(),
                                            [](int s) { return s > 0; });
        if (surjective) break;
    }
    return layout;
}

std::pair<double, RewardBreakdown> compute_reward(double d_goal_prev,
                                                  const Observation& next,
                                                  const GroupLayout& layout,
                                                  const RewardConfig& cfg) {
    RewardBreakdown bd;
    const Vec2 robot_pos = next.robot.position;
    const double d_goal = (next.robot.goal - robot_pos).norm();
    bd.progress = cfg.c_prog * (d_goal_prev - d_goal);
    if (d_goal < cfg.d_coll) bd.goal = cfg.c_goal;
    for (const PedestrianView& ped : next.pedestrians) {
        const double d = (robot_pos - ped.position).norm();
        if (d < cfg.d_coll)
            bd.collision -= cfg.c_coll;
        else if (d <= cfg.d_disc)
            bd.discomfort -= cfg.c_disc * (cfg.d_disc - d);
    }
    if (cfg.group_term_enabled) {
        for (int g = 0; g < layout.n_groups; ++g) {
            if (layout.group_sizes[static_cast<size_t>(g)] < 2) continue;
            const double d = geom::distance_to_polygon(robot_pos,
                                                       layout.hulls[static_cast<size_t>(g)]);
            if (d < cfg.d_coll) bd.group -= cfg.c_group;
        }
    }
    return {bd.total(), bd};
}

CrowdEnv::CrowdEnv(EpisodeConfig episode, RewardConfig reward, sfm::SfmParams sfm_params)
    : episode_(episode), reward_(reward), sfm_(sfm_params) {
    episode_.validate();
    reward_.validate();
    sfm_.validate();
}

Observation CrowdEnv::reset(uint64_t seed) {
    Rng rng(seed);
    step_count_ = 0;
    outcome_ = Outcome::running;

    const double radius = episode_.circle_radius;
    obs_.robot = RobotState{};
    obs_.robot.position = {0.0, -radius};
    obs_.robot.goal = {0.0, radius};
    obs_.robot.radius = episode_.robot_radius;
    obs_.robot.v_pref = episode_.v_pref;
    obs_.robot.theta = std::atan2(2.0 * radius, 0.0);

    const int n = episode_.n_pedestrians;
    if (n == 0) {
        layout_ = GroupLayout{};
        agents_.clear();
        refresh_hulls();
        refresh_observation();
        initialized_ = true;
        return obs_;
    }

    layout_ = sample_groups(n, episode_.single_group, rng, episode_.group_lambda);

    // members of one group walk the circle arc shoulder to shoulder
    const double arc_step = 0.9 / radius;
    const double min_gap_sq = [this] {
        const double g1 = 2.0 * episode_.ped_radius + 0.2;
        return g1 * g1;
    }();
    const double robot_gap = episode_.ped_radius + episode_.robot_radius + 0.2;

    std::vector<Vec2> starts(static_cast<size_t>(n));
    bool placed = false;
    for (int round = 0; round < 1000 && !placed; ++round) {
        for (int g = 0; g < layout_.n_groups; ++g) {
            const double center_angle = rng.uniform(0.0, kTwoPi);
            int slot = 0;
            const int size = layout_.group_sizes[static_cast<size_t>(g)];
            for (int i = 0; i < n; ++i) {
                if (layout_.assignment[static_cast<size_t>(i)] != g) continue;
                const double angle = center_angle +
                                     (slot - (size - 1) * 0.5) * arc_step +
                                     rng.uniform(-0.01, 0.01);
                const double r = radius + rng.uniform(-0.2, 0.2);
                starts[static_cast<size_t>(i)] = {r * std::cos(angle), r * std::sin(angle)};
                ++slot;
            }
        }
        placed = true;
        for (int i = 0; i < n && placed; ++i) {
            if ((starts[static_cast<size_t>(i)] - obs_.robot.position).norm() <= robot_gap)
                placed = false;
            for (int j = i + 1; j < n && placed; ++j)
                if ((starts[static_cast<size_t>(i)] - starts[static_cast<size_t>(j)]).norm_sq() <=
                    min_gap_sq)
                    placed = false;
        }
    }
    if (!placed)
        throw std::runtime_error("scenario generation failed: could not separate pedestrians");

    agents_.assign(static_cast<size_t>(n), sfm::AgentState{});
    for (int i = 0; i < n; ++i) {
        sfm::AgentState& a = agents_[static_cast<size_t>(i)];
        a.position = starts[static_cast<size_t>(i)];
        a.velocity = {0.0, 0.0};
        a.radius = episode_.ped_radius;
        a.goal = starts[static_cast<size_t>(i)] * -1.0;
        a.v_pref = episode_.v_pref;
        a.group_id = layout_.assignment[static_cast<size_t>(i)];
    }

    refresh_hulls();
    refresh_observation();
    initialized_ = true;
    return obs_;
}

StepInfo CrowdEnv::step(int action_index) {
    if (!initialized_) throw std::logic_error("CrowdEnv::step: reset first");
    if (outcome_ != Outcome::running)
        throw std::logic_error("CrowdEnv::step: episode already finished");

    const Vec2 cmd = actions_.at(action_index);
    RobotState& rob = obs_.robot;

    // command headings are relative to the robot-to-goal direction
    const Vec2 to_goal = rob.goal - rob.position;
    const double phi = std::atan2(to_goal.y, to_goal.x);
    const Vec2 v_world = cmd.rotated(phi);

    const double d_goal_prev = to_goal.norm();

    sfm::AgentState robot_body;
    robot_body.position = rob.position;
    robot_body.velocity = rob.velocity;
    robot_body.radius = rob.radius;
    robot_body.goal = rob.goal;
    robot_body.v_pref = rob.v_pref;
    robot_body.group_id = -1;
    sfm::step(agents_, agents_.empty() ? nullptr : &robot_body, {}, sfm_, episode_.dt);

    rob.velocity = v_world;
    rob.position += v_world * episode_.dt;
    if (!(cmd == Vec2{})) rob.theta = std::atan2(v_world.y, v_world.x);
    ++step_count_;

    refresh_hulls();
    refresh_observation();

    StepInfo info;
    auto [reward, breakdown] = compute_reward(d_goal_prev, obs_, layout_, reward_);
    info.reward = reward;
    info.breakdown = breakdown;

    const double d_goal = (rob.goal - rob.position).norm();
    bool collided = false;
    info.ped_distances.reserve(agents_.size());
    for (const sfm::AgentState& a : agents_) {
        const double d = (rob.position - a.position).norm();
        info.ped_distances.push_back(d);
        if (d < reward_.d_coll) collided = true;
    }
    if (collided)
        outcome_ = Outcome::collision;
    else if (d_goal < reward_.d_coll)
        outcome_ = Outcome::goal;
    else if (step_count_ >= episode_.max_steps())
        outcome_ = Outcome::timeout;
    else
        outcome_ = Outcome::running;
    info.outcome = outcome_;

    info.robot_speed = rob.velocity.norm();
    info.hull_distances.reserve(layout_.hulls.size());
    for (const geom::Polygon& hull : layout_.hulls)
        info.hull_distances.push_back(geom::distance_to_polygon(rob.position, hull));
    for (const sfm::AgentState& a : agents_) {
        info.ped_speeds.push_back(a.velocity.norm());
        const double speed = a.velocity.norm();
        if (speed > 0.0) {
            const Vec2 to_own_goal = a.goal - a.position;
            if (to_own_goal.norm() > 0.0)
                info.ped_goal_angles_deg.push_back(
                    geom::angle_between_deg(a.velocity, to_own_goal));
        }
    }

    sfm::AgentState robot_now = robot_body;
    robot_now.position = rob.position;
    robot_now.velocity = rob.velocity;
    for (size_t i = 0; i < agents_.size(); ++i)
        info.ped_force_mags.push_back(
            sfm::social_force_sum(agents_, static_cast<int>(i), nullptr, &robot_now, sfm_)
                .norm());
    info.robot_force_mag =
        agents_.empty()
            ? 0.0
            : sfm::social_force_sum(agents_, -1, &robot_now, nullptr, sfm_).norm();
    return info;
}

void CrowdEnv::refresh_hulls() {
    layout_.hulls.assign(static_cast<size_t>(layout_.n_groups), geom::Polygon{});
    if (layout_.n_groups == 0) return;
    std::vector<Vec2> points;
    for (int g = 0; g < layout_.n_groups; ++g) {
        points.clear();
        for (size_t i = 0; i < agents_.size(); ++i)
            if (layout_.assignment[i] == g) points.push_back(agents_[i].position);
        layout_.hulls[static_cast<size_t>(g)] = geom::convex_hull(points);
    }
}

void CrowdEnv::refresh_observation() {
    obs_.pedestrians.resize(agents_.size());
    for (size_t i = 0; i < agents_.size(); ++i) {
        obs_.pedestrians[i].position = agents_[i].position;
        obs_.pedestrians[i].velocity = agents_[i].velocity;
        obs_.pedestrians[i].radius = agents_[i].radius;
    }
}

}  // namespace groupnav::env
