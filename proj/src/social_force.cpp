#include "groupnav/social_force.hpp"

#include <cmath>
#include <stdexcept>

namespace groupnav::sfm {

void SfmParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string("sfm: ") + name + " must be > 0");
    };
    positive(tau, "tau");
    positive(social_strength, "social_strength");
    positive(social_range, "social_range");
    positive(obstacle_strength, "obstacle_strength");
    positive(obstacle_range, "obstacle_range");
    positive(gaze_strength, "gaze_strength");
    positive(attraction_strength, "attraction_strength");
    positive(group_repulsion_strength, "group_repulsion_strength");
    positive(attraction_threshold_coeff, "attraction_threshold_coeff");
    positive(group_repulsion_radius, "group_repulsion_radius");
    positive(max_speed_factor, "max_speed_factor");
    if (!(vision_half_angle_deg > 0.0 && vision_half_angle_deg < 180.0))
        throw std::invalid_argument("sfm: vision_half_angle_deg must be in (0, 180)");
}

Vec2 desired_force(const AgentState& agent, const SfmParams& params) {
    const Vec2 to_goal = agent.goal - agent.position;
    if (to_goal.norm() < kGoalStopDistance)
        return agent.velocity * (-1.0 / params.tau);
    const Vec2 desired_v = to_goal.normalized() * agent.v_pref;
    return (desired_v - agent.velocity) / params.tau;
}

// Unit vector from `from` toward `to`; +x when the points coincide.
static Vec2 direction_or_x(const Vec2& from, const Vec2& to) {
    const Vec2 d = to - from;
    const double n = d.norm();
    if (n == 0.0) return {1.0, 0.0};
    return d / n;
}

Vec2 social_repulsion(const AgentState& self, const AgentState& other, const SfmParams& params) {
    const double r_sum = self.radius + other.radius;
    const double dist = (self.position - other.position).norm();
    const double magnitude = params.social_strength * std::exp((r_sum - dist) / params.social_range);
    return direction_or_x(other.position, self.position) * magnitude;
}

Vec2 obstacle_force(const AgentState& agent, std::span<const Segment> obstacles,
                    const SfmParams& params) {
    Vec2 force;
    for (const Segment& seg : obstacles) {
        // nearest point on the segment
        const Vec2 ab = seg.b - seg.a;
        const double len_sq = ab.norm_sq();
        double t = len_sq == 0.0 ? 0.0 : (agent.position - seg.a).dot(ab) / len_sq;
        t = std::clamp(t, 0.0, 1.0);
        const Vec2 nearest = seg.a + ab * t;
        const double dist = (agent.position - nearest).norm();
        const double magnitude =
            params.obstacle_strength * std::exp((agent.radius - dist) / params.obstacle_range);
        force += direction_or_x(nearest, agent.position) * magnitude;
    }
    return force;
}

GroupForces group_forces(const AgentState& agent, std::span<const AgentState> members,
                         const SfmParams& params) {
    GroupForces out;
    if (members.empty()) return out;

    const size_t group_size = members.size() + 1;
    Vec2 centroid = agent.position;
    for (const AgentState& m : members) centroid += m.position;
    centroid = centroid / static_cast<double>(group_size);

    // gaze: turn cost for keeping the group centre in the vision field
    const Vec2 desired_dir = (agent.goal - agent.position).normalized();
    const Vec2 to_centroid = centroid - agent.position;
    if (!(desired_dir == Vec2{}) && to_centroid.norm() > 0.0) {
        const double theta = geom::angle_between_deg(desired_dir, to_centroid);
        const double overshoot = std::max(0.0, theta - params.vision_half_angle_deg);
        out.gaze = desired_dir * (-params.gaze_strength * overshoot / 90.0);
    }

    // attraction toward the centroid once the group stretches
    const double threshold =
        params.attraction_threshold_coeff * static_cast<double>(group_size - 1);
    if (to_centroid.norm() > threshold)
        out.attraction = to_centroid.normalized() * params.attraction_strength;

    // short-range spacing between co-members
    for (const AgentState& m : members) {
        if ((agent.position - m.position).norm() < params.group_repulsion_radius)
            out.repulsion += direction_or_x(m.position, agent.position) *
                             params.group_repulsion_strength;
    }
    return out;
}

Vec2 social_force_sum(std::span<const AgentState> agents, int self_index,
                      const AgentState* self_body, const AgentState* extra,
                      const SfmParams& params) {
    const AgentState& self = self_index >= 0 ? agents[static_cast<size_t>(self_index)] : *self_body;
    Vec2 force;
    for (size_t j = 0; j < agents.size(); ++j) {
        if (static_cast<int>(j) == self_index) continue;
        force += social_repulsion(self, agents[j], params);
    }
    if (extra) force += social_repulsion(self, *extra, params);
    return force;
}

Vec2 total_force(std::span<const AgentState> agents, size_t self_index,
                 const AgentState* robot, std::span<const Segment> obstacles,
                 const SfmParams& params) {
    const AgentState& agent = agents[self_index];
    Vec2 force = desired_force(agent, params);
    force += obstacle_force(agent, obstacles, params);
    force += social_force_sum(agents, static_cast<int>(self_index), nullptr, robot, params);

    std::vector<AgentState> members;
    for (size_t j = 0; j < agents.size(); ++j)
        if (j != self_index && agents[j].group_id == agent.group_id)
            members.push_back(agents[j]);
    force += group_forces(agent, members, params).sum();
    return force;
}

void step(std::vector<AgentState>& agents, const AgentState* robot,
          std::span<const Segment> obstacles, const SfmParams& params, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("sfm::step: dt must be > 0");
    std::vector<Vec2> forces(agents.size());
    for (size_t i = 0; i < agents.size(); ++i)
        forces[i] = total_force(agents, i, robot, obstacles, params);
    for (size_t i = 0; i < agents.size(); ++i) {
        AgentState& a = agents[i];
        Vec2 v = a.velocity + forces[i] * dt;
        const double cap = params.max_speed_factor * a.v_pref;
        const double speed = v.norm();
        if (speed > cap) v *= cap / speed;
        a.velocity = v;
        a.position += v * dt;
    }
}

}  // namespace groupnav::sfm
