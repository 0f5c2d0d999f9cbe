#pragma once

#include <span>
#include <vector>

#include "groupnav/geometry.hpp"

namespace groupnav::sfm {

using geom::Vec2;

/// Coefficients of the extended social force model. Forces are
/// accelerations (unit mass). All strictly positive; the vision half
/// angle lies in (0, 180) degrees.
struct SfmParams {
    double tau = 0.5;                        // relaxation time [s]
    double social_strength = 4.5;            // A [m/s^2]
    double social_range = 0.35;              // B [m]
    double obstacle_strength = 10.0;         // [m/s^2]
    double obstacle_range = 0.2;             // [m]
    double gaze_strength = 4.0;              // beta1, dimensionless
    double attraction_strength = 3.0;        // beta2 [m/s^2]
    double group_repulsion_strength = 1.0;   // beta3 [m/s^2]
    double vision_half_angle_deg = 90.0;     // phi
    double attraction_threshold_coeff = 0.5; // [m per (group size - 1)]
    double group_repulsion_radius = 0.6;     // [m]
    double max_speed_factor = 1.3;

    void validate() const;  // throws std::invalid_argument
};

/// Full simulator-side pedestrian state. The goal and preferred speed
/// drive the desired force but are never observable to the robot.
struct AgentState {
    Vec2 position;
    Vec2 velocity;
    double radius = 0.3;
    Vec2 goal;
    double v_pref = 1.0;
    int group_id = 0;
};

struct Segment {
    Vec2 a, b;
};

struct GroupForces {
    Vec2 gaze;
    Vec2 attraction;
    Vec2 repulsion;
    Vec2 sum() const { return gaze + attraction + repulsion; }
};

/// Agents closer to their goal than this hold position (their desired
/// velocity becomes zero and they brake).
inline constexpr double kGoalStopDistance = 0.3;

/// Goal-seeking force (v_pref * unit(goal - position) - v) / tau.
/// At the goal (or within the stop distance) this degrades to -v / tau.
Vec2 desired_force(const AgentState& agent, const SfmParams& params);

/// Exponential body repulsion A * exp((r_ij - d_ij) / B) along the line
/// from `other` toward `self`. Coincident centers push along +x.
Vec2 social_repulsion(const AgentState& self, const AgentState& other, const SfmParams& params);

/// Sum of repulsions from wall segments; empty list gives zero.
Vec2 obstacle_force(const AgentState& agent, std::span<const Segment> obstacles,
                    const SfmParams& params);

/// Within-group gaze / attraction / repulsion terms. `members` are the
/// agent's co-members (agent excluded); empty means a singleton group
/// and all three terms vanish.
GroupForces group_forces(const AgentState& agent, std::span<const AgentState> members,
                         const SfmParams& params);

/// Sum of social repulsions on agents[self_index] from every other agent
/// plus, when non-null, `extra` (the robot). With self_index < 0 the
/// "self" is `self_body`, which must not appear in `agents` (used to
/// evaluate the hypothetical force on the robot).
Vec2 social_force_sum(std::span<const AgentState> agents, int self_index,
                      const AgentState* self_body, const AgentState* extra,
                      const SfmParams& params);

/// Total acceleration on agents[self_index]: desired + obstacle + social
/// (robot included as a neighbor when non-null) + group terms.
Vec2 total_force(std::span<const AgentState> agents, size_t self_index,
                 const AgentState* robot, std::span<const Segment> obstacles,
                 const SfmParams& params);

/// One synchronous semi-implicit Euler step: all forces are evaluated on
/// the pre-step snapshot, then v' = v + f dt (speed clipped to
/// max_speed_factor * v_pref) and x' = x + v' dt.
void step(std::vector<AgentState>& agents, const AgentState* robot,
          std::span<const Segment> obstacles, const SfmParams& params, double dt);

}  // namespace groupnav::sfm
