#pragma once

#include <cstdint>
#include <vector>

#include "groupnav/geometry.hpp"
#include "groupnav/rng.hpp"
#include "groupnav/social_force.hpp"

namespace groupnav::env {

using geom::Vec2;

struct RobotState {
    Vec2 position;
    Vec2 velocity;
    double radius = 0.3;
    Vec2 goal;
    double v_pref = 1.0;
    double theta = 0.0;
};

// The five observable pedestrian quantities: position, velocity, radius.
struct PedestrianView {
    Vec2 position;
    Vec2 velocity;
    double radius = 0.3;
};

struct Observation {
    RobotState robot;
    std::vector<PedestrianView> pedestrians;
};

// 81 velocity commands: entry 0 stops, the rest enumerate 5 speeds x 16 headings.
class ActionTable {
public:
    ActionTable();
    static constexpr int kCount = 81;
    Vec2 at(int index) const;
    int nearest_index(const Vec2& command) const;
    const std::vector<Vec2>& entries() const { return entries_; }

private:
    std::vector<Vec2> entries_;
};

struct RewardConfig {
    double c_prog = 0.1;
    double c_goal = 1.0;
    double c_disc = 0.5;
    double c_coll = 0.25;
    double c_group = 0.25;
    double d_coll = 0.6;
    double d_disc = 0.8;
    bool group_term_enabled = true;
    void validate() const;
};

struct RewardBreakdown {
    double progress = 0.0;
    double goal = 0.0;
    double discomfort = 0.0;
    double collision = 0.0;
    double group = 0.0;
    double total() const { return progress + goal + discomfort + collision + group; }
};

struct GroupLayout {
    std::vector<int> assignment;        // pedestrian index -> group id
    int n_groups = 0;
    std::vector<geom::Polygon> hulls;   // one per group, refreshed every step
    std::vector<int> group_sizes;
};

struct EpisodeConfig {
    int n_pedestrians = 5;
    bool single_group = false;
    double group_lambda = 1.2;
    double circle_radius = 4.0;
    double dt = 0.25;
    double timeout = 25.0;
    double robot_radius = 0.3;
    double ped_radius = 0.3;
    double v_pref = 1.0;
    void validate() const;
    int max_steps() const;
};

enum class Outcome { running, goal, collision, timeout };
const char* outcome_name(Outcome o);

// Per-step byproducts consumed by the reward, the metrics, and the logs.
struct StepInfo {
    double reward = 0.0;
    RewardBreakdown breakdown;
    Outcome outcome = Outcome::running;
    double robot_speed = 0.0;
    std::vector<double> ped_distances;      // robot center to each pedestrian center
    std::vector<double> hull_distances;     // robot center to each group hull
    std::vector<double> ped_speeds;
    std::vector<double> ped_goal_angles_deg;  // only pedestrians with nonzero velocity
    std::vector<double> ped_force_mags;     // social repulsion felt by each pedestrian
    double robot_force_mag = 0.0;           // social repulsion the robot would feel
};

GroupLayout sample_groups(int n_pedestrians, bool single_group, Rng& rng,
                          double group_lambda = 1.2);

Vec2 action_from_index(int index);

std::pair<double, RewardBreakdown> compute_reward(double d_goal_prev,
                                                  const Observation& next,
                                                  const GroupLayout& layout,
                                                  const RewardConfig& cfg);

class CrowdEnv {
public:
    CrowdEnv(EpisodeConfig episode, RewardConfig reward, sfm::SfmParams sfm_params);

    Observation reset(uint64_t seed);
    StepInfo step(int action_index);

    const Observation& observation() const { return obs_; }
    const GroupLayout& layout() const { return layout_; }
    const std::vector<sfm::AgentState>& agents() const { return agents_; }
    Outcome outcome() const { return outcome_; }
    int step_count() const { return step_count_; }
    double time() const { return step_count_ * episode_.dt; }
    const EpisodeConfig& episode_config() const { return episode_; }
    const RewardConfig& reward_config() const { return reward_; }
    const sfm::SfmParams& sfm_params() const { return sfm_; }

private:
    void refresh_observation();
    void refresh_hulls();

    EpisodeConfig episode_;
    RewardConfig reward_;
    sfm::SfmParams sfm_;
    ActionTable actions_;

    std::vector<sfm::AgentState> agents_;
    GroupLayout layout_;
    Observation obs_;
    Outcome outcome_ = Outcome::running;
    int step_count_ = 0;
    bool initialized_ = false;
};

}  // namespace groupnav::env
