#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "groupnav/crowd_env.hpp"
#include "groupnav/neural.hpp"
#include "groupnav/stats.hpp"
#include "groupnav/thread_pool.hpp"

namespace groupnav::eval {

struct TrialRecord {
    int trial = 0;
    env::Outcome outcome = env::Outcome::timeout;
    double time_to_goal = 0.0;  // meaningful on success only
    int steps = 0;
    int n_groups = 0;
    int group_intersections = 0;  // groups of two or more whose hull the robot entered

    // per-trial reductions of the step samples
    double robot_velocity = 0.0;
    double ped_velocity = 0.0;
    double ped_angle_deg = 0.0;
    double discomfort = 0.0;  // summed robot-pedestrian distances inside the discomfort band
    double ped_social_force = 0.0;
    double robot_social_force = 0.0;
    bool has_ped_velocity = false;
    bool has_ped_angle = false;
    bool has_ped_force = false;

    // raw step samples, kept in memory only
    std::vector<double> robot_speed_samples;
    std::vector<double> ped_speed_samples;
    std::vector<double> ped_angle_samples;
    std::vector<double> ped_distance_samples;
    std::vector<double> hull_distance_samples;
    std::vector<double> ped_force_samples;
    std::vector<double> robot_force_samples;
};

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;
    int n = 0;
};

struct MetricsReport {
    int trials = 0;
    int successes = 0;
    int collisions = 0;
    int timeouts = 0;
    long group_intersections = 0;
    Aggregate time_to_goal;  // successful trials only
    Aggregate robot_velocity;
    Aggregate ped_velocity;
    Aggregate ped_angle_deg;
    Aggregate discomfort;
    Aggregate ped_social_force;
    Aggregate robot_social_force;
};

enum class Metric {
    time_to_goal,
    robot_velocity,
    ped_velocity,
    ped_angle,
    discomfort,
    ped_force,
    robot_force,
};

const char* metric_name(Metric m);

// one value per trial that carries the metric; the trial is the sampling unit
std::vector<double> per_trial_values(std::span<const TrialRecord> records, Metric m);

TrialRecord run_trial(const net::PolicyParams& params, const env::EpisodeConfig& episode,
                      const env::RewardConfig& reward, const sfm::SfmParams& sfm,
                      uint64_t trial_seed);

std::vector<TrialRecord> run_evaluation(const net::PolicyParams& params,
                                        const env::EpisodeConfig& episode,
                                        const env::RewardConfig& reward,
                                        const sfm::SfmParams& sfm, int n_trials, uint64_t seed,
                                        ThreadPool& pool);

MetricsReport compute_metrics(std::span<const TrialRecord> records);

struct ComparisonRow {
    std::string metric;
    bool tested = false;  // count rows carry no t-test
    double value_a = 0.0;
    double value_b = 0.0;
    stats::TTestResult test;
    bool significant = false;  // p < 0.05
};

struct Comparison {
    std::string label_a;
    std::string label_b;
    int trials = 0;
    std::vector<ComparisonRow> rows;
};

Comparison compare_policies(std::span<const TrialRecord> a, std::span<const TrialRecord> b,
                            const std::string& label_a, const std::string& label_b);

// persistence: a metadata line, then one record per trial
struct TrialFileMeta {
    int n_pedestrians = 0;
    bool single_group = false;
    bool group_term_enabled = true;
    int trials = 0;
    uint64_t seed = 0;
    std::string label;
};

void write_trials(std::ostream& out, const TrialFileMeta& meta,
                  std::span<const TrialRecord> records);
std::pair<TrialFileMeta, std::vector<TrialRecord>> read_trials_file(const std::string& path);

std::string report_to_json(const MetricsReport& report);
std::string report_table(const MetricsReport& report);
std::string comparison_to_json(const Comparison& cmp);
std::string comparison_table(const Comparison& cmp);

}  // namespace groupnav::eval
