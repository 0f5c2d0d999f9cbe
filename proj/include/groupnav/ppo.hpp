#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "groupnav/crowd_env.hpp"
#include "groupnav/neural.hpp"
#include "groupnav/rng.hpp"
#include "groupnav/thread_pool.hpp"

namespace groupnav::ppo {

struct PpoConfig {
    double gamma = 0.99;
    double gae_lambda = 0.95;
    int window = 16;
    int windows_per_batch = 64;
    int epochs_per_batch = 3;
    int minibatches = 4;
    double clip_epsilon = 0.1;
    double value_coeff = 1.0;
    double entropy_coeff = 0.01;
    double grad_clip_norm = 0.5;
    int iterations = 7000;
    double lr = 2.5e-4;
    double adam_eps = 1e-5;
    int checkpoint_interval = 500;
    void validate() const;
    int batch_size() const { return window * windows_per_batch; }
};

struct Experience {
    env::Observation obs;  // state the action was chosen in
    int action = 0;
    double logp = 0.0;
    double reward = 0.0;
    double value = 0.0;
    double done = 0.0;  // 1 when this step ended its episode
    double advantage = 0.0;
    double ret = 0.0;
};

struct RolloutBatch {
    std::vector<Experience> experiences;
    std::vector<double> episode_rewards;  // episodes that finished during collection
    long env_steps = 0;
};

struct LossStats {
    double policy = 0.0;
    double value = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
};

struct IterationRecord {
    int iteration = 0;
    long env_steps = 0;
    int episodes = 0;
    double mean_reward = 0.0;
    double min_reward = 0.0;
    double max_reward = 0.0;
    LossStats loss;
};

void compute_gae(std::span<const double> rewards, std::span<const double> values,
                 std::span<const double> dones, double bootstrap_value, double gamma,
                 double lambda, std::span<double> advantages, std::span<double> returns);

int sample_action(const net::ForwardTrace& trace, Rng& rng);
int greedy_action(const net::ForwardTrace& trace);

// Fresh Xavier-initialized policy on a seed stream of its own, so the same
// global seed gives the same starting weights regardless of thread count.
net::PolicyParams init_policy(uint64_t global_seed);

// One environment with its own seed streams; episodes are numbered so a rerun
// with the same global seed walks the identical scenario sequence.
class EnvWorker {
public:
    EnvWorker(const env::EpisodeConfig& episode, const env::RewardConfig& reward,
              const sfm::SfmParams& sfm, uint64_t global_seed, int worker_id);

    std::vector<Experience> run_window(const net::PolicyParams& params, int window,
                                       double gamma, double lambda);
    std::vector<double> drain_completed();

private:
    env::CrowdEnv env_;
    Rng action_rng_;
    uint64_t global_seed_;
    int worker_id_;
    long episode_counter_ = -1;
    double episode_return_ = 0.0;
    bool needs_reset_ = true;
    std::vector<double> completed_;
};

using IterationCallback = std::function<void(const IterationRecord&, const net::PolicyParams&,
                                             const net::AdamState&)>;

class Trainer {
public:
    Trainer(const env::EpisodeConfig& episode, const env::RewardConfig& reward,
            const sfm::SfmParams& sfm, const PpoConfig& cfg, uint64_t seed, int threads);

    RolloutBatch collect(const net::PolicyParams& params);
    LossStats update(net::PolicyParams& params, RolloutBatch& batch, net::AdamState& adam);

    // runs `count` iterations on top of whatever already ran on this trainer
    void run(net::PolicyParams& params, net::AdamState& adam, int count,
             const IterationCallback& on_iteration = {});

    int iteration() const { return iteration_; }
    long env_steps() const { return total_env_steps_; }

private:
    PpoConfig cfg_;
    uint64_t seed_;
    std::vector<EnvWorker> workers_;
    ThreadPool pool_;
    int iteration_ = 0;
    long total_env_steps_ = 0;
};

}  // namespace groupnav::ppo
