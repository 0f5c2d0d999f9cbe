#include "groupnav/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace groupnav::ppo {

namespace {

// seed-stream tags, kept clear of worker ids
constexpr uint64_t kStreamAction = uint64_t(1) << 20;
constexpr uint64_t kStreamUpdate = uint64_t(2) << 20;
constexpr uint64_t kStreamInit = uint64_t(3) << 20;
constexpr int kGradChunk = 32;  // fixed reduction granularity, keeps sums order-stable

}  // namespace

void PpoConfig::validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("ppo: gamma must be in (0,1]");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
        throw std::invalid_argument("ppo: gae_lambda must be in [0,1]");
    if (window < 1) throw std::invalid_argument("ppo: window must be >= 1");
    if (windows_per_batch < 1) throw std::invalid_argument("ppo: windows_per_batch must be >= 1");
    if (epochs_per_batch < 1) throw std::invalid_argument("ppo: epochs_per_batch must be >= 1");
    if (minibatches < 1 || batch_size() % minibatches != 0)
        throw std::invalid_argument("ppo: minibatches must divide the batch size");
    if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0))
        throw std::invalid_argument("ppo: clip_epsilon must be in (0,1)");
    if (value_coeff < 0.0 || entropy_coeff < 0.0)
        throw std::invalid_argument("ppo: loss coefficients must be >= 0");
    if (!(grad_clip_norm > 0.0)) throw std::invalid_argument("ppo: grad_clip_norm must be > 0");
    if (iterations < 0) throw std::invalid_argument("ppo: iterations must be >= 0");
    if (!(lr > 0.0)) throw std::invalid_argument("ppo: lr must be > 0");
    if (!(adam_eps > 0.0)) throw std::invalid_argument("ppo: adam_eps must be > 0");
    if (checkpoint_interval < 1)
        throw std::invalid_argument("ppo: checkpoint_interval must be >= 1");
}

void compute_gae(std::span<const double> rewards, std::span<const double> values,
                 std::span<const double> dones, double bootstrap_value, double gamma,
                 double lambda, std::span<double> advantages, std::span<double> returns) {
    const size_t n = rewards.size();
    if (values.size() != n || dones.size() != n || advantages.size() != n || returns.size() != n)
        throw std::invalid_argument("compute_gae: sequence lengths differ");
    double next_advantage = 0.0;
    double next_value = bootstrap_value;
    for (size_t i = n; i-- > 0;) {
        const double live = 1.0 - dones[i];
        const double delta = rewards[i] + gamma * next_value * live - values[i];
        next_advantage = delta + gamma * lambda * live * next_advantage;
        advantages[i] = next_advantage;
        returns[i] = next_advantage + values[i];
        next_value = values[i];
    }
}

int sample_action(const net::ForwardTrace& trace, Rng& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (int i = 0; i < net::kActionDim; ++i) {
        cum += trace.probs[static_cast<size_t>(i)];
        if (u < cum) return i;
    }
    return net::kActionDim - 1;
}

int greedy_action(const net::ForwardTrace& trace) {
    int best = 0;
    for (int i = 1; i < net::kActionDim; ++i)
        if (trace.probs[static_cast<size_t>(i)] > trace.probs[static_cast<size_t>(best)]) best = i;
    return best;
}

net::PolicyParams init_policy(uint64_t global_seed) {
    Rng rng(mix_seed(global_seed, kStreamInit, 0));
    return net::init_params(rng);
}

EnvWorker::EnvWorker(const env::EpisodeConfig& episode, const env::RewardConfig& reward,
                     const sfm::SfmParams& sfm, uint64_t global_seed, int worker_id)
    : env_(episode, reward, sfm),
      action_rng_(mix_seed(global_seed, kStreamAction + static_cast<uint64_t>(worker_id), 0)),
      global_seed_(global_seed),
      worker_id_(worker_id) {}

std::vector<Experience> EnvWorker::run_window(const net::PolicyParams& params, int window,
                                              double gamma, double lambda) {
    std::vector<Experience> out;
    out.reserve(static_cast<size_t>(window));
    for (int t = 0; t < window; ++t) {
        if (needs_reset_) {
            ++episode_counter_;
            env_.reset(mix_seed(global_seed_, static_cast<uint64_t>(worker_id_),
                                static_cast<uint64_t>(episode_counter_)));
            episode_return_ = 0.0;
            needs_reset_ = false;
        }
        Experience exp;
        exp.obs = env_.observation();
        const net::ForwardTrace trace = net::forward(params, exp.obs);
        exp.action = sample_action(trace, action_rng_);
        exp.logp = std::log(trace.probs[static_cast<size_t>(exp.action)]);
        exp.value = trace.value;
        const env::StepInfo info = env_.step(exp.action);
        exp.reward = info.reward;
        exp.done = info.outcome == env::Outcome::running ? 0.0 : 1.0;
        episode_return_ += info.reward;
        if (exp.done != 0.0) {
            completed_.push_back(episode_return_);
            needs_reset_ = true;
        }
        out.push_back(std::move(exp));
    }
    double bootstrap = 0.0;
    if (!needs_reset_) bootstrap = net::forward(params, env_.observation()).value;

    const size_t n = out.size();
    std::vector<double> rewards(n), values(n), dones(n), advantages(n), returns(n);
    for (size_t i = 0; i < n; ++i) {
        rewards[i] = out[i].reward;
        values[i] = out[i].value;
        dones[i] = out[i].done;
    }
    compute_gae(rewards, values, dones, bootstrap, gamma, lambda, advantages, returns);
    for (size_t i = 0; i < n; ++i) {
        out[i].advantage = advantages[i];
        out[i].ret = returns[i];
    }
    return out;
}

std::vector<double> EnvWorker::drain_completed() {
    std::vector<double> out;
    out.swap(completed_);
    return out;
}

Trainer::Trainer(const env::EpisodeConfig& episode, const env::RewardConfig& reward,
                 const sfm::SfmParams& sfm, const PpoConfig& cfg, uint64_t seed, int threads)
    : cfg_(cfg), seed_(seed), pool_(ThreadPool::resolve(threads)) {
    cfg_.validate();
    workers_.reserve(static_cast<size_t>(cfg_.windows_per_batch));
    for (int w = 0; w < cfg_.windows_per_batch; ++w)
        workers_.emplace_back(episode, reward, sfm, seed, w);
}

RolloutBatch Trainer::collect(const net::PolicyParams& params) {
    const int n_workers = static_cast<int>(workers_.size());
    std::vector<std::vector<Experience>> slots(static_cast<size_t>(n_workers));
    pool_.parallel_for(n_workers, [&](int w) {
        slots[static_cast<size_t>(w)] = workers_[static_cast<size_t>(w)].run_window(
            params, cfg_.window, cfg_.gamma, cfg_.gae_lambda);
    });
    RolloutBatch batch;
    batch.experiences.reserve(static_cast<size_t>(cfg_.batch_size()));
    for (int w = 0; w < n_workers; ++w) {
        for (Experience& e : slots[static_cast<size_t>(w)])
            batch.experiences.push_back(std::move(e));
        for (double r : workers_[static_cast<size_t>(w)].drain_completed())
            batch.episode_rewards.push_back(r);
    }
    batch.env_steps = static_cast<long>(batch.experiences.size());
    return batch;
}

LossStats Trainer::update(net::PolicyParams& params, RolloutBatch& batch, net::AdamState& adam) {
    const size_t total = batch.experiences.size();
    if (total != static_cast<size_t>(cfg_.batch_size()))
        throw std::logic_error("ppo update: incomplete batch");

    // advantages are normalized once per batch
    double adv_mean = 0.0;
    for (const Experience& e : batch.experiences) adv_mean += e.advantage;
    adv_mean /= static_cast<double>(total);
    double adv_var = 0.0;
    for (const Experience& e : batch.experiences) {
        const double d = e.advantage - adv_mean;
        adv_var += d * d;
    }
    const double adv_std = std::sqrt(adv_var / static_cast<double>(total));
    const double denom = std::max(adv_std, 1e-8);
    for (Experience& e : batch.experiences) e.advantage = (e.advantage - adv_mean) / denom;

    Rng shuffle_rng(mix_seed(seed_, kStreamUpdate, static_cast<uint64_t>(iteration_)));
    std::vector<int> order(total);
    std::iota(order.begin(), order.end(), 0);

    const int mb_size = cfg_.batch_size() / cfg_.minibatches;
    const int n_chunks = (mb_size + kGradChunk - 1) / kGradChunk;
    const size_t n_params = net::policy_layout().total();

    std::vector<std::vector<double>> chunk_grads(static_cast<size_t>(n_chunks));
    std::vector<LossStats> chunk_stats(static_cast<size_t>(n_chunks));
    for (auto& g : chunk_grads) g.assign(n_params, 0.0);
    std::vector<double> grad(n_params, 0.0);

    LossStats totals;
    int update_count = 0;

    for (int epoch = 0; epoch < cfg_.epochs_per_batch; ++epoch) {
        // Fisher-Yates
        for (size_t i = total - 1; i > 0; --i) {
            const size_t j = static_cast<size_t>(shuffle_rng.uniform_int(static_cast<int>(i) + 1));
            std::swap(order[i], order[j]);
        }
        for (int mb = 0; mb < cfg_.minibatches; ++mb) {
            const int base = mb * mb_size;
            for (auto& g : chunk_grads) std::fill(g.begin(), g.end(), 0.0);
            for (auto& s : chunk_stats) s = LossStats{};

            pool_.parallel_for(n_chunks, [&](int chunk) {
                std::vector<double>& cgrad = chunk_grads[static_cast<size_t>(chunk)];
                LossStats& cstat = chunk_stats[static_cast<size_t>(chunk)];
                double grad_logits[net::kActionDim];
                const int lo = chunk * kGradChunk;
                const int hi = std::min(mb_size, lo + kGradChunk);
                for (int k = lo; k < hi; ++k) {
                    const Experience& e =
                        batch.experiences[static_cast<size_t>(order[static_cast<size_t>(base + k)])];
                    const net::ForwardTrace trace = net::forward(params, e.obs);
                    const double logp_new = std::log(trace.probs[static_cast<size_t>(e.action)]);
                    const double ratio = std::exp(logp_new - e.logp);
                    const double clipped =
                        std::clamp(ratio, 1.0 - cfg_.clip_epsilon, 1.0 + cfg_.clip_epsilon);
                    const double s1 = ratio * e.advantage;
                    const double s2 = clipped * e.advantage;
                    const double scale = 1.0 / static_cast<double>(mb_size);

                    double entropy = 0.0;
                    for (double p : trace.probs)
                        if (p > 0.0) entropy -= p * std::log(p);

                    for (int a = 0; a < net::kActionDim; ++a) {
                        const double p = trace.probs[static_cast<size_t>(a)];
                        double gl = 0.0;
                        if (s1 <= s2) {
                            const double onehot = a == e.action ? 1.0 : 0.0;
                            gl -= e.advantage * ratio * (onehot - p);
                        }
                        if (p > 0.0)
                            gl += cfg_.entropy_coeff * p * (std::log(p) + entropy);
                        grad_logits[a] = gl * scale;
                    }
                    const double grad_value =
                        2.0 * cfg_.value_coeff * (trace.value - e.ret) * scale;
                    net::backward(params, trace, grad_logits, grad_value, cgrad);

                    cstat.policy += -std::min(s1, s2);
                    cstat.value += (trace.value - e.ret) * (trace.value - e.ret);
                    cstat.entropy += entropy;
                    cstat.clip_fraction += std::abs(ratio - 1.0) > cfg_.clip_epsilon ? 1.0 : 0.0;
                }
            });

            std::fill(grad.begin(), grad.end(), 0.0);
            for (const auto& cgrad : chunk_grads)
                for (size_t i = 0; i < n_params; ++i) grad[i] += cgrad[i];

            LossStats mb_stat;
            for (const LossStats& s : chunk_stats) {
                mb_stat.policy += s.policy;
                mb_stat.value += s.value;
                mb_stat.entropy += s.entropy;
                mb_stat.clip_fraction += s.clip_fraction;
            }
            const double inv = 1.0 / static_cast<double>(mb_size);
            mb_stat.policy *= inv;
            mb_stat.value *= inv;
            mb_stat.entropy *= inv;
            mb_stat.clip_fraction *= inv;
            const double loss = mb_stat.policy + cfg_.value_coeff * mb_stat.value -
                                cfg_.entropy_coeff * mb_stat.entropy;
            if (!std::isfinite(loss))
                throw std::runtime_error(
                    "ppo update: non-finite loss at iteration " + std::to_string(iteration_) +
                    " (policy " + std::to_string(mb_stat.policy) + ", value " +
                    std::to_string(mb_stat.value) + ", entropy " +
                    std::to_string(mb_stat.entropy) + ")");

            double norm_sq = 0.0;
            for (double g : grad) norm_sq += g * g;
            const double norm = std::sqrt(norm_sq);
            if (norm > cfg_.grad_clip_norm) {
                const double shrink = cfg_.grad_clip_norm / norm;
                for (double& g : grad) g *= shrink;
            }
            net::adam_step(params, grad, adam, cfg_.lr, cfg_.adam_eps);

            totals.policy += mb_stat.policy;
            totals.value += mb_stat.value;
            totals.entropy += mb_stat.entropy;
            totals.clip_fraction += mb_stat.clip_fraction;
            ++update_count;
        }
    }
    const double inv = 1.0 / static_cast<double>(update_count);
    totals.policy *= inv;
    totals.value *= inv;
    totals.entropy *= inv;
    totals.clip_fraction *= inv;
    return totals;
}

void Trainer::run(net::PolicyParams& params, net::AdamState& adam, int count,
                  const IterationCallback& on_iteration) {
    for (int k = 0; k < count; ++k) {
        RolloutBatch batch = collect(params);
        total_env_steps_ += batch.env_steps;
        const LossStats loss = update(params, batch, adam);
        ++iteration_;

        IterationRecord rec;
        rec.iteration = iteration_;
        rec.env_steps = total_env_steps_;
        rec.episodes = static_cast<int>(batch.episode_rewards.size());
        if (!batch.episode_rewards.empty()) {
            double sum = 0.0;
            double lo = batch.episode_rewards.front();
            double hi = lo;
            for (double r : batch.episode_rewards) {
                sum += r;
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
            rec.mean_reward = sum / static_cast<double>(batch.episode_rewards.size());
            rec.min_reward = lo;
            rec.max_reward = hi;
        }
        rec.loss = loss;
        if (on_iteration) on_iteration(rec, params, adam);
    }
}

}  // namespace groupnav::ppo
