#pragma once

#include <array>
#include <string>
#include <vector>

#include "groupnav/crowd_env.hpp"
#include "groupnav/rng.hpp"

namespace groupnav::net {

inline constexpr int kRobotDim = 9;
inline constexpr int kPedDim = 5;
inline constexpr int kActionDim = 81;

struct TensorSpec {
    std::string name;
    int rows = 0;  // fan-in for weights, 1 for biases
    int cols = 0;
    bool is_bias = false;
    size_t offset = 0;
    size_t size() const { return static_cast<size_t>(rows) * static_cast<size_t>(cols); }
};

// Fixed actor-critic architecture: a shared per-pedestrian embedding, an
// attention pool over pedestrians, and a joint trunk feeding the two heads.
class PolicyLayout {
public:
    PolicyLayout();
    const std::vector<TensorSpec>& tensors() const { return tensors_; }
    size_t total() const { return total_; }
    const TensorSpec& find(const std::string& name) const;

private:
    std::vector<TensorSpec> tensors_;
    size_t total_ = 0;
};

const PolicyLayout& policy_layout();

struct PolicyParams {
    std::vector<double> data;
    PolicyParams() : data(policy_layout().total(), 0.0) {}
    double* tensor(const TensorSpec& spec) { return data.data() + spec.offset; }
    const double* tensor(const TensorSpec& spec) const { return data.data() + spec.offset; }
};

PolicyParams init_params(Rng& rng);

// Observation expressed in the frame whose +x axis runs from robot to goal
// and whose origin sits on the robot.
struct FrameInput {
    std::array<double, kRobotDim> robot{};
    std::vector<std::array<double, kPedDim>> pedestrians;
};

FrameInput to_robot_frame(const env::Observation& obs);
double wrap_angle(double a);  // into (-pi, pi]

struct ForwardTrace {
    FrameInput input;
    int n = 0;
    std::vector<double> embed_hidden;   // n x 150, post-ReLU
    std::vector<double> embed;          // n x 100, post-ReLU (e_i)
    std::vector<double> embed_mean;     // 100
    std::vector<double> score_hidden1;  // n x 100, post-ReLU
    std::vector<double> score_hidden2;  // n x 100, post-ReLU
    std::vector<double> scores;         // n
    std::vector<double> alpha;          // n, softmax of scores
    std::vector<double> pair_hidden;    // n x 100, post-ReLU
    std::vector<double> pair;           // n x 50, linear (h_i)
    std::vector<double> crowd;          // 50, sum alpha_i * h_i
    std::vector<double> joint;          // 59
    std::vector<double> trunk1;         // 150, post-ReLU
    std::vector<double> trunk2;         // 100, post-ReLU
    std::vector<double> trunk3;         // 100, post-ReLU
    std::array<double, kActionDim> logits{};
    std::array<double, kActionDim> probs{};
    double value = 0.0;
};

ForwardTrace forward(const PolicyParams& params, const env::Observation& obs);

// Accumulates d(logits . grad_logits + value * grad_value)/dparams into grad,
// which must already be layout-sized.
void backward(const PolicyParams& params, const ForwardTrace& trace,
              const double* grad_logits, double grad_value, std::vector<double>& grad);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long t = 0;
};

void adam_step(PolicyParams& params, const std::vector<double>& grad, AdamState& state,
               double lr, double eps, double beta1 = 0.9, double beta2 = 0.999);

}  // namespace groupnav::net
