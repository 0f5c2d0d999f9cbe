#include "groupnav/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace groupnav::net {

namespace {

constexpr int kEmbedHidden = 150;
constexpr int kEmbedOut = 100;
constexpr int kPairHidden = 100;
constexpr int kPairOut = 50;
constexpr int kScoreIn = 2 * kEmbedOut;
constexpr int kScoreHidden1 = 100;
constexpr int kScoreHidden2 = 100;
constexpr int kJointDim = kRobotDim + kPairOut;
constexpr int kTrunk1 = 150;
constexpr int kTrunk2 = 100;
constexpr int kTrunk3 = 100;

// weights are stored input-major: w[j * out + i] couples input j to output i
void dense(const double* w, const double* b, const double* x, int in, int out, double* y) {
    std::copy(b, b + out, y);
    for (int j = 0; j < in; ++j) {
        const double xj = x[j];
        if (xj == 0.0) continue;
        const double* row = w + static_cast<size_t>(j) * out;
        for (int i = 0; i < out; ++i) y[i] += xj * row[i];
    }
}

void relu(double* y, int n) {
    for (int i = 0; i < n; ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
}

void relu_backward(const double* post, double* dy, int n) {
    for (int i = 0; i < n; ++i)
        if (post[i] <= 0.0) dy[i] = 0.0;
}

// accumulates into dw/db and, when dx is given, into dx
void dense_backward(const double* w, const double* x, const double* dy, int in, int out,
                    double* dw, double* db, double* dx) {
    for (int i = 0; i < out; ++i) db[i] += dy[i];
    for (int j = 0; j < in; ++j) {
        const double xj = x[j];
        const double* row = w + static_cast<size_t>(j) * out;
        double* drow = dw + static_cast<size_t>(j) * out;
        if (dx) {
            double acc = 0.0;
            for (int i = 0; i < out; ++i) {
                drow[i] += xj * dy[i];
                acc += row[i] * dy[i];
            }
            dx[j] += acc;
        } else if (xj != 0.0) {
            for (int i = 0; i < out; ++i) drow[i] += xj * dy[i];
        }
    }
}

void softmax(const double* z, int n, double* p) {
    double mx = z[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, z[i]);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        p[i] = std::exp(z[i] - mx);
        sum += p[i];
    }
    for (int i = 0; i < n; ++i) p[i] /= sum;
}

struct Tensors {
    const TensorSpec& ew0;
    const TensorSpec& eb0;
    const TensorSpec& ew1;
    const TensorSpec& eb1;
    const TensorSpec& pw0;
    const TensorSpec& pb0;
    const TensorSpec& pw1;
    const TensorSpec& pb1;
    const TensorSpec& sw0;
    const TensorSpec& sb0;
    const TensorSpec& sw1;
    const TensorSpec& sb1;
    const TensorSpec& sw2;
    const TensorSpec& sb2;
    const TensorSpec& tw0;
    const TensorSpec& tb0;
    const TensorSpec& tw1;
    const TensorSpec& tb1;
    const TensorSpec& tw2;
    const TensorSpec& tb2;
    const TensorSpec& aw;
    const TensorSpec& ab;
    const TensorSpec& vw;
    const TensorSpec& vb;
};

const Tensors& tensors() {
    static const Tensors t{
        policy_layout().find("embed.w0"),  policy_layout().find("embed.b0"),
        policy_layout().find("embed.w1"),  policy_layout().find("embed.b1"),
        policy_layout().find("pair.w0"),   policy_layout().find("pair.b0"),
        policy_layout().find("pair.w1"),   policy_layout().find("pair.b1"),
        policy_layout().find("score.w0"),  policy_layout().find("score.b0"),
        policy_layout().find("score.w1"),  policy_layout().find("score.b1"),
        policy_layout().find("score.w2"),  policy_layout().find("score.b2"),
        policy_layout().find("trunk.w0"),  policy_layout().find("trunk.b0"),
        policy_layout().find("trunk.w1"),  policy_layout().find("trunk.b1"),
        policy_layout().find("trunk.w2"),  policy_layout().find("trunk.b2"),
        policy_layout().find("action.w"),  policy_layout().find("action.b"),
        policy_layout().find("value.w"),   policy_layout().find("value.b"),
    };
    return t;
}

}  // namespace

PolicyLayout::PolicyLayout() {
    auto add = [this](const char* name, int rows, int cols, bool is_bias) {
        TensorSpec spec{name, rows, cols, is_bias, total_};
        total_ += spec.size();
        tensors_.push_back(std::move(spec));
    };
    add("embed.w0", kRobotDim + kPedDim, kEmbedHidden, false);
    add("embed.b0", 1, kEmbedHidden, true);
    add("embed.w1", kEmbedHidden, kEmbedOut, false);
    add("embed.b1", 1, kEmbedOut, true);
    add("pair.w0", kEmbedOut, kPairHidden, false);
    add("pair.b0", 1, kPairHidden, true);
    add("pair.w1", kPairHidden, kPairOut, false);
    add("pair.b1", 1, kPairOut, true);
    add("score.w0", kScoreIn, kScoreHidden1, false);
    add("score.b0", 1, kScoreHidden1, true);
    add("score.w1", kScoreHidden1, kScoreHidden2, false);
    add("score.b1", 1, kScoreHidden2, true);
    add("score.w2", kScoreHidden2, 1, false);
    add("score.b2", 1, 1, true);
    add("trunk.w0", kJointDim, kTrunk1, false);
    add("trunk.b0", 1, kTrunk1, true);
    add("trunk.w1", kTrunk1, kTrunk2, false);
    add("trunk.b1", 1, kTrunk2, true);
    add("trunk.w2", kTrunk2, kTrunk3, false);
    add("trunk.b2", 1, kTrunk3, true);
    add("action.w", kTrunk3, kActionDim, false);
    add("action.b", 1, kActionDim, true);
    add("value.w", kTrunk3, 1, false);
    add("value.b", 1, 1, true);
}

const TensorSpec& PolicyLayout::find(const std::string& name) const {
    for (const TensorSpec& t : tensors_)
        if (t.name == name) return t;
    throw std::invalid_argument("unknown tensor: " + name);
}

const PolicyLayout& policy_layout() {
    static const PolicyLayout layout;
    return layout;
}

PolicyParams init_params(Rng& rng) {
    PolicyParams params;
    for (const TensorSpec& t : policy_layout().tensors()) {
        double* data = params.tensor(t);
        if (t.is_bias) continue;
        const double limit = std::sqrt(6.0 / (t.rows + t.cols));
        for (size_t i = 0; i < t.size(); ++i) data[i] = rng.uniform(-limit, limit);
    }
    return params;
}

double wrap_angle(double a) {
    constexpr double pi = std::numbers::pi;
    a = std::fmod(a, 2.0 * pi);
    if (a <= -pi)
        a += 2.0 * pi;
    else if (a > pi)
        a -= 2.0 * pi;
    return a;
}

FrameInput to_robot_frame(const env::Observation& obs) {
    FrameInput f;
    const env::RobotState& r = obs.robot;
    const geom::Vec2 to_goal = r.goal - r.position;
    const double dg = to_goal.norm();
    const double phi = dg > 0.0 ? std::atan2(to_goal.y, to_goal.x) : 0.0;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    auto rotate = [c, s](const geom::Vec2& v) {
        return geom::Vec2{v.x * c + v.y * s, -v.x * s + v.y * c};
    };
    const geom::Vec2 rv = rotate(r.velocity);
    f.robot = {0.0, 0.0, rv.x, rv.y, r.radius, dg, 0.0, r.v_pref, wrap_angle(r.theta - phi)};
    f.pedestrians.reserve(obs.pedestrians.size());
    for (const env::PedestrianView& p : obs.pedestrians) {
        const geom::Vec2 rp = rotate(p.position - r.position);
        const geom::Vec2 rpv = rotate(p.velocity);
        f.pedestrians.push_back({rp.x, rp.y, rpv.x, rpv.y, p.radius});
    }
    return f;
}

ForwardTrace forward(const PolicyParams& params, const env::Observation& obs) {
    if (obs.pedestrians.empty())
        throw std::logic_error("policy forward: needs at least one pedestrian");
    const Tensors& T = tensors();
    ForwardTrace tr;
    tr.input = to_robot_frame(obs);
    const int n = static_cast<int>(tr.input.pedestrians.size());
    tr.n = n;

    tr.embed_hidden.resize(static_cast<size_t>(n) * kEmbedHidden);
    tr.embed.resize(static_cast<size_t>(n) * kEmbedOut);
    tr.embed_mean.assign(kEmbedOut, 0.0);

    double x[kRobotDim + kPedDim];
    std::copy(tr.input.robot.begin(), tr.input.robot.end(), x);
    for (int i = 0; i < n; ++i) {
        std::copy(tr.input.pedestrians[static_cast<size_t>(i)].begin(),
                  tr.input.pedestrians[static_cast<size_t>(i)].end(), x + kRobotDim);
        double* hidden = tr.embed_hidden.data() + static_cast<size_t>(i) * kEmbedHidden;
        double* e = tr.embed.data() + static_cast<size_t>(i) * kEmbedOut;
        dense(params.tensor(T.ew0), params.tensor(T.eb0), x, kRobotDim + kPedDim, kEmbedHidden,
              hidden);
        relu(hidden, kEmbedHidden);
        dense(params.tensor(T.ew1), params.tensor(T.eb1), hidden, kEmbedHidden, kEmbedOut, e);
        relu(e, kEmbedOut);
        for (int k = 0; k < kEmbedOut; ++k) tr.embed_mean[static_cast<size_t>(k)] += e[k];
    }
    for (double& v : tr.embed_mean) v /= n;

    tr.score_hidden1.resize(static_cast<size_t>(n) * kScoreHidden1);
    tr.score_hidden2.resize(static_cast<size_t>(n) * kScoreHidden2);
    tr.scores.resize(static_cast<size_t>(n));
    double cat[kScoreIn];
    std::copy(tr.embed_mean.begin(), tr.embed_mean.end(), cat + kEmbedOut);
    for (int i = 0; i < n; ++i) {
        std::copy(tr.embed.data() + static_cast<size_t>(i) * kEmbedOut,
                  tr.embed.data() + static_cast<size_t>(i + 1) * kEmbedOut, cat);
        double* s1 = tr.score_hidden1.data() + static_cast<size_t>(i) * kScoreHidden1;
        double* s2 = tr.score_hidden2.data() + static_cast<size_t>(i) * kScoreHidden2;
        dense(params.tensor(T.sw0), params.tensor(T.sb0), cat, kScoreIn, kScoreHidden1, s1);
        relu(s1, kScoreHidden1);
        dense(params.tensor(T.sw1), params.tensor(T.sb1), s1, kScoreHidden1, kScoreHidden2, s2);
        relu(s2, kScoreHidden2);
        dense(params.tensor(T.sw2), params.tensor(T.sb2), s2, kScoreHidden2, 1,
              &tr.scores[static_cast<size_t>(i)]);
    }
    tr.alpha.resize(static_cast<size_t>(n));
    softmax(tr.scores.data(), n, tr.alpha.data());

    tr.pair_hidden.resize(static_cast<size_t>(n) * kPairHidden);
    tr.pair.resize(static_cast<size_t>(n) * kPairOut);
    tr.crowd.assign(kPairOut, 0.0);
    for (int i = 0; i < n; ++i) {
        const double* e = tr.embed.data() + static_cast<size_t>(i) * kEmbedOut;
        double* ph = tr.pair_hidden.data() + static_cast<size_t>(i) * kPairHidden;
        double* h = tr.pair.data() + static_cast<size_t>(i) * kPairOut;
        dense(params.tensor(T.pw0), params.tensor(T.pb0), e, kEmbedOut, kPairHidden, ph);
        relu(ph, kPairHidden);
        dense(params.tensor(T.pw1), params.tensor(T.pb1), ph, kPairHidden, kPairOut, h);
        const double a = tr.alpha[static_cast<size_t>(i)];
        for (int k = 0; k < kPairOut; ++k) tr.crowd[static_cast<size_t>(k)] += a * h[k];
    }

    tr.joint.resize(kJointDim);
    std::copy(tr.input.robot.begin(), tr.input.robot.end(), tr.joint.begin());
    std::copy(tr.crowd.begin(), tr.crowd.end(), tr.joint.begin() + kRobotDim);
    tr.trunk1.resize(kTrunk1);
    tr.trunk2.resize(kTrunk2);
    tr.trunk3.resize(kTrunk3);
    dense(params.tensor(T.tw0), params.tensor(T.tb0), tr.joint.data(), kJointDim, kTrunk1,
          tr.trunk1.data());
    relu(tr.trunk1.data(), kTrunk1);
    dense(params.tensor(T.tw1), params.tensor(T.tb1), tr.trunk1.data(), kTrunk1, kTrunk2,
          tr.trunk2.data());
    relu(tr.trunk2.data(), kTrunk2);
    dense(params.tensor(T.tw2), params.tensor(T.tb2), tr.trunk2.data(), kTrunk2, kTrunk3,
          tr.trunk3.data());
    relu(tr.trunk3.data(), kTrunk3);

    dense(params.tensor(T.aw), params.tensor(T.ab), tr.trunk3.data(), kTrunk3, kActionDim,
          tr.logits.data());
    softmax(tr.logits.data(), kActionDim, tr.probs.data());
    dense(params.tensor(T.vw), params.tensor(T.vb), tr.trunk3.data(), kTrunk3, 1, &tr.value);
    return tr;
}

void backward(const PolicyParams& params, const ForwardTrace& tr, const double* grad_logits,
              double grad_value, std::vector<double>& grad) {
    if (grad.size() != policy_layout().total())
        throw std::logic_error("policy backward: gradient buffer size mismatch");
    const Tensors& T = tensors();
    const int n = tr.n;
    auto g = [&grad](const TensorSpec& spec) { return grad.data() + spec.offset; };

    std::vector<double> d_trunk3(kTrunk3, 0.0);
    dense_backward(params.tensor(T.aw), tr.trunk3.data(), grad_logits, kTrunk3, kActionDim,
                   g(T.aw), g(T.ab), d_trunk3.data());
    dense_backward(params.tensor(T.vw), tr.trunk3.data(), &grad_value, kTrunk3, 1, g(T.vw),
                   g(T.vb), d_trunk3.data());
    relu_backward(tr.trunk3.data(), d_trunk3.data(), kTrunk3);

    std::vector<double> d_trunk2(kTrunk2, 0.0);
    dense_backward(params.tensor(T.tw2), tr.trunk2.data(), d_trunk3.data(), kTrunk2, kTrunk3,
                   g(T.tw2), g(T.tb2), d_trunk2.data());
    relu_backward(tr.trunk2.data(), d_trunk2.data(), kTrunk2);

    std::vector<double> d_trunk1(kTrunk1, 0.0);
    dense_backward(params.tensor(T.tw1), tr.trunk1.data(), d_trunk2.data(), kTrunk1, kTrunk2,
                   g(T.tw1), g(T.tb1), d_trunk1.data());
    relu_backward(tr.trunk1.data(), d_trunk1.data(), kTrunk1);

    std::vector<double> d_joint(kJointDim, 0.0);
    dense_backward(params.tensor(T.tw0), tr.joint.data(), d_trunk1.data(), kJointDim, kTrunk1,
                   g(T.tw0), g(T.tb0), d_joint.data());
    const double* d_crowd = d_joint.data() + kRobotDim;

    // crowd = sum_i alpha_i * h_i, alpha = softmax(scores)
    std::vector<double> d_alpha(static_cast<size_t>(n), 0.0);
    double weighted = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* h = tr.pair.data() + static_cast<size_t>(i) * kPairOut;
        double acc = 0.0;
        for (int k = 0; k < kPairOut; ++k) acc += h[k] * d_crowd[k];
        d_alpha[static_cast<size_t>(i)] = acc;
        weighted += tr.alpha[static_cast<size_t>(i)] * acc;
    }

    std::vector<double> d_embed(static_cast<size_t>(n) * kEmbedOut, 0.0);
    std::vector<double> d_embed_mean(kEmbedOut, 0.0);
    std::vector<double> d_pair(kPairOut);
    std::vector<double> d_pair_hidden(kPairHidden);
    std::vector<double> d_s2(kScoreHidden2);
    std::vector<double> d_s1(kScoreHidden1);
    std::vector<double> d_cat(kScoreIn);
    double cat[kScoreIn];
    std::copy(tr.embed_mean.begin(), tr.embed_mean.end(), cat + kEmbedOut);

    for (int i = 0; i < n; ++i) {
        const double a = tr.alpha[static_cast<size_t>(i)];
        const double* ph = tr.pair_hidden.data() + static_cast<size_t>(i) * kPairHidden;
        const double* e = tr.embed.data() + static_cast<size_t>(i) * kEmbedOut;
        double* d_e = d_embed.data() + static_cast<size_t>(i) * kEmbedOut;

        for (int k = 0; k < kPairOut; ++k) d_pair[static_cast<size_t>(k)] = a * d_crowd[k];
        std::fill(d_pair_hidden.begin(), d_pair_hidden.end(), 0.0);
        dense_backward(params.tensor(T.pw1), ph, d_pair.data(), kPairHidden, kPairOut, g(T.pw1),
                       g(T.pb1), d_pair_hidden.data());
        relu_backward(ph, d_pair_hidden.data(), kPairHidden);
        dense_backward(params.tensor(T.pw0), e, d_pair_hidden.data(), kEmbedOut, kPairHidden,
                       g(T.pw0), g(T.pb0), d_e);

        const double d_score =
            a * (d_alpha[static_cast<size_t>(i)] - weighted);
        const double* s1 = tr.score_hidden1.data() + static_cast<size_t>(i) * kScoreHidden1;
        const double* s2 = tr.score_hidden2.data() + static_cast<size_t>(i) * kScoreHidden2;
        std::fill(d_s2.begin(), d_s2.end(), 0.0);
        dense_backward(params.tensor(T.sw2), s2, &d_score, kScoreHidden2, 1, g(T.sw2), g(T.sb2),
                       d_s2.data());
        relu_backward(s2, d_s2.data(), kScoreHidden2);
        std::fill(d_s1.begin(), d_s1.end(), 0.0);
        dense_backward(params.tensor(T.sw1), s1, d_s2.data(), kScoreHidden1, kScoreHidden2,
                       g(T.sw1), g(T.sb1), d_s1.data());
        relu_backward(s1, d_s1.data(), kScoreHidden1);
        std::copy(e, e + kEmbedOut, cat);
        std::fill(d_cat.begin(), d_cat.end(), 0.0);
        dense_backward(params.tensor(T.sw0), cat, d_s1.data(), kScoreIn, kScoreHidden1, g(T.sw0),
                       g(T.sb0), d_cat.data());
        for (int k = 0; k < kEmbedOut; ++k) {
            d_e[k] += d_cat[static_cast<size_t>(k)];
            d_embed_mean[static_cast<size_t>(k)] += d_cat[static_cast<size_t>(kEmbedOut + k)];
        }
    }

    // mean pool spreads its gradient evenly
    const double inv_n = 1.0 / n;
    std::vector<double> d_embed_hidden(kEmbedHidden);
    double x[kRobotDim + kPedDim];
    std::copy(tr.input.robot.begin(), tr.input.robot.end(), x);
    for (int i = 0; i < n; ++i) {
        double* d_e = d_embed.data() + static_cast<size_t>(i) * kEmbedOut;
        for (int k = 0; k < kEmbedOut; ++k) d_e[k] += d_embed_mean[static_cast<size_t>(k)] * inv_n;
        const double* e = tr.embed.data() + static_cast<size_t>(i) * kEmbedOut;
        relu_backward(e, d_e, kEmbedOut);
        const double* hidden = tr.embed_hidden.data() + static_cast<size_t>(i) * kEmbedHidden;
        std::fill(d_embed_hidden.begin(), d_embed_hidden.end(), 0.0);
        dense_backward(params.tensor(T.ew1), hidden, d_e, kEmbedHidden, kEmbedOut, g(T.ew1),
                       g(T.eb1), d_embed_hidden.data());
        relu_backward(hidden, d_embed_hidden.data(), kEmbedHidden);
        std::copy(tr.input.pedestrians[static_cast<size_t>(i)].begin(),
                  tr.input.pedestrians[static_cast<size_t>(i)].end(), x + kRobotDim);
        dense_backward(params.tensor(T.ew0), x, d_embed_hidden.data(), kRobotDim + kPedDim,
                       kEmbedHidden, g(T.ew0), g(T.eb0), nullptr);
    }
}

void adam_step(PolicyParams& params, const std::vector<double>& grad, AdamState& state,
               double lr, double eps, double beta1, double beta2) {
    const size_t n = params.data.size();
    if (grad.size() != n) throw std::logic_error("adam: gradient size mismatch");
    if (state.m.size() != n) {
        state.m.assign(n, 0.0);
        state.v.assign(n, 0.0);
        state.t = 0;
    }
    state.t += 1;
    const double correct1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double correct2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < n; ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / correct1;
        const double vhat = state.v[i] / correct2;
        params.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace groupnav::net
