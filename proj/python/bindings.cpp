#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <utility>
#include <vector>

#include "groupnav/checkpoint.hpp"
#include "groupnav/crowd_env.hpp"
#include "groupnav/geometry.hpp"
#include "groupnav/neural.hpp"
#include "groupnav/ppo.hpp"
#include "groupnav/rng.hpp"
#include "groupnav/stats.hpp"

namespace py = pybind11;
using namespace groupnav;

namespace {

using Point = std::pair<double, double>;

Point as_point(const geom::Vec2& v) { return {v.x, v.y}; }

struct Policy {
    net::PolicyParams params;

    static Policy init(uint64_t seed) { return Policy{ppo::init_policy(seed)}; }
    static Policy load(const std::string& path) {
        return Policy{net::load_checkpoint(path).params};
    }
    void save(const std::string& path) const {
        net::save_checkpoint(path, params, net::AdamState{});
    }
    int act(const env::Observation& obs) const {
        return ppo::greedy_action(net::forward(params, obs));
    }
    std::vector<double> probs(const env::Observation& obs) const {
        const net::ForwardTrace trace = net::forward(params, obs);
        return {trace.probs.begin(), trace.probs.end()};
    }
    double value(const env::Observation& obs) const {
        return net::forward(params, obs).value;
    }
    size_t n_params() const { return params.data.size(); }
};

env::CrowdEnv make_env(int n_pedestrians, bool single_group, bool group_term, double timeout,
                       double dt) {
    env::EpisodeConfig episode;
    episode.n_pedestrians = n_pedestrians;
    episode.single_group = single_group;
    episode.timeout = timeout;
    episode.dt = dt;
    env::RewardConfig reward;
    reward.group_term_enabled = group_term;
    return env::CrowdEnv(episode, reward, sfm::SfmParams{});
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "group-aware crowd navigation core";

    m.attr("n_actions") = env::ActionTable::kCount;

    m.def(
        "convex_hull",
        [](const std::vector<Point>& pts) {
            std::vector<geom::Vec2> v;
            v.reserve(pts.size());
            for (const Point& p : pts) v.push_back({p.first, p.second});
            const geom::Polygon hull = geom::convex_hull(v);
            std::vector<Point> out;
            out.reserve(hull.vertices.size());
            for (const geom::Vec2& q : hull.vertices) out.push_back(as_point(q));
            return out;
        },
        py::arg("points"), "counterclockwise convex hull of a point set");

    m.def(
        "action_velocity", [](int index) { return as_point(env::action_from_index(index)); },
        py::arg("index"), "velocity command for a discrete action index");

    m.def("mix_seed", &mix_seed, py::arg("base"), py::arg("a") = 0, py::arg("b") = 0,
          "derive an independent seed stream");

    m.def(
        "pooled_t_test",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            const stats::TTestResult r = stats::pooled_t_test(a, b);
            py::dict d;
            d["t"] = r.t;
            d["df"] = r.df;
            d["p"] = r.p;
            d["valid"] = r.valid;
            return d;
        },
        py::arg("a"), py::arg("b"), "two-sample pooled-variance t-test");

    py::class_<env::Observation>(m, "Observation")
        .def_property_readonly("robot_position",
                               [](const env::Observation& o) { return as_point(o.robot.position); })
        .def_property_readonly("robot_velocity",
                               [](const env::Observation& o) { return as_point(o.robot.velocity); })
        .def_property_readonly("robot_goal",
                               [](const env::Observation& o) { return as_point(o.robot.goal); })
        .def_property_readonly("robot_radius",
                               [](const env::Observation& o) { return o.robot.radius; })
        .def_property_readonly("robot_v_pref",
                               [](const env::Observation& o) { return o.robot.v_pref; })
        .def_property_readonly("robot_theta",
                               [](const env::Observation& o) { return o.robot.theta; })
        .def_property_readonly("pedestrians", [](const env::Observation& o) {
            std::vector<std::tuple<double, double, double, double, double>> out;
            out.reserve(o.pedestrians.size());
            for (const env::PedestrianView& p : o.pedestrians)
                out.emplace_back(p.position.x, p.position.y, p.velocity.x, p.velocity.y, p.radius);
            return out;
        });

    m.def(
        "robot_frame",
        [](const env::Observation& obs) {
            const net::FrameInput f = net::to_robot_frame(obs);
            return std::make_pair(f.robot, f.pedestrians);
        },
        py::arg("observation"),
        "observation features in the goal-aligned robot frame: (robot9, [ped5...])");

    py::class_<env::CrowdEnv>(m, "CrowdEnv")
        .def(py::init(&make_env), py::arg("n_pedestrians") = 5, py::arg("single_group") = false,
             py::arg("group_term") = true, py::arg("timeout") = 25.0, py::arg("dt") = 0.25)
        .def("reset", &env::CrowdEnv::reset, py::arg("seed"))
        .def(
            "step",
            [](env::CrowdEnv& e, int action) {
                const env::StepInfo info = e.step(action);
                py::dict breakdown;
                breakdown["progress"] = info.breakdown.progress;
                breakdown["goal"] = info.breakdown.goal;
                breakdown["discomfort"] = info.breakdown.discomfort;
                breakdown["collision"] = info.breakdown.collision;
                breakdown["group"] = info.breakdown.group;
                return py::make_tuple(info.reward, info.outcome != env::Outcome::running,
                                      env::outcome_name(info.outcome), breakdown);
            },
            py::arg("action"), "returns (reward, done, outcome, breakdown)")
        .def("observation", [](const env::CrowdEnv& e) { return e.observation(); })
        .def("groups", [](const env::CrowdEnv& e) { return e.layout().assignment; })
        .def_property_readonly("n_groups",
                               [](const env::CrowdEnv& e) { return e.layout().n_groups; })
        .def_property_readonly("outcome",
                               [](const env::CrowdEnv& e) { return env::outcome_name(e.outcome()); })
        .def_property_readonly("step_count", &env::CrowdEnv::step_count)
        .def_property_readonly("time", &env::CrowdEnv::time);

    py::class_<Policy>(m, "Policy")
        .def_static("init", &Policy::init, py::arg("seed"))
        .def_static("load", &Policy::load, py::arg("path"))
        .def("save", &Policy::save, py::arg("path"))
        .def("act", &Policy::act, py::arg("observation"), "greedy action index")
        .def("probs", &Policy::probs, py::arg("observation"))
        .def("value", &Policy::value, py::arg("observation"))
        .def_property_readonly("n_params", &Policy::n_params);
}
