#include "groupnav/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "groupnav/checkpoint.hpp"
#include "groupnav/config.hpp"
#include "groupnav/evaluation.hpp"
#include "groupnav/ppo.hpp"
#include "groupnav/svg.hpp"
#include "groupnav/trajectory.hpp"

namespace groupnav::cli {

namespace {

namespace fs = std::filesystem;

cfg::RunConfig resolve_config(const CommonOptions& opts) {
    cfg::RunConfig rc =
        opts.config_path.empty() ? cfg::default_config() : cfg::load_config_file(opts.config_path);
    for (const std::string& o : opts.overrides) cfg::apply_override(rc, o);
    if (opts.seed) rc.seed = *opts.seed;
    if (!opts.out_dir.empty()) rc.out_dir = opts.out_dir;
    cfg::validate(rc);
    return rc;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string curve_line(const ppo::IterationRecord& rec) {
    std::string out = "{\"iteration\":" + std::to_string(rec.iteration);
    out += ",\"env_steps\":" + std::to_string(rec.env_steps);
    out += ",\"episodes\":" + std::to_string(rec.episodes);
    out += ",\"mean_reward\":" + io::format_double(rec.mean_reward);
    out += ",\"min_reward\":" + io::format_double(rec.min_reward);
    out += ",\"max_reward\":" + io::format_double(rec.max_reward);
    out += ",\"policy_loss\":" + io::format_double(rec.loss.policy);
    out += ",\"value_loss\":" + io::format_double(rec.loss.value);
    out += ",\"entropy\":" + io::format_double(rec.loss.entropy);
    out += ",\"clip_fraction\":" + io::format_double(rec.loss.clip_fraction);
    out += "}";
    return out;
}

}  // namespace

int cmd_train(const CommonOptions& opts) {
    const cfg::RunConfig rc = resolve_config(opts);
    fs::create_directories(rc.out_dir);
    write_text_file(fs::path(rc.out_dir) / "resolved.cfg", cfg::serialize_config(rc));

    std::ofstream curve(fs::path(rc.out_dir) / "learning_curve.jsonl");
    if (!curve) throw std::runtime_error("cannot open learning curve file");

    net::PolicyParams params = ppo::init_policy(rc.seed);
    net::AdamState adam;
    ppo::Trainer trainer(rc.episode, rc.reward, rc.sfm, rc.ppo, rc.seed, opts.threads);

    const int interval = rc.ppo.checkpoint_interval;
    trainer.run(params, adam, rc.ppo.iterations,
                [&](const ppo::IterationRecord& rec, const net::PolicyParams& p,
                    const net::AdamState& a) {
                    curve << curve_line(rec) << '\n';
                    curve.flush();
                    std::printf("iter %d/%d  episodes %d  mean_reward %.3f  policy %.4f  value %.4f  entropy %.3f\n",
                                rec.iteration, rc.ppo.iterations, rec.episodes, rec.mean_reward,
                                rec.loss.policy, rec.loss.value, rec.loss.entropy);
                    std::fflush(stdout);
                    if (rec.iteration % interval == 0 && rec.iteration < rc.ppo.iterations) {
                        char name[64];
                        std::snprintf(name, sizeof name, "checkpoint_iter%06d.ckpt",
                                      rec.iteration);
                        net::save_checkpoint((fs::path(rc.out_dir) / name).string(), p, a);
                    }
                });

    net::save_checkpoint((fs::path(rc.out_dir) / "checkpoint_final.ckpt").string(), params, adam);
    std::printf("training done: %d iterations, %ld env steps\n", trainer.iteration(),
                trainer.env_steps());
    return 0;
}

int cmd_eval(const CommonOptions& opts, const std::string& checkpoint_path,
             std::optional<int> trials, const std::string& label) {
    const cfg::RunConfig rc = resolve_config(opts);
    const net::Checkpoint ckpt = net::load_checkpoint(checkpoint_path);
    const int n_trials = trials.value_or(rc.eval_trials);
    if (n_trials < 1) throw std::invalid_argument("eval: trials must be >= 1");

    ThreadPool pool(ThreadPool::resolve(opts.threads));
    const std::vector<eval::TrialRecord> records =
        eval::run_evaluation(ckpt.params, rc.episode, rc.reward, rc.sfm, n_trials, rc.seed, pool);
    const eval::MetricsReport report = eval::compute_metrics(records);

    fs::create_directories(rc.out_dir);
    write_text_file(fs::path(rc.out_dir) / "report.json", eval::report_to_json(report) + "\n");
    write_text_file(fs::path(rc.out_dir) / "report.txt", eval::report_table(report));

    eval::TrialFileMeta meta;
    meta.n_pedestrians = rc.episode.n_pedestrians;
    meta.single_group = rc.episode.single_group;
    meta.group_term_enabled = rc.reward.group_term_enabled;
    meta.trials = n_trials;
    meta.seed = rc.seed;
    meta.label = label;
    std::ofstream trials_out(fs::path(rc.out_dir) / "trials.jsonl");
    if (!trials_out) throw std::runtime_error("cannot open trials file");
    eval::write_trials(trials_out, meta, records);

    std::cout << eval::report_table(report);
    return 0;
}

int cmd_rollout(const CommonOptions& opts, const std::string& checkpoint_path,
                std::optional<uint64_t> episode_seed) {
    const cfg::RunConfig rc = resolve_config(opts);
    const net::Checkpoint ckpt = net::load_checkpoint(checkpoint_path);

    env::CrowdEnv environment(rc.episode, rc.reward, rc.sfm);
    environment.reset(episode_seed.value_or(rc.seed));

    std::vector<io::TrajectoryRecord> records;
    auto snapshot = [&](const env::RewardBreakdown& bd, const char* done) {
        io::TrajectoryRecord rec;
        rec.step = environment.step_count();
        rec.robot = environment.observation().robot;
        rec.pedestrians = environment.observation().pedestrians;
        rec.groups = environment.layout().assignment;
        rec.reward = bd;
        rec.done = done;
        records.push_back(std::move(rec));
    };
    snapshot(env::RewardBreakdown{}, "running");
    while (environment.outcome() == env::Outcome::running) {
        int action = 65;  // full speed toward the goal when there is no crowd to read
        if (!environment.observation().pedestrians.empty())
            action = ppo::greedy_action(net::forward(ckpt.params, environment.observation()));
        const env::StepInfo info = environment.step(action);
        snapshot(info.breakdown, env::outcome_name(info.outcome));
    }

    fs::create_directories(rc.out_dir);
    std::ofstream out(fs::path(rc.out_dir) / "trajectory.jsonl");
    if (!out) throw std::runtime_error("cannot open trajectory file");
    io::write_trajectory(out, records);

    double total = 0.0;
    for (const io::TrajectoryRecord& r : records) total += r.reward.total();
    std::printf("episode: %s after %d steps (%.2f s), total reward %.4f\n",
                env::outcome_name(environment.outcome()), environment.step_count(),
                environment.time(), total);
    return 0;
}

int cmd_compare(const CommonOptions& opts, const std::string& trials_path_a,
                const std::string& trials_path_b) {
    const cfg::RunConfig rc = resolve_config(opts);
    auto [meta_a, records_a] = eval::read_trials_file(trials_path_a);
    auto [meta_b, records_b] = eval::read_trials_file(trials_path_b);
    if (meta_a.n_pedestrians != meta_b.n_pedestrians ||
        meta_a.single_group != meta_b.single_group || meta_a.trials != meta_b.trials)
        throw std::invalid_argument(
            "compare: the two runs use different scenario settings and cannot be compared");

    const std::string label_a = meta_a.label.empty() ? trials_path_a : meta_a.label;
    const std::string label_b = meta_b.label.empty() ? trials_path_b : meta_b.label;
    const eval::Comparison cmp = eval::compare_policies(records_a, records_b, label_a, label_b);

    fs::create_directories(rc.out_dir);
    write_text_file(fs::path(rc.out_dir) / "comparison.json", eval::comparison_to_json(cmp) + "\n");
    write_text_file(fs::path(rc.out_dir) / "comparison.txt", eval::comparison_table(cmp));
    std::cout << eval::comparison_table(cmp);
    return 0;
}

namespace {

// step-aligned average over several trajectory logs
svg::Series averaged_series(const std::vector<std::vector<io::TrajectoryRecord>>& logs,
                            double (*sample)(const io::TrajectoryRecord&), double dt) {
    svg::Series series;
    size_t longest = 0;
    for (const auto& log : logs) longest = std::max(longest, log.size());
    for (size_t t = 0; t < longest; ++t) {
        double sum = 0.0;
        int n = 0;
        for (const auto& log : logs) {
            if (t >= log.size()) continue;
            const double v = sample(log[t]);
            if (std::isfinite(v)) {
                sum += v;
                ++n;
            }
        }
        if (n == 0) continue;
        series.x.push_back(static_cast<double>(t) * dt);
        series.y.push_back(sum / n);
    }
    return series;
}

double mean_ped_distance(const io::TrajectoryRecord& rec) {
    if (rec.pedestrians.empty()) return std::nan("");
    double sum = 0.0;
    for (const env::PedestrianView& p : rec.pedestrians)
        sum += (p.position - rec.robot.position).norm();
    return sum / static_cast<double>(rec.pedestrians.size());
}

double mean_ped_speed(const io::TrajectoryRecord& rec) {
    if (rec.pedestrians.empty()) return std::nan("");
    double sum = 0.0;
    for (const env::PedestrianView& p : rec.pedestrians) sum += p.velocity.norm();
    return sum / static_cast<double>(rec.pedestrians.size());
}

}  // namespace

int cmd_plot(const std::string& kind, const std::vector<std::string>& inputs,
             const std::string& out_path, const std::string& title) {
    if (inputs.empty()) throw std::invalid_argument("plot: at least one --input is required");
    constexpr double kDt = 0.25;
    std::string svg_text;

    if (kind == "trajectory") {
        const auto records = io::read_trajectory_file(inputs.front());
        if (records.empty()) throw std::runtime_error("plot: empty trajectory log");
        svg_text = svg::trajectory_plot(records, title.empty() ? "robot trajectory" : title);
    } else if (kind == "distance" || kind == "velocity") {
        std::vector<std::vector<io::TrajectoryRecord>> logs;
        for (const std::string& path : inputs) {
            logs.push_back(io::read_trajectory_file(path));
            if (logs.back().empty()) throw std::runtime_error("plot: empty trajectory log " + path);
        }
        const bool distance = kind == "distance";
        svg::Series series =
            averaged_series(logs, distance ? mean_ped_distance : mean_ped_speed, kDt);
        if (series.x.empty()) throw std::runtime_error("plot: logs carry no pedestrian samples");
        series.label = distance ? "mean robot-pedestrian distance" : "mean pedestrian speed";
        svg_text = svg::line_chart(
            {series},
            !title.empty() ? title
                           : (distance ? "robot-pedestrian distance over time"
                                       : "pedestrian speed over time"),
            "time (s)", distance ? "distance (m)" : "speed (m/s)");
    } else if (kind == "learning-curve") {
        std::vector<svg::Series> series;
        for (const std::string& path : inputs) {
            std::ifstream in(path);
            if (!in) throw std::runtime_error("plot: cannot open " + path);
            svg::Series s;
            s.label = fs::path(path).parent_path().filename().string();
            if (s.label.empty()) s.label = path;
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                nlohmann::json j;
                try {
                    j = nlohmann::json::parse(line);
                } catch (const nlohmann::json::exception& e) {
                    throw std::runtime_error("plot: malformed learning curve line in " + path +
                                             ": " + e.what());
                }
                if (j.value("episodes", 0) == 0) continue;
                s.x.push_back(j.at("iteration").get<double>());
                s.y.push_back(j.at("mean_reward").get<double>());
            }
            if (s.x.empty()) throw std::runtime_error("plot: no reward records in " + path);
            series.push_back(std::move(s));
        }
        svg_text = svg::line_chart(series, title.empty() ? "training reward" : title,
                                   "iteration", "mean episode reward");
    } else {
        throw std::invalid_argument(
            "plot: unknown kind '" + kind +
            "' (expected trajectory, distance, velocity, or learning-curve)");
    }

    write_text_file(out_path, svg_text);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

}  // namespace groupnav::cli
