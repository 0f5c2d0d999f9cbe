#include "groupnav/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "groupnav/ppo.hpp"
#include "groupnav/trajectory.hpp"

namespace groupnav::eval {

namespace {

Aggregate aggregate(std::span<const double> xs) {
    Aggregate a;
    a.n = static_cast<int>(xs.size());
    if (xs.empty()) return a;
    a.mean = stats::mean(xs);
    if (xs.size() > 1) a.stddev = std::sqrt(stats::sample_variance(xs));
    return a;
}

double mean_of(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

}  // namespace

const char* metric_name(Metric m) {
    switch (m) {
        case Metric::time_to_goal: return "time_to_goal";
        case Metric::robot_velocity: return "robot_velocity";
        case Metric::ped_velocity: return "ped_velocity";
        case Metric::ped_angle: return "ped_angle_deg";
        case Metric::discomfort: return "discomfort";
        case Metric::ped_force: return "ped_social_force";
        case Metric::robot_force: return "robot_social_force";
    }
    return "?";
}

std::vector<double> per_trial_values(std::span<const TrialRecord> records, Metric m) {
    std::vector<double> out;
    out.reserve(records.size());
    for (const TrialRecord& r : records) {
        switch (m) {
            case Metric::time_to_goal:
                if (r.outcome == env::Outcome::goal) out.push_back(r.time_to_goal);
                break;
            case Metric::robot_velocity: out.push_back(r.robot_velocity); break;
            case Metric::ped_velocity:
                if (r.has_ped_velocity) out.push_back(r.ped_velocity);
                break;
            case Metric::ped_angle:
                if (r.has_ped_angle) out.push_back(r.ped_angle_deg);
                break;
            case Metric::discomfort: out.push_back(r.discomfort); break;
            case Metric::ped_force:
                if (r.has_ped_force) out.push_back(r.ped_social_force);
                break;
            case Metric::robot_force: out.push_back(r.robot_social_force); break;
        }
    }
    return out;
}

TrialRecord run_trial(const net::PolicyParams& params, const env::EpisodeConfig& episode,
                      const env::RewardConfig& reward, const sfm::SfmParams& sfm,
                      uint64_t trial_seed) {
    env::CrowdEnv environment(episode, reward, sfm);
    environment.reset(trial_seed);

    TrialRecord rec;
    rec.n_groups = environment.layout().n_groups;
    std::vector<bool> intersected(static_cast<size_t>(rec.n_groups), false);

    while (environment.outcome() == env::Outcome::running) {
        int action = 0;
        if (!environment.observation().pedestrians.empty())
            action = ppo::greedy_action(net::forward(params, environment.observation()));
        else
            action = 65;  // full speed straight at the goal
        const env::StepInfo info = environment.step(action);

        rec.robot_speed_samples.push_back(info.robot_speed);
        for (double s : info.ped_speeds) rec.ped_speed_samples.push_back(s);
        for (double a : info.ped_goal_angles_deg) rec.ped_angle_samples.push_back(a);
        for (double d : info.ped_distances) {
            rec.ped_distance_samples.push_back(d);
            if (d >= reward.d_coll && d < reward.d_disc) rec.discomfort += d;
        }
        for (size_t g = 0; g < info.hull_distances.size(); ++g) {
            rec.hull_distance_samples.push_back(info.hull_distances[g]);
            if (environment.layout().group_sizes[g] >= 2 && info.hull_distances[g] <= 0.0)
                intersected[g] = true;
        }
        for (double f : info.ped_force_mags) rec.ped_force_samples.push_back(f);
        rec.robot_force_samples.push_back(info.robot_force_mag);
    }

    rec.outcome = environment.outcome();
    rec.steps = environment.step_count();
    if (rec.outcome == env::Outcome::goal) rec.time_to_goal = environment.time();
    rec.group_intersections =
        static_cast<int>(std::count(intersected.begin(), intersected.end(), true));

    rec.robot_velocity = mean_of(rec.robot_speed_samples);
    rec.robot_social_force = mean_of(rec.robot_force_samples);
    if (!rec.ped_speed_samples.empty()) {
        rec.ped_velocity = mean_of(rec.ped_speed_samples);
        rec.has_ped_velocity = true;
    }
    if (!rec.ped_angle_samples.empty()) {
        rec.ped_angle_deg = mean_of(rec.ped_angle_samples);
        rec.has_ped_angle = true;
    }
    if (!rec.ped_force_samples.empty()) {
        rec.ped_social_force = mean_of(rec.ped_force_samples);
        rec.has_ped_force = true;
    }
    return rec;
}

std::vector<TrialRecord> run_evaluation(const net::PolicyParams& params,
                                        const env::EpisodeConfig& episode,
                                        const env::RewardConfig& reward,
                                        const sfm::SfmParams& sfm, int n_trials, uint64_t seed,
                                        ThreadPool& pool) {
    if (n_trials < 1) throw std::invalid_argument("run_evaluation: n_trials must be >= 1");
    std::vector<TrialRecord> records(static_cast<size_t>(n_trials));
    pool.parallel_for(n_trials, [&](int trial) {
        records[static_cast<size_t>(trial)] =
            run_trial(params, episode, reward, sfm, mix_seed(seed, static_cast<uint64_t>(trial), 0));
        records[static_cast<size_t>(trial)].trial = trial;
    });
    return records;
}

MetricsReport compute_metrics(std::span<const TrialRecord> records) {
    if (records.empty()) throw std::invalid_argument("compute_metrics: no records");
    MetricsReport report;
    report.trials = static_cast<int>(records.size());
    for (const TrialRecord& r : records) {
        switch (r.outcome) {
            case env::Outcome::goal: ++report.successes; break;
            case env::Outcome::collision: ++report.collisions; break;
            case env::Outcome::timeout: ++report.timeouts; break;
            case env::Outcome::running:
                throw std::invalid_argument("compute_metrics: unfinished trial");
        }
        report.group_intersections += r.group_intersections;
    }
    report.time_to_goal = aggregate(per_trial_values(records, Metric::time_to_goal));
    report.robot_velocity = aggregate(per_trial_values(records, Metric::robot_velocity));
    report.ped_velocity = aggregate(per_trial_values(records, Metric::ped_velocity));
    report.ped_angle_deg = aggregate(per_trial_values(records, Metric::ped_angle));
    report.discomfort = aggregate(per_trial_values(records, Metric::discomfort));
    report.ped_social_force = aggregate(per_trial_values(records, Metric::ped_force));
    report.robot_social_force = aggregate(per_trial_values(records, Metric::robot_force));
    return report;
}

Comparison compare_policies(std::span<const TrialRecord> a, std::span<const TrialRecord> b,
                            const std::string& label_a, const std::string& label_b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("compare_policies: empty records");
    if (a.size() != b.size())
        throw std::invalid_argument("compare_policies: trial counts differ");
    Comparison cmp;
    cmp.label_a = label_a;
    cmp.label_b = label_b;
    cmp.trials = static_cast<int>(a.size());

    const MetricsReport ra = compute_metrics(a);
    const MetricsReport rb = compute_metrics(b);
    auto count_row = [&cmp](const char* name, double va, double vb) {
        ComparisonRow row;
        row.metric = name;
        row.value_a = va;
        row.value_b = vb;
        cmp.rows.push_back(row);
    };
    count_row("successes", ra.successes, rb.successes);
    count_row("collisions", ra.collisions, rb.collisions);
    count_row("timeouts", ra.timeouts, rb.timeouts);
    count_row("group_intersections", static_cast<double>(ra.group_intersections),
              static_cast<double>(rb.group_intersections));

    for (Metric m : {Metric::time_to_goal, Metric::robot_velocity, Metric::ped_velocity,
                     Metric::ped_angle, Metric::discomfort, Metric::ped_force,
                     Metric::robot_force}) {
        const std::vector<double> va = per_trial_values(a, m);
        const std::vector<double> vb = per_trial_values(b, m);
        ComparisonRow row;
        row.metric = metric_name(m);
        if (va.size() >= 2 && vb.size() >= 2) {
            row.tested = true;
            row.value_a = stats::mean(va);
            row.value_b = stats::mean(vb);
            row.test = stats::pooled_t_test(va, vb);
            row.significant = row.test.valid && row.test.p < 0.05;
        } else {
            row.value_a = va.empty() ? 0.0 : stats::mean(va);
            row.value_b = vb.empty() ? 0.0 : stats::mean(vb);
        }
        cmp.rows.push_back(row);
    }
    return cmp;
}

void write_trials(std::ostream& out, const TrialFileMeta& meta,
                  std::span<const TrialRecord> records) {
    out << "{\"kind\":\"groupnav-trials\",\"label\":\"" << io::escape_json(meta.label)
        << "\",\"n_pedestrians\":" << meta.n_pedestrians
        << ",\"single_group\":" << (meta.single_group ? "true" : "false")
        << ",\"group_term_enabled\":" << (meta.group_term_enabled ? "true" : "false")
        << ",\"trials\":" << meta.trials << ",\"seed\":" << meta.seed << "}\n";
    for (const TrialRecord& r : records) {
        out << "{\"trial\":" << r.trial << ",\"outcome\":\"" << env::outcome_name(r.outcome)
            << "\",\"steps\":" << r.steps << ",\"groups\":" << r.n_groups
            << ",\"intersections\":" << r.group_intersections;
        if (r.outcome == env::Outcome::goal)
            out << ",\"time_to_goal\":" << io::format_double(r.time_to_goal);
        out << ",\"robot_velocity\":" << io::format_double(r.robot_velocity);
        if (r.has_ped_velocity)
            out << ",\"ped_velocity\":" << io::format_double(r.ped_velocity);
        if (r.has_ped_angle)
            out << ",\"ped_angle_deg\":" << io::format_double(r.ped_angle_deg);
        out << ",\"discomfort\":" << io::format_double(r.discomfort);
        if (r.has_ped_force)
            out << ",\"ped_social_force\":" << io::format_double(r.ped_social_force);
        out << ",\"robot_social_force\":" << io::format_double(r.robot_social_force) << "}\n";
    }
}

std::pair<TrialFileMeta, std::vector<TrialRecord>> read_trials_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("trials: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("trials: empty file " + path);

    TrialFileMeta meta;
    std::vector<TrialRecord> records;
    try {
        const nlohmann::json header = nlohmann::json::parse(line);
        if (header.value("kind", "") != "groupnav-trials")
            throw std::runtime_error("trials: " + path + " is not a trial record file");
        meta.label = header.value("label", "");
        meta.n_pedestrians = header.at("n_pedestrians").get<int>();
        meta.single_group = header.at("single_group").get<bool>();
        meta.group_term_enabled = header.at("group_term_enabled").get<bool>();
        meta.trials = header.at("trials").get<int>();
        meta.seed = header.at("seed").get<uint64_t>();
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const nlohmann::json j = nlohmann::json::parse(line);
            TrialRecord r;
            r.trial = j.at("trial").get<int>();
            const std::string outcome = j.at("outcome").get<std::string>();
            if (outcome == "goal")
                r.outcome = env::Outcome::goal;
            else if (outcome == "collision")
                r.outcome = env::Outcome::collision;
            else if (outcome == "timeout")
                r.outcome = env::Outcome::timeout;
            else
                throw std::runtime_error("trials: unknown outcome " + outcome);
            r.steps = j.at("steps").get<int>();
            r.n_groups = j.at("groups").get<int>();
            r.group_intersections = j.at("intersections").get<int>();
            if (j.contains("time_to_goal")) r.time_to_goal = j["time_to_goal"].get<double>();
            r.robot_velocity = j.at("robot_velocity").get<double>();
            if (j.contains("ped_velocity")) {
                r.ped_velocity = j["ped_velocity"].get<double>();
                r.has_ped_velocity = true;
            }
            if (j.contains("ped_angle_deg")) {
                r.ped_angle_deg = j["ped_angle_deg"].get<double>();
                r.has_ped_angle = true;
            }
            r.discomfort = j.at("discomfort").get<double>();
            if (j.contains("ped_social_force")) {
                r.ped_social_force = j["ped_social_force"].get<double>();
                r.has_ped_force = true;
            }
            r.robot_social_force = j.at("robot_social_force").get<double>();
            records.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("trials: malformed record in " + path + ": " + e.what());
    }
    if (static_cast<int>(records.size()) != meta.trials)
        throw std::runtime_error("trials: " + path + " record count does not match its header");
    return {meta, records};
}

namespace {

void json_aggregate(std::string& out, const char* name, const Aggregate& a) {
    out += "\"";
    out += name;
    out += "\":{\"mean\":";
    out += io::format_double(a.mean);
    out += ",\"stddev\":";
    out += io::format_double(a.stddev);
    out += ",\"n\":";
    out += std::to_string(a.n);
    out += "}";
}

}  // namespace

std::string report_to_json(const MetricsReport& r) {
    std::string out = "{";
    out += "\"trials\":" + std::to_string(r.trials);
    out += ",\"successes\":" + std::to_string(r.successes);
    out += ",\"collisions\":" + std::to_string(r.collisions);
    out += ",\"timeouts\":" + std::to_string(r.timeouts);
    out += ",\"group_intersections\":" + std::to_string(r.group_intersections);
    out += ",";
    json_aggregate(out, "time_to_goal", r.time_to_goal);
    out += ",";
    json_aggregate(out, "robot_velocity", r.robot_velocity);
    out += ",";
    json_aggregate(out, "ped_velocity", r.ped_velocity);
    out += ",";
    json_aggregate(out, "ped_angle_deg", r.ped_angle_deg);
    out += ",";
    json_aggregate(out, "discomfort", r.discomfort);
    out += ",";
    json_aggregate(out, "ped_social_force", r.ped_social_force);
    out += ",";
    json_aggregate(out, "robot_social_force", r.robot_social_force);
    out += "}";
    return out;
}

namespace {

std::string fixed(double v, int precision = 3) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(precision);
    os << v;
    return os.str();
}

void table_row(std::ostream& os, const std::string& name, const Aggregate& a) {
    os << "  " << name;
    for (size_t i = name.size(); i < 28; ++i) os << ' ';
    if (a.n == 0) {
        os << "n/a\n";
        return;
    }
    os << fixed(a.mean) << " +/- " << fixed(a.stddev) << "  (n=" << a.n << ")\n";
}

}  // namespace

std::string report_table(const MetricsReport& r) {
    std::ostringstream os;
    os << "trials: " << r.trials << "\n";
    os << "  successes                 " << r.successes << "\n";
    os << "  collisions                " << r.collisions << "\n";
    os << "  timeouts                  " << r.timeouts << "\n";
    os << "  group intersections       " << r.group_intersections << "\n";
    table_row(os, "time to goal (s)", r.time_to_goal);
    table_row(os, "mean robot velocity (m/s)", r.robot_velocity);
    table_row(os, "mean ped velocity (m/s)", r.ped_velocity);
    table_row(os, "mean ped angle (deg)", r.ped_angle_deg);
    table_row(os, "individual discomfort", r.discomfort);
    table_row(os, "ped social force", r.ped_social_force);
    table_row(os, "robot social force", r.robot_social_force);
    return os.str();
}

std::string comparison_to_json(const Comparison& cmp) {
    std::string out = "{\"label_a\":\"" + io::escape_json(cmp.label_a) + "\",\"label_b\":\"" +
                      io::escape_json(cmp.label_b) + "\",\"trials\":" +
                      std::to_string(cmp.trials) + ",\"rows\":[";
    for (size_t i = 0; i < cmp.rows.size(); ++i) {
        const ComparisonRow& row = cmp.rows[i];
        if (i) out += ",";
        out += "{\"metric\":\"" + io::escape_json(row.metric) + "\"";
        out += ",\"a\":" + io::format_double(row.value_a);
        out += ",\"b\":" + io::format_double(row.value_b);
        if (row.tested) {
            out += ",\"t\":" + io::format_double(row.test.t);
            out += ",\"df\":" + std::to_string(row.test.df);
            if (row.test.valid) {
                out += ",\"p\":" + io::format_double(row.test.p);
            } else {
                out += ",\"p\":null";
            }
            out += std::string(",\"significant\":") + (row.significant ? "true" : "false");
        }
        out += "}";
    }
    out += "]}";
    return out;
}

std::string comparison_table(const Comparison& cmp) {
    std::ostringstream os;
    os << "comparison: A = " << cmp.label_a << ", B = " << cmp.label_b << " (" << cmp.trials
       << " trials each)\n";
    os << "  metric                        A           B           t        df    p         \n";
    for (const ComparisonRow& row : cmp.rows) {
        os << "  " << row.metric;
        for (size_t i = row.metric.size(); i < 28; ++i) os << ' ';
        std::string a = fixed(row.value_a);
        std::string b = fixed(row.value_b);
        os << a;
        for (size_t i = a.size(); i < 12; ++i) os << ' ';
        os << b;
        for (size_t i = b.size(); i < 12; ++i) os << ' ';
        if (row.tested) {
            if (row.test.valid) {
                std::string t = fixed(row.test.t, 2);
                os << t;
                for (size_t i = t.size(); i < 9; ++i) os << ' ';
                os << row.test.df << "   " << fixed(row.test.p, 4);
                if (row.significant) os << " *";
            } else {
                os << "degenerate variance";
            }
        }
        os << "\n";
    }
    os << "  (* p < 0.05, pooled two-tailed t-test)\n";
    return os.str();
}

}  // namespace groupnav::eval
