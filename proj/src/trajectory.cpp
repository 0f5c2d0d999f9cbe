#include "groupnav/trajectory.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace groupnav::io {

std::string format_double(double value) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, value);
        if (std::strtod(buf, nullptr) == value) break;
    }
    return buf;
}

std::string escape_json(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

std::string trajectory_line(const TrajectoryRecord& rec) {
    std::string out;
    out.reserve(256 + rec.pedestrians.size() * 128);
    out += "{\"step\":";
    out += std::to_string(rec.step);
    const env::RobotState& r = rec.robot;
    const double robot9[9] = {r.position.x, r.position.y, r.velocity.x, r.velocity.y,
                              r.radius,     r.goal.x,     r.goal.y,     r.v_pref,
                              r.theta};
    out += ",\"robot\":[";
    for (int i = 0; i < 9; ++i) {
        if (i) out += ',';
        out += format_double(robot9[i]);
    }
    out += "],\"pedestrians\":[";
    for (size_t i = 0; i < rec.pedestrians.size(); ++i) {
        const env::PedestrianView& p = rec.pedestrians[i];
        if (i) out += ',';
        out += '[';
        out += format_double(p.position.x);
        out += ',';
        out += format_double(p.position.y);
        out += ',';
        out += format_double(p.velocity.x);
        out += ',';
        out += format_double(p.velocity.y);
        out += ',';
        out += format_double(p.radius);
        out += ']';
    }
    out += "],\"groups\":[";
    for (size_t i = 0; i < rec.groups.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(rec.groups[i]);
    }
    out += "],\"reward\":{\"progress\":";
    out += format_double(rec.reward.progress);
    out += ",\"goal\":";
    out += format_double(rec.reward.goal);
    out += ",\"discomfort\":";
    out += format_double(rec.reward.discomfort);
    out += ",\"collision\":";
    out += format_double(rec.reward.collision);
    out += ",\"group\":";
    out += format_double(rec.reward.group);
    out += ",\"total\":";
    out += format_double(rec.reward.total());
    out += "},\"done\":\"";
    out += escape_json(rec.done);
    out += "\"}";
    return out;
}

TrajectoryRecord parse_trajectory_line(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("trajectory: bad record: ") + e.what());
    }
    TrajectoryRecord rec;
    try {
        rec.step = j.at("step").get<int>();
        const auto& r = j.at("robot");
        if (r.size() != 9) throw std::runtime_error("trajectory: robot needs 9 values");
        rec.robot.position = {r[0].get<double>(), r[1].get<double>()};
        rec.robot.velocity = {r[2].get<double>(), r[3].get<double>()};
        rec.robot.radius = r[4].get<double>();
        rec.robot.goal = {r[5].get<double>(), r[6].get<double>()};
        rec.robot.v_pref = r[7].get<double>();
        rec.robot.theta = r[8].get<double>();
        for (const auto& p : j.at("pedestrians")) {
            if (p.size() != 5) throw std::runtime_error("trajectory: pedestrian needs 5 values");
            env::PedestrianView view;
            view.position = {p[0].get<double>(), p[1].get<double>()};
            view.velocity = {p[2].get<double>(), p[3].get<double>()};
            view.radius = p[4].get<double>();
            rec.pedestrians.push_back(view);
        }
        for (const auto& g : j.at("groups")) rec.groups.push_back(g.get<int>());
        const auto& rw = j.at("reward");
        rec.reward.progress = rw.at("progress").get<double>();
        rec.reward.goal = rw.at("goal").get<double>();
        rec.reward.discomfort = rw.at("discomfort").get<double>();
        rec.reward.collision = rw.at("collision").get<double>();
        rec.reward.group = rw.at("group").get<double>();
        rec.done = j.at("done").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("trajectory: bad record: ") + e.what());
    }
    if (rec.groups.size() != rec.pedestrians.size())
        throw std::runtime_error("trajectory: group assignment size mismatch");
    return rec;
}

void write_trajectory(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
    for (const TrajectoryRecord& rec : records) out << trajectory_line(rec) << '\n';
}

std::vector<TrajectoryRecord> read_trajectory(std::istream& in) {
    std::vector<TrajectoryRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(parse_trajectory_line(line));
    }
    return records;
}

std::vector<TrajectoryRecord> read_trajectory_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("trajectory: cannot open " + path);
    return read_trajectory(in);
}

}  // namespace groupnav::io
