#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "groupnav/crowd_env.hpp"

namespace groupnav::io {

// shortest decimal form that round-trips a double exactly
std::string format_double(double value);
std::string escape_json(const std::string& s);

struct TrajectoryRecord {
    int step = 0;
    env::RobotState robot;
    std::vector<env::PedestrianView> pedestrians;
    std::vector<int> groups;
    env::RewardBreakdown reward;
    std::string done = "running";
};

std::string trajectory_line(const TrajectoryRecord& rec);
TrajectoryRecord parse_trajectory_line(const std::string& line);

void write_trajectory(std::ostream& out, const std::vector<TrajectoryRecord>& records);
std::vector<TrajectoryRecord> read_trajectory(std::istream& in);
std::vector<TrajectoryRecord> read_trajectory_file(const std::string& path);

}  // namespace groupnav::io
