#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "groupnav/crowd_env.hpp"
#include "groupnav/ppo.hpp"
#include "groupnav/social_force.hpp"

namespace groupnav::cfg {

struct RunConfig {
    env::EpisodeConfig episode;
    env::RewardConfig reward;
    sfm::SfmParams sfm;
    ppo::PpoConfig ppo;
    int eval_trials = 250;
    uint64_t seed = 1;
    std::string out_dir = "out";
};

RunConfig default_config();

// line-oriented "section.key = value" text; '#' starts a comment
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);
void apply_override(RunConfig& config, const std::string& assignment);  // "section.key=value"
void validate(const RunConfig& config);

// resolved snapshot; keys whose defaults are implementation choices carry a
// "derived default" note
std::string serialize_config(const RunConfig& config);

}  // namespace groupnav::cfg
