#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace groupnav::cli {

struct CommonOptions {
    std::string config_path;  // empty = built-in defaults
    std::vector<std::string> overrides;
    std::optional<uint64_t> seed;  // overrides eval.seed
    std::string out_dir;           // overrides output.dir
    int threads = 0;               // 0 = all hardware threads
};

int cmd_train(const CommonOptions& opts);
int cmd_eval(const CommonOptions& opts, const std::string& checkpoint_path,
             std::optional<int> trials, const std::string& label);
int cmd_rollout(const CommonOptions& opts, const std::string& checkpoint_path,
                std::optional<uint64_t> episode_seed);
int cmd_compare(const CommonOptions& opts, const std::string& trials_path_a,
                const std::string& trials_path_b);
int cmd_plot(const std::string& kind, const std::vector<std::string>& inputs,
             const std::string& out_path, const std::string& title);

}  // namespace groupnav::cli
