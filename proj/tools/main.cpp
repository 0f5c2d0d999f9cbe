#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "groupnav/commands.hpp"

namespace {

void add_common(CLI::App* sub, groupnav::cli::CommonOptions& opts) {
    sub->add_option("-c,--config", opts.config_path, "config file (built-in defaults if omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("-O,--override", opts.overrides,
                    "config override as section.key=value, repeatable");
    sub->add_option("-s,--seed", opts.seed, "global seed");
    sub->add_option("-o,--out", opts.out_dir, "output directory");
    sub->add_option("-j,--threads", opts.threads, "worker threads, 0 = all cores");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"groupnav: group-aware crowd navigation lab"};
    app.require_subcommand(1);

    groupnav::cli::CommonOptions train_opts;
    CLI::App* train = app.add_subcommand("train", "train a policy with PPO");
    add_common(train, train_opts);

    groupnav::cli::CommonOptions eval_opts;
    std::string eval_checkpoint;
    std::optional<int> eval_trials;
    std::string eval_label;
    CLI::App* eval = app.add_subcommand("eval", "run evaluation trials on a checkpoint");
    add_common(eval, eval_opts);
    eval->add_option("--checkpoint", eval_checkpoint, "policy checkpoint to evaluate")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--trials", eval_trials, "trial count (config eval.trials if omitted)");
    eval->add_option("--label", eval_label, "run label stored in the trials file");

    groupnav::cli::CommonOptions rollout_opts;
    std::string rollout_checkpoint;
    std::optional<uint64_t> rollout_seed;
    CLI::App* rollout = app.add_subcommand("rollout", "record one greedy episode");
    add_common(rollout, rollout_opts);
    rollout->add_option("--checkpoint", rollout_checkpoint, "policy checkpoint to roll out")
        ->required()
        ->check(CLI::ExistingFile);
    rollout->add_option("--episode-seed", rollout_seed, "scenario seed (global seed if omitted)");

    groupnav::cli::CommonOptions compare_opts;
    std::string trials_a;
    std::string trials_b;
    CLI::App* compare = app.add_subcommand("compare", "t-test two evaluation runs");
    add_common(compare, compare_opts);
    compare->add_option("--a", trials_a, "first trials.jsonl")->required()->check(CLI::ExistingFile);
    compare->add_option("--b", trials_b, "second trials.jsonl")
        ->required()
        ->check(CLI::ExistingFile);

    std::string plot_kind;
    std::vector<std::string> plot_inputs;
    std::string plot_out;
    std::string plot_title;
    CLI::App* plot = app.add_subcommand("plot", "render an SVG figure from logs");
    plot->add_option("--kind", plot_kind,
                     "figure kind: trajectory, distance, velocity, learning-curve")
        ->required();
    plot->add_option("--input", plot_inputs, "input log, repeatable")
        ->required()
        ->check(CLI::ExistingFile);
    plot->add_option("--out", plot_out, "output SVG path")->required();
    plot->add_option("--title", plot_title, "figure title");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return groupnav::cli::cmd_train(train_opts);
        if (eval->parsed())
            return groupnav::cli::cmd_eval(eval_opts, eval_checkpoint, eval_trials, eval_label);
        if (rollout->parsed())
            return groupnav::cli::cmd_rollout(rollout_opts, rollout_checkpoint, rollout_seed);
        if (compare->parsed()) return groupnav::cli::cmd_compare(compare_opts, trials_a, trials_b);
        if (plot->parsed())
            return groupnav::cli::cmd_plot(plot_kind, plot_inputs, plot_out, plot_title);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
