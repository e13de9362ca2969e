#include <CLI11.hpp>

#include "multirat/commands.hpp"

int main(int argc, char** argv) {
    using namespace multirat::harness;
    CLI::App app{"Multi-RAT patient edge node resource allocation: training, evaluation and baselines"};
    app.require_subcommand(1);

    CommandOptions opts;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config, "experiment config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "override the config seed");
    };

    auto* train = app.add_subcommand("train", "train both agent teams");
    add_common(train);

    auto* eval = app.add_subcommand("eval", "evaluate a trained checkpoint");
    add_common(eval);
    eval->add_option("--checkpoint", opts.checkpoint, "checkpoint file")->required();
    eval->add_flag("--allow-config-mismatch", opts.allow_config_mismatch, "accept a checkpoint from another config");

    auto* baseline = app.add_subcommand("baseline", "run a comparison policy");
    add_common(baseline);
    baseline->add_option("--policy", opts.policy, "heuristic|aansc|onsra")->required();

    auto* compare = app.add_subcommand("compare", "evaluate the trained policy against every baseline");
    add_common(compare);
    compare->add_option("--checkpoint", opts.checkpoint, "checkpoint file")->required();
    compare->add_flag("--allow-config-mismatch", opts.allow_config_mismatch, "accept a checkpoint from another config");

    CLI11_PARSE(app, argc, argv);

    for (auto* sub : {train, eval, baseline, compare})
        if (sub->parsed() && sub->count("--seed")) opts.seed = seed;

    if (train->parsed()) return cmd_train(opts);
    if (eval->parsed()) return cmd_eval(opts);
    if (baseline->parsed()) return cmd_baseline(opts);
    return cmd_compare(opts);
}
