#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "rlsa2c/runner.hpp"

using namespace rlsa2c;

int main(int argc, char** argv) {
    CLI::App app{"RLS-based advantage actor-critic trainer"};
    app.require_subcommand(1);

    std::string config_path, algo, env, log_path, checkpoint_path;
    std::uint64_t seed = 0;
    std::size_t total_timesteps = 0;
    bool seed_set = false, total_set = false;

    auto* train = app.add_subcommand("train", "train a policy and stream a CSV log");
    train->add_option("--config", config_path, "config file (flat key=value)");
    train->add_option("--algo", algo, "rmsa2c | rlssa2c | rlsna2c");
    train->add_option("--env", env, "cartpole_lite | pointmass | pixelgrid");
    train->add_option("--seed", seed)->each([&](const std::string&) { seed_set = true; });
    train->add_option("--total-timesteps", total_timesteps)
        ->each([&](const std::string&) { total_set = true; });
    train->add_option("--log", log_path, "CSV log path");
    train->add_option("--checkpoint", checkpoint_path, "checkpoint written at the end of the run");

    std::string eval_checkpoint;
    std::size_t eval_episodes = 10;
    auto* eval_cmd = app.add_subcommand("eval", "greedy evaluation of a checkpoint");
    eval_cmd->add_option("--checkpoint", eval_checkpoint)->required();
    eval_cmd->add_option("--episodes", eval_episodes);

    auto* bench_cmd = app.add_subcommand("bench", "throughput comparison of the three algorithms");
    bench_cmd->add_option("--config", config_path, "config file (flat key=value)");
    bench_cmd->add_option("--env", env);

    std::string plot_log;
    std::size_t plot_stride = 1;
    auto* plot_cmd = app.add_subcommand("plot-data", "re-emit smoothed reward curve from a log");
    plot_cmd->add_option("--log", plot_log)->required();
    plot_cmd->add_option("--stride", plot_stride);

    CLI11_PARSE(app, argc, argv);

    try {
        auto load_cfg = [&] {
            TrainConfig cfg =
                config_path.empty() ? TrainConfig{} : TrainConfig::load(config_path);
            if (!algo.empty()) cfg.algorithm = algo;
            if (!env.empty()) cfg.env = env;
            if (seed_set) cfg.seed = seed;
            if (total_set) cfg.total_timesteps = total_timesteps;
            if (!log_path.empty()) cfg.log_path = log_path;
            if (!checkpoint_path.empty()) cfg.checkpoint_path = checkpoint_path;
            return cfg;
        };
        if (*train) {
            TrainConfig cfg = load_cfg();
            cfg.validate();
            std::cout << "training " << cfg.algorithm << " on " << cfg.env << " for "
                      << cfg.total_timesteps << " timesteps, log: " << resolve_log_path(cfg)
                      << std::endl;
            TrainerState st = run(cfg);
            std::cout << "done at iteration " << st.iteration << ", " << st.timesteps
                      << " timesteps" << std::endl;
        } else if (*eval_cmd) {
            TrainerState st = load_checkpoint(eval_checkpoint);
            EvalResult res = evaluate(st, eval_episodes);
            std::cout << "episodes: " << eval_episodes << "\nmean reward: " << res.mean
                      << "\nstddev: " << res.stddev << std::endl;
        } else if (*bench_cmd) {
            TrainConfig cfg = load_cfg();
            cfg.validate();
            print_bench(bench(cfg), std::cout);
        } else if (*plot_cmd) {
            std::ifstream in(plot_log);
            check(bool(in), "cannot open log: " + plot_log);
            plot_data(in, std::cout, plot_stride);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
