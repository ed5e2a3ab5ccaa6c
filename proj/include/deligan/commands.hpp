#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deligan/config.hpp"

namespace deligan::cli {

// Exit codes shared by every command:
//   0 success, 1 runtime failure (e.g. diverged run),
//   2 malformed config / missing or invalid input file, 3 metric unavailable.

struct TrainArgs {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
};
int cmd_train(const TrainArgs& args);

// In-process variant used by cmd_train and the sweep workers; writes the run
// directory (checkpoint.json, history.csv, mu_snapshots.csv, ...) and returns
// the exit code.
int run_train(ExperimentConfig cfg);

struct SampleArgs {
    std::string checkpoint;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    std::string out = "samples.csv";
};
int cmd_sample(const SampleArgs& args);

struct EvalArgs {
    std::string samples_csv;
    std::string classifier; // checkpoint path; trained and saved when fit_from is given
    std::optional<std::string> fit_from;
    int splits = 10;
    int pairs = 32;
    std::uint64_t seed = 0;
    double accuracy_floor = 0.9;
    std::string metric = "mis"; // "mis" or "is"
    std::string out = "scores.csv";
};
int cmd_eval(const EvalArgs& args);

struct PlotArgs {
    std::string samples_csv;
    std::optional<std::string> config_path; // toy spec overlay
    std::optional<std::string> checkpoint;  // mixture markers at G(mu_i)
    std::string out_svg = "plot.svg";
};
int cmd_plot(const PlotArgs& args);

struct NnGridArgs {
    std::string samples_csv;
    std::string train_csv;
    std::size_t k = 1;
    std::string out = "nn.csv";
};
int cmd_nn_grid(const NnGridArgs& args);

struct SweepArgs {
    std::string config_path;
    std::vector<std::string> variants;
    std::vector<std::uint64_t> seeds;
    std::string out_root = "sweep";
    std::size_t threads = 0; // 0: DELIGAN_THREADS or hardware_concurrency
};
int cmd_sweep(const SweepArgs& args);

} // namespace deligan::cli
