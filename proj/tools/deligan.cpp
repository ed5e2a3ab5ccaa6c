// Experiment runner: train GAN variants on toy/MNIST data, sample trained
// generators, score samples with inception-style metrics, plot, and sweep.

#include <CLI11.hpp>

#include "deligan/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"mixture-prior GAN experiment harness"};
    app.require_subcommand(1);

    deligan::cli::TrainArgs train_args;
    auto* train = app.add_subcommand("train", "train a model from a config file");
    train->add_option("--config", train_args.config_path, "experiment config (JSON)")->required();
    std::string train_out;
    std::uint64_t train_seed = 0;
    auto* train_out_opt = train->add_option("--out", train_out, "run directory override");
    auto* train_seed_opt = train->add_option("--seed", train_seed, "seed override");

    deligan::cli::SampleArgs sample_args;
    auto* sample = app.add_subcommand("sample", "draw samples from a checkpoint");
    sample->add_option("--checkpoint", sample_args.checkpoint, "model checkpoint")->required();
    sample->add_option("--n", sample_args.n, "number of samples");
    sample->add_option("--seed", sample_args.seed, "sampling seed");
    sample->add_option("--out", sample_args.out, "output CSV");

    deligan::cli::EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "score samples with the stand-in classifier");
    eval->add_option("--samples", eval_args.samples_csv, "samples CSV")->required();
    eval->add_option("--classifier", eval_args.classifier, "classifier checkpoint")->required();
    eval->add_option("--fit-from", eval_args.fit_from,
                     "labeled CSV; trains and saves the classifier if the checkpoint is missing");
    eval->add_option("--splits", eval_args.splits, "number of score splits");
    eval->add_option("--pairs", eval_args.pairs, "partners per sample (0 = exhaustive)");
    eval->add_option("--seed", eval_args.seed, "pairing/classifier seed");
    eval->add_option("--floor", eval_args.accuracy_floor, "classifier accuracy floor");
    eval->add_option("--metric", eval_args.metric, "'mis' (default) or 'is'");
    eval->add_option("--out", eval_args.out, "output CSV");

    deligan::cli::PlotArgs plot_args;
    auto* plot = app.add_subcommand("plot", "scatter plot of 2-D samples as SVG");
    plot->add_option("--samples", plot_args.samples_csv, "samples CSV")->required();
    plot->add_option("--config", plot_args.config_path, "config providing the truth overlay");
    plot->add_option("--checkpoint", plot_args.checkpoint, "mixture checkpoint for mu markers");
    plot->add_option("--out", plot_args.out_svg, "output SVG");

    deligan::cli::NnGridArgs nn_args;
    auto* nn = app.add_subcommand("nn-grid", "nearest training neighbors of each sample");
    nn->add_option("--samples", nn_args.samples_csv, "samples CSV")->required();
    nn->add_option("--train", nn_args.train_csv, "training data CSV")->required();
    nn->add_option("--k", nn_args.k, "neighbors per sample");
    nn->add_option("--out", nn_args.out, "output CSV");

    deligan::cli::SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "fan out variant/seed runs in parallel");
    sweep->add_option("--config", sweep_args.config_path, "base config")->required();
    sweep->add_option("--variants", sweep_args.variants, "variants to run")->delimiter(',');
    sweep->add_option("--seeds", sweep_args.seeds, "seeds to run")->delimiter(',');
    sweep->add_option("--out", sweep_args.out_root, "root output directory");
    sweep->add_option("--threads", sweep_args.threads,
                      "worker threads (default: DELIGAN_THREADS or hardware)");

    CLI11_PARSE(app, argc, argv);

    if (train->parsed()) {
        if (train_out_opt->count()) train_args.out_dir = train_out;
        if (train_seed_opt->count()) train_args.seed = train_seed;
        return deligan::cli::cmd_train(train_args);
    }
    if (sample->parsed()) return deligan::cli::cmd_sample(sample_args);
    if (eval->parsed()) return deligan::cli::cmd_eval(eval_args);
    if (plot->parsed()) return deligan::cli::cmd_plot(plot_args);
    if (nn->parsed()) return deligan::cli::cmd_nn_grid(nn_args);
    if (sweep->parsed()) return deligan::cli::cmd_sweep(sweep_args);
    return 1;
}
