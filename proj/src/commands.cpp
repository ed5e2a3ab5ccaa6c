#include "deligan/commands.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include "deligan/checkpoint.hpp"
#include "deligan/csv.hpp"
#include "deligan/error.hpp"
#include "deligan/gan.hpp"
#include "deligan/metrics.hpp"
#include "deligan/svg.hpp"

namespace deligan::cli {

namespace fs = std::filesystem;

namespace {

int map_error(const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (dynamic_cast<const MetricError*>(&e)) return 3;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DataError*>(&e) ||
        dynamic_cast<const FormatError*>(&e) || dynamic_cast<const ShapeError*>(&e) ||
        dynamic_cast<const DomainError*>(&e)) {
        return 2;
    }
    return 1;
}

std::string samples_header(std::size_t dim) {
    std::string h;
    for (std::size_t c = 0; c < dim; ++c) h += (c ? ",x" : "x") + std::to_string(c);
    return h + "\n";
}

void write_samples_csv(const std::string& path, const ad::Tensor& samples) {
    std::string out = samples_header(samples.cols());
    const auto& v = samples.values();
    for (std::size_t r = 0; r < samples.rows(); ++r) {
        for (std::size_t c = 0; c < samples.cols(); ++c) {
            if (c) out += ",";
            out += csv::format(v[r * samples.cols() + c]);
        }
        out += "\n";
    }
    csv::write_file(path, out);
}

ad::Tensor read_samples_csv(const std::string& path) {
    return data::from_csv(csv::read_file(path)).samples;
}

} // namespace

int run_train(ExperimentConfig cfg) {
    try {
        const fs::path dir = cfg.out_dir.empty() ? fs::path("run") : fs::path(cfg.out_dir);
        fs::create_directories(dir);
        csv::write_file((dir / "config_resolved.json").string(), config_to_json(cfg));

        auto checkpoint_cb = [&](const gan::GanModel& m, std::size_t) {
            ckpt::save_gan(m, (dir / "checkpoint.json").string());
        };
        auto [model, history] = gan::train(cfg, checkpoint_cb);

        csv::write_file((dir / "history.csv").string(), history.to_csv());
        if (model.mixture) {
            csv::write_file((dir / "mu_snapshots.csv").string(),
                            history.snapshots_csv(cfg.latent_dim));
            csv::write_file((dir / "latent.csv").string(), latent::to_csv(*model.mixture));
        }
        csv::write_file((dir / "params.txt").string(),
                        gan::param_counts(model).to_string() + "\n");

        const bool ok = history.status == gan::RunStatus::completed;
        csv::write_file((dir / "status.txt").string(),
                        ok ? "completed\n" : "diverged: " + history.diagnostic + "\n");
        if (!ok) {
            std::cerr << "run diverged: " << history.diagnostic << "\n";
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        return map_error(e);
    }
}

int cmd_train(const TrainArgs& args) {
    try {
        ExperimentConfig cfg = load_config(args.config_path);
        if (args.out_dir) cfg.out_dir = *args.out_dir;
        if (args.seed) cfg.seed = *args.seed;
        return run_train(std::move(cfg));
    } catch (const std::exception& e) {
        return map_error(e);
    }
}

int cmd_sample(const SampleArgs& args) {
    try {
        gan::GanModel model = ckpt::load_gan(args.checkpoint);
        auto rng = rng::substream(args.seed, "sample");
        ad::Tensor samples = args.n == 0 ? ad::Tensor::zeros(0, model.data_dim)
                                         : gan::sample_values(model, args.n, rng);
        write_samples_csv(args.out, samples);
        return 0;
    } catch (const std::exception& e) {
        return map_error(e);
    }
}

int cmd_eval(const EvalArgs& args) {
    try {
        ad::Tensor samples = read_samples_csv(args.samples_csv);

        metrics::Classifier clf;
        if (fs::exists(args.classifier)) {
            clf = ckpt::load_classifier(args.classifier);
        } else if (args.fit_from) {
            data::Dataset train = data::from_csv(csv::read_file(*args.fit_from));
            metrics::ClassifierConfig ccfg;
            ccfg.accuracy_floor = args.accuracy_floor;
            auto rng = rng::substream(args.seed, "classifier");
            clf = metrics::train_classifier(train, ccfg, rng);
            ckpt::save_classifier(clf, args.classifier);
        } else {
            throw DataError("eval: classifier checkpoint '" + args.classifier +
                            "' not found (pass --fit-from to train one)");
        }
        if (clf.holdout_accuracy < args.accuracy_floor) {
            throw MetricError("eval: classifier accuracy " +
                              std::to_string(clf.holdout_accuracy) + " below floor " +
                              std::to_string(args.accuracy_floor));
        }

        auto probs = metrics::classify(clf, samples);
        metrics::ScoreReport report;
        if (args.metric == "mis") {
            report = metrics::modified_inception_score(probs, args.splits, args.pairs,
                                                       rng::substream_seed(args.seed, "pairing"));
        } else if (args.metric == "is") {
            report = metrics::inception_score(probs, args.splits);
        } else {
            throw ConfigError("eval: metric must be 'mis' or 'is'");
        }
        csv::write_file(args.out, report.to_csv());
        return 0;
    } catch (const std::exception& e) {
        return map_error(e);
    }
}

int cmd_plot(const PlotArgs& args) {
    try {
        ad::Tensor samples = read_samples_csv(args.samples_csv);
        if (samples.cols() != 2) {
            throw DataError("plot: expected 2-D samples, got dimension " +
                            std::to_string(samples.cols()));
        }
        std::vector<svg::Point> pts;
        pts.reserve(samples.rows());
        for (std::size_t r = 0; r < samples.rows(); ++r) {
            pts.push_back({samples.at(r, 0), samples.at(r, 1)});
        }

        std::optional<data::ToySpec> truth;
        if (args.config_path) {
            ExperimentConfig cfg = load_config(*args.config_path);
            if (const auto* toy = cfg.toy()) truth = toy->spec;
        }

        std::vector<svg::Point> markers;
        if (args.checkpoint) {
            gan::GanModel model = ckpt::load_gan(*args.checkpoint);
            if (model.mixture && model.data_dim == 2) {
                // component means pushed through their generator
                const std::size_t n = model.n_components, k = model.latent_dim;
                for (std::size_t i = 0; i < n; ++i) {
                    std::vector<double> mu_row(model.mixture->mu.values().begin() + i * k,
                                               model.mixture->mu.values().begin() + (i + 1) * k);
                    const auto& g = model.variant == gan::Variant::ensemble ? model.generators[i]
                                                                            : model.generators[0];
                    if (g.input_dim() != k) continue; // moe-style inputs have no direct image
                    auto img = g.forward(ad::Tensor::from_values(1, k, std::move(mu_row)));
                    markers.push_back({img.at(0, 0), img.at(0, 1)});
                }
            }
        }

        csv::write_file(args.out_svg, svg::scatter_plot(pts, truth, markers));
        return 0;
    } catch (const std::exception& e) {
        return map_error(e);
    }
}

int cmd_nn_grid(const NnGridArgs& args) {
    try {
        ad::Tensor samples = read_samples_csv(args.samples_csv);
        ad::Tensor train = data::from_csv(csv::read_file(args.train_csv)).samples;
        auto nn = metrics::nearest_neighbors(samples, train, args.k);
        std::string out = "sample";
        for (std::size_t j = 0; j < args.k; ++j) out += ",n" + std::to_string(j);
        out += "\n";
        for (std::size_t i = 0; i < nn.size(); ++i) {
            out += std::to_string(i);
            for (std::size_t j : nn[i]) out += "," + std::to_string(j);
            out += "\n";
        }
        csv::write_file(args.out, out);
        return 0;
    } catch (const std::exception& e) {
        return map_error(e);
    }
}

int cmd_sweep(const SweepArgs& args) {
    try {
        ExperimentConfig base = load_config(args.config_path);
        std::vector<ExperimentConfig> runs;
        const std::vector<std::string> variants =
            args.variants.empty() ? std::vector<std::string>{gan::variant_name(base.variant)}
                                  : args.variants;
        const std::vector<std::uint64_t> seeds =
            args.seeds.empty() ? std::vector<std::uint64_t>{base.seed} : args.seeds;
        for (const auto& v : variants) {
            for (std::uint64_t s : seeds) {
                ExperimentConfig cfg = base;
                cfg.variant = gan::variant_from_name(v);
                cfg.seed = s;
                cfg.out_dir =
                    (fs::path(args.out_root) / (v + "-seed" + std::to_string(s))).string();
                runs.push_back(std::move(cfg));
            }
        }

        std::size_t threads = args.threads;
        if (threads == 0) {
            if (const char* env = std::getenv("DELIGAN_THREADS")) {
                threads = static_cast<std::size_t>(std::strtoul(env, nullptr, 10));
            }
        }
        if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
        threads = std::min(threads, runs.size());

        std::atomic<std::size_t> next{0};
        std::atomic<int> failures{0};
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= runs.size()) return;
                    if (run_train(runs[i]) != 0) failures.fetch_add(1);
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failures.load() > 0) {
            std::cerr << failures.load() << " of " << runs.size() << " runs failed\n";
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        return map_error(e);
    }
}

} // namespace deligan::cli
