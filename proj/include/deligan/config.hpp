#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "deligan/data.hpp"
#include "deligan/gan.hpp"
#include "deligan/latent.hpp"
#include "deligan/nets.hpp"

namespace deligan {

struct ToyDataConfig {
    data::ToySpec spec;
    std::size_t n_train = 10000;
};

struct MnistDataConfig {
    std::string images;
    std::string labels;
    std::size_t per_class = 50;
};

struct EvalConfig {
    int splits = 10;
    int pairs = 32;
    double radius_sigmas = 3.0;
    std::size_t samples = 10000;
};

// Full declarative description of one training run. Loaded from a versioned
// JSON file; the seed is mandatory (no wall-clock seeding) and all referenced
// paths must exist at load time.
struct ExperimentConfig {
    int version = 1;
    gan::Variant variant = gan::Variant::deligan;
    std::variant<ToyDataConfig, MnistDataConfig> data = ToyDataConfig{};

    gan::GanArch arch;

    std::size_t n_components = 50;
    std::size_t latent_dim = 2;
    double sigma0 = 0.2;
    double lambda = 1.0;
    latent::SimplePrior prior = latent::SimplePrior::uniform;
    std::size_t samples_per_component = 1;

    gan::OptimizerSettings optimizer;

    std::size_t iterations = 8000;
    std::size_t batch = 64;
    std::uint64_t seed = 0;
    bool non_saturating = false;
    std::size_t snapshot_every = 100;
    std::size_t checkpoint_every = 0; // 0: final checkpoint only

    EvalConfig eval;
    std::string out_dir; // may be overridden by --out

    const ToyDataConfig* toy() const { return std::get_if<ToyDataConfig>(&data); }
    const MnistDataConfig* mnist() const { return std::get_if<MnistDataConfig>(&data); }
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text, const std::string& origin = "<string>");
std::string config_to_json(const ExperimentConfig& cfg);

} // namespace deligan
