#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "deligan/autodiff.hpp"
#include "deligan/data.hpp"
#include "deligan/latent.hpp"
#include "deligan/nets.hpp"
#include "deligan/rng.hpp"

namespace deligan {
struct ExperimentConfig;
}

namespace deligan::gan {

enum class Variant { baseline, deligan, gan_pp, ensemble, nx, moe };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct GanArch {
    std::size_t data_dim = 2;
    std::vector<std::size_t> gen_hidden = {32};
    std::vector<std::size_t> disc_hidden = {32};
    nets::Activation gen_hidden_act = nets::Activation::relu;
    nets::Activation gen_out_act = nets::Activation::none;
    double disc_leaky_slope = 0.2;
};

// Generator stack + discriminator + latent source. One generator except for
// the ensemble variant, which pairs generator i with mixture component i.
struct GanModel {
    Variant variant = Variant::baseline;
    std::vector<nets::Mlp> generators;
    nets::Mlp discriminator;
    std::optional<latent::MixtureLatent> mixture;
    latent::SimplePrior prior = latent::SimplePrior::uniform;
    std::size_t latent_dim = 2;   // K
    std::size_t n_components = 1; // N where the variant uses it
    std::size_t data_dim = 2;
    std::size_t samples_per_component = 1;
};

// Wires one of the six variants:
//   baseline  G: [K, hidden.., D], z ~ simple prior
//   deligan   baseline G + learnable N x K mixture prior
//   gan_pp    extra fully connected layer of N neurons between z and G
//   ensemble  N generators, generator i tied to mixture component i
//   nx        hidden widths multiplied by N
//   moe       N-dimensional one-hot appended to z (input width K + N)
GanModel build_variant(Variant v, const GanArch& arch, std::size_t n, std::size_t k,
                       rng::Stream& rng, double sigma0 = 0.2);

struct ParamCounts {
    std::size_t generators = 0;
    std::size_t discriminator = 0;
    std::size_t latent = 0;
    std::size_t total() const { return generators + discriminator + latent; }
    std::string to_string() const;
};
ParamCounts param_counts(const GanModel& m);

// -mean(log D(x)) - mean(log(1 - D(G(z))))
ad::Tensor discriminator_loss(const ad::Tensor& d_real, const ad::Tensor& d_fake);

// mean(log(1 - D(G(z)))) [+ sigma penalty]; with non_saturating the
// -mean(log D(G(z))) alternative is used instead.
ad::Tensor generator_loss(const ad::Tensor& d_fake, const latent::MixtureLatent* mix,
                          double lambda, bool non_saturating = false);

struct FakeBatch {
    ad::Tensor x;                   // B x D, graph-connected when a tape is active
    std::vector<int> component_ids; // mixture / one-hot choices, empty otherwise
    int ensemble_choice = -1;
};

// Fake batch for a training phase. For the ensemble variant one generator is
// chosen uniformly per call and all rows come from its component.
FakeBatch generate_fake(const GanModel& m, std::size_t batch, rng::Stream& rng);

// Evaluation-time sampling: no graph, per-sample component/expert choices.
ad::Tensor sample_values(const GanModel& m, std::size_t n, rng::Stream& rng);

struct OptimizerSettings {
    nets::AdamConfig gen{1e-3, 0.5, 0.999, 1e-8};
    nets::AdamConfig disc{2e-4, 0.5, 0.999, 1e-8};
    // mu/sigma share the generator's optimizer instance unless set.
    std::optional<nets::AdamConfig> latent;
};

struct Optimizers {
    nets::Adam disc;
    std::vector<nets::Adam> gens;
    std::optional<nets::Adam> latent;
};

Optimizers make_optimizers(GanModel& m, const OptimizerSettings& settings);

struct StepConfig {
    double lambda = 1.0;
    bool non_saturating = false;
    double sigma_floor = 1e-4;
};

struct TrainRecord {
    std::size_t iter = 0;
    double d_loss = 0, g_loss = 0;
    double d_real_mean = 0, d_fake_mean = 0;
    double sigma_min = 0, sigma_mean = 0;
};

enum class RunStatus { completed, diverged };

struct MuSnapshot {
    std::size_t iter;
    std::vector<double> mu;    // flattened N x K
    std::vector<double> sigma; // flattened N x K
};

struct TrainHistory {
    std::vector<TrainRecord> records;
    std::vector<MuSnapshot> mu_snapshots;
    RunStatus status = RunStatus::completed;
    std::string diagnostic;

    std::string to_csv() const;
    std::string snapshots_csv(std::size_t k) const;
};

// One discriminator update on (real batch, fresh fake batch), then one
// generator update on a fresh fake batch. For mixture variants the generator
// backward pass also updates mu and sigma; sigma is clamped afterwards.
TrainRecord train_step(GanModel& m, const ad::Tensor& real_batch, Optimizers& opts,
                       const StepConfig& cfg, rng::Stream& latent_rng);

using CheckpointFn = std::function<void(const GanModel&, std::size_t iter)>;

std::pair<GanModel, TrainHistory> train(const ExperimentConfig& cfg,
                                        const CheckpointFn& checkpoint = {});

} // namespace deligan::gan
