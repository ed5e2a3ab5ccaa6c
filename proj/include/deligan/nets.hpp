#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "deligan/autodiff.hpp"
#include "deligan/rng.hpp"

namespace deligan::nets {

enum class Activation { none, relu, leaky_relu, tanh, sigmoid };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

enum class Init { xavier_uniform, normal };

struct Layer {
    ad::Tensor weight; // in x out
    ad::Tensor bias;   // 1 x out
    Activation act = Activation::none;
    double leaky_slope = 0.2;
};

// Dense feed-forward network. Weights are initialised per `init`
// (xavier_uniform by default, normal(std) otherwise), biases start at zero,
// and every parameter carries requires_grad.
class Mlp {
public:
    Mlp() = default;
    Mlp(const std::vector<std::size_t>& layer_sizes, const std::vector<Activation>& activations,
        Init init, rng::Stream& rng, double init_std = 0.02, double leaky_slope = 0.2);

    ad::Tensor forward(const ad::Tensor& x) const;

    std::vector<ad::Tensor> parameters() const;
    std::vector<std::pair<std::string, ad::Tensor>> named_parameters(
        const std::string& prefix = "") const;
    std::size_t parameter_count() const;
    void zero_grad() const;

    std::size_t input_dim() const { return layers_.front().weight.rows(); }
    std::size_t output_dim() const { return layers_.back().weight.cols(); }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

private:
    std::vector<Layer> layers_;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.5; // adversarial-training convention
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Standard bias-corrected Adam over a fixed parameter list. Reads gradients
// from the tensors; does not zero them (the caller owns that).
//
// A parameter registered with masked=true is updated elementwise only where
// its gradient is nonzero this step, with a per-element step counter for the
// bias correction — used for per-component latent updates in the ensemble
// variant, where only the chosen component's mu_i/sigma_i may move.
class Adam {
public:
    struct Param {
        std::string name;
        ad::Tensor tensor;
        bool masked = false;
    };

    Adam(std::vector<Param> params, AdamConfig cfg);

    void step();
    void zero_grad() const;
    std::uint64_t step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

private:
    struct State {
        std::vector<double> m;
        std::vector<double> v;
        std::vector<std::uint64_t> t; // only for masked params
    };
    std::vector<Param> params_;
    std::vector<State> states_;
    AdamConfig cfg_;
    std::uint64_t step_ = 0;
};

class Sgd {
public:
    Sgd(std::vector<ad::Tensor> params, double lr) : params_(std::move(params)), lr_(lr) {}
    void step() const;
    void zero_grad() const;

private:
    std::vector<ad::Tensor> params_;
    double lr_;
};

} // namespace deligan::nets
