#include "deligan/nets.hpp"

#include <cmath>

#include "deligan/error.hpp"

namespace deligan::nets {

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::none: return "none";
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
    }
    return "none";
}

Activation activation_from_name(const std::string& name) {
    if (name == "none") return Activation::none;
    if (name == "relu") return Activation::relu;
    if (name == "leaky_relu") return Activation::leaky_relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "sigmoid") return Activation::sigmoid;
    throw ConfigError("unknown activation '" + name + "'");
}

Mlp::Mlp(const std::vector<std::size_t>& layer_sizes, const std::vector<Activation>& activations,
         Init init, rng::Stream& rng, double init_std, double leaky_slope) {
    if (layer_sizes.size() < 2) {
        throw ConfigError("mlp: need at least an input and an output size, got " +
                          std::to_string(layer_sizes.size()));
    }
    if (activations.size() != layer_sizes.size() - 1) {
        throw ConfigError("mlp: " + std::to_string(layer_sizes.size() - 1) + " layers but " +
                          std::to_string(activations.size()) + " activations");
    }
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const std::size_t fan_in = layer_sizes[l];
        const std::size_t fan_out = layer_sizes[l + 1];
        if (fan_in == 0 || fan_out == 0) throw ConfigError("mlp: zero-width layer");
        std::vector<double> w(fan_in * fan_out);
        if (init == Init::xavier_uniform) {
            const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            for (auto& x : w) x = rng.uniform(-limit, limit);
        } else {
            for (auto& x : w) x = init_std * rng.normal();
        }
        Layer layer;
        layer.weight = ad::Tensor::from_values(fan_in, fan_out, std::move(w), true);
        layer.bias = ad::Tensor::zeros(1, fan_out, true);
        layer.act = activations[l];
        layer.leaky_slope = leaky_slope;
        layers_.push_back(std::move(layer));
    }
}

ad::Tensor Mlp::forward(const ad::Tensor& x) const {
    if (x.cols() != input_dim()) {
        throw ShapeError("mlp forward: input has " + std::to_string(x.cols()) +
                         " columns, network expects " + std::to_string(input_dim()));
    }
    ad::Tensor h = x;
    for (const auto& layer : layers_) {
        h = ad::add_bias(ad::matmul(h, layer.weight), layer.bias);
        switch (layer.act) {
            case Activation::none: break;
            case Activation::relu: h = ad::relu(h); break;
            case Activation::leaky_relu: h = ad::leaky_relu(h, layer.leaky_slope); break;
            case Activation::tanh: h = ad::tanh(h); break;
            case Activation::sigmoid: h = ad::sigmoid(h); break;
        }
    }
    return h;
}

std::vector<ad::Tensor> Mlp::parameters() const {
    std::vector<ad::Tensor> out;
    for (const auto& l : layers_) {
        out.push_back(l.weight);
        out.push_back(l.bias);
    }
    return out;
}

std::vector<std::pair<std::string, ad::Tensor>> Mlp::named_parameters(
    const std::string& prefix) const {
    std::vector<std::pair<std::string, ad::Tensor>> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        out.emplace_back(prefix + "layer" + std::to_string(i) + ".weight", layers_[i].weight);
        out.emplace_back(prefix + "layer" + std::to_string(i) + ".bias", layers_[i].bias);
    }
    return out;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
}

void Mlp::zero_grad() const {
    for (auto& p : parameters()) p.zero_grad();
}

Adam::Adam(std::vector<Param> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    states_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        states_[i].m.assign(params_[i].tensor.size(), 0.0);
        states_[i].v.assign(params_[i].tensor.size(), 0.0);
        if (params_[i].masked) states_[i].t.assign(params_[i].tensor.size(), 0);
    }
}

void Adam::step() {
    ++step_;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& p = params_[i];
        auto& s = states_[i];
        auto& vals = p.tensor.values();
        const auto& g = p.tensor.grad();
        for (std::size_t j = 0; j < vals.size(); ++j) {
            if (std::isnan(g[j])) {
                throw NumericError("adam: NaN gradient in parameter '" + p.name + "'");
            }
            std::uint64_t t;
            if (p.masked) {
                if (g[j] == 0.0) continue;
                t = ++s.t[j];
            } else {
                t = step_;
            }
            s.m[j] = cfg_.beta1 * s.m[j] + (1.0 - cfg_.beta1) * g[j];
            s.v[j] = cfg_.beta2 * s.v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
            const double mhat = s.m[j] / (1.0 - std::pow(cfg_.beta1, static_cast<double>(t)));
            const double vhat = s.v[j] / (1.0 - std::pow(cfg_.beta2, static_cast<double>(t)));
            vals[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

void Adam::zero_grad() const {
    for (auto p : params_) p.tensor.zero_grad();
}

void Sgd::step() const {
    for (auto p : params_) {
        auto& vals = p.values();
        const auto& g = p.grad();
        for (std::size_t j = 0; j < vals.size(); ++j) {
            if (std::isnan(g[j])) throw NumericError("sgd: NaN gradient");
            vals[j] -= lr_ * g[j];
        }
    }
}

void Sgd::zero_grad() const {
    for (auto p : params_) p.zero_grad();
}

} // namespace deligan::nets
