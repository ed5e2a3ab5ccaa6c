#include "deligan/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "deligan/error.hpp"

namespace deligan::ckpt {

using nlohmann::json;

namespace {

json mlp_to_json(const nets::Mlp& net) {
    json layers = json::array();
    json sizes = json::array();
    json acts = json::array();
    sizes.push_back(net.input_dim());
    for (const auto& l : net.layers()) {
        sizes.push_back(l.weight.cols());
        acts.push_back(nets::activation_name(l.act));
        layers.push_back(json{{"weight", l.weight.values()}, {"bias", l.bias.values()}});
    }
    double slope = net.layers().empty() ? 0.2 : net.layers().front().leaky_slope;
    return json{{"sizes", sizes}, {"activations", acts}, {"leaky_slope", slope}, {"layers", layers}};
}

nets::Mlp mlp_from_json(const json& j) {
    std::vector<std::size_t> sizes = j.at("sizes").get<std::vector<std::size_t>>();
    std::vector<nets::Activation> acts;
    for (const auto& a : j.at("activations")) {
        acts.push_back(nets::activation_from_name(a.get<std::string>()));
    }
    rng::Stream dummy(0);
    nets::Mlp net(sizes, acts, nets::Init::xavier_uniform, dummy, 0.02,
                  j.at("leaky_slope").get<double>());
    const auto& layers = j.at("layers");
    if (layers.size() != net.layers().size()) {
        throw FormatError("checkpoint: layer count mismatch");
    }
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
        auto w = layers[i].at("weight").get<std::vector<double>>();
        auto b = layers[i].at("bias").get<std::vector<double>>();
        if (w.size() != net.layers()[i].weight.size() || b.size() != net.layers()[i].bias.size()) {
            throw FormatError("checkpoint: parameter buffer size mismatch in layer " +
                              std::to_string(i));
        }
        net.layers()[i].weight.values() = std::move(w);
        net.layers()[i].bias.values() = std::move(b);
    }
    return net;
}

json load_json(const std::string& path, const char* expected_kind) {
    std::ifstream f(path);
    if (!f) throw DataError("checkpoint: cannot open '" + path + "'");
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw FormatError("checkpoint: '" + path + "' is not valid JSON: " + e.what());
    }
    if (j.value("format", "") != "deligan-checkpoint") {
        throw FormatError("checkpoint: '" + path + "' is not a checkpoint file");
    }
    if (j.value("version", 0) != 1) {
        throw FormatError("checkpoint: unsupported version in '" + path + "'");
    }
    if (j.value("kind", "") != expected_kind) {
        throw FormatError("checkpoint: '" + path + "' holds a '" + j.value("kind", "?") +
                          "', expected '" + expected_kind + "'");
    }
    return j;
}

void dump(const json& j, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("checkpoint: cannot open '" + path + "' for writing");
    f << j.dump(1, '\t') << "\n";
}

} // namespace

void save_gan(const gan::GanModel& m, const std::string& path) {
    json j{{"format", "deligan-checkpoint"},
           {"version", 1},
           {"kind", "gan"},
           {"variant", gan::variant_name(m.variant)},
           {"prior", latent::prior_name(m.prior)},
           {"latent_dim", m.latent_dim},
           {"n_components", m.n_components},
           {"data_dim", m.data_dim},
           {"samples_per_component", m.samples_per_component}};
    json gens = json::array();
    for (const auto& g : m.generators) gens.push_back(mlp_to_json(g));
    j["generators"] = std::move(gens);
    j["discriminator"] = mlp_to_json(m.discriminator);
    if (m.mixture) {
        j["mixture"] = json{{"mu", m.mixture->mu.values()}, {"sigma", m.mixture->sigma.values()}};
    }
    dump(j, path);
}

gan::GanModel load_gan(const std::string& path) {
    json j = load_json(path, "gan");
    gan::GanModel m;
    m.variant = gan::variant_from_name(j.at("variant").get<std::string>());
    m.prior = latent::prior_from_name(j.at("prior").get<std::string>());
    m.latent_dim = j.at("latent_dim").get<std::size_t>();
    m.n_components = j.at("n_components").get<std::size_t>();
    m.data_dim = j.at("data_dim").get<std::size_t>();
    m.samples_per_component = j.value("samples_per_component", std::size_t{1});
    for (const auto& g : j.at("generators")) m.generators.push_back(mlp_from_json(g));
    m.discriminator = mlp_from_json(j.at("discriminator"));
    if (j.contains("mixture")) {
        auto mu = j["mixture"].at("mu").get<std::vector<double>>();
        auto sigma = j["mixture"].at("sigma").get<std::vector<double>>();
        const std::size_t n = m.n_components, k = m.latent_dim;
        if (mu.size() != n * k || sigma.size() != n * k) {
            throw FormatError("checkpoint: mixture buffers do not match N x K");
        }
        latent::MixtureLatent mix;
        mix.mu = ad::Tensor::from_values(n, k, std::move(mu), true);
        mix.sigma = ad::Tensor::from_values(n, k, std::move(sigma), true);
        m.mixture = std::move(mix);
    }
    return m;
}

void save_classifier(const metrics::Classifier& clf, const std::string& path) {
    json j{{"format", "deligan-checkpoint"},
           {"version", 1},
           {"kind", "classifier"},
           {"net", mlp_to_json(clf.net)},
           {"holdout_accuracy", clf.holdout_accuracy},
           {"n_classes", clf.n_classes}};
    dump(j, path);
}

metrics::Classifier load_classifier(const std::string& path) {
    json j = load_json(path, "classifier");
    metrics::Classifier clf;
    clf.net = mlp_from_json(j.at("net"));
    clf.holdout_accuracy = j.at("holdout_accuracy").get<double>();
    clf.n_classes = j.at("n_classes").get<std::size_t>();
    return clf;
}

} // namespace deligan::ckpt
