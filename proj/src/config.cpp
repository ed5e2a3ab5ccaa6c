#include "deligan/config.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "deligan/error.hpp"

namespace deligan {

using nlohmann::json;

namespace {

nets::AdamConfig adam_from_json(const json& j, const nets::AdamConfig& defaults,
                                const std::string& where) {
    nets::AdamConfig out = defaults;
    out.lr = j.value("lr", out.lr);
    out.beta1 = j.value("beta1", out.beta1);
    out.beta2 = j.value("beta2", out.beta2);
    out.eps = j.value("eps", out.eps);
    if (out.lr <= 0.0) throw ConfigError(where + ".lr must be positive");
    return out;
}

json adam_to_json(const nets::AdamConfig& c) {
    return json{{"lr", c.lr}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"eps", c.eps}};
}

data::ToySpec toy_spec_from_json(const json& j) {
    if (j.contains("preset")) {
        const std::string p = j["preset"].get<std::string>();
        if (p == "unimodal") return data::ToySpec::unimodal_default();
        if (p == "bimodal") return data::ToySpec::bimodal_default();
        throw ConfigError("data.preset: unknown preset '" + p + "'");
    }
    if (!j.contains("modes")) throw ConfigError("data: toy data needs 'preset' or 'modes'");
    data::ToySpec spec;
    for (const auto& m : j["modes"]) {
        data::ToyMode mode;
        auto mean = m.at("mean").get<std::vector<double>>();
        auto cov = m.at("cov").get<std::vector<double>>();
        if (mean.size() != 2 || cov.size() != 2) {
            throw ConfigError("data.modes: mean and cov must each have 2 entries");
        }
        mode.mean = {mean[0], mean[1]};
        mode.cov_diag = {cov[0], cov[1]};
        mode.weight = m.at("weight").get<double>();
        spec.modes.push_back(mode);
    }
    try {
        spec.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("data.modes: ") + e.what());
    }
    return spec;
}

} // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::string& origin) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }

    ExperimentConfig cfg;
    if (!j.contains("version")) throw ConfigError(origin + ": missing 'version'");
    cfg.version = j["version"].get<int>();
    if (cfg.version != 1) {
        throw ConfigError(origin + ": unsupported config version " + std::to_string(cfg.version));
    }
    if (!j.contains("seed")) throw ConfigError(origin + ": 'seed' is mandatory");
    cfg.seed = j["seed"].get<std::uint64_t>();
    if (!j.contains("variant")) throw ConfigError(origin + ": missing 'variant'");
    cfg.variant = gan::variant_from_name(j["variant"].get<std::string>());

    if (j.contains("data")) {
        const auto& d = j["data"];
        const std::string kind = d.value("kind", "toy");
        if (kind == "toy") {
            ToyDataConfig t;
            t.spec = toy_spec_from_json(d);
            t.n_train = d.value("n_train", t.n_train);
            if (t.n_train == 0) throw ConfigError(origin + ": data.n_train must be >= 1");
            cfg.data = t;
        } else if (kind == "mnist") {
            MnistDataConfig m;
            m.images = d.at("images").get<std::string>();
            m.labels = d.at("labels").get<std::string>();
            m.per_class = d.value("per_class", m.per_class);
            for (const auto& p : {m.images, m.labels}) {
                if (!std::filesystem::exists(p)) {
                    throw ConfigError(origin + ": data path does not exist: '" + p + "'");
                }
            }
            cfg.data = m;
        } else {
            throw ConfigError(origin + ": data.kind must be 'toy' or 'mnist', got '" + kind + "'");
        }
    } else {
        cfg.data = ToyDataConfig{data::ToySpec::bimodal_default(), 10000};
    }

    if (j.contains("arch")) {
        const auto& a = j["arch"];
        cfg.arch.gen_hidden = a.value("gen_hidden", cfg.arch.gen_hidden);
        cfg.arch.disc_hidden = a.value("disc_hidden", cfg.arch.disc_hidden);
        if (a.contains("gen_hidden_activation")) {
            cfg.arch.gen_hidden_act =
                nets::activation_from_name(a["gen_hidden_activation"].get<std::string>());
        }
        if (a.contains("gen_out_activation")) {
            cfg.arch.gen_out_act =
                nets::activation_from_name(a["gen_out_activation"].get<std::string>());
        }
        cfg.arch.disc_leaky_slope = a.value("disc_leaky_slope", cfg.arch.disc_leaky_slope);
        if (cfg.arch.gen_hidden.empty() || cfg.arch.disc_hidden.empty()) {
            throw ConfigError(origin + ": arch hidden layer lists must be nonempty");
        }
    }

    if (j.contains("latent")) {
        const auto& l = j["latent"];
        cfg.n_components = l.value("n_components", cfg.n_components);
        cfg.latent_dim = l.value("dim", cfg.latent_dim);
        cfg.sigma0 = l.value("sigma0", cfg.sigma0);
        cfg.lambda = l.value("lambda", cfg.lambda);
        cfg.samples_per_component = l.value("samples_per_component", cfg.samples_per_component);
        if (l.contains("prior")) cfg.prior = latent::prior_from_name(l["prior"].get<std::string>());
        if (cfg.n_components == 0 || cfg.latent_dim == 0) {
            throw ConfigError(origin + ": latent.n_components and latent.dim must be >= 1");
        }
        if (cfg.sigma0 <= 0.0) throw ConfigError(origin + ": latent.sigma0 must be positive");
        if (cfg.lambda < 0.0) throw ConfigError(origin + ": latent.lambda must be >= 0");
    }

    if (j.contains("optimizer")) {
        const auto& o = j["optimizer"];
        if (o.contains("gen")) cfg.optimizer.gen = adam_from_json(o["gen"], cfg.optimizer.gen, "optimizer.gen");
        if (o.contains("disc")) {
            cfg.optimizer.disc = adam_from_json(o["disc"], cfg.optimizer.disc, "optimizer.disc");
        }
        if (o.contains("latent")) {
            cfg.optimizer.latent = adam_from_json(o["latent"], cfg.optimizer.gen, "optimizer.latent");
        }
    }

    cfg.iterations = j.value("iterations", cfg.iterations);
    cfg.batch = j.value("batch", cfg.batch);
    if (cfg.batch == 0) throw ConfigError(origin + ": batch must be >= 1");
    cfg.non_saturating = j.value("non_saturating", cfg.non_saturating);
    cfg.snapshot_every = j.value("snapshot_every", cfg.snapshot_every);
    cfg.checkpoint_every = j.value("checkpoint_every", cfg.checkpoint_every);
    cfg.out_dir = j.value("out", cfg.out_dir);

    if (j.contains("eval")) {
        const auto& e = j["eval"];
        cfg.eval.splits = e.value("splits", cfg.eval.splits);
        cfg.eval.pairs = e.value("pairs", cfg.eval.pairs);
        cfg.eval.radius_sigmas = e.value("radius_sigmas", cfg.eval.radius_sigmas);
        cfg.eval.samples = e.value("samples", cfg.eval.samples);
        if (cfg.eval.splits < 1) throw ConfigError(origin + ": eval.splits must be >= 1");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_config(text, path);
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["version"] = cfg.version;
    j["variant"] = gan::variant_name(cfg.variant);
    j["seed"] = cfg.seed;
    if (const auto* toy = cfg.toy()) {
        json modes = json::array();
        for (const auto& m : toy->spec.modes) {
            modes.push_back(json{{"mean", {m.mean[0], m.mean[1]}},
                                 {"cov", {m.cov_diag[0], m.cov_diag[1]}},
                                 {"weight", m.weight}});
        }
        j["data"] = json{{"kind", "toy"}, {"modes", modes}, {"n_train", toy->n_train}};
    } else if (const auto* mn = cfg.mnist()) {
        j["data"] = json{{"kind", "mnist"},
                         {"images", mn->images},
                         {"labels", mn->labels},
                         {"per_class", mn->per_class}};
    }
    j["arch"] = json{{"gen_hidden", cfg.arch.gen_hidden},
                     {"disc_hidden", cfg.arch.disc_hidden},
                     {"gen_hidden_activation", nets::activation_name(cfg.arch.gen_hidden_act)},
                     {"gen_out_activation", nets::activation_name(cfg.arch.gen_out_act)},
                     {"disc_leaky_slope", cfg.arch.disc_leaky_slope}};
    j["latent"] = json{{"n_components", cfg.n_components},
                       {"dim", cfg.latent_dim},
                       {"sigma0", cfg.sigma0},
                       {"lambda", cfg.lambda},
                       {"prior", latent::prior_name(cfg.prior)},
                       {"samples_per_component", cfg.samples_per_component}};
    j["optimizer"] = json{{"gen", adam_to_json(cfg.optimizer.gen)},
                          {"disc", adam_to_json(cfg.optimizer.disc)}};
    if (cfg.optimizer.latent) j["optimizer"]["latent"] = adam_to_json(*cfg.optimizer.latent);
    j["iterations"] = cfg.iterations;
    j["batch"] = cfg.batch;
    j["non_saturating"] = cfg.non_saturating;
    j["snapshot_every"] = cfg.snapshot_every;
    j["checkpoint_every"] = cfg.checkpoint_every;
    j["eval"] = json{{"splits", cfg.eval.splits},
                     {"pairs", cfg.eval.pairs},
                     {"radius_sigmas", cfg.eval.radius_sigmas},
                     {"samples", cfg.eval.samples}};
    if (!cfg.out_dir.empty()) j["out"] = cfg.out_dir;
    return j.dump(1, '\t') + "\n";
}

} // namespace deligan
