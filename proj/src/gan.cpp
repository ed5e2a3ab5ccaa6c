#include "deligan/gan.hpp"

#include <algorithm>
#include <cmath>

#include "deligan/config.hpp"
#include "deligan/csv.hpp"
#include "deligan/error.hpp"

namespace deligan::gan {

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::baseline: return "baseline";
        case Variant::deligan: return "deligan";
        case Variant::gan_pp: return "gan_pp";
        case Variant::ensemble: return "ensemble";
        case Variant::nx: return "nx";
        case Variant::moe: return "moe";
    }
    return "baseline";
}

Variant variant_from_name(const std::string& name) {
    for (Variant v : {Variant::baseline, Variant::deligan, Variant::gan_pp, Variant::ensemble,
                      Variant::nx, Variant::moe}) {
        if (name == variant_name(v)) return v;
    }
    throw ConfigError("unknown variant '" + name + "'");
}

namespace {

nets::Mlp make_generator(const GanArch& arch, std::size_t input_dim,
                         const std::vector<std::size_t>& hidden, rng::Stream& rng) {
    std::vector<std::size_t> sizes{input_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(arch.data_dim);
    std::vector<nets::Activation> acts(hidden.size(), arch.gen_hidden_act);
    acts.push_back(arch.gen_out_act);
    return nets::Mlp(sizes, acts, nets::Init::xavier_uniform, rng);
}

nets::Mlp make_discriminator(const GanArch& arch, rng::Stream& rng) {
    std::vector<std::size_t> sizes{arch.data_dim};
    sizes.insert(sizes.end(), arch.disc_hidden.begin(), arch.disc_hidden.end());
    sizes.push_back(1);
    std::vector<nets::Activation> acts(arch.disc_hidden.size(), nets::Activation::leaky_relu);
    acts.push_back(nets::Activation::sigmoid);
    return nets::Mlp(sizes, acts, nets::Init::xavier_uniform, rng, 0.02, arch.disc_leaky_slope);
}

// One-hot columns appended to z for the moe variant.
ad::Tensor append_one_hot(const ad::Tensor& z, const std::vector<int>& ids, std::size_t n) {
    const std::size_t batch = z.rows(), k = z.cols();
    std::vector<double> v(batch * (k + n), 0.0);
    const auto& zv = z.values();
    for (std::size_t r = 0; r < batch; ++r) {
        std::copy(zv.begin() + r * k, zv.begin() + (r + 1) * k, v.begin() + r * (k + n));
        v[r * (k + n) + k + static_cast<std::size_t>(ids[r])] = 1.0;
    }
    return ad::Tensor::from_values(batch, k + n, std::move(v));
}

void require_probabilities(const ad::Tensor& t, const char* where) {
    for (double v : t.values()) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw NumericError(std::string(where) + ": value " + std::to_string(v) +
                               " is not a probability");
        }
    }
}

} // namespace

GanModel build_variant(Variant v, const GanArch& arch, std::size_t n, std::size_t k,
                       rng::Stream& rng, double sigma0) {
    if (n < 1) throw ConfigError("build_variant: N must be >= 1");
    if (k < 1) throw ConfigError("build_variant: K must be >= 1");

    GanModel m;
    m.variant = v;
    m.latent_dim = k;
    m.n_components = n;
    m.data_dim = arch.data_dim;

    switch (v) {
        case Variant::baseline:
            m.generators.push_back(make_generator(arch, k, arch.gen_hidden, rng));
            break;
        case Variant::deligan:
            m.generators.push_back(make_generator(arch, k, arch.gen_hidden, rng));
            break;
        case Variant::gan_pp: {
            std::vector<std::size_t> hidden{n};
            hidden.insert(hidden.end(), arch.gen_hidden.begin(), arch.gen_hidden.end());
            m.generators.push_back(make_generator(arch, k, hidden, rng));
            break;
        }
        case Variant::ensemble:
            for (std::size_t i = 0; i < n; ++i) {
                m.generators.push_back(make_generator(arch, k, arch.gen_hidden, rng));
            }
            break;
        case Variant::nx: {
            std::vector<std::size_t> hidden = arch.gen_hidden;
            for (auto& h : hidden) h *= n;
            m.generators.push_back(make_generator(arch, k, hidden, rng));
            break;
        }
        case Variant::moe:
            m.generators.push_back(make_generator(arch, k + n, arch.gen_hidden, rng));
            break;
    }

    m.discriminator = make_discriminator(arch, rng);

    if (v == Variant::deligan || v == Variant::ensemble) {
        m.mixture = latent::mixture_init(n, k, sigma0, rng);
    }
    return m;
}

ParamCounts param_counts(const GanModel& m) {
    ParamCounts c;
    for (const auto& g : m.generators) c.generators += g.parameter_count();
    c.discriminator = m.discriminator.parameter_count();
    if (m.mixture) c.latent = m.mixture->mu.size() + m.mixture->sigma.size();
    return c;
}

std::string ParamCounts::to_string() const {
    return "generators=" + std::to_string(generators) +
           " discriminator=" + std::to_string(discriminator) + " latent=" + std::to_string(latent) +
           " total=" + std::to_string(total());
}

ad::Tensor discriminator_loss(const ad::Tensor& d_real, const ad::Tensor& d_fake) {
    require_probabilities(d_real, "discriminator_loss(d_real)");
    require_probabilities(d_fake, "discriminator_loss(d_fake)");
    auto real_term = ad::mean(ad::log(d_real));
    auto fake_term = ad::mean(ad::log(ad::sub_from_scalar(1.0, d_fake)));
    return ad::neg(ad::add(real_term, fake_term));
}

ad::Tensor generator_loss(const ad::Tensor& d_fake, const latent::MixtureLatent* mix,
                          double lambda, bool non_saturating) {
    require_probabilities(d_fake, "generator_loss(d_fake)");
    ad::Tensor loss = non_saturating ? ad::neg(ad::mean(ad::log(d_fake)))
                                     : ad::mean(ad::log(ad::sub_from_scalar(1.0, d_fake)));
    if (mix) {
        loss = ad::add(loss, latent::sigma_penalty(*mix, lambda));
    }
    return loss;
}

FakeBatch generate_fake(const GanModel& m, std::size_t batch, rng::Stream& rng) {
    FakeBatch fb;
    switch (m.variant) {
        case Variant::baseline:
        case Variant::gan_pp:
        case Variant::nx: {
            auto z = latent::sample_simple(m.prior, batch, m.latent_dim, rng);
            fb.x = m.generators[0].forward(z);
            break;
        }
        case Variant::moe: {
            auto z = latent::sample_simple(m.prior, batch, m.latent_dim, rng);
            fb.component_ids.resize(batch);
            for (auto& id : fb.component_ids) {
                id = static_cast<int>(rng.uniform_index(m.n_components));
            }
            fb.x = m.generators[0].forward(append_one_hot(z, fb.component_ids, m.n_components));
            break;
        }
        case Variant::deligan: {
            auto lb = latent::sample_mixture(*m.mixture, batch, rng, m.samples_per_component);
            fb.component_ids = lb.component_ids;
            fb.x = m.generators[0].forward(lb.z);
            break;
        }
        case Variant::ensemble: {
            // one generator (and its component) per training phase
            const int choice = static_cast<int>(rng.uniform_index(m.n_components));
            std::vector<int> ids(batch, choice);
            auto lb = latent::sample_mixture_components(*m.mixture, ids, rng);
            fb.component_ids = std::move(ids);
            fb.ensemble_choice = choice;
            fb.x = m.generators[static_cast<std::size_t>(choice)].forward(lb.z);
            break;
        }
    }
    return fb;
}

ad::Tensor sample_values(const GanModel& m, std::size_t n, rng::Stream& rng) {
    if (m.variant != Variant::ensemble) {
        return generate_fake(m, n, rng).x;
    }
    // per-sample expert choice, batched per generator
    std::vector<int> ids(n);
    for (auto& id : ids) id = static_cast<int>(rng.uniform_index(m.n_components));
    auto lb = latent::sample_mixture_components(*m.mixture, ids, rng);
    ad::Tensor out = ad::Tensor::zeros(n, m.data_dim);
    for (std::size_t g = 0; g < m.n_components; ++g) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < n; ++i) {
            if (ids[i] == static_cast<int>(g)) rows.push_back(i);
        }
        if (rows.empty()) continue;
        std::vector<double> sub(rows.size() * m.latent_dim);
        const auto& zv = lb.z.values();
        for (std::size_t r = 0; r < rows.size(); ++r) {
            std::copy(zv.begin() + rows[r] * m.latent_dim, zv.begin() + (rows[r] + 1) * m.latent_dim,
                      sub.begin() + r * m.latent_dim);
        }
        auto x = m.generators[g].forward(
            ad::Tensor::from_values(rows.size(), m.latent_dim, std::move(sub)));
        const auto& xv = x.values();
        auto& ov = out.values();
        for (std::size_t r = 0; r < rows.size(); ++r) {
            std::copy(xv.begin() + r * m.data_dim, xv.begin() + (r + 1) * m.data_dim,
                      ov.begin() + rows[r] * m.data_dim);
        }
    }
    return out;
}

Optimizers make_optimizers(GanModel& m, const OptimizerSettings& settings) {
    std::vector<nets::Adam::Param> disc_params;
    for (auto& [name, t] : m.discriminator.named_parameters("disc.")) {
        disc_params.push_back({name, t, false});
    }

    std::vector<nets::Adam> gens;
    const bool ensemble = m.variant == Variant::ensemble;
    for (std::size_t g = 0; g < m.generators.size(); ++g) {
        std::vector<nets::Adam::Param> ps;
        for (auto& [name, t] :
             m.generators[g].named_parameters("gen" + std::to_string(g) + ".")) {
            ps.push_back({name, t, false});
        }
        if (m.mixture && !ensemble && !settings.latent && g == 0) {
            // default: mu/sigma ride in the generator's optimizer
            ps.push_back({"latent.mu", m.mixture->mu, false});
            ps.push_back({"latent.sigma", m.mixture->sigma, false});
        }
        gens.emplace_back(std::move(ps), settings.gen);
    }

    std::optional<nets::Adam> latent_opt;
    if (m.mixture && (ensemble || settings.latent)) {
        // ensemble: only the chosen component's mu_i/sigma_i may move, so the
        // update is masked to rows that received gradient.
        std::vector<nets::Adam::Param> ps{{"latent.mu", m.mixture->mu, ensemble},
                                          {"latent.sigma", m.mixture->sigma, ensemble}};
        latent_opt.emplace(std::move(ps), settings.latent.value_or(settings.gen));
    }

    return Optimizers{nets::Adam(std::move(disc_params), settings.disc), std::move(gens),
                      std::move(latent_opt)};
}

namespace {

double mean_of(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

void zero_all(GanModel& m) {
    for (auto& g : m.generators) g.zero_grad();
    m.discriminator.zero_grad();
    if (m.mixture) {
        m.mixture->mu.zero_grad();
        m.mixture->sigma.zero_grad();
    }
}

} // namespace

TrainRecord train_step(GanModel& m, const ad::Tensor& real_batch, Optimizers& opts,
                       const StepConfig& cfg, rng::Stream& latent_rng) {
    if (real_batch.rows() == 0) throw DataError("train_step: empty real batch");
    TrainRecord rec;
    const std::size_t batch = real_batch.rows();

    // Discriminator phase. The fake batch is generated outside the tape, so
    // no gradient ever reaches generator or latent parameters here.
    ad::Tensor fake = generate_fake(m, batch, latent_rng).x;
    {
        ad::GradientTape tape;
        auto d_real = m.discriminator.forward(real_batch);
        auto d_fake = m.discriminator.forward(fake);
        auto loss = discriminator_loss(d_real, d_fake);
        tape.backward(loss);
        opts.disc.step();
        rec.d_loss = loss.item();
        rec.d_real_mean = mean_of(d_real.values());
        rec.d_fake_mean = mean_of(d_fake.values());
    }
    zero_all(m);

    // Generator phase: fresh fake batch, gradients flow through G (and the
    // mixture for deligan/ensemble); the discriminator is not stepped.
    {
        ad::GradientTape tape;
        FakeBatch fb = generate_fake(m, batch, latent_rng);
        auto d_fake = m.discriminator.forward(fb.x);
        const latent::MixtureLatent* mix = m.mixture ? &*m.mixture : nullptr;
        auto loss = generator_loss(d_fake, mix, cfg.lambda, cfg.non_saturating);
        tape.backward(loss);
        if (m.variant == Variant::ensemble) {
            opts.gens[static_cast<std::size_t>(fb.ensemble_choice)].step();
        } else {
            opts.gens[0].step();
        }
        if (opts.latent) opts.latent->step();
        rec.g_loss = loss.item();
    }
    zero_all(m);

    if (m.mixture) {
        latent::clamp_sigma(*m.mixture, cfg.sigma_floor);
        rec.sigma_min = latent::sigma_min(*m.mixture);
        rec.sigma_mean = latent::sigma_mean(*m.mixture);
    }
    return rec;
}

std::string TrainHistory::to_csv() const {
    std::string out = "iter,d_loss,g_loss,d_real_mean,d_fake_mean,sigma_min,sigma_mean\n";
    for (const auto& r : records) {
        out += std::to_string(r.iter) + "," + csv::format(r.d_loss) + "," + csv::format(r.g_loss) +
               "," + csv::format(r.d_real_mean) + "," + csv::format(r.d_fake_mean) + "," +
               csv::format(r.sigma_min) + "," + csv::format(r.sigma_mean) + "\n";
    }
    return out;
}

std::string TrainHistory::snapshots_csv(std::size_t k) const {
    std::string out = "iter,component";
    for (std::size_t d = 0; d < k; ++d) out += ",mu" + std::to_string(d);
    for (std::size_t d = 0; d < k; ++d) out += ",sigma" + std::to_string(d);
    out += "\n";
    for (const auto& s : mu_snapshots) {
        const std::size_t n = k == 0 ? 0 : s.mu.size() / k;
        for (std::size_t i = 0; i < n; ++i) {
            out += std::to_string(s.iter) + "," + std::to_string(i);
            for (std::size_t d = 0; d < k; ++d) out += "," + csv::format(s.mu[i * k + d]);
            for (std::size_t d = 0; d < k; ++d) out += "," + csv::format(s.sigma[i * k + d]);
            out += "\n";
        }
    }
    return out;
}

std::pair<GanModel, TrainHistory> train(const ExperimentConfig& cfg, const CheckpointFn& checkpoint) {
    auto data_rng = rng::substream(cfg.seed, "data");
    auto init_rng = rng::substream(cfg.seed, "init");
    auto latent_rng = rng::substream(cfg.seed, "latent");

    data::Dataset pool;
    if (const auto* toy = cfg.toy()) {
        pool = data::sample_toy(toy->spec, toy->n_train, data_rng);
    } else {
        const auto* mn = cfg.mnist();
        pool = data::load_mnist_idx(mn->images, mn->labels);
        pool = data::subset_balanced(pool, mn->per_class, data_rng);
    }

    GanArch arch = cfg.arch;
    arch.data_dim = pool.dim();
    GanModel model =
        build_variant(cfg.variant, arch, cfg.n_components, cfg.latent_dim, init_rng, cfg.sigma0);
    model.prior = cfg.prior;
    model.samples_per_component = cfg.samples_per_component;

    Optimizers opts = make_optimizers(model, cfg.optimizer);
    StepConfig step_cfg{cfg.lambda, cfg.non_saturating, 1e-4};

    TrainHistory history;
    auto snapshot = [&](std::size_t iter) {
        if (!model.mixture) return;
        if (!history.mu_snapshots.empty() && history.mu_snapshots.back().iter == iter) return;
        history.mu_snapshots.push_back(
            MuSnapshot{iter, model.mixture->mu.values(), model.mixture->sigma.values()});
    };

    std::size_t last_iter = 0;
    for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
        last_iter = iter;
        if (cfg.snapshot_every > 0 && iter % cfg.snapshot_every == 0) snapshot(iter);
        TrainRecord rec;
        try {
            auto real = data::sample_rows(pool, cfg.batch, data_rng);
            rec = train_step(model, real, opts, step_cfg, latent_rng);
        } catch (const NumericError& e) {
            history.status = RunStatus::diverged;
            history.diagnostic = e.what();
            break;
        }
        rec.iter = iter;
        history.records.push_back(rec);
        if (!std::isfinite(rec.d_loss) || !std::isfinite(rec.g_loss) ||
            std::abs(rec.d_loss) > 1e6 || std::abs(rec.g_loss) > 1e6) {
            history.status = RunStatus::diverged;
            history.diagnostic = "loss diverged at iter " + std::to_string(iter);
            break;
        }
        last_iter = iter + 1;
        if (checkpoint && cfg.checkpoint_every > 0 && (iter + 1) % cfg.checkpoint_every == 0) {
            checkpoint(model, iter + 1);
        }
    }
    if (history.status == RunStatus::completed) last_iter = cfg.iterations;
    snapshot(last_iter);
    if (checkpoint) checkpoint(model, last_iter);
    return {std::move(model), std::move(history)};
}

} // namespace deligan::gan
