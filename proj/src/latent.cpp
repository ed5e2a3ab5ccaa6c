#include "deligan/latent.hpp"

#include <algorithm>
#include <cmath>

#include "deligan/csv.hpp"
#include "deligan/error.hpp"

namespace deligan::latent {

const char* prior_name(SimplePrior p) {
    return p == SimplePrior::uniform ? "uniform" : "normal";
}

SimplePrior prior_from_name(const std::string& name) {
    if (name == "uniform") return SimplePrior::uniform;
    if (name == "normal") return SimplePrior::normal;
    throw ConfigError("unknown prior '" + name + "'");
}

MixtureLatent mixture_init(std::size_t n_components, std::size_t dim, double sigma0,
                           rng::Stream& rng) {
    if (n_components == 0 || dim == 0) {
        throw ConfigError("mixture_init: N and K must be positive, got N=" +
                          std::to_string(n_components) + " K=" + std::to_string(dim));
    }
    if (sigma0 <= 0.0) throw ConfigError("mixture_init: sigma0 must be positive");
    std::vector<double> mu(n_components * dim);
    for (auto& v : mu) v = rng.uniform(-1.0, 1.0);
    MixtureLatent mix;
    mix.mu = ad::Tensor::from_values(n_components, dim, std::move(mu), true);
    mix.sigma = ad::Tensor::full(n_components, dim, sigma0, true);
    return mix;
}

LatentBatch sample_mixture_components(const MixtureLatent& mix, const std::vector<int>& ids,
                                      rng::Stream& rng) {
    const std::size_t batch = ids.size();
    const std::size_t k = mix.dim();
    std::vector<double> eps(batch * k);
    for (auto& e : eps) e = rng.normal();

    LatentBatch out;
    out.component_ids = ids;
    out.eps = ad::Tensor::from_values(batch, k, std::move(eps));
    out.z = ad::add(ad::gather_rows(mix.mu, ids), ad::mul(ad::gather_rows(mix.sigma, ids), out.eps));
    return out;
}

LatentBatch sample_mixture(const MixtureLatent& mix, std::size_t batch, rng::Stream& rng,
                           std::size_t samples_per_component) {
    if (batch == 0) throw ConfigError("sample_mixture: batch must be >= 1");
    const std::size_t n = mix.components();
    const std::size_t m = std::max<std::size_t>(1, samples_per_component);
    std::vector<int> ids;
    ids.reserve(batch);
    while (ids.size() < batch) {
        const int c = static_cast<int>(rng.uniform_index(n));
        for (std::size_t j = 0; j < m && ids.size() < batch; ++j) ids.push_back(c);
    }
    return sample_mixture_components(mix, ids, rng);
}

ad::Tensor sample_simple(SimplePrior kind, std::size_t batch, std::size_t dim, rng::Stream& rng) {
    std::vector<double> v(batch * dim);
    if (kind == SimplePrior::uniform) {
        for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    } else {
        for (auto& x : v) x = rng.normal();
    }
    return ad::Tensor::from_values(batch, dim, std::move(v));
}

double mixture_pdf(const MixtureLatent& mix, std::span<const double> z) {
    const std::size_t n = mix.components();
    const std::size_t k = mix.dim();
    if (z.size() != k) {
        throw ShapeError("mixture_pdf: point has dimension " + std::to_string(z.size()) +
                         ", mixture has K=" + std::to_string(k));
    }
    const auto& mu = mix.mu.values();
    const auto& sigma = mix.sigma.values();
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double comp = 1.0;
        for (std::size_t d = 0; d < k; ++d) {
            const double s = sigma[i * k + d];
            if (s <= 0.0) {
                throw DomainError("mixture_pdf: sigma[" + std::to_string(i) + "," +
                                  std::to_string(d) + "] = " + std::to_string(s) +
                                  " is not positive");
            }
            const double u = (z[d] - mu[i * k + d]) / s;
            comp *= inv_sqrt_2pi / s * std::exp(-0.5 * u * u);
        }
        total += comp;
    }
    return total / static_cast<double>(n);
}

ad::Tensor sigma_penalty(const MixtureLatent& mix, double lambda) {
    if (lambda < 0.0) throw ConfigError("sigma_penalty: lambda must be >= 0");
    return ad::mul_scalar(ad::mean(ad::square(ad::sub_from_scalar(1.0, mix.sigma))), lambda);
}

void clamp_sigma(MixtureLatent& mix, double floor) {
    for (auto& s : mix.sigma.values()) s = std::max(s, floor);
}

double sigma_mean(const MixtureLatent& mix) {
    double acc = 0.0;
    for (double s : mix.sigma.values()) acc += s;
    return acc / static_cast<double>(mix.sigma.size());
}

double sigma_min(const MixtureLatent& mix) {
    double best = mix.sigma.values()[0];
    for (double s : mix.sigma.values()) best = std::min(best, s);
    return best;
}

std::string to_csv(const MixtureLatent& mix) {
    const std::size_t k = mix.dim();
    std::string out;
    for (std::size_t d = 0; d < k; ++d) out += (d ? "," : "") + ("mu" + std::to_string(d));
    for (std::size_t d = 0; d < k; ++d) out += ",sigma" + std::to_string(d);
    out += "\n";
    const auto& mu = mix.mu.values();
    const auto& sigma = mix.sigma.values();
    for (std::size_t i = 0; i < mix.components(); ++i) {
        for (std::size_t d = 0; d < k; ++d) {
            if (d) out += ",";
            out += csv::format(mu[i * k + d]);
        }
        for (std::size_t d = 0; d < k; ++d) {
            out += ",";
            out += csv::format(sigma[i * k + d]);
        }
        out += "\n";
    }
    return out;
}

} // namespace deligan::latent
