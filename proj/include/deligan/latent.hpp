#pragma once

#include <span>
#include <string>
#include <vector>

#include "deligan/autodiff.hpp"
#include "deligan/rng.hpp"

namespace deligan::latent {

enum class SimplePrior { uniform, normal };

const char* prior_name(SimplePrior p);
SimplePrior prior_from_name(const std::string& name);

// Learnable mixture-of-Gaussians prior: N diagonal components over a
// K-dimensional latent space. Component weights are uniform (1/N each) and
// not stored; mu and sigma are trained with the generator.
struct MixtureLatent {
    ad::Tensor mu;    // N x K
    ad::Tensor sigma; // N x K

    std::size_t components() const { return mu.rows(); }
    std::size_t dim() const { return mu.cols(); }
};

// mu entries i.i.d. U(-1,1); every sigma entry starts at sigma0.
MixtureLatent mixture_init(std::size_t n_components, std::size_t dim, double sigma0,
                           rng::Stream& rng);

struct LatentBatch {
    ad::Tensor z;                   // B x K, graph-connected to mu and sigma
    std::vector<int> component_ids; // B
    ad::Tensor eps;                 // B x K, the auxiliary noise actually drawn
};

// Each row picks a component uniformly and applies the reparameterization
// z = mu_c + sigma_c ⊙ eps with eps ~ N(0, I). With samples_per_component > 1
// consecutive rows share a component, which averages the mu/sigma gradients
// over several eps draws.
LatentBatch sample_mixture(const MixtureLatent& mix, std::size_t batch, rng::Stream& rng,
                           std::size_t samples_per_component = 1);

// Rows drawn from the chosen component ids instead of fresh uniform picks.
LatentBatch sample_mixture_components(const MixtureLatent& mix, const std::vector<int>& ids,
                                      rng::Stream& rng);

ad::Tensor sample_simple(SimplePrior kind, std::size_t batch, std::size_t dim, rng::Stream& rng);

// Average of the component densities at a point; diagnostic only.
double mixture_pdf(const MixtureLatent& mix, std::span<const double> z);

// lambda * mean_i mean_k (1 - sigma_ik)^2, graph-connected to sigma. The
// per-component deviation is averaged over the K diagonal entries so the
// penalty scale does not grow with the latent dimension.
ad::Tensor sigma_penalty(const MixtureLatent& mix, double lambda);

// Applied after each optimizer step; keeps a collapsing sigma from reaching 0.
void clamp_sigma(MixtureLatent& mix, double floor = 1e-4);

double sigma_mean(const MixtureLatent& mix);
double sigma_min(const MixtureLatent& mix);

// CSV export, N rows with 2K columns: mu then sigma.
std::string to_csv(const MixtureLatent& mix);

} // namespace deligan::latent
