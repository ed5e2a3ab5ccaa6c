#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deligan/autodiff.hpp"
#include "deligan/data.hpp"
#include "deligan/nets.hpp"
#include "deligan/rng.hpp"

namespace deligan::metrics {

// Per-sample class distributions p(y|x); rows sum to 1.
struct ClassProbMatrix {
    ad::Tensor probs;           // M x C
    std::vector<int> predicted; // argmax per row, ties to the lower class id

    static ClassProbMatrix from_probs(ad::Tensor probs);

    std::size_t samples() const { return probs.rows(); }
    std::size_t classes() const { return probs.cols(); }
};

struct ClassifierConfig {
    std::vector<std::size_t> hidden{32};
    nets::Activation hidden_act = nets::Activation::tanh;
    std::size_t steps = 400;
    std::size_t batch = 64;
    double lr = 1e-2;
    double holdout_fraction = 0.25;
    double accuracy_floor = 0.9; // 0.8 for the MNIST subset protocol
};

// Locally trained softmax stand-in for the inception network. Scores from it
// are comparable across variants within this repo, not against published
// absolute numbers.
struct Classifier {
    nets::Mlp net;
    double holdout_accuracy = 0.0;
    std::size_t n_classes = 0;
};

// Throws MetricError when held-out accuracy lands below cfg.accuracy_floor.
Classifier train_classifier(const data::Dataset& d, const ClassifierConfig& cfg, rng::Stream& rng);

ClassProbMatrix classify(const Classifier& clf, const ad::Tensor& samples);

struct ScoreEntry {
    int cls;
    double mean;
    double stddev;
};

struct ScoreReport {
    std::vector<ScoreEntry> per_class;
    double overall_mean = 0.0;
    double overall_std = 0.0;
    int splits = 1;
    std::string notes;

    std::string to_csv() const; // class,mean,std rows then an overall row
};

// exp(E_x KL(p(y|x) || p(y))), p(y) estimated per split as the column mean;
// reported as mean +- std over splits.
ScoreReport inception_score(const ClassProbMatrix& p, int splits);

// exp(E_xi E_xj KL(p(y|xi) || p(y|xj))) with xj restricted to samples sharing
// xi's predicted class. pairs_per_sample == 0 pairs each sample with every
// other member of its class; otherwise partners are drawn uniformly.
// Per-class scores are mean +- std over splits; the overall row is the mean
// and std across the per-class means.
ScoreReport modified_inception_score(const ClassProbMatrix& p, int splits, int pairs_per_sample,
                                     std::uint64_t pairing_seed);

struct ModeCoverage {
    std::vector<double> per_mode_fraction;
    int covered_modes = 0; // modes with fraction >= 0.05
    double void_fraction = 0.0;
};

// Assigns each sample to the nearest mode by diagonal Mahalanobis distance if
// within radius_sigmas, else to the void.
ModeCoverage mode_coverage(const ad::Tensor& samples, const data::ToySpec& spec,
                           double radius_sigmas);

// Exact k-NN under L2; ties broken by the lower training index.
std::vector<std::vector<std::size_t>> nearest_neighbors(const ad::Tensor& generated,
                                                        const ad::Tensor& train, std::size_t k);

} // namespace deligan::metrics
