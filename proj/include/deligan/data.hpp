#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deligan/autodiff.hpp"
#include "deligan/rng.hpp"

namespace deligan::data {

struct ToyMode {
    std::array<double, 2> mean;
    std::array<double, 2> cov_diag;
    double weight = 1.0;
};

struct ToySpec {
    std::vector<ToyMode> modes;

    void validate() const; // weights positive and sum to 1; cov entries > 0

    static ToySpec unimodal_default(); // mean (0,0), cov (0.25,0.25)
    static ToySpec bimodal_default();  // means (-3,0),(3,0), cov (0.25,0.25), weights 1/2
};

struct Dataset {
    ad::Tensor samples; // M x D, plain values
    std::optional<std::vector<int>> labels;
    std::string source;

    std::size_t size() const { return samples.rows(); }
    std::size_t dim() const { return samples.cols(); }
};

// Each sample picks a mode by weight, then draws from its diagonal Gaussian.
// Labels record the mode index.
Dataset sample_toy(const ToySpec& spec, std::size_t n, rng::Stream& rng);

// IDX ingestion (big-endian, magic 0x803 for images / 0x801 for labels).
// Pixels are scaled to [-1, 1]; labels are 0-9.
Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path);

// IDX writers for fixtures and exports; images are row-major bytes.
void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::uint32_t count, std::uint32_t img_rows, std::uint32_t img_cols);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

// Uniformly samples per_class items per class, without replacement.
Dataset subset_balanced(const Dataset& d, std::size_t per_class, rng::Stream& rng);

// Rows drawn with replacement; used for training batches.
ad::Tensor sample_rows(const Dataset& d, std::size_t batch, rng::Stream& rng);

std::string to_csv(const Dataset& d);
Dataset from_csv(const std::string& contents);

} // namespace deligan::data
