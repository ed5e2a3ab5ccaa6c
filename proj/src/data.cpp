#include "deligan/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "deligan/csv.hpp"
#include "deligan/error.hpp"

namespace deligan::data {

void ToySpec::validate() const {
    if (modes.empty()) throw ConfigError("toy spec: no modes");
    double total = 0.0;
    for (const auto& m : modes) {
        if (m.weight <= 0.0) throw ConfigError("toy spec: mode weight must be positive");
        if (m.cov_diag[0] <= 0.0 || m.cov_diag[1] <= 0.0) {
            throw ConfigError("toy spec: covariance entries must be positive");
        }
        total += m.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ConfigError("toy spec: weights sum to " + std::to_string(total) + ", expected 1");
    }
}

ToySpec ToySpec::unimodal_default() {
    return ToySpec{{ToyMode{{0.0, 0.0}, {0.25, 0.25}, 1.0}}};
}

ToySpec ToySpec::bimodal_default() {
    return ToySpec{{ToyMode{{-3.0, 0.0}, {0.25, 0.25}, 0.5}, ToyMode{{3.0, 0.0}, {0.25, 0.25}, 0.5}}};
}

Dataset sample_toy(const ToySpec& spec, std::size_t n, rng::Stream& rng) {
    spec.validate();
    if (n == 0) throw ConfigError("sample_toy: n must be >= 1");
    std::vector<double> cum;
    double acc = 0.0;
    for (const auto& m : spec.modes) {
        acc += m.weight;
        cum.push_back(acc);
    }
    std::vector<double> rows(n * 2);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        std::size_t mode = 0;
        while (mode + 1 < cum.size() && u >= cum[mode]) ++mode;
        const auto& m = spec.modes[mode];
        rows[i * 2] = m.mean[0] + std::sqrt(m.cov_diag[0]) * rng.normal();
        rows[i * 2 + 1] = m.mean[1] + std::sqrt(m.cov_diag[1]) * rng.normal();
        labels[i] = static_cast<int>(mode);
    }
    Dataset d;
    d.samples = ad::Tensor::from_values(n, 2, std::move(rows));
    d.labels = std::move(labels);
    d.source = "toy";
    return d;
}

namespace {

std::uint32_t read_u32_be(std::ifstream& f, const std::string& path) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (!f) throw FormatError("idx: truncated header in '" + path + "'");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

void write_u32_be(std::ofstream& f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    f.write(reinterpret_cast<char*>(b), 4);
}

} // namespace

Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream fi(images_path, std::ios::binary);
    if (!fi) throw DataError("idx: cannot open '" + images_path + "'");
    const std::uint32_t magic_i = read_u32_be(fi, images_path);
    if (magic_i != 0x00000803u) {
        throw FormatError("idx: bad image magic in '" + images_path + "'");
    }
    const std::uint32_t count = read_u32_be(fi, images_path);
    const std::uint32_t img_rows = read_u32_be(fi, images_path);
    const std::uint32_t img_cols = read_u32_be(fi, images_path);
    const std::size_t dim = std::size_t(img_rows) * img_cols;
    std::vector<unsigned char> pixels(std::size_t(count) * dim);
    fi.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (static_cast<std::size_t>(fi.gcount()) != pixels.size()) {
        throw FormatError("idx: truncated image data in '" + images_path + "'");
    }

    std::ifstream fl(labels_path, std::ios::binary);
    if (!fl) throw DataError("idx: cannot open '" + labels_path + "'");
    const std::uint32_t magic_l = read_u32_be(fl, labels_path);
    if (magic_l != 0x00000801u) {
        throw FormatError("idx: bad label magic in '" + labels_path + "'");
    }
    const std::uint32_t label_count = read_u32_be(fl, labels_path);
    if (label_count != count) {
        throw DataError("idx: " + std::to_string(count) + " images but " +
                        std::to_string(label_count) + " labels");
    }
    std::vector<unsigned char> raw_labels(label_count);
    fl.read(reinterpret_cast<char*>(raw_labels.data()),
            static_cast<std::streamsize>(raw_labels.size()));
    if (static_cast<std::size_t>(fl.gcount()) != raw_labels.size()) {
        throw FormatError("idx: truncated label data in '" + labels_path + "'");
    }

    std::vector<double> values(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        values[i] = static_cast<double>(pixels[i]) / 127.5 - 1.0;
    }
    Dataset d;
    d.samples = ad::Tensor::from_values(count, dim, std::move(values));
    d.labels = std::vector<int>(raw_labels.begin(), raw_labels.end());
    d.source = images_path;
    return d;
}

void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::uint32_t count, std::uint32_t img_rows, std::uint32_t img_cols) {
    if (pixels.size() != std::size_t(count) * img_rows * img_cols) {
        throw DataError("idx: pixel buffer does not match count*rows*cols");
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("idx: cannot open '" + path + "' for writing");
    write_u32_be(f, 0x00000803u);
    write_u32_be(f, count);
    write_u32_be(f, img_rows);
    write_u32_be(f, img_cols);
    f.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("idx: cannot open '" + path + "' for writing");
    write_u32_be(f, 0x00000801u);
    write_u32_be(f, static_cast<std::uint32_t>(labels.size()));
    f.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

Dataset subset_balanced(const Dataset& d, std::size_t per_class, rng::Stream& rng) {
    if (!d.labels) throw DataError("subset_balanced: dataset has no labels");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < d.size(); ++i) by_class[(*d.labels)[i]].push_back(i);

    std::vector<std::size_t> chosen;
    for (auto& [cls, members] : by_class) {
        if (members.size() < per_class) {
            throw DataError("subset_balanced: class " + std::to_string(cls) + " has only " +
                            std::to_string(members.size()) + " members, need " +
                            std::to_string(per_class));
        }
        // partial Fisher-Yates: first per_class entries are a uniform draw
        for (std::size_t j = 0; j < per_class; ++j) {
            const std::size_t pick = j + rng.uniform_index(members.size() - j);
            std::swap(members[j], members[pick]);
            chosen.push_back(members[j]);
        }
    }

    const std::size_t dim = d.dim();
    std::vector<double> rows(chosen.size() * dim);
    std::vector<int> labels(chosen.size());
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        const auto& src = d.samples.values();
        std::copy(src.begin() + chosen[i] * dim, src.begin() + (chosen[i] + 1) * dim,
                  rows.begin() + i * dim);
        labels[i] = (*d.labels)[chosen[i]];
    }
    Dataset out;
    out.samples = ad::Tensor::from_values(chosen.size(), dim, std::move(rows));
    out.labels = std::move(labels);
    out.source = d.source + ":balanced" + std::to_string(per_class);
    return out;
}

ad::Tensor sample_rows(const Dataset& d, std::size_t batch, rng::Stream& rng) {
    const std::size_t dim = d.dim();
    std::vector<double> rows(batch * dim);
    const auto& src = d.samples.values();
    for (std::size_t i = 0; i < batch; ++i) {
        const std::size_t pick = rng.uniform_index(d.size());
        std::copy(src.begin() + pick * dim, src.begin() + (pick + 1) * dim, rows.begin() + i * dim);
    }
    return ad::Tensor::from_values(batch, dim, std::move(rows));
}

std::string to_csv(const Dataset& d) {
    std::string out;
    const std::size_t dim = d.dim();
    for (std::size_t c = 0; c < dim; ++c) out += (c ? ",x" : "x") + std::to_string(c);
    if (d.labels) out += ",label";
    out += "\n";
    const auto& v = d.samples.values();
    for (std::size_t r = 0; r < d.size(); ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            if (c) out += ",";
            out += csv::format(v[r * dim + c]);
        }
        if (d.labels) out += "," + std::to_string((*d.labels)[r]);
        out += "\n";
    }
    return out;
}

Dataset from_csv(const std::string& contents) {
    const csv::Table t = csv::parse(contents);
    bool has_label = !t.header.empty() && t.header.back() == "label";
    const std::size_t dim = t.header.size() - (has_label ? 1 : 0);
    if (dim == 0) throw FormatError("dataset csv: no sample columns");
    std::vector<double> values;
    values.reserve(t.rows.size() * dim);
    std::vector<int> labels;
    for (const auto& row : t.rows) {
        auto nums = csv::to_doubles(row);
        for (std::size_t c = 0; c < dim; ++c) values.push_back(nums[c]);
        if (has_label) labels.push_back(static_cast<int>(nums[dim]));
    }
    Dataset d;
    d.samples = ad::Tensor::from_values(t.rows.size(), dim, std::move(values));
    if (has_label) d.labels = std::move(labels);
    d.source = "csv";
    return d;
}

} // namespace deligan::data
