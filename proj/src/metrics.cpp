#include "deligan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "deligan/csv.hpp"
#include "deligan/error.hpp"

namespace deligan::metrics {

namespace {
constexpr double kEps = 1e-12;

double clamped_log(double v) { return std::log(std::max(v, kEps)); }

// KL(p || q) over one row pair; 0 * log(0/q) contributes 0.
double row_kl(const double* p, const double* lp, const double* lq, std::size_t c) {
    double acc = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
        if (p[k] > 0.0) acc += p[k] * (lp[k] - lq[k]);
    }
    return acc;
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - m) * (x - m);
    var /= static_cast<double>(xs.size());
    return {m, std::sqrt(var)};
}
} // namespace

ClassProbMatrix ClassProbMatrix::from_probs(ad::Tensor probs) {
    const std::size_t m = probs.rows(), c = probs.cols();
    ClassProbMatrix out;
    out.predicted.resize(m);
    const auto& v = probs.values();
    for (std::size_t r = 0; r < m; ++r) {
        double total = 0.0;
        std::size_t best = 0;
        for (std::size_t k = 0; k < c; ++k) {
            const double p = v[r * c + k];
            if (p < 0.0) throw DomainError("class probabilities must be nonnegative");
            total += p;
            if (p > v[r * c + best]) best = k;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw DomainError("class probability row " + std::to_string(r) + " sums to " +
                              std::to_string(total));
        }
        out.predicted[r] = static_cast<int>(best);
    }
    out.probs = std::move(probs);
    return out;
}

Classifier train_classifier(const data::Dataset& d, const ClassifierConfig& cfg, rng::Stream& rng) {
    if (!d.labels) throw ConfigError("train_classifier: dataset has no labels");
    std::set<int> distinct(d.labels->begin(), d.labels->end());
    if (distinct.size() < 2) {
        throw ConfigError("train_classifier: need >= 2 classes, got " +
                          std::to_string(distinct.size()));
    }
    const std::size_t n_classes = static_cast<std::size_t>(*distinct.rbegin()) + 1;
    const std::size_t m = d.size();
    const std::size_t dim = d.dim();

    // shuffled index split: tail fraction is held out
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    for (std::size_t i = m; i > 1; --i) {
        std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
    }
    const std::size_t holdout = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                             cfg.holdout_fraction * double(m)));
    const std::size_t n_train = m - holdout;
    if (n_train == 0) throw ConfigError("train_classifier: holdout fraction leaves no training data");

    std::vector<std::size_t> sizes{dim};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(n_classes);
    std::vector<nets::Activation> acts(cfg.hidden.size(), cfg.hidden_act);
    acts.push_back(nets::Activation::none);
    nets::Mlp net(sizes, acts, nets::Init::xavier_uniform, rng);

    std::vector<nets::Adam::Param> params;
    for (auto& [name, t] : net.named_parameters("clf.")) params.push_back({name, t, false});
    nets::Adam opt(std::move(params), nets::AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});

    const auto& sv = d.samples.values();
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        const std::size_t bs = std::min(cfg.batch, n_train);
        std::vector<double> xb(bs * dim);
        std::vector<double> onehot(bs * n_classes, 0.0);
        for (std::size_t b = 0; b < bs; ++b) {
            const std::size_t row = idx[rng.uniform_index(n_train)];
            std::copy(sv.begin() + row * dim, sv.begin() + (row + 1) * dim, xb.begin() + b * dim);
            onehot[b * n_classes + static_cast<std::size_t>((*d.labels)[row])] = 1.0;
        }
        auto x = ad::Tensor::from_values(bs, dim, std::move(xb));
        auto y = ad::Tensor::from_values(bs, n_classes, std::move(onehot));
        ad::GradientTape tape;
        auto p = ad::softmax_rows(net.forward(x));
        auto loss = ad::neg(ad::mean(ad::sum_rows(ad::mul(y, ad::log(p)))));
        tape.backward(loss);
        opt.step();
        opt.zero_grad();
    }

    // held-out accuracy
    std::size_t correct = 0;
    {
        std::vector<double> xh(holdout * dim);
        for (std::size_t b = 0; b < holdout; ++b) {
            const std::size_t row = idx[n_train + b];
            std::copy(sv.begin() + row * dim, sv.begin() + (row + 1) * dim, xh.begin() + b * dim);
        }
        auto logits = net.forward(ad::Tensor::from_values(holdout, dim, std::move(xh)));
        const auto& lv = logits.values();
        for (std::size_t b = 0; b < holdout; ++b) {
            std::size_t best = 0;
            for (std::size_t k = 1; k < n_classes; ++k) {
                if (lv[b * n_classes + k] > lv[b * n_classes + best]) best = k;
            }
            if (static_cast<int>(best) == (*d.labels)[idx[n_train + b]]) ++correct;
        }
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(holdout);
    if (acc < cfg.accuracy_floor) {
        throw MetricError("classifier held-out accuracy " + std::to_string(acc) +
                          " below floor " + std::to_string(cfg.accuracy_floor) +
                          "; scores would be meaningless");
    }
    return Classifier{std::move(net), acc, n_classes};
}

ClassProbMatrix classify(const Classifier& clf, const ad::Tensor& samples) {
    auto probs = ad::softmax_rows(clf.net.forward(samples));
    return ClassProbMatrix::from_probs(std::move(probs));
}

std::string ScoreReport::to_csv() const {
    std::string out = "class,mean,std\n";
    for (const auto& e : per_class) {
        out += std::to_string(e.cls) + "," + csv::format(e.mean) + "," + csv::format(e.stddev) + "\n";
    }
    out += "overall," + csv::format(overall_mean) + "," + csv::format(overall_std) + "\n";
    return out;
}

ScoreReport inception_score(const ClassProbMatrix& p, int splits) {
    const std::size_t m = p.samples(), c = p.classes();
    if (splits < 1 || m < static_cast<std::size_t>(splits)) {
        throw ConfigError("inception_score: need at least one sample per split");
    }
    const auto& pv = p.probs.values();
    std::vector<double> lp(pv.size());
    for (std::size_t i = 0; i < pv.size(); ++i) lp[i] = clamped_log(pv[i]);

    std::vector<double> scores;
    for (int s = 0; s < splits; ++s) {
        const std::size_t lo = m * static_cast<std::size_t>(s) / static_cast<std::size_t>(splits);
        const std::size_t hi = m * static_cast<std::size_t>(s + 1) / static_cast<std::size_t>(splits);
        std::vector<double> marginal(c, 0.0);
        for (std::size_t r = lo; r < hi; ++r) {
            for (std::size_t k = 0; k < c; ++k) marginal[k] += pv[r * c + k];
        }
        for (auto& q : marginal) q /= static_cast<double>(hi - lo);
        std::vector<double> lq(c);
        for (std::size_t k = 0; k < c; ++k) lq[k] = clamped_log(marginal[k]);
        double acc = 0.0;
        for (std::size_t r = lo; r < hi; ++r) {
            acc += row_kl(&pv[r * c], &lp[r * c], lq.data(), c);
        }
        scores.push_back(std::exp(acc / static_cast<double>(hi - lo)));
    }
    ScoreReport rep;
    rep.splits = splits;
    auto [mu, sd] = mean_std(scores);
    rep.overall_mean = mu;
    rep.overall_std = sd;
    return rep;
}

ScoreReport modified_inception_score(const ClassProbMatrix& p, int splits, int pairs_per_sample,
                                     std::uint64_t pairing_seed) {
    const std::size_t m = p.samples(), c = p.classes();
    if (m < 2) throw ConfigError("modified_inception_score: need at least 2 samples");
    if (splits < 1 || m < static_cast<std::size_t>(splits)) {
        throw ConfigError("modified_inception_score: need at least one sample per split");
    }
    const auto& pv = p.probs.values();
    std::vector<double> lp(pv.size());
    for (std::size_t i = 0; i < pv.size(); ++i) lp[i] = clamped_log(pv[i]);
    // self-KL term of each row: sum_k p log p
    std::vector<double> self_term(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        double acc = 0.0;
        for (std::size_t k = 0; k < c; ++k) {
            if (pv[r * c + k] > 0.0) acc += pv[r * c + k] * lp[r * c + k];
        }
        self_term[r] = acc;
    }

    std::map<int, std::vector<double>> split_scores; // class -> per-split scores
    ScoreReport rep;
    rep.splits = splits;

    for (int s = 0; s < splits; ++s) {
        const std::size_t lo = m * static_cast<std::size_t>(s) / static_cast<std::size_t>(splits);
        const std::size_t hi = m * static_cast<std::size_t>(s + 1) / static_cast<std::size_t>(splits);
        std::map<int, std::vector<std::size_t>> members;
        for (std::size_t r = lo; r < hi; ++r) members[p.predicted[r]].push_back(r);

        for (auto& [cls, rows] : members) {
            double kl_acc = 0.0;
            std::size_t kl_count = 0;
            if (rows.size() == 1) {
                // single sample: no intra-class pairs, KL taken as 0
                kl_count = 1;
            } else if (pairs_per_sample <= 0) {
                // exhaustive ordered pairs, vectorised via the summed-log trick:
                // sum_{j != i} KL(i||j) = (n-1) * <p_i, lp_i> - <p_i, S - lp_i>
                std::vector<double> lsum(c, 0.0);
                for (std::size_t r : rows) {
                    for (std::size_t k = 0; k < c; ++k) lsum[k] += lp[r * c + k];
                }
                for (std::size_t r : rows) {
                    double cross = 0.0;
                    for (std::size_t k = 0; k < c; ++k) {
                        if (pv[r * c + k] > 0.0) {
                            cross += pv[r * c + k] * (lsum[k] - lp[r * c + k]);
                        }
                    }
                    const double n1 = static_cast<double>(rows.size() - 1);
                    kl_acc += n1 * self_term[r] - cross;
                    kl_count += rows.size() - 1;
                }
            } else {
                auto pair_rng = rng::substream(pairing_seed, "class" + std::to_string(cls) +
                                                                 "/split" + std::to_string(s));
                for (std::size_t pos = 0; pos < rows.size(); ++pos) {
                    const std::size_t r = rows[pos];
                    for (int t = 0; t < pairs_per_sample; ++t) {
                        std::size_t pick = pair_rng.uniform_index(rows.size() - 1);
                        if (pick >= pos) ++pick;
                        const std::size_t j = rows[pick];
                        kl_acc += row_kl(&pv[r * c], &lp[r * c], &lp[j * c], c);
                        ++kl_count;
                    }
                }
            }
            split_scores[cls].push_back(std::exp(kl_acc / static_cast<double>(kl_count)));
        }
    }

    std::vector<double> class_means;
    for (auto& [cls, scores] : split_scores) {
        auto [mu, sd] = mean_std(scores);
        rep.per_class.push_back(ScoreEntry{cls, mu, sd});
        class_means.push_back(mu);
        if (static_cast<int>(scores.size()) < splits) {
            rep.notes += "class " + std::to_string(cls) + " present in only " +
                         std::to_string(scores.size()) + "/" + std::to_string(splits) + " splits; ";
        }
    }
    if (rep.per_class.empty()) throw ConfigError("modified_inception_score: no classes present");
    auto [mu, sd] = mean_std(class_means);
    rep.overall_mean = mu;
    rep.overall_std = sd;
    return rep;
}

ModeCoverage mode_coverage(const ad::Tensor& samples, const data::ToySpec& spec,
                           double radius_sigmas) {
    if (samples.cols() != 2) {
        throw ShapeError("mode_coverage: expected 2-D samples, got dimension " +
                         std::to_string(samples.cols()));
    }
    if (radius_sigmas <= 0.0) throw ConfigError("mode_coverage: radius must be positive");
    spec.validate();
    const std::size_t m = samples.rows();
    ModeCoverage out;
    out.per_mode_fraction.assign(spec.modes.size(), 0.0);
    std::size_t in_void = 0;
    const auto& v = samples.values();
    const double r2 = radius_sigmas * radius_sigmas;
    for (std::size_t i = 0; i < m; ++i) {
        double best = r2;
        int assigned = -1;
        for (std::size_t mo = 0; mo < spec.modes.size(); ++mo) {
            const auto& mode = spec.modes[mo];
            const double dx = v[i * 2] - mode.mean[0];
            const double dy = v[i * 2 + 1] - mode.mean[1];
            const double d2 = dx * dx / mode.cov_diag[0] + dy * dy / mode.cov_diag[1];
            if (d2 <= best) {
                best = d2;
                assigned = static_cast<int>(mo);
            }
        }
        if (assigned < 0) {
            ++in_void;
        } else {
            out.per_mode_fraction[static_cast<std::size_t>(assigned)] += 1.0;
        }
    }
    for (auto& f : out.per_mode_fraction) {
        f /= static_cast<double>(m);
        if (f >= 0.05) ++out.covered_modes;
    }
    out.void_fraction = static_cast<double>(in_void) / static_cast<double>(m);
    return out;
}

std::vector<std::vector<std::size_t>> nearest_neighbors(const ad::Tensor& generated,
                                                        const ad::Tensor& train, std::size_t k) {
    if (generated.cols() != train.cols()) {
        throw ShapeError("nearest_neighbors: dimension mismatch, " +
                         std::to_string(generated.cols()) + " vs " + std::to_string(train.cols()));
    }
    if (k == 0 || k > train.rows()) {
        throw ConfigError("nearest_neighbors: k=" + std::to_string(k) + " with " +
                          std::to_string(train.rows()) + " training rows");
    }
    const std::size_t g = generated.rows(), t = train.rows(), d = generated.cols();
    const auto& gv = generated.values();
    const auto& tv = train.values();
    std::vector<std::vector<std::size_t>> out(g);
    std::vector<std::pair<double, std::size_t>> dist(t);
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < t; ++j) {
            double acc = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = gv[i * d + c] - tv[j * d + c];
                acc += diff * diff;
            }
            dist[j] = {acc, j};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        out[i].reserve(k);
        for (std::size_t j = 0; j < k; ++j) out[i].push_back(dist[j].second);
    }
    return out;
}

} // namespace deligan::metrics
