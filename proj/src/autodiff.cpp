#include "deligan/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "deligan/error.hpp"

namespace deligan::ad {

namespace {

thread_local GradientTape* g_active_tape = nullptr;

std::string shape_str(const Tensor& t) {
    return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
    }
}

void check_finite(const Tensor& t, const char* op) {
    for (double v : t.values()) {
        if (std::isnan(v)) {
            throw NumericError(std::string("NaN produced by op '") + op + "'");
        }
    }
}

} // namespace

// --- Tensor ------------------------------------------------------------

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
    Tensor t;
    t.impl_ = std::make_shared<TensorImpl>();
    t.impl_->rows = rows;
    t.impl_->cols = cols;
    t.impl_->values.assign(rows * cols, 0.0);
    t.impl_->grad.assign(rows * cols, 0.0);
    t.impl_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::full(std::size_t rows, std::size_t cols, double value, bool requires_grad) {
    Tensor t = zeros(rows, cols, requires_grad);
    std::fill(t.values().begin(), t.values().end(), value);
    return t;
}

Tensor Tensor::from_values(std::size_t rows, std::size_t cols, std::vector<double> values,
                           bool requires_grad) {
    if (values.size() != rows * cols) {
        throw ShapeError("from_values: " + std::to_string(values.size()) + " values for shape " +
                         std::to_string(rows) + "x" + std::to_string(cols));
    }
    Tensor t = zeros(rows, cols, requires_grad);
    t.values() = std::move(values);
    return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_values(1, 1, {value}, requires_grad);
}

Tensor Tensor::row(std::vector<double> values, bool requires_grad) {
    std::size_t n = values.size();
    return from_values(1, n, std::move(values), requires_grad);
}

void Tensor::set_requires_grad(bool rg) { impl_->requires_grad = rg; }

double Tensor::item() const {
    if (size() != 1) {
        throw ShapeError("item: tensor is " + shape_str(*this) + ", expected scalar");
    }
    return impl_->values[0];
}

void Tensor::zero_grad() { std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0); }

void detail_attach(Tensor& out, const char* op, std::vector<Tensor> inputs,
                   std::function<void(const TensorImpl&)> backprop) {
    GradientTape* tape = GradientTape::active();
    if (!tape) return;
    bool any_grad = false;
    for (const auto& in : inputs) {
        if (in.requires_grad()) any_grad = true;
    }
    if (!any_grad) return;
    auto node = std::make_shared<Node>();
    node->op = op;
    node->inputs = std::move(inputs);
    node->output = out.impl_;
    node->backprop = std::move(backprop);
    out.impl_->node = node;
    out.impl_->requires_grad = true;
    tape->record(std::move(node));
}

// --- GradientTape ------------------------------------------------------

GradientTape::GradientTape() {
    prev_ = g_active_tape;
    g_active_tape = this;
}

GradientTape::~GradientTape() { g_active_tape = prev_; }

GradientTape* GradientTape::active() { return g_active_tape; }

void GradientTape::backward(const Tensor& loss) {
    if (loss.size() != 1) {
        throw ShapeError("backward: loss must be scalar, got " + std::to_string(loss.rows()) + "x" +
                         std::to_string(loss.cols()));
    }
    // Intermediate grads are scratch space owned by the sweep; reset them so
    // repeated backward calls see a clean slate. Leaf grads are untouched
    // here and accumulate across calls.
    for (auto& node : ops_) {
        if (auto out = node->output.lock()) {
            std::fill(out->grad.begin(), out->grad.end(), 0.0);
        }
    }
    loss.impl()->grad[0] = 1.0;
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
        auto out = (*it)->output.lock();
        if (!out) continue; // output died unused; nothing can flow through it
        (*it)->backprop(*out);
    }
}

void backward(const Tensor& loss) {
    GradientTape* tape = GradientTape::active();
    if (!tape) {
        throw Error("backward called with no active GradientTape");
    }
    tape->backward(loss);
}

// --- ops ---------------------------------------------------------------

namespace {

// Elementwise unary op helper: y = f(x), dx += dy * dfdx(x, y).
template <typename F, typename DF>
Tensor unary_op(const char* name, const Tensor& x, F f, DF dfdx) {
    Tensor out = Tensor::zeros(x.rows(), x.cols());
    const auto& xv = x.values();
    auto& ov = out.values();
    for (std::size_t i = 0; i < xv.size(); ++i) ov[i] = f(xv[i]);
    check_finite(out, name);
    detail_attach(out, name, {x}, [x, dfdx](const TensorImpl& o) {
        auto& xg = x.impl()->grad;
        const auto& xv = x.impl()->values;
        for (std::size_t i = 0; i < xg.size(); ++i) {
            xg[i] += o.grad[i] * dfdx(xv[i], o.values[i]);
        }
    });
    return out;
}

} // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a) + " * " + shape_str(b));
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out = Tensor::zeros(m, n);
    const auto& av = a.values();
    const auto& bv = b.values();
    auto& ov = out.values();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            for (std::size_t j = 0; j < n; ++j) {
                ov[i * n + j] += aip * bv[p * n + j];
            }
        }
    }
    check_finite(out, "matmul");
    detail_attach(out, "matmul", {a, b}, [a, b, m, k, n](const TensorImpl& o) {
        // da = dout * b^T, db = a^T * dout
        const auto& g = o.grad;
        if (a.requires_grad()) {
            auto& ag = a.impl()->grad;
            const auto& bv = b.impl()->values;
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    const double gij = g[i * n + j];
                    for (std::size_t p = 0; p < k; ++p) {
                        ag[i * k + p] += gij * bv[p * n + j];
                    }
                }
            }
        }
        if (b.requires_grad()) {
            auto& bg = b.impl()->grad;
            const auto& av = a.impl()->values;
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t p = 0; p < k; ++p) {
                    const double aip = av[i * k + p];
                    for (std::size_t j = 0; j < n; ++j) {
                        bg[p * n + j] += aip * g[i * n + j];
                    }
                }
            }
        }
    });
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape("add", a, b);
    Tensor out = Tensor::zeros(a.rows(), a.cols());
    const auto& av = a.values();
    const auto& bv = b.values();
    auto& ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];
    check_finite(out, "add");
    detail_attach(out, "add", {a, b}, [a, b](const TensorImpl& o) {
        if (a.requires_grad()) {
            auto& ag = a.impl()->grad;
            for (std::size_t i = 0; i < ag.size(); ++i) ag[i] += o.grad[i];
        }
        if (b.requires_grad()) {
            auto& bg = b.impl()->grad;
            for (std::size_t i = 0; i < bg.size(); ++i) bg[i] += o.grad[i];
        }
    });
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape("sub", a, b);
    Tensor out = Tensor::zeros(a.rows(), a.cols());
    const auto& av = a.values();
    const auto& bv = b.values();
    auto& ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] - bv[i];
    check_finite(out, "sub");
    detail_attach(out, "sub", {a, b}, [a, b](const TensorImpl& o) {
        if (a.requires_grad()) {
            auto& ag = a.impl()->grad;
            for (std::size_t i = 0; i < ag.size(); ++i) ag[i] += o.grad[i];
        }
        if (b.requires_grad()) {
            auto& bg = b.impl()->grad;
            for (std::size_t i = 0; i < bg.size(); ++i) bg[i] -= o.grad[i];
        }
    });
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape("mul", a, b);
    Tensor out = Tensor::zeros(a.rows(), a.cols());
    const auto& av = a.values();
    const auto& bv = b.values();
    auto& ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
    check_finite(out, "mul");
    detail_attach(out, "mul", {a, b}, [a, b](const TensorImpl& o) {
        if (a.requires_grad()) {
            auto& ag = a.impl()->grad;
            const auto& bv = b.impl()->values;
            for (std::size_t i = 0; i < ag.size(); ++i) ag[i] += o.grad[i] * bv[i];
        }
        if (b.requires_grad()) {
            auto& bg = b.impl()->grad;
            const auto& av = a.impl()->values;
            for (std::size_t i = 0; i < bg.size(); ++i) bg[i] += o.grad[i] * av[i];
        }
    });
    return out;
}

Tensor neg(const Tensor& x) {
    return unary_op("neg", x, [](double v) { return -v; }, [](double, double) { return -1.0; });
}

Tensor exp(const Tensor& x) {
    return unary_op("exp", x, [](double v) { return std::exp(v); },
                    [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
    // log(max(x, eps)): constant below the clamp, so the gradient there is 0.
    return unary_op("log", x, [](double v) { return std::log(std::max(v, kLogEps)); },
                    [](double v, double) { return v > kLogEps ? 1.0 / v : 0.0; });
}

Tensor tanh(const Tensor& x) {
    return unary_op("tanh", x, [](double v) { return std::tanh(v); },
                    [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
    return unary_op(
        "sigmoid", x,
        [](double v) {
            if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
            double e = std::exp(v);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& x) {
    return unary_op("relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
                    [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
    return unary_op(
        "leaky_relu", x, [slope](double v) { return v > 0.0 ? v : slope * v; },
        [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Tensor square(const Tensor& x) {
    return unary_op("square", x, [](double v) { return v * v; },
                    [](double v, double) { return 2.0 * v; });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
    if (bias.rows() != 1 || bias.cols() != x.cols()) {
        throw ShapeError("add_bias: bias " + shape_str(bias) + " does not broadcast over rows of " +
                         shape_str(x));
    }
    const std::size_t b = x.rows(), n = x.cols();
    Tensor out = Tensor::zeros(b, n);
    const auto& xv = x.values();
    const auto& bv = bias.values();
    auto& ov = out.values();
    for (std::size_t r = 0; r < b; ++r) {
        for (std::size_t c = 0; c < n; ++c) ov[r * n + c] = xv[r * n + c] + bv[c];
    }
    check_finite(out, "add_bias");
    detail_attach(out, "add_bias", {x, bias}, [x, bias, b, n](const TensorImpl& o) {
        if (x.requires_grad()) {
            auto& xg = x.impl()->grad;
            for (std::size_t i = 0; i < xg.size(); ++i) xg[i] += o.grad[i];
        }
        if (bias.requires_grad()) {
            auto& bg = bias.impl()->grad;
            for (std::size_t r = 0; r < b; ++r) {
                for (std::size_t c = 0; c < n; ++c) bg[c] += o.grad[r * n + c];
            }
        }
    });
    return out;
}

Tensor add_scalar(const Tensor& x, double c) {
    return unary_op("add_scalar", x, [c](double v) { return v + c; },
                    [](double, double) { return 1.0; });
}

Tensor mul_scalar(const Tensor& x, double c) {
    return unary_op("mul_scalar", x, [c](double v) { return v * c; },
                    [c](double, double) { return c; });
}

Tensor sub_from_scalar(double c, const Tensor& x) {
    return unary_op("sub_from_scalar", x, [c](double v) { return c - v; },
                    [](double, double) { return -1.0; });
}

Tensor sum(const Tensor& x) {
    double acc = 0.0;
    for (double v : x.values()) acc += v;
    Tensor out = Tensor::scalar(acc);
    check_finite(out, "sum");
    detail_attach(out, "sum", {x}, [x](const TensorImpl& o) {
        auto& xg = x.impl()->grad;
        const double g = o.grad[0];
        for (double& v : xg) v += g;
    });
    return out;
}

Tensor mean(const Tensor& x) {
    double acc = 0.0;
    for (double v : x.values()) acc += v;
    const double n = static_cast<double>(x.size());
    Tensor out = Tensor::scalar(acc / n);
    check_finite(out, "mean");
    detail_attach(out, "mean", {x}, [x, n](const TensorImpl& o) {
        auto& xg = x.impl()->grad;
        const double g = o.grad[0] / n;
        for (double& v : xg) v += g;
    });
    return out;
}

Tensor sum_rows(const Tensor& x) {
    const std::size_t b = x.rows(), n = x.cols();
    Tensor out = Tensor::zeros(b, 1);
    const auto& xv = x.values();
    auto& ov = out.values();
    for (std::size_t r = 0; r < b; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) acc += xv[r * n + c];
        ov[r] = acc;
    }
    check_finite(out, "sum_rows");
    detail_attach(out, "sum_rows", {x}, [x, b, n](const TensorImpl& o) {
        auto& xg = x.impl()->grad;
        for (std::size_t r = 0; r < b; ++r) {
            for (std::size_t c = 0; c < n; ++c) xg[r * n + c] += o.grad[r];
        }
    });
    return out;
}

Tensor mean_rows(const Tensor& x) {
    const std::size_t b = x.rows(), n = x.cols();
    Tensor out = Tensor::zeros(b, 1);
    const auto& xv = x.values();
    auto& ov = out.values();
    for (std::size_t r = 0; r < b; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) acc += xv[r * n + c];
        ov[r] = acc / static_cast<double>(n);
    }
    check_finite(out, "mean_rows");
    detail_attach(out, "mean_rows", {x}, [x, b, n](const TensorImpl& o) {
        auto& xg = x.impl()->grad;
        for (std::size_t r = 0; r < b; ++r) {
            const double g = o.grad[r] / static_cast<double>(n);
            for (std::size_t c = 0; c < n; ++c) xg[r * n + c] += g;
        }
    });
    return out;
}

Tensor gather_rows(const Tensor& x, const std::vector<int>& ids) {
    const std::size_t n = x.cols();
    for (int id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= x.rows()) {
            throw ShapeError("gather_rows: row index " + std::to_string(id) + " out of range for " +
                             shape_str(x));
        }
    }
    Tensor out = Tensor::zeros(ids.size(), n);
    const auto& xv = x.values();
    auto& ov = out.values();
    for (std::size_t r = 0; r < ids.size(); ++r) {
        const std::size_t src = static_cast<std::size_t>(ids[r]) * n;
        for (std::size_t c = 0; c < n; ++c) ov[r * n + c] = xv[src + c];
    }
    detail_attach(out, "gather_rows", {x}, [x, ids, n](const TensorImpl& o) {
        auto& xg = x.impl()->grad;
        for (std::size_t r = 0; r < ids.size(); ++r) {
            const std::size_t dst = static_cast<std::size_t>(ids[r]) * n;
            for (std::size_t c = 0; c < n; ++c) xg[dst + c] += o.grad[r * n + c];
        }
    });
    return out;
}

Tensor softmax_rows(const Tensor& x) {
    const std::size_t b = x.rows(), n = x.cols();
    Tensor out = Tensor::zeros(b, n);
    const auto& xv = x.values();
    auto& ov = out.values();
    for (std::size_t r = 0; r < b; ++r) {
        double mx = xv[r * n];
        for (std::size_t c = 1; c < n; ++c) mx = std::max(mx, xv[r * n + c]);
        double denom = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            ov[r * n + c] = std::exp(xv[r * n + c] - mx);
            denom += ov[r * n + c];
        }
        for (std::size_t c = 0; c < n; ++c) ov[r * n + c] /= denom;
    }
    check_finite(out, "softmax_rows");
    detail_attach(out, "softmax_rows", {x}, [x, b, n](const TensorImpl& o) {
        // dx = p ⊙ (dp - <dp, p>) per row
        auto& xg = x.impl()->grad;
        for (std::size_t r = 0; r < b; ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < n; ++c) dot += o.grad[r * n + c] * o.values[r * n + c];
            for (std::size_t c = 0; c < n; ++c) {
                xg[r * n + c] += o.values[r * n + c] * (o.grad[r * n + c] - dot);
            }
        }
    });
    return out;
}

Tensor detach(const Tensor& x) {
    return Tensor::from_values(x.rows(), x.cols(), x.values());
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps) {
    if (eps <= 0.0) throw Error("grad_check: eps must be positive");
    x.set_requires_grad(true);
    x.zero_grad();
    std::vector<double> g_ad;
    {
        GradientTape tape;
        Tensor y = f(x);
        if (y.size() != 1) throw ShapeError("grad_check: f must be scalar-valued");
        tape.backward(y);
        g_ad = x.grad();
    }
    double worst = 0.0;
    auto& xv = x.values();
    for (std::size_t i = 0; i < xv.size(); ++i) {
        const double orig = xv[i];
        xv[i] = orig + eps;
        const double fp = f(x).item();
        xv[i] = orig - eps;
        const double fm = f(x).item();
        xv[i] = orig;
        const double g_fd = (fp - fm) / (2.0 * eps);
        const double denom = std::max(std::abs(g_ad[i]) + std::abs(g_fd), 1e-8);
        worst = std::max(worst, std::abs(g_ad[i] - g_fd) / denom);
    }
    return worst;
}

} // namespace deligan::ad
