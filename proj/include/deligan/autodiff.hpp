#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace deligan::ad {

class Tensor;
struct TensorImpl;

// One recorded operation. `backprop` reads the output's gradient buffer and
// accumulates contributions into the input gradients.
struct Node {
    const char* op;
    std::vector<Tensor> inputs;
    std::weak_ptr<TensorImpl> output;
    std::function<void(const TensorImpl& out)> backprop;
};

struct TensorImpl {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
    std::shared_ptr<Node> node; // op that produced this tensor; null for leaves
};

// Dense 2-D tensor of 64-bit floats with shared ownership. Scalars are 1x1.
// Copying a Tensor copies the handle, not the buffer.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
    static Tensor full(std::size_t rows, std::size_t cols, double value, bool requires_grad = false);
    static Tensor from_values(std::size_t rows, std::size_t cols, std::vector<double> values,
                              bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    static Tensor row(std::vector<double> values, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    std::size_t rows() const { return impl_->rows; }
    std::size_t cols() const { return impl_->cols; }
    std::size_t size() const { return impl_->values.size(); }
    std::vector<std::size_t> shape() const { return {rows(), cols()}; }

    std::vector<double>& values() { return impl_->values; }
    const std::vector<double>& values() const { return impl_->values; }
    std::vector<double>& grad() { return impl_->grad; }
    const std::vector<double>& grad() const { return impl_->grad; }

    bool requires_grad() const { return impl_->requires_grad; }
    void set_requires_grad(bool rg);

    double item() const;
    double at(std::size_t r, std::size_t c) const { return impl_->values[r * cols() + c]; }

    void zero_grad();
    bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }
    const std::shared_ptr<Node>& node() const { return impl_->node; }
    TensorImpl* impl() const { return impl_.get(); }

private:
    std::shared_ptr<TensorImpl> impl_;
    friend void detail_attach(Tensor&, const char*, std::vector<Tensor>,
                              std::function<void(const TensorImpl&)>);
};

// Records operations in construction order, which is a topological order of
// the graph by construction. Tapes nest per thread; ops record onto the
// innermost active tape. With no tape active, ops produce plain values and
// backward is unavailable.
class GradientTape {
public:
    GradientTape();
    ~GradientTape();
    GradientTape(const GradientTape&) = delete;
    GradientTape& operator=(const GradientTape&) = delete;

    static GradientTape* active();

    std::size_t size() const { return ops_.size(); }

    // Reverse sweep: d loss / d loss = 1, then every recorded op is visited
    // exactly once in reverse topological order. Gradients on requires_grad
    // leaves accumulate additively; the caller zeroes them between steps.
    void backward(const Tensor& loss);

    void record(std::shared_ptr<Node> node) { ops_.push_back(std::move(node)); }

private:
    std::vector<std::shared_ptr<Node>> ops_;
    GradientTape* prev_ = nullptr;
};

void backward(const Tensor& loss);

// --- operations ------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x); // computed on max(x, 1e-12)
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
Tensor square(const Tensor& x);

// Row-broadcast bias add: x is B x n, bias is 1 x n. The only broadcast rule
// in the engine; every other shape mismatch is an error.
Tensor add_bias(const Tensor& x, const Tensor& bias);

Tensor add_scalar(const Tensor& x, double c);
Tensor mul_scalar(const Tensor& x, double c);
Tensor sub_from_scalar(double c, const Tensor& x); // c - x

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor sum_rows(const Tensor& x);  // B x n -> B x 1
Tensor mean_rows(const Tensor& x); // B x n -> B x 1

// out[b, :] = x[ids[b], :]; gradients scatter-add back into the picked rows.
Tensor gather_rows(const Tensor& x, const std::vector<int>& ids);

Tensor softmax_rows(const Tensor& x);

// Value copy with no graph attachment.
Tensor detach(const Tensor& x);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator-(const Tensor& x) { return neg(x); }
inline Tensor operator+(const Tensor& x, double c) { return add_scalar(x, c); }
inline Tensor operator+(double c, const Tensor& x) { return add_scalar(x, c); }
inline Tensor operator-(const Tensor& x, double c) { return add_scalar(x, -c); }
inline Tensor operator-(double c, const Tensor& x) { return sub_from_scalar(c, x); }
inline Tensor operator*(const Tensor& x, double c) { return mul_scalar(x, c); }
inline Tensor operator*(double c, const Tensor& x) { return mul_scalar(x, c); }

constexpr double kLogEps = 1e-12;

// Max relative error between reverse-mode and central finite-difference
// gradients of a scalar-valued function, maximised over the entries of x:
// max_i |g_ad - g_fd| / max(|g_ad| + |g_fd|, 1e-8).
double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps);

} // namespace deligan::ad
