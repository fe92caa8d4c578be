#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tpa {

// ============================================================================
// Dense 64-bit float tensor with tape-based reverse-mode autodiff.
//
// Tensors are cheap handles over shared storage. A tensor created with
// requires_grad=true owns a same-shape gradient buffer that backward()
// accumulates into. Forward ops record their backward closures on the
// thread-local active Tape; a Tape and the tensors flowing through it form a
// single-threaded unit of work.
// ============================================================================

struct TensorData {
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<double> grad; // same size as value when requires_grad
    bool requires_grad = false;
};

class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor full(std::vector<int> shape, double v, bool requires_grad = false);
    static Tensor from(std::vector<int> shape, std::vector<double> data,
                       bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);

    bool defined() const { return d_ != nullptr; }
    const std::vector<int>& shape() const { return d_->shape; }
    int ndim() const { return static_cast<int>(d_->shape.size()); }
    int dim(int i) const { return d_->shape[static_cast<std::size_t>(i)]; }
    std::size_t numel() const { return d_->value.size(); }
    // 2-d conveniences; a 1-d tensor reads as a single row.
    int rows() const { return ndim() >= 2 ? dim(0) : 1; }
    int cols() const { return ndim() >= 2 ? dim(1) : dim(0); }

    bool requires_grad() const { return d_->requires_grad; }

    std::span<const double> value() const { return d_->value; }
    std::span<double> value_mut() { return d_->value; }
    std::span<const double> grad() const { return d_->grad; }
    std::span<double> grad_mut() { return d_->grad; }

    double val(std::size_t i) const { return d_->value[i]; }
    double at(int r, int c) const {
        return d_->value[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols()) +
                         static_cast<std::size_t>(c)];
    }
    // Scalar extraction; throws unless numel() == 1.
    double item() const;

    void zero_grad();
    void set_values(const std::vector<double>& v);
    bool all_finite() const;

    std::shared_ptr<TensorData> node() const { return d_; }

private:
    explicit Tensor(std::shared_ptr<TensorData> d) : d_(std::move(d)) {}
    std::shared_ptr<TensorData> d_;
};

// ----------------------------------------------------------------------------
// Tape: ordered record of backward closures. Ops append during the forward
// pass; backward() replays them once in reverse. Calling backward twice
// without clear() is an error.
// ----------------------------------------------------------------------------
class Tape {
public:
    void record(std::function<void()> backward_step) {
        steps_.push_back(std::move(backward_step));
    }
    void backward(const Tensor& loss);
    void clear() {
        steps_.clear();
        used_ = false;
    }
    std::size_t size() const { return steps_.size(); }

    static Tape* current();

private:
    friend class TapeScope;
    std::vector<std::function<void()>> steps_;
    bool used_ = false;
};

// Installs a tape as the thread's active tape for the scope's lifetime.
class TapeScope {
public:
    explicit TapeScope(Tape& t);
    ~TapeScope();
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

private:
    Tape* prev_;
};

// Disables gradient recording for the scope's lifetime (evaluation paths).
class NoGradScope {
public:
    NoGradScope();
    ~NoGradScope();
    NoGradScope(const NoGradScope&) = delete;
    NoGradScope& operator=(const NoGradScope&) = delete;

private:
    bool prev_;
};

namespace detail {
bool grad_enabled();
std::size_t shape_numel(const std::vector<int>& shape);
} // namespace detail

} // namespace tpa
