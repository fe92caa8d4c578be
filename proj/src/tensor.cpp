#include "tpa/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace tpa {

namespace {
thread_local Tape* g_current_tape = nullptr;
thread_local bool g_grad_enabled = true;
} // namespace

namespace detail {

bool grad_enabled() { return g_grad_enabled; }

std::size_t shape_numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

} // namespace detail

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(std::vector<int> shape, double v, bool requires_grad) {
    auto d = std::make_shared<TensorData>();
    std::size_t n = detail::shape_numel(shape);
    d->shape = std::move(shape);
    d->value.assign(n, v);
    d->requires_grad = requires_grad;
    if (requires_grad) d->grad.assign(n, 0.0);
    return Tensor(std::move(d));
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> data, bool requires_grad) {
    std::size_t n = detail::shape_numel(shape);
    if (data.size() != n)
        throw std::invalid_argument("tensor data length does not match shape");
    auto d = std::make_shared<TensorData>();
    d->shape = std::move(shape);
    d->value = std::move(data);
    d->requires_grad = requires_grad;
    if (requires_grad) d->grad.assign(n, 0.0);
    return Tensor(std::move(d));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
    return from({1}, {v}, requires_grad);
}

double Tensor::item() const {
    if (numel() != 1) throw std::invalid_argument("item() requires a scalar tensor");
    return d_->value[0];
}

void Tensor::zero_grad() {
    for (double& g : d_->grad) g = 0.0;
}

void Tensor::set_values(const std::vector<double>& v) {
    if (v.size() != d_->value.size())
        throw std::invalid_argument("set_values: length mismatch");
    d_->value = v;
}

bool Tensor::all_finite() const {
    for (double v : d_->value)
        if (!std::isfinite(v)) return false;
    return true;
}

void Tape::backward(const Tensor& loss) {
    if (used_)
        throw std::logic_error("Tape::backward called twice without clear()");
    if (steps_.empty())
        throw std::logic_error("Tape::backward on an empty tape");
    if (loss.numel() != 1)
        throw std::invalid_argument("Tape::backward requires a scalar loss");
    if (!loss.requires_grad())
        throw std::logic_error("loss does not depend on any gradient-tracked tensor");
    used_ = true;
    loss.node()->grad[0] += 1.0;
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

Tape* Tape::current() { return g_current_tape; }

TapeScope::TapeScope(Tape& t) : prev_(g_current_tape) { g_current_tape = &t; }
TapeScope::~TapeScope() { g_current_tape = prev_; }

NoGradScope::NoGradScope() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradScope::~NoGradScope() { g_grad_enabled = prev_; }

} // namespace tpa
