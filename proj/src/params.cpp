#include "tpa/params.hpp"

#include <cmath>
#include <stdexcept>

namespace tpa {

void xavier_fill(Tensor& t, Rng& rng) {
    double fan_in = 0.0, fan_out = 0.0;
    if (t.ndim() == 2) {
        fan_in = t.dim(0);
        fan_out = t.dim(1);
    } else if (t.ndim() == 3) {
        fan_in = static_cast<double>(t.dim(0)) * t.dim(1);
        fan_out = static_cast<double>(t.dim(0)) * t.dim(2);
    } else {
        fan_in = fan_out = static_cast<double>(t.numel());
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : t.value_mut()) v = rng.range(-limit, limit);
}

Tensor ParamStore::add(const std::string& name, std::vector<int> shape, Init init, Rng& rng) {
    if (find(name) != nullptr)
        throw std::logic_error("ParamStore: duplicate parameter name " + name);
    Tensor t = Tensor::zeros(std::move(shape), /*requires_grad=*/true);
    if (init == Init::xavier) xavier_fill(t, rng);
    items_.emplace_back(name, t);
    return t;
}

Tensor* ParamStore::find(const std::string& name) {
    for (auto& [n, t] : items_)
        if (n == name) return &t;
    return nullptr;
}

void ParamStore::zero_grad() {
    for (auto& [n, t] : items_) t.zero_grad();
}

bool ParamStore::grads_finite() const {
    for (const auto& [n, t] : items_)
        for (double g : t.grad())
            if (!std::isfinite(g)) return false;
    return true;
}

std::vector<std::vector<double>> ParamStore::snapshot_values() const {
    std::vector<std::vector<double>> out;
    out.reserve(items_.size());
    for (const auto& [n, t] : items_)
        out.emplace_back(t.value().begin(), t.value().end());
    return out;
}

void ParamStore::restore_values(const std::vector<std::vector<double>>& values) {
    if (values.size() != items_.size())
        throw std::logic_error("ParamStore: snapshot size mismatch");
    for (std::size_t i = 0; i < items_.size(); ++i) items_[i].second.set_values(values[i]);
}

} // namespace tpa
