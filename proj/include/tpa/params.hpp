#pragma once

#include "tpa/rng.hpp"
#include "tpa/tensor.hpp"

#include <string>
#include <utility>
#include <vector>

namespace tpa {

enum class Init { zero, xavier };

// Ordered registry of named trainable tensors. Registration order is fixed
// per model configuration, which keeps optimizer moment buffers and
// checkpoint layouts aligned.
class ParamStore {
public:
    Tensor add(const std::string& name, std::vector<int> shape, Init init, Rng& rng);
    Tensor* find(const std::string& name);
    const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }

    void zero_grad();
    bool grads_finite() const;
    // Deep copies of all values, in registration order.
    std::vector<std::vector<double>> snapshot_values() const;
    void restore_values(const std::vector<std::vector<double>>& values);

private:
    std::vector<std::pair<std::string, Tensor>> items_;
};

// Xavier-uniform fan counts: matrices use (rows, cols); conv kernels
// [k x Cin x Cout] use (k*Cin, k*Cout).
void xavier_fill(Tensor& t, Rng& rng);

} // namespace tpa
