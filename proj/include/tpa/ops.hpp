#pragma once

#include "tpa/tensor.hpp"

#include <vector>

namespace tpa {

// Forward operations with gradient rules registered on the active tape.
// Binary elementwise ops accept equal shapes or a scalar (numel 1) on either
// side; the scalar receives the summed gradient.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor add_const(const Tensor& a, double c);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a); // throws on non-positive values
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);

// Values outside (lo, hi) receive zero gradient.
Tensor clamp(const Tensor& a, double lo, double hi);

// y = x W + b. x may be [n x p] or a p-vector (treated as one row, giving a
// q-vector result). Backward fills dx, dW and db (db = column sums).
Tensor linear(const Tensor& x, const Tensor& W, const Tensor& b);

Tensor matmul(const Tensor& a, const Tensor& b);

// Adds a q-vector bias to every row of an [n x q] matrix.
Tensor add_rowvec(const Tensor& x, const Tensor& b);

enum class Padding { same, causal };

// 1-d convolution over the time axis. x is [L x Cin], kernels are
// [k x Cin x Cout]; output is [L x Cout]. Same padding requires odd k and
// centers the kernel; causal padding aligns the last tap with the current
// frame so output t sees only frames <= t.
Tensor conv1d(const Tensor& x, const Tensor& kernels, Padding padding, int dilation);

enum class Reduce { mean, max };

// Reduces [L x q] over the time axis to a q-vector. Max routes the gradient
// to the first maximal row per column.
Tensor reduce_time(const Tensor& x, Reduce mode);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// Norm denominators are clamped below by eps, so zero vectors are safe.
Tensor cosine_similarity(const Tensor& a, const Tensor& b, double eps = 1e-8);

// Temperature-scaled softmax over a score vector, computed with
// max-subtraction.
Tensor softmax(const Tensor& scores, double temperature);

Tensor pick(const Tensor& x, int index);          // 1-d element as scalar
Tensor row(const Tensor& x, int r);               // row of a 2-d tensor
Tensor slice(const Tensor& x, int start, int len); // 1-d contiguous slice
Tensor concat(const std::vector<Tensor>& parts);  // 1-d concatenation
Tensor concat_cols(const std::vector<Tensor>& parts); // [L x qi] -> [L x sum qi]

Tensor neg(const Tensor& a);

// Constant one-hot vector (no gradient).
Tensor one_hot(int index, int width);

} // namespace tpa
