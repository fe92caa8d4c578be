#include "tpa/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tpa {

namespace {

using Node = std::shared_ptr<TensorData>;

// Decides whether this op participates in autodiff and returns the output's
// requires_grad flag. Tracked ops outside a TapeScope are a usage bug.
bool tracing(std::initializer_list<const Tensor*> inputs) {
    if (!detail::grad_enabled()) return false;
    bool any = false;
    for (const Tensor* t : inputs)
        if (t->defined() && t->requires_grad()) any = true;
    if (!any) return false;
    if (Tape::current() == nullptr)
        throw std::logic_error("gradient-tracked op executed with no active tape");
    return true;
}

Tensor make_out(std::vector<int> shape, std::vector<double> data, bool rg) {
    return Tensor::from(std::move(shape), std::move(data), rg);
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

bool is_scalar(const Tensor& t) { return t.numel() == 1; }

// Shared skeleton for binary elementwise ops with scalar broadcast.
template <typename Fwd, typename BwdA, typename BwdB>
Tensor binary_ew(const Tensor& a, const Tensor& b, const char* name, Fwd fwd, BwdA bwd_a,
                 BwdB bwd_b) {
    const bool sa = is_scalar(a), sb = is_scalar(b);
    if (!sa && !sb) check_same_shape(a, b, name);
    const Tensor& big = sa && !sb ? b : a;
    std::size_t n = big.numel();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double av = a.val(sa ? 0 : i);
        double bv = b.val(sb ? 0 : i);
        out[i] = fwd(av, bv);
    }
    Tensor y = make_out(big.shape(), std::move(out), tracing({&a, &b}));
    if (y.requires_grad()) {
        Node na = a.node(), nb = b.node(), ny = y.node();
        Tape::current()->record([na, nb, ny, sa, sb, n, bwd_a, bwd_b]() {
            for (std::size_t i = 0; i < n; ++i) {
                double go = ny->grad[i];
                double av = na->value[sa ? 0 : i];
                double bv = nb->value[sb ? 0 : i];
                if (na->requires_grad) na->grad[sa ? 0 : i] += bwd_a(go, av, bv);
                if (nb->requires_grad) nb->grad[sb ? 0 : i] += bwd_b(go, av, bv);
            }
        });
    }
    return y;
}

template <typename Fwd, typename Bwd>
Tensor unary_ew(const Tensor& a, Fwd fwd, Bwd bwd) {
    std::size_t n = a.numel();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = fwd(a.val(i));
    Tensor y = make_out(a.shape(), std::move(out), tracing({&a}));
    if (y.requires_grad()) {
        Node na = a.node(), ny = y.node();
        Tape::current()->record([na, ny, n, bwd]() {
            for (std::size_t i = 0; i < n; ++i)
                na->grad[i] += bwd(ny->grad[i], na->value[i], ny->value[i]);
        });
    }
    return y;
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_ew(
        a, b, "add", [](double x, double y) { return x + y; },
        [](double go, double, double) { return go; },
        [](double go, double, double) { return go; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_ew(
        a, b, "sub", [](double x, double y) { return x - y; },
        [](double go, double, double) { return go; },
        [](double go, double, double) { return -go; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_ew(
        a, b, "mul", [](double x, double y) { return x * y; },
        [](double go, double, double y) { return go * y; },
        [](double go, double x, double) { return go * x; });
}

Tensor scale(const Tensor& a, double c) {
    return unary_ew(
        a, [c](double x) { return c * x; },
        [c](double go, double, double) { return c * go; });
}

Tensor add_const(const Tensor& a, double c) {
    return unary_ew(
        a, [c](double x) { return x + c; },
        [](double go, double, double) { return go; });
}

Tensor exp(const Tensor& a) {
    return unary_ew(
        a, [](double x) { return std::exp(x); },
        [](double go, double, double y) { return go * y; });
}

Tensor log(const Tensor& a) {
    for (std::size_t i = 0; i < a.numel(); ++i)
        if (!(a.val(i) > 0.0))
            throw std::invalid_argument("log: non-positive input");
    return unary_ew(
        a, [](double x) { return std::log(x); },
        [](double go, double x, double) { return go / x; });
}

Tensor relu(const Tensor& a) {
    return unary_ew(
        a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double go, double x, double) { return x > 0.0 ? go : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
    return unary_ew(
        a,
        [](double x) {
            if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
            double e = std::exp(x);
            return e / (1.0 + e);
        },
        [](double go, double, double y) { return go * y * (1.0 - y); });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("clamp: lo > hi");
    return unary_ew(
        a, [lo, hi](double x) { return std::min(std::max(x, lo), hi); },
        [lo, hi](double go, double x, double) { return (x > lo && x < hi) ? go : 0.0; });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor linear(const Tensor& x, const Tensor& W, const Tensor& b) {
    const bool vec = x.ndim() == 1;
    const int n = vec ? 1 : x.dim(0);
    const int p = vec ? x.dim(0) : x.dim(1);
    if (W.ndim() != 2 || W.dim(0) != p)
        throw std::invalid_argument("linear: inner dimensions disagree");
    const int q = W.dim(1);
    if (b.ndim() != 1 || b.dim(0) != q)
        throw std::invalid_argument("linear: bias width disagrees with W");

    std::vector<double> out(static_cast<std::size_t>(n) * q);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < q; ++j) {
            double acc = b.val(static_cast<std::size_t>(j));
            for (int k = 0; k < p; ++k)
                acc += x.val(static_cast<std::size_t>(i) * p + k) *
                       W.val(static_cast<std::size_t>(k) * q + j);
            out[static_cast<std::size_t>(i) * q + j] = acc;
        }
    std::vector<int> out_shape = vec ? std::vector<int>{q} : std::vector<int>{n, q};
    Tensor y = make_out(std::move(out_shape), std::move(out), tracing({&x, &W, &b}));
    if (y.requires_grad()) {
        Node nx = x.node(), nw = W.node(), nb = b.node(), ny = y.node();
        Tape::current()->record([nx, nw, nb, ny, n, p, q]() {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < q; ++j) {
                    double go = ny->grad[static_cast<std::size_t>(i) * q + j];
                    if (go == 0.0) continue;
                    if (nb->requires_grad) nb->grad[static_cast<std::size_t>(j)] += go;
                    for (int k = 0; k < p; ++k) {
                        std::size_t xi = static_cast<std::size_t>(i) * p + k;
                        std::size_t wi = static_cast<std::size_t>(k) * q + j;
                        if (nx->requires_grad) nx->grad[xi] += go * nw->value[wi];
                        if (nw->requires_grad) nw->grad[wi] += go * nx->value[xi];
                    }
                }
        });
    }
    return y;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0))
        throw std::invalid_argument("matmul: inner dimensions disagree");
    const int n = a.dim(0), p = a.dim(1), q = b.dim(1);
    std::vector<double> out(static_cast<std::size_t>(n) * q, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < p; ++k) {
            double av = a.val(static_cast<std::size_t>(i) * p + k);
            if (av == 0.0) continue;
            for (int j = 0; j < q; ++j)
                out[static_cast<std::size_t>(i) * q + j] +=
                    av * b.val(static_cast<std::size_t>(k) * q + j);
        }
    Tensor y = make_out({n, q}, std::move(out), tracing({&a, &b}));
    if (y.requires_grad()) {
        Node na = a.node(), nb = b.node(), ny = y.node();
        Tape::current()->record([na, nb, ny, n, p, q]() {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < q; ++j) {
                    double go = ny->grad[static_cast<std::size_t>(i) * q + j];
                    if (go == 0.0) continue;
                    for (int k = 0; k < p; ++k) {
                        std::size_t ai = static_cast<std::size_t>(i) * p + k;
                        std::size_t bi = static_cast<std::size_t>(k) * q + j;
                        if (na->requires_grad) na->grad[ai] += go * nb->value[bi];
                        if (nb->requires_grad) nb->grad[bi] += go * na->value[ai];
                    }
                }
        });
    }
    return y;
}

Tensor add_rowvec(const Tensor& x, const Tensor& b) {
    if (x.ndim() != 2 || b.ndim() != 1 || b.dim(0) != x.dim(1))
        throw std::invalid_argument("add_rowvec: width mismatch");
    const int n = x.dim(0), q = x.dim(1);
    std::vector<double> out(x.numel());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < q; ++j)
            out[static_cast<std::size_t>(i) * q + j] =
                x.val(static_cast<std::size_t>(i) * q + j) + b.val(static_cast<std::size_t>(j));
    Tensor y = make_out({n, q}, std::move(out), tracing({&x, &b}));
    if (y.requires_grad()) {
        Node nx = x.node(), nb = b.node(), ny = y.node();
        Tape::current()->record([nx, nb, ny, n, q]() {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < q; ++j) {
                    double go = ny->grad[static_cast<std::size_t>(i) * q + j];
                    if (nx->requires_grad) nx->grad[static_cast<std::size_t>(i) * q + j] += go;
                    if (nb->requires_grad) nb->grad[static_cast<std::size_t>(j)] += go;
                }
        });
    }
    return y;
}

Tensor conv1d(const Tensor& x, const Tensor& kernels, Padding padding, int dilation) {
    if (x.ndim() != 2 || kernels.ndim() != 3)
        throw std::invalid_argument("conv1d: x must be [L x Cin], kernels [k x Cin x Cout]");
    if (dilation < 1) throw std::invalid_argument("conv1d: dilation must be >= 1");
    const int L = x.dim(0), cin = x.dim(1);
    const int k = kernels.dim(0), kc = kernels.dim(1), cout = kernels.dim(2);
    if (kc != cin) throw std::invalid_argument("conv1d: kernel channel count disagrees with input");
    if (padding == Padding::same && k % 2 == 0)
        throw std::invalid_argument("conv1d: same padding requires odd kernel size");
    const int extent = (k - 1) * dilation + 1;
    const int pad = (k - 1) * dilation;
    if (extent > L + pad)
        throw std::invalid_argument("conv1d: kernel extent exceeds padded length");
    // Offset of kernel tap i relative to the output frame.
    const int shift = padding == Padding::same ? (k - 1) / 2 * dilation : (k - 1) * dilation;

    std::vector<double> out(static_cast<std::size_t>(L) * cout, 0.0);
    for (int t = 0; t < L; ++t)
        for (int i = 0; i < k; ++i) {
            int src = t + i * dilation - shift;
            if (src < 0 || src >= L) continue;
            for (int c = 0; c < cin; ++c) {
                double xv = x.val(static_cast<std::size_t>(src) * cin + c);
                if (xv == 0.0) continue;
                const std::size_t kbase = (static_cast<std::size_t>(i) * cin + c) * cout;
                std::size_t obase = static_cast<std::size_t>(t) * cout;
                for (int o = 0; o < cout; ++o) out[obase + o] += xv * kernels.val(kbase + o);
            }
        }
    Tensor y = make_out({L, cout}, std::move(out), tracing({&x, &kernels}));
    if (y.requires_grad()) {
        Node nx = x.node(), nk = kernels.node(), ny = y.node();
        Tape::current()->record([nx, nk, ny, L, cin, k, cout, dilation, shift]() {
            for (int t = 0; t < L; ++t)
                for (int i = 0; i < k; ++i) {
                    int src = t + i * dilation - shift;
                    if (src < 0 || src >= L) continue;
                    for (int c = 0; c < cin; ++c) {
                        const std::size_t xi = static_cast<std::size_t>(src) * cin + c;
                        const std::size_t kbase = (static_cast<std::size_t>(i) * cin + c) * cout;
                        const std::size_t obase = static_cast<std::size_t>(t) * cout;
                        for (int o = 0; o < cout; ++o) {
                            double go = ny->grad[obase + o];
                            if (go == 0.0) continue;
                            if (nx->requires_grad) nx->grad[xi] += go * nk->value[kbase + o];
                            if (nk->requires_grad) nk->grad[kbase + o] += go * nx->value[xi];
                        }
                    }
                }
        });
    }
    return y;
}

Tensor reduce_time(const Tensor& x, Reduce mode) {
    if (x.ndim() != 2) throw std::invalid_argument("reduce_time: expected [L x q]");
    const int L = x.dim(0), q = x.dim(1);
    std::vector<double> out(static_cast<std::size_t>(q));
    std::vector<int> argmax(static_cast<std::size_t>(q), 0);
    for (int j = 0; j < q; ++j) {
        if (mode == Reduce::mean) {
            double acc = 0.0;
            for (int t = 0; t < L; ++t) acc += x.val(static_cast<std::size_t>(t) * q + j);
            out[static_cast<std::size_t>(j)] = acc / L;
        } else {
            double best = x.val(static_cast<std::size_t>(j));
            int bi = 0;
            for (int t = 1; t < L; ++t) {
                double v = x.val(static_cast<std::size_t>(t) * q + j);
                if (v > best) { // strict: ties keep the first index
                    best = v;
                    bi = t;
                }
            }
            out[static_cast<std::size_t>(j)] = best;
            argmax[static_cast<std::size_t>(j)] = bi;
        }
    }
    Tensor y = make_out({q}, std::move(out), tracing({&x}));
    if (y.requires_grad()) {
        Node nx = x.node(), ny = y.node();
        Tape::current()->record([nx, ny, L, q, mode, argmax = std::move(argmax)]() {
            for (int j = 0; j < q; ++j) {
                double go = ny->grad[static_cast<std::size_t>(j)];
                if (go == 0.0) continue;
                if (mode == Reduce::mean) {
                    double share = go / L;
                    for (int t = 0; t < L; ++t)
                        nx->grad[static_cast<std::size_t>(t) * q + j] += share;
                } else {
                    nx->grad[static_cast<std::size_t>(argmax[static_cast<std::size_t>(j)]) * q +
                             j] += go;
                }
            }
        });
    }
    return y;
}

Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) acc += a.val(i);
    Tensor y = make_out({1}, {acc}, tracing({&a}));
    if (y.requires_grad()) {
        Node na = a.node(), ny = y.node();
        Tape::current()->record([na, ny]() {
            double go = ny->grad[0];
            for (double& g : na->grad) g += go;
        });
    }
    return y;
}

Tensor mean(const Tensor& a) {
    double acc = 0.0;
    std::size_t n = a.numel();
    for (std::size_t i = 0; i < n; ++i) acc += a.val(i);
    Tensor y = make_out({1}, {acc / static_cast<double>(n)}, tracing({&a}));
    if (y.requires_grad()) {
        Node na = a.node(), ny = y.node();
        Tape::current()->record([na, ny, n]() {
            double share = ny->grad[0] / static_cast<double>(n);
            for (double& g : na->grad) g += share;
        });
    }
    return y;
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b, double eps) {
    if (a.ndim() != 1 || b.ndim() != 1 || a.dim(0) != b.dim(0))
        throw std::invalid_argument("cosine_similarity: expected equal-length vectors");
    const std::size_t n = a.numel();
    double dot = 0.0, na2 = 0.0, nb2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dot += a.val(i) * b.val(i);
        na2 += a.val(i) * a.val(i);
        nb2 += b.val(i) * b.val(i);
    }
    const double na = std::sqrt(na2), nb = std::sqrt(nb2);
    const double ca = std::max(na, eps), cb = std::max(nb, eps);
    const double v = dot / (ca * cb);
    Tensor y = make_out({1}, {v}, tracing({&a, &b}));
    if (y.requires_grad()) {
        Node pa = a.node(), pb = b.node(), py = y.node();
        Tape::current()->record([pa, pb, py, n, na, nb, ca, cb, v, eps]() {
            double go = py->grad[0];
            if (go == 0.0) return;
            // d v / d a_i = b_i/(ca*cb) - v*a_i/ca^2 when the norm is active,
            // and just b_i/(ca*cb) when the eps clamp is active.
            for (std::size_t i = 0; i < n; ++i) {
                if (pa->requires_grad) {
                    double g = pb->value[i] / (ca * cb);
                    if (na > eps) g -= v * pa->value[i] / (ca * ca);
                    pa->grad[i] += go * g;
                }
                if (pb->requires_grad) {
                    double g = pa->value[i] / (ca * cb);
                    if (nb > eps) g -= v * pb->value[i] / (cb * cb);
                    pb->grad[i] += go * g;
                }
            }
        });
    }
    return y;
}

Tensor softmax(const Tensor& scores, double temperature) {
    if (scores.ndim() != 1) throw std::invalid_argument("softmax: expected a vector");
    if (!(temperature > 0.0)) throw std::invalid_argument("softmax: temperature must be positive");
    const std::size_t n = scores.numel();
    std::vector<double> z(n);
    double m = -1e300;
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = scores.val(i) / temperature;
        m = std::max(m, z[i]);
    }
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = std::exp(z[i] - m);
        denom += z[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] /= denom;
    Tensor y = make_out(scores.shape(), std::move(z), tracing({&scores}));
    if (y.requires_grad()) {
        Node ns = scores.node(), ny = y.node();
        Tape::current()->record([ns, ny, n, temperature]() {
            double dotgp = 0.0;
            for (std::size_t i = 0; i < n; ++i) dotgp += ny->grad[i] * ny->value[i];
            for (std::size_t i = 0; i < n; ++i)
                ns->grad[i] += ny->value[i] * (ny->grad[i] - dotgp) / temperature;
        });
    }
    return y;
}

Tensor pick(const Tensor& x, int index) {
    if (x.ndim() != 1 || index < 0 || index >= x.dim(0))
        throw std::invalid_argument("pick: index out of range");
    Tensor y = make_out({1}, {x.val(static_cast<std::size_t>(index))}, tracing({&x}));
    if (y.requires_grad()) {
        Node nx = x.node(), ny = y.node();
        Tape::current()->record(
            [nx, ny, index]() { nx->grad[static_cast<std::size_t>(index)] += ny->grad[0]; });
    }
    return y;
}

Tensor row(const Tensor& x, int r) {
    if (x.ndim() != 2 || r < 0 || r >= x.dim(0))
        throw std::invalid_argument("row: index out of range");
    const int q = x.dim(1);
    std::vector<double> out(static_cast<std::size_t>(q));
    for (int j = 0; j < q; ++j) out[static_cast<std::size_t>(j)] = x.at(r, j);
    Tensor y = make_out({q}, std::move(out), tracing({&x}));
    if (y.requires_grad()) {
        Node nx = x.node(), ny = y.node();
        Tape::current()->record([nx, ny, r, q]() {
            for (int j = 0; j < q; ++j)
                nx->grad[static_cast<std::size_t>(r) * q + j] += ny->grad[static_cast<std::size_t>(j)];
        });
    }
    return y;
}

Tensor slice(const Tensor& x, int start, int len) {
    if (x.ndim() != 1 || start < 0 || len < 1 || start + len > x.dim(0))
        throw std::invalid_argument("slice: range out of bounds");
    std::vector<double> out(static_cast<std::size_t>(len));
    for (int j = 0; j < len; ++j) out[static_cast<std::size_t>(j)] = x.val(static_cast<std::size_t>(start + j));
    Tensor y = make_out({len}, std::move(out), tracing({&x}));
    if (y.requires_grad()) {
        Node nx = x.node(), ny = y.node();
        Tape::current()->record([nx, ny, start, len]() {
            for (int j = 0; j < len; ++j)
                nx->grad[static_cast<std::size_t>(start + j)] += ny->grad[static_cast<std::size_t>(j)];
        });
    }
    return y;
}

Tensor concat(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat: no inputs");
    int total = 0;
    for (const Tensor& p : parts) {
        if (p.ndim() != 1) throw std::invalid_argument("concat: expected 1-d tensors");
        total += p.dim(0);
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(total));
    for (const Tensor& p : parts)
        out.insert(out.end(), p.value().begin(), p.value().end());
    std::vector<const Tensor*> refs;
    for (const Tensor& p : parts) refs.push_back(&p);
    bool rg = false;
    for (const Tensor* p : refs) rg = rg || (detail::grad_enabled() && p->requires_grad());
    if (rg && Tape::current() == nullptr)
        throw std::logic_error("gradient-tracked op executed with no active tape");
    Tensor y = make_out({total}, std::move(out), rg);
    if (y.requires_grad()) {
        std::vector<Node> nodes;
        for (const Tensor& p : parts) nodes.push_back(p.node());
        Node ny = y.node();
        Tape::current()->record([nodes, ny]() {
            std::size_t off = 0;
            for (const Node& n : nodes) {
                if (n->requires_grad)
                    for (std::size_t j = 0; j < n->value.size(); ++j) n->grad[j] += ny->grad[off + j];
                off += n->value.size();
            }
        });
    }
    return y;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
    const int L = parts.front().ndim() == 2 ? parts.front().dim(0) : -1;
    if (L < 0) throw std::invalid_argument("concat_cols: expected 2-d tensors");
    int total = 0;
    for (const Tensor& p : parts) {
        if (p.ndim() != 2 || p.dim(0) != L)
            throw std::invalid_argument("concat_cols: row counts disagree");
        total += p.dim(1);
    }
    std::vector<double> out(static_cast<std::size_t>(L) * total);
    int off = 0;
    for (const Tensor& p : parts) {
        const int q = p.dim(1);
        for (int t = 0; t < L; ++t)
            for (int j = 0; j < q; ++j)
                out[static_cast<std::size_t>(t) * total + off + j] = p.at(t, j);
        off += q;
    }
    bool rg = false;
    for (const Tensor& p : parts) rg = rg || (detail::grad_enabled() && p.requires_grad());
    if (rg && Tape::current() == nullptr)
        throw std::logic_error("gradient-tracked op executed with no active tape");
    Tensor y = make_out({L, total}, std::move(out), rg);
    if (y.requires_grad()) {
        std::vector<Node> nodes;
        std::vector<int> widths;
        for (const Tensor& p : parts) {
            nodes.push_back(p.node());
            widths.push_back(p.dim(1));
        }
        Node ny = y.node();
        Tape::current()->record([nodes, widths, ny, L, total]() {
            int off = 0;
            for (std::size_t pi = 0; pi < nodes.size(); ++pi) {
                const Node& n = nodes[pi];
                const int q = widths[pi];
                if (n->requires_grad)
                    for (int t = 0; t < L; ++t)
                        for (int j = 0; j < q; ++j)
                            n->grad[static_cast<std::size_t>(t) * q + j] +=
                                ny->grad[static_cast<std::size_t>(t) * total + off + j];
                off += q;
            }
        });
    }
    return y;
}

Tensor one_hot(int index, int width) {
    if (index < 0 || index >= width) throw std::invalid_argument("one_hot: index out of range");
    std::vector<double> v(static_cast<std::size_t>(width), 0.0);
    v[static_cast<std::size_t>(index)] = 1.0;
    return Tensor::from({width}, std::move(v), false);
}

} // namespace tpa
