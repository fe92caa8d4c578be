#include "tpa/gradcheck.hpp"

#include "tpa/ops.hpp"
#include "tpa/rng.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tpa {

namespace {

constexpr double kFdStep = 1e-5;

double eval_scalar(const std::function<Tensor(const std::vector<Tensor>&)>& f,
                   const std::vector<Tensor>& inputs) {
    NoGradScope ng;
    Tensor out = f(inputs);
    if (out.numel() != 1) throw std::invalid_argument("grad_check: f must be scalar-valued");
    double v = out.item();
    if (!std::isfinite(v)) throw std::invalid_argument("grad_check: non-finite function value");
    return v;
}

} // namespace

GradCheckResult grad_check_multi(const std::function<Tensor(const std::vector<Tensor>&)>& f,
                                 const std::vector<Tensor>& inputs, double tol) {
    // AD pass on a fresh tape.
    for (const Tensor& t : inputs)
        if (t.requires_grad()) const_cast<Tensor&>(t).zero_grad();
    Tape tape;
    {
        TapeScope scope(tape);
        Tensor loss = f(inputs);
        if (loss.numel() != 1) throw std::invalid_argument("grad_check: f must be scalar-valued");
        if (!std::isfinite(loss.item()))
            throw std::invalid_argument("grad_check: non-finite function value");
        tape.backward(loss);
    }

    const double f0 = eval_scalar(f, inputs);
    GradCheckResult res;
    res.pass = true;

    for (std::size_t ti = 0; ti < inputs.size(); ++ti) {
        const Tensor& t = inputs[ti];
        if (!t.requires_grad()) continue;
        Tensor& mt = const_cast<Tensor&>(t);
        for (std::size_t i = 0; i < t.numel(); ++i) {
            const double orig = t.val(i);
            mt.value_mut()[i] = orig + kFdStep;
            const double fp = eval_scalar(f, inputs);
            mt.value_mut()[i] = orig - kFdStep;
            const double fm = eval_scalar(f, inputs);
            mt.value_mut()[i] = orig;

            const double g_fd = (fp - fm) / (2.0 * kFdStep);
            const double g_ad = t.grad()[i];
            // Second-difference probe. Smooth components give ~h*f''; a kink
            // inside the stencil gives the slope jump, which is what limits
            // the FD error there. Kinks whose jump stays below the threshold
            // cannot push the relative error past tol, so they may be kept.
            const double gscale = std::max(1.0, std::max(std::fabs(g_fd), std::fabs(g_ad)));
            const double curve = std::fabs(fp + fm - 2.0 * f0) / kFdStep;
            if (curve > std::max(2.0 * tol, 1e-4) * gscale) {
                ++res.excluded;
                continue;
            }
            const double rel = std::fabs(g_ad - g_fd) / gscale;
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                std::ostringstream os;
                os << "input " << ti << " component " << i << ": ad=" << g_ad
                   << " fd=" << g_fd;
                res.detail = os.str();
            }
            ++res.checked;
        }
    }
    if (res.checked == 0) {
        res.pass = false;
        res.detail = "no components checked (all excluded)";
        return res;
    }
    res.pass = res.max_rel_err <= tol;
    return res;
}

GradCheckResult grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                           double tol) {
    return grad_check_multi(
        [&f](const std::vector<Tensor>& in) { return f(in[0]); }, {x}, tol);
}

// ============================================================================
// Registered-op cases
// ============================================================================

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo, double hi,
                     bool requires_grad = true) {
    std::size_t n = detail::shape_numel(shape);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = rng.range(lo, hi);
    return Tensor::from(std::move(shape), std::move(v), requires_grad);
}

// Keeps components away from zero so relu-style kinks stay outside the FD
// stencil in op-level checks.
Tensor random_offzero(std::vector<int> shape, Rng& rng, bool requires_grad = true) {
    Tensor t = random_tensor(std::move(shape), rng, -1.0, 1.0, requires_grad);
    for (double& v : t.value_mut())
        if (std::fabs(v) < 0.05) v += v < 0.0 ? -0.05 : 0.05;
    return t;
}

// Scalarizes a tensor output through a fixed random weighting so every output
// component contributes to the checked gradient.
Tensor weigh(const Tensor& y, Rng& rng) {
    Tensor w = random_tensor(y.shape(), rng, 0.2, 1.0, false);
    return sum(mul(y, w));
}

GradCase unary_case(const std::string& name, std::function<Tensor(const Tensor&)> op, double lo,
                    double hi) {
    return {name, [op, lo, hi](std::uint64_t seed, double tol) {
                Rng rng(mix_seed(seed, 0x09));
                Tensor x = random_tensor({3, 4}, rng, lo, hi);
                Rng wrng = rng.fork(1);
                return grad_check(
                    [&op, &wrng](const Tensor& t) {
                        Rng r = wrng; // fixed weights per evaluation
                        return weigh(op(t), r);
                    },
                    x, tol);
            }};
}

} // namespace

std::vector<GradCase> builtin_op_cases() {
    std::vector<GradCase> cases;

    auto binary_case = [](const std::string& name,
                          std::function<Tensor(const Tensor&, const Tensor&)> op) {
        return GradCase{name, [op](std::uint64_t seed, double tol) {
                            Rng rng(mix_seed(seed, 0x0b));
                            Tensor a = random_tensor({3, 4}, rng, -1.0, 1.0);
                            Tensor b = random_tensor({3, 4}, rng, -1.0, 1.0);
                            Rng wrng = rng.fork(1);
                            return grad_check_multi(
                                [&op, &wrng](const std::vector<Tensor>& in) {
                                    Rng r = wrng;
                                    return weigh(op(in[0], in[1]), r);
                                },
                                {a, b}, tol);
                        }};
    };

    cases.push_back(binary_case("add", [](const Tensor& a, const Tensor& b) { return add(a, b); }));
    cases.push_back(binary_case("sub", [](const Tensor& a, const Tensor& b) { return sub(a, b); }));
    cases.push_back(binary_case("mul", [](const Tensor& a, const Tensor& b) { return mul(a, b); }));
    cases.push_back({"scale", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x0c));
                         Tensor x = random_tensor({3, 4}, rng, -1.0, 1.0);
                         Rng wrng = rng.fork(1);
                         return grad_check(
                             [&wrng](const Tensor& t) {
                                 Rng r = wrng;
                                 return weigh(scale(t, -1.7), r);
                             },
                             x, tol);
                     }});
    cases.push_back(unary_case("add_const", [](const Tensor& t) { return add_const(t, 0.3); },
                               -1.0, 1.0));
    cases.push_back(unary_case("exp", [](const Tensor& t) { return tpa::exp(t); }, -1.5, 1.5));
    cases.push_back(unary_case("log", [](const Tensor& t) { return tpa::log(t); }, 0.4, 2.0));
    cases.push_back({"relu", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x0d));
                         Tensor x = random_offzero({3, 4}, rng);
                         Rng wrng = rng.fork(1);
                         return grad_check(
                             [&wrng](const Tensor& t) {
                                 Rng r = wrng;
                                 return weigh(relu(t), r);
                             },
                             x, tol);
                     }});
    cases.push_back(unary_case("sigmoid", [](const Tensor& t) { return sigmoid(t); }, -2.0, 2.0));
    cases.push_back(unary_case("clamp", [](const Tensor& t) { return clamp(t, -0.8, 0.8); },
                               -0.6, 0.6));

    cases.push_back({"linear", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x10));
                         Tensor x = random_tensor({3, 5}, rng, -1.0, 1.0);
                         Tensor W = random_tensor({5, 4}, rng, -1.0, 1.0);
                         Tensor b = random_tensor({4}, rng, -1.0, 1.0);
                         Rng wrng = rng.fork(1);
                         return grad_check_multi(
                             [&wrng](const std::vector<Tensor>& in) {
                                 Rng r = wrng;
                                 return weigh(linear(in[0], in[1], in[2]), r);
                             },
                             {x, W, b}, tol);
                     }});
    cases.push_back({"matmul", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x11));
                         Tensor a = random_tensor({3, 5}, rng, -1.0, 1.0);
                         Tensor b = random_tensor({5, 4}, rng, -1.0, 1.0);
                         Rng wrng = rng.fork(1);
                         return grad_check_multi(
                             [&wrng](const std::vector<Tensor>& in) {
                                 Rng r = wrng;
                                 return weigh(matmul(in[0], in[1]), r);
                             },
                             {a, b}, tol);
                     }});
    cases.push_back({"add_rowvec", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x12));
                         Tensor x = random_tensor({4, 3}, rng, -1.0, 1.0);
                         Tensor b = random_tensor({3}, rng, -1.0, 1.0);
                         Rng wrng = rng.fork(1);
                         return grad_check_multi(
                             [&wrng](const std::vector<Tensor>& in) {
                                 Rng r = wrng;
                                 return weigh(add_rowvec(in[0], in[1]), r);
                             },
                             {x, b}, tol);
                     }});
    cases.push_back({"conv1d_same", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x13));
                         Tensor x = random_tensor({6, 3}, rng, -1.0, 1.0);
                         Tensor k = random_tensor({3, 3, 2}, rng, -1.0, 1.0);
                         Rng wrng = rng.fork(1);
                         return grad_check_multi(
                             [&wrng](const std::vector<Tensor>& in) {
                                 Rng r = wrng;
                                 return weigh(conv1d(in[0], in[1], Padding::same, 1), r);
                             },
                             {x, k}, tol);
                     }});
    cases.push_back({"conv1d_causal_dilated", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x14));
                         Tensor x = random_tensor({8, 2}, rng, -1.0, 1.0);
                         Tensor k = random_tensor({3, 2, 3}, rng, -1.0, 1.0);
                         Rng wrng = rng.fork(1);
                         return grad_check_multi(
                             [&wrng](const std::vector<Tensor>& in) {
                                 Rng r = wrng;
                                 return weigh(conv1d(in[0], in[1], Padding::causal, 2), r);
                             },
                             {x, k}, tol);
                     }});
    cases.push_back({"reduce_mean", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x15));
                         Tensor x = random_tensor({5, 3}, rng, -1.0, 1.0);
                         Rng wrng = rng.fork(1);
                         return grad_check(
                             [&wrng](const Tensor& t) {
                                 Rng r = wrng;
                                 return weigh(reduce_time(t, Reduce::mean), r);
                             },
                             x, tol);
                     }});
    cases.push_back({"reduce_max", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x16));
                         // Spread rows apart so no column has a near-tie.
                         Tensor x = random_tensor({5, 3}, rng, -0.2, 0.2);
                         for (int t = 0; t < 5; ++t)
                             for (int j = 0; j < 3; ++j)
                                 x.value_mut()[static_cast<std::size_t>(t) * 3 + j] +=
                                     ((t * 7 + j * 3) % 5) * 1.0;
                         Rng wrng = rng.fork(1);
                         return grad_check(
                             [&wrng](const Tensor& t) {
                                 Rng r = wrng;
                                 return weigh(reduce_time(t, Reduce::max), r);
                             },
                             x, tol);
                     }});
    cases.push_back({"sum", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x17));
                         Tensor x = random_tensor({3, 4}, rng, -1.0, 1.0);
                         return grad_check([](const Tensor& t) { return tpa::sum(t); }, x, tol);
                     }});
    cases.push_back({"mean", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x18));
                         Tensor x = random_tensor({3, 4}, rng, -1.0, 1.0);
                         return grad_check([](const Tensor& t) { return tpa::mean(t); }, x, tol);
                     }});
    cases.push_back({"cosine_similarity", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x19));
                         Tensor a = random_tensor({6}, rng, -1.0, 1.0);
                         Tensor b = random_tensor({6}, rng, -1.0, 1.0);
                         return grad_check_multi(
                             [](const std::vector<Tensor>& in) {
                                 return cosine_similarity(in[0], in[1]);
                             },
                             {a, b}, tol);
                     }});
    cases.push_back({"softmax", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x1a));
                         Tensor s = random_tensor({5}, rng, -1.0, 1.0);
                         Rng wrng = rng.fork(1);
                         return grad_check(
                             [&wrng](const Tensor& t) {
                                 Rng r = wrng;
                                 return weigh(softmax(t, 0.5), r);
                             },
                             s, tol);
                     }});
    cases.push_back({"pick", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x1b));
                         Tensor x = random_tensor({6}, rng, -1.0, 1.0);
                         return grad_check([](const Tensor& t) { return pick(t, 2); }, x, tol);
                     }});
    cases.push_back({"row", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x1c));
                         Tensor x = random_tensor({4, 3}, rng, -1.0, 1.0);
                         Rng wrng = rng.fork(1);
                         return grad_check(
                             [&wrng](const Tensor& t) {
                                 Rng r = wrng;
                                 return weigh(row(t, 1), r);
                             },
                             x, tol);
                     }});
    cases.push_back({"slice", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x1d));
                         Tensor x = random_tensor({8}, rng, -1.0, 1.0);
                         Rng wrng = rng.fork(1);
                         return grad_check(
                             [&wrng](const Tensor& t) {
                                 Rng r = wrng;
                                 return weigh(slice(t, 2, 4), r);
                             },
                             x, tol);
                     }});
    cases.push_back({"concat", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x1e));
                         Tensor a = random_tensor({3}, rng, -1.0, 1.0);
                         Tensor b = random_tensor({4}, rng, -1.0, 1.0);
                         Rng wrng = rng.fork(1);
                         return grad_check_multi(
                             [&wrng](const std::vector<Tensor>& in) {
                                 Rng r = wrng;
                                 return weigh(concat({in[0], in[1]}), r);
                             },
                             {a, b}, tol);
                     }});
    cases.push_back({"concat_cols", [](std::uint64_t seed, double tol) {
                         Rng rng(mix_seed(seed, 0x1f));
                         Tensor a = random_tensor({4, 2}, rng, -1.0, 1.0);
                         Tensor b = random_tensor({4, 3}, rng, -1.0, 1.0);
                         Rng wrng = rng.fork(1);
                         return grad_check_multi(
                             [&wrng](const std::vector<Tensor>& in) {
                                 Rng r = wrng;
                                 return weigh(concat_cols({in[0], in[1]}), r);
                             },
                             {a, b}, tol);
                     }});
    return cases;
}

} // namespace tpa
