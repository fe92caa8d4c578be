#pragma once

#include "tpa/tensor.hpp"

#include <functional>
#include <string>
#include <vector>

namespace tpa {

struct GradCheckResult {
    bool pass = false;
    double max_rel_err = 0.0;
    int checked = 0;
    int excluded = 0; // components skipped at detected non-smooth points
    std::string detail;
};

// Verifies reverse-mode gradients of a scalar-valued function against central
// finite differences with step h = 1e-5. Per-component relative error is
// |g_ad - g_fd| / max(1, |g_ad|, |g_fd|); the check passes iff the maximum
// over checked components is <= tol.
//
// Components where a second-difference probe |f(x+h) + f(x-h) - 2 f(x)|
// blows up relative to h are excluded: the finite-difference stencil is
// straddling a kink (relu, max, clamp) where the two sides disagree and no
// derivative comparison is meaningful. A probe landing exactly on a relu
// kink is excluded by the same rule.
GradCheckResult grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                           double tol);

// Joint check over several inputs (parameters of a model path); inputs with
// requires_grad=false are held fixed.
GradCheckResult grad_check_multi(const std::function<Tensor(const std::vector<Tensor>&)>& f,
                                 const std::vector<Tensor>& inputs, double tol);

// Named check covering one registered op or model path at a given seed.
struct GradCase {
    std::string name;
    std::function<GradCheckResult(std::uint64_t seed, double tol)> run;
};

// Checks for every registered forward op, each built over seeded random
// inputs scalarized through a fixed weighting.
std::vector<GradCase> builtin_op_cases();

// End-to-end checks through every extractor kind and both loss paths (with
// and without the style module), taken over all model parameters on a small
// configuration.
std::vector<GradCase> model_loss_cases();

struct GradSuiteEntry {
    std::string name;
    bool pass = false;
    double max_rel_err = 0.0;
    int checked = 0;
    int excluded = 0;
    std::string detail;
};

// Runs every case over `trials` seeds derived from `seed`; an entry fails if
// any seed fails, reporting the worst error.
std::vector<GradSuiteEntry> run_grad_suite(std::uint64_t seed, int trials, double tol);

} // namespace tpa
