#pragma once

#include "tpa/ops.hpp"
#include "tpa/params.hpp"
#include "tpa/tensor.hpp"

namespace tpa {

struct CvaesmConfig {
    bool enabled = false;
    double beta = 0.2;  // KL weight
    int mc_samples = 1; // Monte Carlo samples for predictive uncertainty

    void validate() const; // throws ConfigError
};

// Diagonal Gaussian over the latent style vector. log_var is clamped to
// [-10, 10] before use.
struct GaussianParams {
    Tensor mu;
    Tensor log_var;
};

// Posterior head f_post([h; y]), prior head f_prior(h) and the modulation
// MLP g. Each head is a single linear layer whose output splits into
// (mu, log_var); g is a two-layer MLP with a relu hidden layer.
struct CvaesmHeads {
    int latent = 0;
    int num_classes = 0;
    Tensor post_W, post_b;
    Tensor prior_W, prior_b;
    Tensor g_W1, g_b1, g_W2, g_b2;

    static CvaesmHeads create(int hidden, int num_classes, ParamStore& store, Rng& rng);

    // label is one-hot encoded and concatenated onto h.
    GaussianParams posterior(const Tensor& h, int label) const;
    GaussianParams prior(const Tensor& h) const;

    // h_tilde = h * (1 + g(z)), element-wise.
    Tensor modulate(const Tensor& h, const Tensor& z) const;
};

// z = mu + exp(log_var / 2) * eps with eps ~ N(0, I) from the seeded stream.
// Gradients flow to mu and log_var; eps is a constant.
Tensor reparameterize(const GaussianParams& g, Rng& rng);

// Deterministic inference latent: z = mu exactly, no randomness consumed.
Tensor inference_latent(const GaussianParams& g_prior);

// Closed-form KL(q || p) for diagonal Gaussians, summed over dimensions.
Tensor kl_divergence(const GaussianParams& q, const GaussianParams& p);

} // namespace tpa
