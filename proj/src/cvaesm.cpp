#include "tpa/cvaesm.hpp"

#include "tpa/errors.hpp"

#include <stdexcept>

namespace tpa {

namespace {
constexpr double kLogVarLo = -10.0;
constexpr double kLogVarHi = 10.0;

GaussianParams split_head(const Tensor& out, int latent) {
    GaussianParams g;
    g.mu = slice(out, 0, latent);
    g.log_var = clamp(slice(out, latent, latent), kLogVarLo, kLogVarHi);
    return g;
}
} // namespace

void CvaesmConfig::validate() const {
    if (beta < 0.0) throw ConfigError("cvaesm: beta must be >= 0");
    if (mc_samples < 1) throw ConfigError("cvaesm: mc_samples must be >= 1");
}

CvaesmHeads CvaesmHeads::create(int hidden, int num_classes, ParamStore& store, Rng& rng) {
    CvaesmHeads heads;
    heads.latent = hidden;
    heads.num_classes = num_classes;
    heads.post_W = store.add("cvaesm.post.W", {hidden + num_classes, 2 * hidden}, Init::xavier,
                             rng);
    heads.post_b = store.add("cvaesm.post.b", {2 * hidden}, Init::zero, rng);
    heads.prior_W = store.add("cvaesm.prior.W", {hidden, 2 * hidden}, Init::xavier, rng);
    heads.prior_b = store.add("cvaesm.prior.b", {2 * hidden}, Init::zero, rng);
    heads.g_W1 = store.add("cvaesm.g.W1", {hidden, hidden}, Init::xavier, rng);
    heads.g_b1 = store.add("cvaesm.g.b1", {hidden}, Init::zero, rng);
    heads.g_W2 = store.add("cvaesm.g.W2", {hidden, hidden}, Init::xavier, rng);
    heads.g_b2 = store.add("cvaesm.g.b2", {hidden}, Init::zero, rng);
    return heads;
}

GaussianParams CvaesmHeads::posterior(const Tensor& h, int label) const {
    if (label < 0 || label >= num_classes)
        throw std::invalid_argument("cvaesm posterior: label out of range");
    Tensor joint = concat({h, one_hot(label, num_classes)});
    return split_head(linear(joint, post_W, post_b), latent);
}

GaussianParams CvaesmHeads::prior(const Tensor& h) const {
    return split_head(linear(h, prior_W, prior_b), latent);
}

Tensor CvaesmHeads::modulate(const Tensor& h, const Tensor& z) const {
    Tensor g = linear(relu(linear(z, g_W1, g_b1)), g_W2, g_b2);
    return mul(h, add_const(g, 1.0));
}

Tensor reparameterize(const GaussianParams& g, Rng& rng) {
    const int n = g.mu.dim(0);
    std::vector<double> eps(static_cast<std::size_t>(n));
    for (double& e : eps) e = rng.normal();
    Tensor noise = Tensor::from({n}, std::move(eps), false);
    Tensor sigma = exp(scale(g.log_var, 0.5));
    return add(g.mu, mul(sigma, noise));
}

Tensor inference_latent(const GaussianParams& g_prior) { return g_prior.mu; }

Tensor kl_divergence(const GaussianParams& q, const GaussianParams& p) {
    if (q.mu.shape() != p.mu.shape())
        throw std::invalid_argument("kl_divergence: dimension mismatch");
    // Per-dim: (lvp - lvq)/2 + (exp(lvq - lvp) + (mu_q - mu_p)^2 exp(-lvp))/2 - 1/2
    Tensor dlv = sub(p.log_var, q.log_var);
    Tensor var_ratio = exp(sub(q.log_var, p.log_var));
    Tensor dmu = sub(q.mu, p.mu);
    Tensor maha = mul(mul(dmu, dmu), exp(neg(p.log_var)));
    Tensor per_dim = scale(add(dlv, add_const(add(var_ratio, maha), -1.0)), 0.5);
    return sum(per_dim);
}

} // namespace tpa
