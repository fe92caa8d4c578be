#pragma once

#include "tpa/ops.hpp"
#include "tpa/params.hpp"
#include "tpa/tensor.hpp"

namespace tpa {

struct ClassifierConfig {
    double temperature = 0.1; // fixed softmax temperature
    double margin = 0.5;      // hinge margin m
    double alpha = 0.5;       // contrastive loss weight
    bool randomize_prompts = false;
    int num_classes = 2;

    void validate() const; // throws ConfigError
};

// Trainable projection shared across classes, mapping prompt embeddings into
// the video-embedding space.
struct PromptProjection {
    Tensor W, b;

    static PromptProjection create(int prompt_dim, int hidden, ParamStore& store, Rng& rng);
    // bank_view is C x D; the result is C x hidden.
    Tensor project(const Tensor& bank_view) const;
};

// s_c = cos(h, prompts_proj[c]) for each class; entries lie in [-1, 1].
Tensor similarity_scores(const Tensor& h, const Tensor& prompts_proj);

// Temperature-scaled softmax over similarity scores.
Tensor classify(const Tensor& scores, double temperature);

// Cross-entropy -log p_y with p_y floored at 1e-12.
Tensor ce_loss(const Tensor& probs, int label);

struct CtrLoss {
    Tensor loss;
    int hardest_negative = -1;
};

// Per-sample margin hinge against the hardest negative:
// max(0, m - s_y + max_{j != y} s_j). Ties pick the first maximal index.
CtrLoss ctr_loss(const Tensor& scores, int label, double margin);

// L = ce + alpha * ctr + beta * kl. Pass an undefined Tensor as kl when the
// style module is disabled.
Tensor total_loss(const Tensor& ce, const Tensor& ctr, const Tensor& kl, double alpha,
                  double beta);

} // namespace tpa
