#include "tpa/tpa_head.hpp"

#include "tpa/errors.hpp"

#include <stdexcept>

namespace tpa {

void ClassifierConfig::validate() const {
    if (!(temperature > 0.0)) throw ConfigError("classifier: tau must be > 0");
    if (margin < 0.0) throw ConfigError("classifier: margin must be >= 0");
    if (alpha < 0.0) throw ConfigError("classifier: alpha must be >= 0");
    if (num_classes < 2) throw ConfigError("classifier: at least two classes required");
}

PromptProjection PromptProjection::create(int prompt_dim, int hidden, ParamStore& store,
                                          Rng& rng) {
    PromptProjection p;
    p.W = store.add("prompt_proj.W", {prompt_dim, hidden}, Init::xavier, rng);
    p.b = store.add("prompt_proj.b", {hidden}, Init::zero, rng);
    return p;
}

Tensor PromptProjection::project(const Tensor& bank_view) const {
    if (bank_view.ndim() != 2 || bank_view.dim(1) != W.dim(0))
        throw DataError("prompt projection: bank dim disagrees with projection input");
    return linear(bank_view, W, b);
}

Tensor similarity_scores(const Tensor& h, const Tensor& prompts_proj) {
    if (prompts_proj.ndim() != 2 || h.ndim() != 1 || prompts_proj.dim(1) != h.dim(0))
        throw std::invalid_argument("similarity_scores: shape mismatch");
    const int C = prompts_proj.dim(0);
    std::vector<Tensor> sims;
    sims.reserve(static_cast<std::size_t>(C));
    for (int c = 0; c < C; ++c) sims.push_back(cosine_similarity(h, row(prompts_proj, c)));
    return concat(sims);
}

Tensor classify(const Tensor& scores, double temperature) {
    return softmax(scores, temperature);
}

Tensor ce_loss(const Tensor& probs, int label) {
    if (label < 0 || label >= probs.dim(0))
        throw std::invalid_argument("ce_loss: label out of range");
    return neg(log(clamp(pick(probs, label), 1e-12, 1.0)));
}

CtrLoss ctr_loss(const Tensor& scores, int label, double margin) {
    const int C = scores.dim(0);
    if (C < 2) throw std::invalid_argument("ctr_loss: needs at least two classes");
    if (label < 0 || label >= C) throw std::invalid_argument("ctr_loss: label out of range");
    int hardest = -1;
    double best = -1e300;
    for (int j = 0; j < C; ++j) {
        if (j == label) continue;
        const double v = scores.val(static_cast<std::size_t>(j));
        if (v > best) {
            best = v;
            hardest = j;
        }
    }
    CtrLoss out;
    out.hardest_negative = hardest;
    out.loss = relu(add_const(sub(pick(scores, hardest), pick(scores, label)), margin));
    return out;
}

Tensor total_loss(const Tensor& ce, const Tensor& ctr, const Tensor& kl, double alpha,
                  double beta) {
    Tensor total = add(ce, scale(ctr, alpha));
    if (kl.defined()) total = add(total, scale(kl, beta));
    return total;
}

} // namespace tpa
