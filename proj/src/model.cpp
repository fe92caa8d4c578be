#include "tpa/model.hpp"

#include "tpa/errors.hpp"

#include <cmath>

namespace tpa {

TpaModel::TpaModel(int input_dim, ExtractorConfig ext_cfg, ClassifierConfig cls_cfg,
                   CvaesmConfig cv_cfg, std::uint64_t init_seed)
    : input_dim_(input_dim), ext_cfg_(std::move(ext_cfg)), cls_cfg_(cls_cfg), cv_cfg_(cv_cfg) {
    ext_cfg_.validate();
    cls_cfg_.validate();
    cv_cfg_.validate();
    Rng base(init_seed);
    Rng ext_rng = base.fork(0);
    Rng proj_rng = base.fork(1);
    Rng cv_rng = base.fork(2);
    extractor_ = make_extractor(ext_cfg_, input_dim_, params_, ext_rng);
    proj_ = PromptProjection::create(input_dim_, ext_cfg_.hidden, params_, proj_rng);
    if (cv_cfg_.enabled)
        cvaesm_ = CvaesmHeads::create(ext_cfg_.hidden, cls_cfg_.num_classes, params_, cv_rng);
}

Tensor TpaModel::project_bank(const Tensor& bank_view) const {
    if (bank_view.dim(0) != cls_cfg_.num_classes)
        throw DataError("model: prompt bank class count disagrees with classifier");
    return proj_.project(bank_view);
}

Tensor TpaModel::video_embedding(const Tensor& clip) const {
    if (clip.ndim() != 2 || clip.dim(1) != input_dim_)
        throw DataError("model: clip width disagrees with input dim");
    return extractor_->forward(clip);
}

TpaModel::SampleLosses TpaModel::forward_train(const Tensor& clip, int label,
                                               const Tensor& prompts_proj, Rng& rng) const {
    SampleLosses out;
    Tensor h = video_embedding(clip);
    Tensor embedded = h;
    if (cv_cfg_.enabled) {
        GaussianParams q = cvaesm_.posterior(h, label);
        GaussianParams p = cvaesm_.prior(h);
        Tensor z = reparameterize(q, rng);
        embedded = cvaesm_.modulate(h, z);
        out.kl = kl_divergence(q, p);
    }
    Tensor scores = similarity_scores(embedded, prompts_proj);
    if (!scores.all_finite())
        throw NumericError("non-finite similarity scores in training forward pass");
    out.probs = classify(scores, cls_cfg_.temperature);
    out.ce = ce_loss(out.probs, label);
    CtrLoss ctr = ctr_loss(scores, label, cls_cfg_.margin);
    out.ctr = ctr.loss;
    out.hardest_negative = ctr.hardest_negative;
    return out;
}

std::vector<double> TpaModel::predict(const Tensor& clip, const Tensor& prompts_proj) const {
    NoGradScope ng;
    Tensor h = video_embedding(clip);
    Tensor embedded = h;
    if (cv_cfg_.enabled) {
        GaussianParams p = cvaesm_.prior(h);
        embedded = cvaesm_.modulate(h, inference_latent(p));
    }
    Tensor probs = classify(similarity_scores(embedded, prompts_proj), cls_cfg_.temperature);
    return {probs.value().begin(), probs.value().end()};
}

TpaModel::Uncertainty TpaModel::predict_uncertainty(const Tensor& clip,
                                                    const Tensor& prompts_proj, int mc_samples,
                                                    Rng& rng) const {
    if (mc_samples < 1) throw std::invalid_argument("predict_uncertainty: mc_samples >= 1");
    NoGradScope ng;
    const int C = cls_cfg_.num_classes;
    Uncertainty u;
    u.mean_probs.assign(static_cast<std::size_t>(C), 0.0);
    u.variance.assign(static_cast<std::size_t>(C), 0.0);

    Tensor h = video_embedding(clip);
    std::vector<std::vector<double>> draws;
    draws.reserve(static_cast<std::size_t>(mc_samples));
    for (int k = 0; k < mc_samples; ++k) {
        Tensor embedded = h;
        if (cv_cfg_.enabled) {
            GaussianParams p = cvaesm_.prior(h);
            embedded = cvaesm_.modulate(h, reparameterize(p, rng));
        }
        Tensor probs =
            classify(similarity_scores(embedded, prompts_proj), cls_cfg_.temperature);
        draws.emplace_back(probs.value().begin(), probs.value().end());
    }
    for (const auto& d : draws)
        for (int c = 0; c < C; ++c) u.mean_probs[static_cast<std::size_t>(c)] += d[static_cast<std::size_t>(c)];
    for (int c = 0; c < C; ++c) u.mean_probs[static_cast<std::size_t>(c)] /= mc_samples;
    for (const auto& d : draws)
        for (int c = 0; c < C; ++c) {
            const double diff = d[static_cast<std::size_t>(c)] - u.mean_probs[static_cast<std::size_t>(c)];
            u.variance[static_cast<std::size_t>(c)] += diff * diff;
        }
    for (int c = 0; c < C; ++c) u.variance[static_cast<std::size_t>(c)] /= mc_samples;
    for (double p : u.mean_probs)
        if (p > 0.0) u.entropy -= p * std::log(p);
    return u;
}

} // namespace tpa
