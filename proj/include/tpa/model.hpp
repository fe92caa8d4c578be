#pragma once

#include "tpa/cvaesm.hpp"
#include "tpa/params.hpp"
#include "tpa/temporal.hpp"
#include "tpa/tpa_head.hpp"

#include <memory>
#include <vector>

namespace tpa {

// ============================================================================
// The full trainable model: temporal extractor, prompt projection and the
// optional style-modulation heads, sharing one parameter store.
//
// Component initializations draw from independent substreams of the init
// seed, so enabling or disabling the style module leaves the extractor and
// projection parameters untouched.
// ============================================================================

class TpaModel {
public:
    TpaModel(int input_dim, ExtractorConfig ext_cfg, ClassifierConfig cls_cfg,
             CvaesmConfig cv_cfg, std::uint64_t init_seed);

    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    int input_dim() const { return input_dim_; }
    int hidden() const { return ext_cfg_.hidden; }
    const ExtractorConfig& extractor_config() const { return ext_cfg_; }
    const ClassifierConfig& classifier_config() const { return cls_cfg_; }
    const CvaesmConfig& cvaesm_config() const { return cv_cfg_; }
    const CvaesmHeads& cvaesm_heads() const { return cvaesm_; }

    // Projects an epoch's prompt bank view (C x D) into the embedding space.
    Tensor project_bank(const Tensor& bank_view) const;

    struct SampleLosses {
        Tensor ce;
        Tensor ctr;
        Tensor kl; // undefined when the style module is disabled
        Tensor probs;
        int hardest_negative = -1;
    };

    // Training-mode forward for one clip: posterior path with a
    // reparameterized latent when the style module is enabled.
    SampleLosses forward_train(const Tensor& clip, int label, const Tensor& prompts_proj,
                               Rng& rng) const;

    // Deterministic evaluation path (z = prior mean); returns class
    // probabilities. Runs with gradients disabled.
    std::vector<double> predict(const Tensor& clip, const Tensor& prompts_proj) const;

    struct Uncertainty {
        std::vector<double> mean_probs;
        std::vector<double> variance; // per-class population variance over samples
        double entropy = 0.0;         // predictive entropy of mean_probs
    };

    // Monte Carlo over the prior: sample z_k, modulate, classify, aggregate.
    Uncertainty predict_uncertainty(const Tensor& clip, const Tensor& prompts_proj,
                                    int mc_samples, Rng& rng) const;

private:
    Tensor video_embedding(const Tensor& clip) const;

    int input_dim_;
    ExtractorConfig ext_cfg_;
    ClassifierConfig cls_cfg_;
    CvaesmConfig cv_cfg_;
    ParamStore params_;
    std::unique_ptr<TemporalExtractor> extractor_;
    PromptProjection proj_;
    CvaesmHeads cvaesm_;
};

} // namespace tpa
