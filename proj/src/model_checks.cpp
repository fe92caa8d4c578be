#include "tpa/gradcheck.hpp"
#include "tpa/model.hpp"
#include "tpa/ops.hpp"
#include "tpa/rng.hpp"

namespace tpa {

namespace {

// Small shapes keep the finite-difference sweep over all parameters fast.
constexpr int kDim = 5;
constexpr int kHidden = 6;
constexpr int kClasses = 3;
constexpr int kClipLen = 4;

ExtractorConfig tiny_extractor(ExtractorKind kind) {
    ExtractorConfig cfg;
    cfg.kind = kind;
    cfg.hidden = kHidden;
    cfg.kernels = {3, 5};
    cfg.tcn_dilations = {1, 2};
    cfg.gnn_window = 2;
    return cfg;
}

GradCheckResult check_model_path(ExtractorKind kind, bool with_style, std::uint64_t seed,
                                 double tol) {
    ClassifierConfig cls;
    cls.num_classes = kClasses;
    CvaesmConfig cv;
    cv.enabled = with_style;
    TpaModel model(kDim, tiny_extractor(kind), cls, cv, mix_seed(seed, 0xabc1));

    Rng data_rng(mix_seed(seed, 0xabc2));
    std::vector<double> clip_data(static_cast<std::size_t>(kClipLen) * kDim);
    for (double& v : clip_data) v = data_rng.normal();
    Tensor clip = Tensor::from({kClipLen, kDim}, std::move(clip_data), false);
    std::vector<double> bank_data(static_cast<std::size_t>(kClasses) * kDim);
    for (double& v : bank_data) v = data_rng.normal();
    Tensor bank = Tensor::from({kClasses, kDim}, std::move(bank_data), false);
    const int label = static_cast<int>(seed % kClasses);
    const std::uint64_t eps_seed = mix_seed(seed, 0xabc3);

    std::vector<Tensor> params;
    for (const auto& [name, t] : model.params().items()) params.push_back(t);

    // The latent noise draw is held fixed across evaluations so the loss is a
    // deterministic function of the parameters.
    auto loss_fn = [&model, &clip, &bank, label, eps_seed,
                    with_style](const std::vector<Tensor>&) {
        Rng eps_rng(eps_seed);
        Tensor prompts = model.project_bank(bank);
        TpaModel::SampleLosses s = model.forward_train(clip, label, prompts, eps_rng);
        return total_loss(s.ce, s.ctr, s.kl, model.classifier_config().alpha,
                          with_style ? model.cvaesm_config().beta : 0.0);
    };
    return grad_check_multi(loss_fn, params, tol);
}

} // namespace

std::vector<GradCase> model_loss_cases() {
    std::vector<GradCase> cases;
    const std::pair<ExtractorKind, const char*> kinds[] = {
        {ExtractorKind::framewise, "framewise"}, {ExtractorKind::cnn1d, "cnn1d"},
        {ExtractorKind::multiscale, "multiscale"}, {ExtractorKind::tcn, "tcn"},
        {ExtractorKind::gnn, "gnn"},
    };
    for (const auto& [kind, name] : kinds) {
        cases.push_back({std::string("loss/") + name,
                         [kind = kind](std::uint64_t seed, double tol) {
                             return check_model_path(kind, false, seed, tol);
                         }});
        cases.push_back({std::string("loss+style/") + name,
                         [kind = kind](std::uint64_t seed, double tol) {
                             return check_model_path(kind, true, seed, tol);
                         }});
    }
    return cases;
}

std::vector<GradSuiteEntry> run_grad_suite(std::uint64_t seed, int trials, double tol) {
    std::vector<GradCase> cases = builtin_op_cases();
    std::vector<GradCase> models = model_loss_cases();
    cases.insert(cases.end(), models.begin(), models.end());

    std::vector<GradSuiteEntry> table;
    for (const GradCase& c : cases) {
        GradSuiteEntry entry;
        entry.name = c.name;
        entry.pass = true;
        for (int t = 0; t < trials; ++t) {
            GradCheckResult r = c.run(mix_seed(seed, static_cast<std::uint64_t>(t)), tol);
            entry.checked += r.checked;
            entry.excluded += r.excluded;
            if (r.max_rel_err > entry.max_rel_err) {
                entry.max_rel_err = r.max_rel_err;
                entry.detail = r.detail;
            }
            if (!r.pass) entry.pass = false;
        }
        table.push_back(std::move(entry));
    }
    return table;
}

} // namespace tpa
