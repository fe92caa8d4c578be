#include "tpa/trainer.hpp"

#include "tpa/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace tpa {

namespace {
constexpr std::uint64_t kTagInit = 0x01;
constexpr std::uint64_t kTagTrain = 0x02;
constexpr std::uint64_t kTagPrompt = 0x03;
constexpr double kImproveDelta = 1e-6;
} // namespace

std::uint64_t fold_init_seed(std::uint64_t seed, int fold) {
    return mix_seed(seed, static_cast<std::uint64_t>(fold), kTagInit);
}

void adam_step(AdamState& state, ParamStore& params) {
    const auto& items = params.items();
    if (state.m.empty()) {
        state.m.resize(items.size());
        state.v.resize(items.size());
        for (std::size_t i = 0; i < items.size(); ++i) {
            state.m[i].assign(items[i].second.numel(), 0.0);
            state.v[i].assign(items[i].second.numel(), 0.0);
        }
    }
    if (!params.grads_finite())
        throw NumericError("adam_step: non-finite gradient encountered");
    ++state.step_count;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t i = 0; i < items.size(); ++i) {
        Tensor t = items[i].second;
        auto vals = t.value_mut();
        auto grads = t.grad();
        for (std::size_t k = 0; k < vals.size(); ++k) {
            const double g = grads[k];
            state.m[i][k] = state.beta1 * state.m[i][k] + (1.0 - state.beta1) * g;
            state.v[i][k] = state.beta2 * state.v[i][k] + (1.0 - state.beta2) * g * g;
            const double mhat = state.m[i][k] / bc1;
            const double vhat = state.v[i][k] / bc2;
            vals[k] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

double PlateauScheduler::observe(double monitored, double lr) {
    if (monitored > best_ + kImproveDelta) {
        best_ = monitored;
        bad_epochs_ = 0;
        return lr;
    }
    if (++bad_epochs_ >= patience_) {
        bad_epochs_ = 0;
        return lr * factor_;
    }
    return lr;
}

bool EarlyStopper::observe(double monitored, int epoch) {
    if (monitored > best_) {
        best_ = monitored;
        best_epoch_ = epoch;
        bad_epochs_ = 0;
        return true;
    }
    ++bad_epochs_;
    return false;
}

FoldResult train_fold(const Dataset& ds, const PromptBank& bank,
                      const std::vector<int>& train_idx, const std::vector<int>& val_idx,
                      const Config& cfg, int fold) {
    if (train_idx.empty() || val_idx.empty())
        throw DataError("train_fold: empty train or validation split");
    if (bank.dim != ds.dim) throw DataError("train_fold: prompt bank dim disagrees with dataset");
    if (bank.num_classes() != ds.num_classes)
        throw DataError("train_fold: prompt bank class count disagrees with dataset");

    ClassifierConfig cls_cfg = cfg.classifier;
    cls_cfg.num_classes = ds.num_classes;
    TpaModel model(ds.dim, cfg.extractor, cls_cfg, cfg.cvaesm,
                   fold_init_seed(cfg.trainer.seed, fold));

    Rng train_rng(mix_seed(cfg.trainer.seed, static_cast<std::uint64_t>(fold), kTagTrain));
    Rng prompt_rng(mix_seed(cfg.trainer.seed, static_cast<std::uint64_t>(fold), kTagPrompt));
    AdamState adam(cfg.trainer.lr);
    PlateauScheduler scheduler(cfg.trainer.sched_factor, cfg.trainer.sched_patience);
    EarlyStopper stopper(cfg.trainer.early_patience);

    FoldResult res;
    res.fold = fold;
    for (const auto& [name, t] : model.params().items()) {
        res.param_names.push_back(name);
        res.param_shapes.push_back(t.shape());
    }
    for (int i : val_idx) res.val_ids.push_back(ds.records[static_cast<std::size_t>(i)].id);

    const Tensor eval_bank = bank_epoch_view(bank, false, prompt_rng); // fixed entries
    std::vector<int> order(train_idx);
    double lr = cfg.trainer.lr;

    for (int epoch = 1; epoch <= cfg.trainer.epochs; ++epoch) {
        adam.lr = lr;
        Rng epoch_prompt_rng = prompt_rng.fork(static_cast<std::uint64_t>(epoch));
        const Tensor train_bank =
            bank_epoch_view(bank, cfg.classifier.randomize_prompts, epoch_prompt_rng);

        train_rng.shuffle(order);
        double loss_sum = 0.0;
        int batches = 0;
        Tape tape;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.trainer.batch)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.trainer.batch));
            const int bsize = static_cast<int>(end - start);
            TapeScope scope(tape);
            Tensor prompts_proj = model.project_bank(train_bank);
            Tensor ce_sum, ctr_sum, kl_sum;
            for (std::size_t bi = start; bi < end; ++bi) {
                const VideoRecord& rec =
                    ds.records[static_cast<std::size_t>(order[bi])];
                Tensor clip = sample_clip(rec, cfg.data.clip_len, ClipMode::train, train_rng);
                TpaModel::SampleLosses s =
                    model.forward_train(clip, rec.label, prompts_proj, train_rng);
                ce_sum = ce_sum.defined() ? add(ce_sum, s.ce) : s.ce;
                ctr_sum = ctr_sum.defined() ? add(ctr_sum, s.ctr) : s.ctr;
                if (s.kl.defined()) kl_sum = kl_sum.defined() ? add(kl_sum, s.kl) : s.kl;
            }
            const double inv = 1.0 / bsize;
            Tensor kl_mean = kl_sum.defined() ? scale(kl_sum, inv) : Tensor();
            Tensor loss = total_loss(scale(ce_sum, inv), scale(ctr_sum, inv), kl_mean,
                                     cfg.classifier.alpha, cfg.cvaesm.beta);
            const double loss_val = loss.item();
            if (!std::isfinite(loss_val))
                throw NumericError("train_fold: non-finite loss at fold " +
                                   std::to_string(fold) + " epoch " + std::to_string(epoch));
            tape.backward(loss);
            adam_step(adam, model.params());
            tape.clear();
            model.params().zero_grad();
            loss_sum += loss_val;
            ++batches;
        }

        // Validation on centered clips with the deterministic inference path.
        PredictionSet preds;
        {
            NoGradScope ng;
            Rng unused(0);
            Tensor prompts_eval = model.project_bank(eval_bank);
            for (int vi : val_idx) {
                const VideoRecord& rec = ds.records[static_cast<std::size_t>(vi)];
                Tensor clip = sample_clip(rec, cfg.data.clip_len, ClipMode::eval, unused);
                preds.add(model.predict(clip, prompts_eval), rec.label);
            }
        }
        CalibrationReport rep = evaluate_predictions(preds);

        EpochTrace tr;
        tr.epoch = epoch;
        tr.train_loss = loss_sum / std::max(1, batches);
        tr.lr = lr;
        tr.macro_f1 = rep.macro_f1;
        tr.auc = rep.auc;
        tr.ece = rep.ece;
        tr.aece = rep.aece;
        res.trace.push_back(tr);
        res.epochs_run = epoch;

        if (stopper.observe(rep.macro_f1, epoch)) {
            res.best_epoch = epoch;
            res.val = rep;
            res.best_params = model.params().snapshot_values();
        }
        lr = scheduler.observe(rep.macro_f1, lr);
        if (stopper.should_stop()) break;
    }
    return res;
}

CvResult cross_validate(const Dataset& ds, const PromptBank& bank, const Config& cfg,
                        int parallel_folds) {
    const int k = cfg.trainer.folds;
    FoldPlan plan = stratified_folds(ds, k, cfg.trainer.seed, /*allow_sparse=*/false);

    CvResult out;
    out.folds.resize(static_cast<std::size_t>(k));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));

    auto run_fold = [&](int f) {
        try {
            std::vector<int> train_idx;
            for (int other = 0; other < k; ++other)
                if (other != f)
                    train_idx.insert(train_idx.end(), plan.folds[static_cast<std::size_t>(other)].begin(),
                                     plan.folds[static_cast<std::size_t>(other)].end());
            std::sort(train_idx.begin(), train_idx.end());
            out.folds[static_cast<std::size_t>(f)] =
                train_fold(ds, bank, train_idx, plan.folds[static_cast<std::size_t>(f)], cfg, f);
        } catch (...) {
            errors[static_cast<std::size_t>(f)] = std::current_exception();
        }
    };

    const int workers = std::max(1, std::min(parallel_folds, k));
    if (workers == 1) {
        for (int f = 0; f < k; ++f) run_fold(f);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                while (true) {
                    const int f = next.fetch_add(1);
                    if (f >= k) return;
                    run_fold(f);
                }
            });
        for (std::thread& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    auto stats = [&](auto pick_metric) {
        MetricStats s;
        for (const FoldResult& f : out.folds) s.mean += pick_metric(f);
        s.mean /= k;
        for (const FoldResult& f : out.folds) {
            const double d = pick_metric(f) - s.mean;
            s.stddev += d * d;
        }
        s.stddev = std::sqrt(s.stddev / k);
        return s;
    };
    out.macro_f1 = stats([](const FoldResult& f) { return f.val.macro_f1; });
    out.auc = stats([](const FoldResult& f) { return f.val.auc; });
    out.ece = stats([](const FoldResult& f) { return f.val.ece; });
    out.aece = stats([](const FoldResult& f) { return f.val.aece; });
    return out;
}

TpaModel model_from_fold(const Config& cfg, int input_dim, int num_classes, int fold,
                         const FoldResult& result) {
    ClassifierConfig cls_cfg = cfg.classifier;
    cls_cfg.num_classes = num_classes;
    TpaModel model(input_dim, cfg.extractor, cls_cfg, cfg.cvaesm,
                   fold_init_seed(cfg.trainer.seed, fold));
    model.params().restore_values(result.best_params);
    return model;
}

} // namespace tpa
