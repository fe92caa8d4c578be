#pragma once

#include "tpa/config.hpp"
#include "tpa/dataio.hpp"
#include "tpa/metrics.hpp"
#include "tpa/model.hpp"
#include "tpa/params.hpp"

#include <string>
#include <vector>

namespace tpa {

// ============================================================================
// Optimization loop: Adam with bias correction, reduce-on-plateau learning
// rate schedule and early stopping, both monitoring validation macro F1.
// ============================================================================

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step_count = 0;
    std::vector<std::vector<double>> m, v; // aligned with ParamStore order

    explicit AdamState(double learning_rate = 1e-3) : lr(learning_rate) {}
};

// One bias-corrected Adam update over all parameters; throws NumericError on
// non-finite gradients.
void adam_step(AdamState& state, ParamStore& params);

// lr <- lr * factor after `patience` consecutive epochs without an
// improvement of more than 1e-6 in the monitored value (maximized). The
// no-improvement counter resets on decay; the best value does not.
class PlateauScheduler {
public:
    PlateauScheduler(double factor, int patience) : factor_(factor), patience_(patience) {}
    double observe(double monitored, double lr);

private:
    double factor_;
    int patience_;
    double best_ = -1e300;
    int bad_epochs_ = 0;
};

// Stops after `patience` epochs without a strict improvement; tracks the
// best epoch (earliest on ties).
class EarlyStopper {
public:
    explicit EarlyStopper(int patience) : patience_(patience) {}
    // Returns true when the new value improves on the best so far.
    bool observe(double monitored, int epoch);
    bool should_stop() const { return bad_epochs_ >= patience_; }
    int best_epoch() const { return best_epoch_; }
    double best_value() const { return best_; }

private:
    int patience_;
    double best_ = -1e300;
    int best_epoch_ = -1;
    int bad_epochs_ = 0;
};

struct EpochTrace {
    int epoch = 0; // 1-based
    double train_loss = 0.0;
    double lr = 0.0;
    double macro_f1 = 0.0;
    double auc = 0.0;
    double ece = 0.0;
    double aece = 0.0;
};

struct FoldResult {
    int fold = -1;
    int best_epoch = -1;
    int epochs_run = 0;
    CalibrationReport val; // at the best epoch
    std::vector<EpochTrace> trace;
    std::vector<std::vector<double>> best_params; // values in ParamStore order
    std::vector<std::string> param_names;
    std::vector<std::vector<int>> param_shapes;
    std::vector<std::string> val_ids; // record ids of the validation split
};

// Trains on train_idx, validates on val_idx each epoch, returns the
// best-epoch snapshot. Deterministic given (dataset, bank, cfg, fold).
FoldResult train_fold(const Dataset& ds, const PromptBank& bank,
                      const std::vector<int>& train_idx, const std::vector<int>& val_idx,
                      const Config& cfg, int fold);

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0; // population
};

struct CvResult {
    std::vector<FoldResult> folds;
    MetricStats macro_f1, auc, ece, aece;
};

// Stratified k-fold cross-validation; `parallel_folds` > 1 fans folds out to
// worker threads with per-fold RNG streams, so aggregates are identical to a
// serial run.
CvResult cross_validate(const Dataset& ds, const PromptBank& bank, const Config& cfg,
                        int parallel_folds = 1);

// Rebuilds the model a fold was trained with and loads the snapshot values.
TpaModel model_from_fold(const Config& cfg, int input_dim, int num_classes, int fold,
                         const FoldResult& result);

// Seed tags for per-fold streams; shared with checkpoint evaluation.
std::uint64_t fold_init_seed(std::uint64_t seed, int fold);

} // namespace tpa
