#pragma once

#include <string>
#include <vector>

namespace tpa {

// One evaluated sample: full probability vector, argmax prediction, truth,
// and confidence (the max probability).
struct Prediction {
    std::vector<double> probs;
    int predicted = 0;
    int true_label = 0;
    double confidence = 0.0;
};

struct PredictionSet {
    int num_classes = 0;
    std::vector<Prediction> samples;

    // Validates the distribution (sum within 1e-9) and derives predicted
    // label and confidence. Argmax ties pick the first index.
    void add(std::vector<double> probs, int true_label);
    std::size_t size() const { return samples.size(); }
};

struct CalibrationBin {
    double lower = 0.0;
    double upper = 0.0;
    int count = 0;
    double accuracy = 0.0;
    double confidence = 0.0;
};

struct CalibrationReport {
    double macro_f1 = 0.0;
    double auc = 0.0;
    double ece = 0.0;
    double aece = 0.0;
    std::vector<CalibrationBin> ece_bins;
    std::vector<CalibrationBin> aece_bins;
    std::vector<int> auc_skipped; // classes without both positives and negatives
    int n = 0;
};

// Unweighted mean of per-class one-vs-rest F1. A class with zero
// precision+recall contributes 0; with skip_absent, classes that appear in
// neither labels nor predictions are dropped from the mean instead.
double macro_f1(const PredictionSet& preds, bool skip_absent = false);

// Macro one-vs-rest AUC via the Mann-Whitney rank statistic with average
// ranks on ties. Classes lacking a positive or a negative are skipped and
// reported through `skipped`; throws DataError when no class is evaluable.
double auc_macro_ovr(const PredictionSet& preds, std::vector<int>* skipped = nullptr);

struct EceResult {
    double value = 0.0;
    std::vector<CalibrationBin> bins;
};

// Uniform-width bins over [0, 1]; an interior boundary belongs to the upper
// bin and the last bin is right-closed. Empty bins contribute zero.
EceResult ece(const PredictionSet& preds, int num_bins = 15);

// Adaptive (equal-count) variant: samples sorted by confidence (stable on
// index) split into M contiguous groups, larger groups first.
EceResult aece(const PredictionSet& preds, int num_bins = 15);

CalibrationReport evaluate_predictions(const PredictionSet& preds, int num_bins = 15,
                                       bool skip_absent = false);

// CSV with header bin_lower,bin_upper,count,accuracy,confidence,gap where
// gap = accuracy - confidence. Values round-trip exactly.
void reliability_export(const std::vector<CalibrationBin>& bins, const std::string& path);
std::vector<CalibrationBin> reliability_parse(const std::string& path);

} // namespace tpa
