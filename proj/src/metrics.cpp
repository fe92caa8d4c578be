#include "tpa/metrics.hpp"

#include "tpa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace tpa {

void PredictionSet::add(std::vector<double> probs, int true_label) {
    if (num_classes == 0) num_classes = static_cast<int>(probs.size());
    if (static_cast<int>(probs.size()) != num_classes)
        throw DataError("prediction set: inconsistent class count");
    if (true_label < 0 || true_label >= num_classes)
        throw DataError("prediction set: label out of range");
    double sum = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0) throw DataError("prediction set: invalid probability");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw DataError("prediction set: probabilities must sum to 1");
    Prediction pr;
    pr.predicted = 0;
    for (int c = 1; c < num_classes; ++c)
        if (probs[static_cast<std::size_t>(c)] > probs[static_cast<std::size_t>(pr.predicted)])
            pr.predicted = c;
    pr.confidence = probs[static_cast<std::size_t>(pr.predicted)];
    pr.true_label = true_label;
    pr.probs = std::move(probs);
    samples.push_back(std::move(pr));
}

double macro_f1(const PredictionSet& preds, bool skip_absent) {
    if (preds.samples.empty()) throw DataError("macro_f1: empty prediction set");
    const int C = preds.num_classes;
    double total = 0.0;
    int counted = 0;
    for (int c = 0; c < C; ++c) {
        long tp = 0, fp = 0, fn = 0;
        for (const Prediction& p : preds.samples) {
            const bool is_true = p.true_label == c;
            const bool is_pred = p.predicted == c;
            if (is_true && is_pred) ++tp;
            else if (!is_true && is_pred) ++fp;
            else if (is_true && !is_pred) ++fn;
        }
        if (skip_absent && tp + fp + fn == 0) continue;
        const double prec = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        const double rec = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        const double f1 = prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
        total += f1;
        ++counted;
    }
    if (counted == 0) throw DataError("macro_f1: no classes to average");
    return total / counted;
}

double auc_macro_ovr(const PredictionSet& preds, std::vector<int>* skipped) {
    if (preds.samples.empty()) throw DataError("auc: empty prediction set");
    const int C = preds.num_classes;
    const std::size_t n = preds.samples.size();
    double total = 0.0;
    int counted = 0;
    if (skipped) skipped->clear();
    for (int c = 0; c < C; ++c) {
        std::size_t n_pos = 0;
        for (const Prediction& p : preds.samples)
            if (p.true_label == c) ++n_pos;
        const std::size_t n_neg = n - n_pos;
        if (n_pos == 0 || n_neg == 0) {
            if (skipped) skipped->push_back(c);
            continue;
        }
        // Average ranks with ties, then the Mann-Whitney U statistic.
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return preds.samples[a].probs[static_cast<std::size_t>(c)] <
                   preds.samples[b].probs[static_cast<std::size_t>(c)];
        });
        std::vector<double> rank(n, 0.0);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            const double v = preds.samples[order[i]].probs[static_cast<std::size_t>(c)];
            while (j + 1 < n &&
                   preds.samples[order[j + 1]].probs[static_cast<std::size_t>(c)] == v)
                ++j;
            const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
            for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg_rank;
            i = j + 1;
        }
        double rank_sum_pos = 0.0;
        for (std::size_t s = 0; s < n; ++s)
            if (preds.samples[s].true_label == c) rank_sum_pos += rank[s];
        const double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
        total += u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
        ++counted;
    }
    if (counted == 0) throw DataError("auc: no class has both positives and negatives");
    return total / counted;
}

EceResult ece(const PredictionSet& preds, int num_bins) {
    if (num_bins < 1) throw DataError("ece: need at least one bin");
    const int M = num_bins;
    EceResult res;
    res.bins.resize(static_cast<std::size_t>(M));
    std::vector<long> correct(static_cast<std::size_t>(M), 0);
    std::vector<double> conf_sum(static_cast<std::size_t>(M), 0.0);
    for (int m = 0; m < M; ++m) {
        res.bins[static_cast<std::size_t>(m)].lower = static_cast<double>(m) / M;
        res.bins[static_cast<std::size_t>(m)].upper = static_cast<double>(m + 1) / M;
    }
    for (const Prediction& p : preds.samples) {
        int idx = std::min(M - 1, static_cast<int>(std::floor(p.confidence * M)));
        // Repair float drift so the documented edge rule (boundaries to the
        // upper bin, last bin right-closed) holds against the printed edges.
        while (idx + 1 < M && p.confidence >= res.bins[static_cast<std::size_t>(idx) + 1].lower)
            ++idx;
        while (idx > 0 && p.confidence < res.bins[static_cast<std::size_t>(idx)].lower) --idx;
        CalibrationBin& b = res.bins[static_cast<std::size_t>(idx)];
        ++b.count;
        if (p.predicted == p.true_label) ++correct[static_cast<std::size_t>(idx)];
        conf_sum[static_cast<std::size_t>(idx)] += p.confidence;
    }
    const double n = static_cast<double>(preds.samples.size());
    for (int m = 0; m < M; ++m) {
        CalibrationBin& b = res.bins[static_cast<std::size_t>(m)];
        if (b.count == 0) continue;
        b.accuracy = static_cast<double>(correct[static_cast<std::size_t>(m)]) / b.count;
        b.confidence = conf_sum[static_cast<std::size_t>(m)] / b.count;
        res.value += (b.count / n) * std::fabs(b.accuracy - b.confidence);
    }
    return res;
}

EceResult aece(const PredictionSet& preds, int num_bins) {
    if (num_bins < 1) throw DataError("aece: need at least one bin");
    const int M = num_bins;
    const std::size_t n = preds.samples.size();
    EceResult res;
    if (n == 0) {
        res.bins.resize(static_cast<std::size_t>(M));
        return res;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return preds.samples[a].confidence < preds.samples[b].confidence;
    });
    const std::size_t base = n / static_cast<std::size_t>(M);
    const std::size_t extra = n % static_cast<std::size_t>(M); // larger groups first
    std::size_t pos = 0;
    for (int m = 0; m < M; ++m) {
        const std::size_t size = base + (static_cast<std::size_t>(m) < extra ? 1 : 0);
        if (size == 0) continue;
        CalibrationBin b;
        b.count = static_cast<int>(size);
        long correct = 0;
        double conf_sum = 0.0;
        b.lower = preds.samples[order[pos]].confidence;
        b.upper = preds.samples[order[pos + size - 1]].confidence;
        for (std::size_t k = pos; k < pos + size; ++k) {
            const Prediction& p = preds.samples[order[k]];
            if (p.predicted == p.true_label) ++correct;
            conf_sum += p.confidence;
        }
        b.accuracy = static_cast<double>(correct) / static_cast<double>(size);
        b.confidence = conf_sum / static_cast<double>(size);
        res.value += (static_cast<double>(size) / static_cast<double>(n)) *
                     std::fabs(b.accuracy - b.confidence);
        res.bins.push_back(b);
        pos += size;
    }
    return res;
}

CalibrationReport evaluate_predictions(const PredictionSet& preds, int num_bins,
                                       bool skip_absent) {
    CalibrationReport rep;
    rep.n = static_cast<int>(preds.samples.size());
    rep.macro_f1 = macro_f1(preds, skip_absent);
    rep.auc = auc_macro_ovr(preds, &rep.auc_skipped);
    EceResult e = ece(preds, num_bins);
    rep.ece = e.value;
    rep.ece_bins = std::move(e.bins);
    EceResult a = aece(preds, num_bins);
    rep.aece = a.value;
    rep.aece_bins = std::move(a.bins);
    return rep;
}

namespace {
std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
} // namespace

void reliability_export(const std::vector<CalibrationBin>& bins, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open for writing: " + path);
    os << "bin_lower,bin_upper,count,accuracy,confidence,gap\n";
    for (const CalibrationBin& b : bins)
        os << fmt_double(b.lower) << ',' << fmt_double(b.upper) << ',' << b.count << ','
           << fmt_double(b.accuracy) << ',' << fmt_double(b.confidence) << ','
           << fmt_double(b.accuracy - b.confidence) << '\n';
    if (!os) throw DataError("write failed: " + path);
}

std::vector<CalibrationBin> reliability_parse(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open reliability file: " + path);
    std::string line;
    if (!std::getline(is, line) || line != "bin_lower,bin_upper,count,accuracy,confidence,gap")
        throw DataError("reliability file: bad header");
    std::vector<CalibrationBin> bins;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        CalibrationBin b;
        auto next = [&](const char* what) {
            if (!std::getline(ss, field, ','))
                throw DataError(std::string("reliability file: missing field ") + what);
            return field;
        };
        b.lower = std::stod(next("bin_lower"));
        b.upper = std::stod(next("bin_upper"));
        b.count = std::stoi(next("count"));
        b.accuracy = std::stod(next("accuracy"));
        b.confidence = std::stod(next("confidence"));
        next("gap");
        bins.push_back(b);
    }
    return bins;
}

} // namespace tpa
