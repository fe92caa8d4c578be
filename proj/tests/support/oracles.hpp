#pragma once

// Independent reference implementations used to pin expected values in
// tests. These are written straight from the definitions (nested loops,
// pairwise comparisons) and deliberately share no code with the library.

#include "tpa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

// Plain nested-loop 1-d convolution, zero-padded. Kernel tap i aligns at
// offset (i - center) for centered mode, (i - (k-1)) for causal mode.
inline std::vector<double> conv1d(const std::vector<double>& x, int L, int cin,
                                  const std::vector<double>& k, int kw, int cout, bool causal,
                                  int dilation) {
    std::vector<double> out(static_cast<std::size_t>(L) * cout, 0.0);
    const int shift = causal ? (kw - 1) * dilation : (kw - 1) / 2 * dilation;
    for (int t = 0; t < L; ++t)
        for (int i = 0; i < kw; ++i) {
            const int src = t + i * dilation - shift;
            if (src < 0 || src >= L) continue;
            for (int c = 0; c < cin; ++c)
                for (int o = 0; o < cout; ++o)
                    out[static_cast<std::size_t>(t) * cout + o] +=
                        x[static_cast<std::size_t>(src) * cin + c] *
                        k[(static_cast<std::size_t>(i) * cin + c) * cout + o];
        }
    return out;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b,
                     double eps = 1e-8) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / (std::max(std::sqrt(na), eps) * std::max(std::sqrt(nb), eps));
}

inline std::vector<double> softmax(const std::vector<double>& s, double tau) {
    double m = -1e300;
    for (double v : s) m = std::max(m, v / tau);
    std::vector<double> p(s.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        p[i] = std::exp(s[i] / tau - m);
        denom += p[i];
    }
    for (double& v : p) v /= denom;
    return p;
}

// ---- metric oracles over (predicted, true, confidence, per-class scores) ----

inline double macro_f1(const tpa::PredictionSet& ps) {
    const int C = ps.num_classes;
    double total = 0.0;
    for (int c = 0; c < C; ++c) {
        double tp = 0, fp = 0, fn = 0;
        for (const auto& s : ps.samples) {
            if (s.predicted == c && s.true_label == c) tp += 1;
            if (s.predicted == c && s.true_label != c) fp += 1;
            if (s.predicted != c && s.true_label == c) fn += 1;
        }
        double prec = (tp + fp) > 0 ? tp / (tp + fp) : 0.0;
        double rec = (tp + fn) > 0 ? tp / (tp + fn) : 0.0;
        total += (prec + rec) > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    }
    return total / C;
}

// One-vs-rest AUC by direct pairwise comparison; ties count one half.
inline double auc(const tpa::PredictionSet& ps) {
    const int C = ps.num_classes;
    double total = 0.0;
    int counted = 0;
    for (int c = 0; c < C; ++c) {
        double wins = 0.0;
        long pairs = 0;
        for (const auto& pos : ps.samples) {
            if (pos.true_label != c) continue;
            for (const auto& neg : ps.samples) {
                if (neg.true_label == c) continue;
                ++pairs;
                const double sp = pos.probs[static_cast<std::size_t>(c)];
                const double sn = neg.probs[static_cast<std::size_t>(c)];
                if (sp > sn) wins += 1.0;
                else if (sp == sn) wins += 0.5;
            }
        }
        if (pairs == 0) continue;
        total += wins / static_cast<double>(pairs);
        ++counted;
    }
    return counted > 0 ? total / counted : 0.0;
}

inline double ece(const tpa::PredictionSet& ps, int M) {
    const std::size_t n = ps.samples.size();
    std::vector<double> acc(static_cast<std::size_t>(M), 0.0), conf(static_cast<std::size_t>(M), 0.0);
    std::vector<long> count(static_cast<std::size_t>(M), 0);
    for (const auto& s : ps.samples) {
        int idx = static_cast<int>(std::floor(s.confidence * M));
        if (idx >= M) idx = M - 1;
        while (idx + 1 < M && s.confidence >= static_cast<double>(idx + 1) / M) ++idx;
        while (idx > 0 && s.confidence < static_cast<double>(idx) / M) --idx;
        ++count[static_cast<std::size_t>(idx)];
        acc[static_cast<std::size_t>(idx)] += s.predicted == s.true_label ? 1.0 : 0.0;
        conf[static_cast<std::size_t>(idx)] += s.confidence;
    }
    double e = 0.0;
    for (int m = 0; m < M; ++m) {
        if (count[static_cast<std::size_t>(m)] == 0) continue;
        const double cm = static_cast<double>(count[static_cast<std::size_t>(m)]);
        e += (cm / static_cast<double>(n)) *
             std::fabs(acc[static_cast<std::size_t>(m)] / cm - conf[static_cast<std::size_t>(m)] / cm);
    }
    return e;
}

inline double aece(const tpa::PredictionSet& ps, int M) {
    const std::size_t n = ps.samples.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ps.samples[a].confidence < ps.samples[b].confidence;
    });
    const std::size_t base = n / static_cast<std::size_t>(M);
    const std::size_t extra = n % static_cast<std::size_t>(M);
    double e = 0.0;
    std::size_t pos = 0;
    for (int m = 0; m < M; ++m) {
        const std::size_t size = base + (static_cast<std::size_t>(m) < extra ? 1 : 0);
        if (size == 0) continue;
        double acc = 0.0, conf = 0.0;
        for (std::size_t k = pos; k < pos + size; ++k) {
            const auto& s = ps.samples[order[k]];
            acc += s.predicted == s.true_label ? 1.0 : 0.0;
            conf += s.confidence;
        }
        e += (static_cast<double>(size) / static_cast<double>(n)) *
             std::fabs(acc / static_cast<double>(size) - conf / static_cast<double>(size));
        pos += size;
    }
    return e;
}

} // namespace oracle
