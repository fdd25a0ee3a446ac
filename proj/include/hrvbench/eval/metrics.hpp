#pragma once

// Confusion-matrix metrics and threshold-free ROC analysis. MI (label 1) is
// the positive class throughout.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "hrvbench/common.hpp"

namespace hrvbench::eval {

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fn = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fn + fp + tn; }
};

inline ConfusionMatrix confusion(std::span<const int> labels, std::span<const double> scores, double threshold = 0.5) {
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (labels[i] == 1) (predicted ? cm.tp : cm.fn)++;
        else (predicted ? cm.fp : cm.tn)++;
    }
    return cm;
}

namespace detail {

/// a / b rounded to nearest-even, for 0 < a, b < 2^64.
inline double divide_rounded(unsigned __int128 a, unsigned __int128 b) {
    auto bitlen = [](unsigned __int128 v) {
        int n = 0;
        while (v) {
            v >>= 1;
            ++n;
        }
        return n;
    };
    // scale so that b' <= a' < 2 b', with a / b = (a' / b') * 2^k
    int k = bitlen(a) - bitlen(b);
    unsigned __int128 r = a, d = b;
    if (k >= 0) d <<= k;
    else r <<= -k;
    if (r < d) {
        --k;
        if (k >= 0) d = b << k;
        else r = a << -k;
    }
    std::uint64_t m = 0;  // 64 quotient bits, top bit set
    for (int i = 0; i < 64; ++i) {
        const bool bit = r >= d;
        if (bit) r -= d;
        m = (m << 1) | static_cast<std::uint64_t>(bit);
        r <<= 1;
    }
    const bool sticky = r != 0;
    const std::uint64_t low = m & 0x7FF, half = 0x400;
    std::uint64_t m53 = m >> 11;
    if (low > half || (low == half && (sticky || (m53 & 1)))) ++m53;
    return std::ldexp(static_cast<double>(m53), k - 63 + 11);
}

}  // namespace detail

/// Cohen's kappa, evaluated exactly in integers and rounded once.
/// Absent when chance agreement is 1.
inline std::optional<double> kappa(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw Error(ErrorCode::InvalidParams, "empty confusion matrix");
    if (cm.total() >= (std::uint64_t{1} << 31)) throw Error(ErrorCode::InvalidParams, "confusion matrix too large");
    using i128 = __int128;
    const i128 n = cm.total();
    const i128 agree = static_cast<i128>(cm.tp) + cm.tn;
    const i128 chance = static_cast<i128>(cm.tp + cm.fn) * (cm.tp + cm.fp) + static_cast<i128>(cm.fp + cm.tn) * (cm.fn + cm.tn);
    const i128 num = n * agree - chance;
    const i128 den = n * n - chance;  // >= 0
    if (den == 0) return std::nullopt;
    if (num == 0) return 0.0;
    const double mag = detail::divide_rounded(static_cast<unsigned __int128>(num < 0 ? -num : num),
                                              static_cast<unsigned __int128>(den));
    return num < 0 ? -mag : mag;
}

struct RocPoint {
    double threshold;
    double fpr;
    double tpr;
};

struct RocCurve {
    std::vector<RocPoint> points;
    double auroc = 0.0;
};

/// ROC swept over distinct scores (descending); tied scores move as one
/// step. The first point has threshold +inf.
inline RocCurve roc_auroc(std::span<const int> labels, std::span<const double> scores) {
    const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    const auto neg = static_cast<double>(labels.size()) - pos;
    if (pos == 0 || neg == 0) throw Error(ErrorCode::SingleClass, "ROC needs both classes");
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

    RocCurve roc;
    roc.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        const RocPoint prev = roc.points.back();
        roc.points.push_back({s, fp / neg, tp / pos});
        roc.auroc += (roc.points.back().fpr - prev.fpr) * (roc.points.back().tpr + prev.tpr) / 2.0;
    }
    return roc;
}

struct MetricBlock {
    double accuracy = 0.0;
    std::optional<double> kappa;
    double auroc = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
};

inline MetricBlock metric_block(std::span<const int> labels, std::span<const double> scores, double threshold = 0.5) {
    const auto cm = confusion(labels, scores, threshold);
    if (cm.tp + cm.fn == 0 || cm.tn + cm.fp == 0) throw Error(ErrorCode::SingleClass, "metrics need both classes");
    MetricBlock m;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    m.kappa = kappa(cm);
    m.sensitivity = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    m.specificity = static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp);
    m.auroc = roc_auroc(labels, scores).auroc;
    return m;
}

}  // namespace hrvbench::eval
