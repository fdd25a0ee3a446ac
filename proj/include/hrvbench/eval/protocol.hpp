#pragma once

// Hold-out split, stratified k-fold cross-validation and the feature-set x
// model benchmark grid.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hrvbench/common.hpp"
#include "hrvbench/eval/metrics.hpp"
#include "hrvbench/ml/classifiers.hpp"

namespace hrvbench::eval {

struct EvalProtocol {
    double holdout_fraction = 0.2;
    std::size_t cv_folds = 10;
    bool stratified = true;
    std::uint64_t split_seed = 42;
    double decision_threshold = 0.5;

    void validate() const {
        if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
            throw Error(ErrorCode::InvalidParams, "holdout fraction must lie in (0, 1)");
        if (cv_folds < 2) throw Error(ErrorCode::InvalidParams, "cv_folds must be >= 2");
        if (!(decision_threshold >= 0.0 && decision_threshold <= 1.0))
            throw Error(ErrorCode::InvalidParams, "decision threshold must lie in [0, 1]");
    }
};

struct HoldoutSplit {
    std::vector<std::size_t> train;  // row indices into the source matrix, ascending
    std::vector<std::size_t> test;
};

inline std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

inline HoldoutSplit holdout_indices(const std::vector<int>& labels, const EvalProtocol& protocol) {
    protocol.validate();
    const double keep = 1.0 - protocol.holdout_fraction;
    HoldoutSplit s;
    auto take = [&](std::vector<std::size_t> idx, std::uint64_t tag) {
        Rng rng(derive_seed(protocol.split_seed, {hash_string("holdout"), tag}));
        rng.shuffle(idx);
        const std::size_t n_train = round_half_up(static_cast<double>(idx.size()) * keep);
        s.train.insert(s.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        s.test.insert(s.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    };
    if (protocol.stratified) {
        for (int c : {0, 1}) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (labels[i] == c) idx.push_back(i);
            take(std::move(idx), static_cast<std::uint64_t>(c));
        }
    } else {
        std::vector<std::size_t> idx(labels.size());
        std::iota(idx.begin(), idx.end(), 0);
        take(std::move(idx), 2);
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());

    for (int c : {0, 1}) {
        const auto in_train = static_cast<std::size_t>(
            std::count_if(s.train.begin(), s.train.end(), [&](auto i) { return labels[i] == c; }));
        if (in_train < protocol.cv_folds)
            throw Error(ErrorCode::TooSmall, "class " + std::to_string(c) + " has " + std::to_string(in_train) +
                                                 " training rows; need at least cv_folds = " +
                                                 std::to_string(protocol.cv_folds) +
                                                 " (lower the holdout fraction or fold count)");
    }
    return s;
}

inline std::pair<ml::FeatureMatrix, ml::FeatureMatrix> split_holdout(const ml::FeatureMatrix& data,
                                                                     const EvalProtocol& protocol) {
    const auto s = holdout_indices(data.labels(), protocol);
    return {data.select_rows(s.train), data.select_rows(s.test)};
}

/// Fold index per row. Stratified assignment deals each class's shuffled
/// rows round-robin, continuing the deal across classes so fold sizes differ
/// by at most one.
inline std::vector<std::size_t> assign_folds(const std::vector<int>& labels, std::size_t k, bool stratified,
                                             std::uint64_t seed) {
    std::vector<std::size_t> fold(labels.size());
    std::size_t dealt = 0;
    auto deal = [&](std::vector<std::size_t> idx, std::uint64_t tag) {
        Rng rng(derive_seed(seed, {hash_string("folds"), tag}));
        rng.shuffle(idx);
        for (auto i : idx) fold[i] = dealt++ % k;
    };
    if (stratified) {
        for (int c : {0, 1}) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (labels[i] == c) idx.push_back(i);
            deal(std::move(idx), static_cast<std::uint64_t>(c));
        }
    } else {
        std::vector<std::size_t> idx(labels.size());
        std::iota(idx.begin(), idx.end(), 0);
        deal(std::move(idx), 2);
    }
    return fold;
}

struct CvResult {
    MetricBlock pooled;
    std::vector<std::optional<MetricBlock>> per_fold;  // absent when a validation fold holds one class
    std::vector<double> oof_scores;
    std::vector<std::size_t> fold_of;
};

inline CvResult cross_validate(const ml::ModelSpec& spec, const ml::FeatureMatrix& data, const EvalProtocol& protocol) {
    protocol.validate();
    CvResult r;
    r.fold_of = assign_folds(data.labels(), protocol.cv_folds, protocol.stratified,
                             derive_seed(protocol.split_seed, {hash_string("cv")}));
    r.oof_scores.assign(data.rows(), 0.0);
    for (std::size_t f = 0; f < protocol.cv_folds; ++f) {
        std::vector<std::size_t> tr, va;
        for (std::size_t i = 0; i < data.rows(); ++i) (r.fold_of[i] == f ? va : tr).push_back(i);
        if (va.empty()) throw Error(ErrorCode::FoldDegenerate, "fold " + std::to_string(f) + " is empty");
        const auto train_part = data.select_rows(tr);
        if (train_part.count(0) < 2 || train_part.count(1) < 2)
            throw Error(ErrorCode::FoldDegenerate, "fold " + std::to_string(f) + " training part lacks a class");
        ml::ModelSpec fold_spec = spec;
        fold_spec.train_seed = derive_seed(spec.train_seed, {f});
        const auto model = ml::train(fold_spec, train_part);
        std::vector<int> fl;
        std::vector<double> fs;
        for (auto i : va) {
            r.oof_scores[i] = model.score(data.row(i));
            fl.push_back(data.label(i));
            fs.push_back(r.oof_scores[i]);
        }
        const bool both = std::count(fl.begin(), fl.end(), 1) > 0 && std::count(fl.begin(), fl.end(), 0) > 0;
        r.per_fold.push_back(both ? std::optional(metric_block(fl, fs, protocol.decision_threshold)) : std::nullopt);
    }
    r.pooled = metric_block(data.labels(), r.oof_scores, protocol.decision_threshold);
    return r;
}

// ------------------------------------------------------------
// feature sets
// ------------------------------------------------------------

enum class FeatureSet { TimeDomain, FrequencyDomain, NonlinearDomain, TurbulenceIndexes, Sd1nuSd2nu };

struct FeatureSetDef {
    FeatureSet set;
    std::vector<std::string> feature_names;

    std::string key() const {
        switch (set) {
            case FeatureSet::TimeDomain: return "time";
            case FeatureSet::FrequencyDomain: return "frequency";
            case FeatureSet::NonlinearDomain: return "nonlinear";
            case FeatureSet::TurbulenceIndexes: return "turbulence";
            case FeatureSet::Sd1nuSd2nu: return "sd12nu";
        }
        return "?";
    }

    std::string display_name() const {
        switch (set) {
            case FeatureSet::TimeDomain: return "Time domain";
            case FeatureSet::FrequencyDomain: return "Frequency domain";
            case FeatureSet::NonlinearDomain: return "Nonlinear domain";
            case FeatureSet::TurbulenceIndexes: return "Turbulence indexes";
            case FeatureSet::Sd1nuSd2nu: return "SD1nu + SD2nu";
        }
        return "?";
    }
};

inline std::vector<FeatureSetDef> standard_feature_sets() {
    return {
        {FeatureSet::TimeDomain, {"mean_rr", "mean_hr", "pcnn20", "pcnn30", "pcnn50", "sdnn", "rmssd", "sdann", "sdnnidx"}},
        {FeatureSet::FrequencyDomain, {"total_power", "vlf", "lf", "hf", "lf_nu", "hf_nu", "lf_hf"}},
        {FeatureSet::NonlinearDomain, {"centroid", "sd1", "sd2", "sd1_sd2", "sd1_nu", "sd2_nu", "lle"}},
        {FeatureSet::TurbulenceIndexes, {"vpc_count", "to", "ts", "ac", "dc"}},
        {FeatureSet::Sd1nuSd2nu, {"sd1_nu", "sd2_nu"}},
    };
}

// ------------------------------------------------------------
// benchmark grid
// ------------------------------------------------------------

struct BenchmarkCell {
    std::string set_key;
    ml::ModelFamily family;
    CvResult cv;          // on the training portion
    MetricBlock holdout;  // refit on the whole training portion, scored on the test portion
    RocCurve holdout_roc;
};

/// One cell per (set, spec), sets outer. Each cell's seeds derive from the
/// protocol seed and the cell identity, so results do not depend on `jobs`.
inline std::vector<BenchmarkCell> benchmark_feature_sets(const ml::FeatureMatrix& features,
                                                         const std::vector<FeatureSetDef>& sets,
                                                         const std::vector<ml::ModelSpec>& specs,
                                                         const EvalProtocol& protocol, std::size_t jobs = 1) {
    protocol.validate();
    std::vector<ml::FeatureMatrix> restricted;
    for (const auto& s : sets) restricted.push_back(features.select_columns(s.feature_names));
    const auto split = holdout_indices(features.labels(), protocol);

    std::vector<BenchmarkCell> cells(sets.size() * specs.size());
    parallel_for(cells.size(), jobs, [&](std::size_t job) {
        const auto& set = sets[job / specs.size()];
        const auto& x = restricted[job / specs.size()];
        ml::ModelSpec spec = specs[job % specs.size()];
        spec.train_seed = derive_seed(protocol.split_seed, {hash_string(set.key()),
                                                            hash_string(ml::family_key(spec.family)), spec.train_seed});
        const auto train = x.select_rows(split.train);
        const auto test = x.select_rows(split.test);

        BenchmarkCell cell{set.key(), spec.family, cross_validate(spec, train, protocol), {}, {}};
        const auto model = ml::train(spec, train);
        const auto scores = model.score_all(test);
        cell.holdout = metric_block(test.labels(), scores, protocol.decision_threshold);
        cell.holdout_roc = roc_auroc(test.labels(), scores);
        cells[job] = std::move(cell);
    });
    return cells;
}

}  // namespace hrvbench::eval
