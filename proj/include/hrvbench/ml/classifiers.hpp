#pragma once

// Uniform train/score front end over the eight families, plus the versioned
// JSON model document.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "hrvbench/ml/feature_matrix.hpp"
#include "hrvbench/ml/models.hpp"

namespace hrvbench::ml {

enum class ModelFamily {
    LogisticRegression,
    LinearDiscriminantAnalysis,
    KNearestNeighbor,
    RandomForest,
    SupportVectorMachine,
    NaiveBayes,
    C50Tree,
    StochasticGradientBoosting,
};

inline constexpr std::array<ModelFamily, 8> kAllFamilies = {
    ModelFamily::LogisticRegression, ModelFamily::LinearDiscriminantAnalysis, ModelFamily::KNearestNeighbor,
    ModelFamily::RandomForest,       ModelFamily::SupportVectorMachine,       ModelFamily::NaiveBayes,
    ModelFamily::C50Tree,            ModelFamily::StochasticGradientBoosting,
};

/// Short key used on the command line and in file names.
inline std::string_view family_key(ModelFamily f) {
    switch (f) {
        case ModelFamily::LogisticRegression: return "lr";
        case ModelFamily::LinearDiscriminantAnalysis: return "lda";
        case ModelFamily::KNearestNeighbor: return "knn";
        case ModelFamily::RandomForest: return "rf";
        case ModelFamily::SupportVectorMachine: return "svm";
        case ModelFamily::NaiveBayes: return "nb";
        case ModelFamily::C50Tree: return "c50";
        case ModelFamily::StochasticGradientBoosting: return "sgb";
    }
    return "?";
}

inline std::string_view family_display_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::LogisticRegression: return "Logistic Regression";
        case ModelFamily::LinearDiscriminantAnalysis: return "Linear Discriminant Analysis";
        case ModelFamily::KNearestNeighbor: return "k-Nearest Neighbor";
        case ModelFamily::RandomForest: return "Random Forest";
        case ModelFamily::SupportVectorMachine: return "Support Vector Machine";
        case ModelFamily::NaiveBayes: return "Naive Bayes";
        case ModelFamily::C50Tree: return "C5.0 Tree";
        case ModelFamily::StochasticGradientBoosting: return "Stochastic Gradient Boosting";
    }
    return "?";
}

inline std::optional<ModelFamily> family_from_key(std::string_view key) {
    for (auto f : kAllFamilies)
        if (family_key(f) == key) return f;
    return std::nullopt;
}

using Hyperparameters = std::map<std::string, double>;

struct ModelSpec {
    ModelFamily family = ModelFamily::LogisticRegression;
    Hyperparameters hyperparameters;
    std::uint64_t train_seed = 0;
};

namespace detail {

class HyperReader {
public:
    HyperReader(const Hyperparameters& h, ModelFamily f) : h_(h), f_(f) {}

    double real(const std::string& key, double def, double lo, double hi) {
        used_.push_back(key);
        auto it = h_.find(key);
        const double v = it == h_.end() ? def : it->second;
        if (!(v >= lo && v <= hi))
            throw Error(ErrorCode::InvalidParams,
                        std::string(family_key(f_)) + " hyperparameter '" + key + "' out of range");
        return v;
    }

    std::size_t count(const std::string& key, std::size_t def, std::size_t lo, std::size_t hi) {
        const double v = real(key, static_cast<double>(def), static_cast<double>(lo), static_cast<double>(hi));
        if (v != std::floor(v))
            throw Error(ErrorCode::InvalidParams, std::string(family_key(f_)) + " hyperparameter '" + key + "' must be an integer");
        return static_cast<std::size_t>(v);
    }

    void finish() const {
        for (const auto& [k, v] : h_)
            if (std::find(used_.begin(), used_.end(), k) == used_.end())
                throw Error(ErrorCode::InvalidParams, std::string(family_key(f_)) + " has no hyperparameter '" + k + "'");
    }

private:
    const Hyperparameters& h_;
    ModelFamily f_;
    std::vector<std::string> used_;
};

inline constexpr double kHuge = 1e12;

}  // namespace detail

using FamilyModel = std::variant<LogisticModel, LdaModel, KnnModel, ForestModel, SvmModel, NaiveBayesModel,
                                 GainRatioTreeModel, BoostingModel>;

class TrainedModel {
public:
    const ModelSpec& spec() const { return spec_; }
    const std::vector<std::string>& feature_names() const { return features_; }
    const Standardizer& standardization() const { return standardizer_; }
    const FamilyModel& family_model() const { return model_; }

    /// Probability-like score in [0, 1]; prediction is MI when score >= 0.5.
    double score(std::span<const double> row) const {
        if (row.size() != features_.size()) throw Error(ErrorCode::ArityMismatch, "row arity differs from model features");
        const auto z = standardizer_.apply(row);
        return std::visit([&](const auto& m) { return m.score(z); }, model_);
    }

    std::vector<double> score_all(const FeatureMatrix& x) const {
        std::vector<double> out(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) out[i] = score(x.row(i));
        return out;
    }

    friend TrainedModel train(const ModelSpec& spec, const FeatureMatrix& data);
    friend TrainedModel model_from_json(const json& j);

    /// Versioned model document.
    json to_json() const {
        json model = std::visit([](const auto& m) { return m.to_json(); }, model_);
        return {{"format", "hrvbench-model"},
                {"version", 1},
                {"family", family_key(spec_.family)},
                {"hyperparameters", spec_.hyperparameters},
                {"train_seed", spec_.train_seed},
                {"feature_names", features_},
                {"standardization", {{"mean", standardizer_.mean}, {"sd", standardizer_.sd}}},
                {"model", model}};
    }

private:
    ModelSpec spec_;
    std::vector<std::string> features_;
    Standardizer standardizer_;
    FamilyModel model_;
};

inline TrainedModel train(const ModelSpec& spec, const FeatureMatrix& data) {
    if (data.cols() == 0) throw Error(ErrorCode::InvalidParams, "no feature columns");
    if (data.count(0) == 0 || data.count(1) == 0) throw Error(ErrorCode::DegenerateClass, "both classes must be present");
    if (data.count(0) < 2 || data.count(1) < 2) throw Error(ErrorCode::DegenerateClass, "need >= 2 rows per class");

    TrainedModel tm;
    tm.spec_ = spec;
    tm.features_ = data.feature_names();
    tm.standardizer_ = Standardizer::fit(data);
    const FeatureMatrix z = tm.standardizer_.apply(data);
    detail::HyperReader h(spec.hyperparameters, spec.family);
    using detail::kHuge;

    switch (spec.family) {
        case ModelFamily::LogisticRegression: {
            LogisticModel::Params p;
            p.ridge = h.real("ridge", p.ridge, 0.0, kHuge);
            p.max_iter = static_cast<int>(h.count("max_iter", 100, 1, 100000));
            h.finish();
            tm.model_ = LogisticModel::fit(z, p);
            break;
        }
        case ModelFamily::LinearDiscriminantAnalysis: {
            LdaModel::Params p;
            p.diagonal_loading = h.real("diagonal_loading", p.diagonal_loading, 0.0, kHuge);
            h.finish();
            tm.model_ = LdaModel::fit(z, p);
            break;
        }
        case ModelFamily::KNearestNeighbor: {
            KnnModel::Params p;
            p.k = h.count("k", p.k, 1, 1000000);
            h.finish();
            tm.model_ = KnnModel::fit(z, p);
            break;
        }
        case ModelFamily::RandomForest: {
            ForestModel::Params p;
            p.trees = h.count("trees", p.trees, 1, 100000);
            p.mtry = h.count("mtry", p.mtry, 0, 100000);
            p.min_node_size = h.count("min_node_size", p.min_node_size, 1, 100000);
            h.finish();
            tm.model_ = ForestModel::fit(z, p, spec.train_seed);
            break;
        }
        case ModelFamily::SupportVectorMachine: {
            SvmModel::Params p;
            p.cost = h.real("C", p.cost, 1e-12, kHuge);
            p.epochs = h.count("epochs", p.epochs, 1, 100000);
            h.finish();
            tm.model_ = SvmModel::fit(z, p, spec.train_seed);
            break;
        }
        case ModelFamily::NaiveBayes: {
            NaiveBayesModel::Params p;
            p.var_floor = h.real("var_floor", p.var_floor, 1e-300, kHuge);
            h.finish();
            tm.model_ = NaiveBayesModel::fit(z, p);
            break;
        }
        case ModelFamily::C50Tree: {
            GainRatioParams p;
            p.confidence = h.real("confidence", p.confidence, 1e-6, 0.5);
            p.min_cases = h.count("min_cases", p.min_cases, 1, 100000);
            h.finish();
            tm.model_ = GainRatioTreeModel::fit(z, p);
            break;
        }
        case ModelFamily::StochasticGradientBoosting: {
            BoostingModel::Params p;
            p.rounds = h.count("rounds", p.rounds, 1, 100000);
            p.depth = static_cast<int>(h.count("depth", 3, 1, 32));
            p.shrinkage = h.real("shrinkage", p.shrinkage, 1e-9, 1.0);
            p.subsample = h.real("subsample", p.subsample, 1e-9, 1.0);
            p.min_obs_in_node = h.count("min_obs_in_node", p.min_obs_in_node, 1, 100000);
            h.finish();
            tm.model_ = BoostingModel::fit(z, p, spec.train_seed);
            break;
        }
    }
    return tm;
}

inline TrainedModel model_from_json(const json& j) {
    if (j.value("format", "") != "hrvbench-model") throw Error(ErrorCode::Schema, "not an hrvbench model document");
    if (j.value("version", 0) != 1) throw Error(ErrorCode::Schema, "unsupported model document version");
    const auto family = family_from_key(j.at("family").get<std::string>());
    if (!family) throw Error(ErrorCode::Schema, "unknown model family");

    TrainedModel tm;
    tm.spec_.family = *family;
    tm.spec_.hyperparameters = j.at("hyperparameters").get<Hyperparameters>();
    tm.spec_.train_seed = j.at("train_seed").get<std::uint64_t>();
    tm.features_ = j.at("feature_names").get<std::vector<std::string>>();
    tm.standardizer_.mean = j.at("standardization").at("mean").get<std::vector<double>>();
    tm.standardizer_.sd = j.at("standardization").at("sd").get<std::vector<double>>();
    const json& m = j.at("model");
    switch (*family) {
        case ModelFamily::LogisticRegression: tm.model_ = LogisticModel::from_json(m); break;
        case ModelFamily::LinearDiscriminantAnalysis: tm.model_ = LdaModel::from_json(m); break;
        case ModelFamily::KNearestNeighbor: tm.model_ = KnnModel::from_json(m); break;
        case ModelFamily::RandomForest: tm.model_ = ForestModel::from_json(m); break;
        case ModelFamily::SupportVectorMachine: tm.model_ = SvmModel::from_json(m); break;
        case ModelFamily::NaiveBayes: tm.model_ = NaiveBayesModel::from_json(m); break;
        case ModelFamily::C50Tree: tm.model_ = GainRatioTreeModel::from_json(m); break;
        case ModelFamily::StochasticGradientBoosting: tm.model_ = BoostingModel::from_json(m); break;
    }
    return tm;
}

}  // namespace hrvbench::ml
