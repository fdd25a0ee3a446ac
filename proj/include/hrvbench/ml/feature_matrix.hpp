#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "hrvbench/common.hpp"

namespace hrvbench::ml {

/// Dense row-major design matrix with binary labels (0 = Healthy, 1 = MI).
class FeatureMatrix {
public:
    FeatureMatrix() = default;

    FeatureMatrix(std::vector<std::string> feature_names) : names_(std::move(feature_names)) {
        std::unordered_set<std::string> seen;
        for (const auto& n : names_)
            if (!seen.insert(n).second) throw Error(ErrorCode::InvalidParams, "duplicate feature name '" + n + "'");
    }

    void add_row(std::string id, std::span<const double> values, int label) {
        if (values.size() != names_.size()) throw Error(ErrorCode::ArityMismatch, "row arity differs from feature count");
        for (double v : values)
            if (!std::isfinite(v)) throw Error(ErrorCode::InvalidParams, "non-finite feature value in row '" + id + "'");
        if (label != 0 && label != 1) throw Error(ErrorCode::InvalidParams, "labels must be 0 or 1");
        ids_.push_back(std::move(id));
        values_.insert(values_.end(), values.begin(), values.end());
        labels_.push_back(label);
    }

    std::size_t rows() const { return labels_.size(); }
    std::size_t cols() const { return names_.size(); }

    std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols(), cols()}; }
    double at(std::size_t i, std::size_t j) const { return values_[i * cols() + j]; }
    double& at(std::size_t i, std::size_t j) { return values_[i * cols() + j]; }

    int label(std::size_t i) const { return labels_[i]; }
    const std::vector<int>& labels() const { return labels_; }
    void set_label(std::size_t i, int l) { labels_[i] = l; }
    const std::string& id(std::size_t i) const { return ids_[i]; }
    const std::vector<std::string>& feature_names() const { return names_; }

    std::size_t count(int label) const { return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label)); }

    FeatureMatrix select_rows(std::span<const std::size_t> idx) const {
        FeatureMatrix out(names_);
        for (auto i : idx) out.add_row(ids_[i], row(i), labels_[i]);
        return out;
    }

    FeatureMatrix select_columns(const std::vector<std::string>& wanted) const {
        std::vector<std::size_t> cols_idx;
        for (const auto& w : wanted) {
            auto it = std::find(names_.begin(), names_.end(), w);
            if (it == names_.end()) throw Error(ErrorCode::Schema, "missing feature column '" + w + "'");
            cols_idx.push_back(static_cast<std::size_t>(it - names_.begin()));
        }
        FeatureMatrix out(wanted);
        std::vector<double> buf(wanted.size());
        for (std::size_t i = 0; i < rows(); ++i) {
            for (std::size_t j = 0; j < cols_idx.size(); ++j) buf[j] = at(i, cols_idx[j]);
            out.add_row(ids_[i], buf, labels_[i]);
        }
        return out;
    }

private:
    std::vector<std::string> names_;
    std::vector<std::string> ids_;
    std::vector<double> values_;
    std::vector<int> labels_;
};

/// Per-feature z-scoring learned on training data. Constant columns get sd 1.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> sd;

    static Standardizer fit(const FeatureMatrix& x) {
        Standardizer s;
        s.mean.assign(x.cols(), 0.0);
        s.sd.assign(x.cols(), 1.0);
        const auto n = static_cast<double>(x.rows());
        for (std::size_t j = 0; j < x.cols(); ++j) {
            double m = 0.0;
            for (std::size_t i = 0; i < x.rows(); ++i) m += x.at(i, j);
            m /= n;
            double v = 0.0;
            for (std::size_t i = 0; i < x.rows(); ++i) v += (x.at(i, j) - m) * (x.at(i, j) - m);
            const double sd = x.rows() > 1 ? std::sqrt(v / (n - 1.0)) : 0.0;
            s.mean[j] = m;
            s.sd[j] = sd > 1e-12 * std::max(1.0, std::abs(m)) ? sd : 1.0;
        }
        return s;
    }

    std::vector<double> apply(std::span<const double> row) const {
        std::vector<double> out(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / sd[j];
        return out;
    }

    FeatureMatrix apply(const FeatureMatrix& x) const {
        FeatureMatrix out(x.feature_names());
        for (std::size_t i = 0; i < x.rows(); ++i) out.add_row(x.id(i), apply(x.row(i)), x.label(i));
        return out;
    }
};

}  // namespace hrvbench::ml
