#pragma once

// Flat binary decision trees shared by the forest, gain-ratio and boosting
// families. Rows go left when value <= threshold.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "hrvbench/common.hpp"
#include "hrvbench/ml/feature_matrix.hpp"

namespace hrvbench::ml {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf output
    double n = 0.0;      // training rows (or weight) reaching the node
    double n_pos = 0.0;  // of which class 1

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    const TreeNode& leaf_for(std::span<const double> row) const {
        std::size_t i = 0;
        while (!nodes[i].is_leaf()) {
            const auto& nd = nodes[i];
            i = static_cast<std::size_t>(row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right);
        }
        return nodes[i];
    }

    double predict(std::span<const double> row) const { return leaf_for(row).value; }

    std::size_t leaves() const {
        return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.is_leaf(); }));
    }
};

namespace detail {

/// (value, row) pairs for one feature, sorted by value then row.
inline std::vector<std::pair<double, std::size_t>> sorted_column(const FeatureMatrix& x, std::span<const std::size_t> rows,
                                                                 std::size_t feature) {
    std::vector<std::pair<double, std::size_t>> v;
    v.reserve(rows.size());
    for (auto r : rows) v.emplace_back(x.at(r, feature), r);
    std::sort(v.begin(), v.end());
    return v;
}

inline double midpoint(double a, double b) {
    const double m = a + (b - a) / 2.0;
    // guard against rounding onto the upper value
    return m < b ? m : a;
}

}  // namespace detail

// ------------------------------------------------------------
// CART classification tree (Gini), used by the random forest
// ------------------------------------------------------------

struct CartParams {
    std::size_t mtry = 1;
    std::size_t min_node_size = 1;
};

class CartBuilder {
public:
    CartBuilder(const FeatureMatrix& x, const CartParams& p, Rng& rng) : x_(x), p_(p), rng_(rng) {}

    /// Grows a tree on `rows` (may contain repeats from bootstrapping).
    Tree build(std::vector<std::size_t> rows) {
        tree_ = Tree{};
        grow(std::move(rows));
        return std::move(tree_);
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double decrease = 0.0;
    };

    static double gini_mass(double n, double pos) { return n > 0 ? 2.0 * pos * (n - pos) / n : 0.0; }

    Split best_split_on(std::span<const std::size_t> rows, std::size_t f, double n, double pos) const {
        Split best;
        const auto col = detail::sorted_column(x_, rows, f);
        const double parent = gini_mass(n, pos);
        double left_n = 0, left_pos = 0;
        for (std::size_t i = 0; i + 1 < col.size(); ++i) {
            left_n += 1;
            left_pos += x_.label(col[i].second);
            if (col[i].first == col[i + 1].first) continue;
            if (left_n < static_cast<double>(p_.min_node_size) || n - left_n < static_cast<double>(p_.min_node_size)) continue;
            const double dec = parent - gini_mass(left_n, left_pos) - gini_mass(n - left_n, pos - left_pos);
            if (dec > best.decrease + 1e-12) best = {static_cast<int>(f), detail::midpoint(col[i].first, col[i + 1].first), dec};
        }
        return best;
    }

    int grow(std::vector<std::size_t> rows) {
        const auto n = static_cast<double>(rows.size());
        double pos = 0;
        for (auto r : rows) pos += x_.label(r);
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.push_back({-1, 0.0, -1, -1, pos / n, n, pos});
        if (pos == 0 || pos == n || rows.size() < 2 * p_.min_node_size) return id;

        // mtry candidates first; keep looking through the rest only if none splits
        std::vector<std::size_t> order(x_.cols());
        std::iota(order.begin(), order.end(), 0);
        rng_.shuffle(order);
        Split best;
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (k >= p_.mtry && best.feature >= 0) break;
            const Split s = best_split_on(rows, order[k], n, pos);
            if (s.feature >= 0 && s.decrease > best.decrease + 1e-12) best = s;
        }
        if (best.feature < 0) return id;

        std::vector<std::size_t> left, right;
        for (auto r : rows) (x_.at(r, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        const int l = grow(std::move(left));
        const int r = grow(std::move(right));
        auto& nd = tree_.nodes[static_cast<std::size_t>(id)];
        nd.feature = best.feature;
        nd.threshold = best.threshold;
        nd.left = l;
        nd.right = r;
        return id;
    }

    const FeatureMatrix& x_;
    CartParams p_;
    Rng& rng_;
    Tree tree_;
};

// ------------------------------------------------------------
// least-squares regression tree on gradients (boosting base learner)
// ------------------------------------------------------------

struct RegressionTreeParams {
    int max_depth = 3;
    std::size_t min_obs_in_node = 10;
};

/// Splits on squared error of `residual`; leaf value = sum(residual) / sum(hessian).
class RegressionTreeBuilder {
public:
    RegressionTreeBuilder(const FeatureMatrix& x, std::span<const double> residual, std::span<const double> hessian,
                          const RegressionTreeParams& p)
        : x_(x), r_(residual), h_(hessian), p_(p) {}

    Tree build(std::vector<std::size_t> rows) {
        tree_ = Tree{};
        grow(std::move(rows), 0);
        return std::move(tree_);
    }

private:
    int grow(std::vector<std::size_t> rows, int depth) {
        double sr = 0, sh = 0;
        for (auto i : rows) {
            sr += r_[i];
            sh += h_[i];
        }
        const auto n = static_cast<double>(rows.size());
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.push_back({-1, 0.0, -1, -1, sh > 1e-12 ? sr / sh : 0.0, n, 0.0});
        if (depth >= p_.max_depth || rows.size() < 2 * p_.min_obs_in_node) return id;

        int best_f = -1;
        double best_t = 0, best_gain = 1e-12;
        const double parent = sr * sr / n;
        for (std::size_t f = 0; f < x_.cols(); ++f) {
            const auto col = detail::sorted_column(x_, rows, f);
            double ls = 0;
            for (std::size_t i = 0; i + 1 < col.size(); ++i) {
                ls += r_[col[i].second];
                if (col[i].first == col[i + 1].first) continue;
                const double ln = static_cast<double>(i + 1);
                if (ln < static_cast<double>(p_.min_obs_in_node) || n - ln < static_cast<double>(p_.min_obs_in_node))
                    continue;
                const double gain = ls * ls / ln + (sr - ls) * (sr - ls) / (n - ln) - parent;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_f = static_cast<int>(f);
                    best_t = detail::midpoint(col[i].first, col[i + 1].first);
                }
            }
        }
        if (best_f < 0) return id;
        std::vector<std::size_t> left, right;
        for (auto i : rows) (x_.at(i, static_cast<std::size_t>(best_f)) <= best_t ? left : right).push_back(i);
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        auto& nd = tree_.nodes[static_cast<std::size_t>(id)];
        nd.feature = best_f;
        nd.threshold = best_t;
        nd.left = l;
        nd.right = r;
        return id;
    }

    const FeatureMatrix& x_;
    std::span<const double> r_;
    std::span<const double> h_;
    RegressionTreeParams p_;
    Tree tree_;
};

}  // namespace hrvbench::ml
