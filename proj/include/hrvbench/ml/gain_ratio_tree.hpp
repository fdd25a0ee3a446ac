#pragma once

// Single C4.5-style tree: binary threshold splits chosen by gain ratio
// among candidates with at least average gain, then pessimistic-error
// pruning by subtree replacement.

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "hrvbench/ml/tree.hpp"

namespace hrvbench::ml {

struct GainRatioParams {
    double confidence = 0.25;
    std::size_t min_cases = 2;
};

/// Upper confidence bound on extra errors for a leaf with `e` errors out of
/// `n` cases, as in C4.5's pessimistic pruning.
inline double pessimistic_extra_errors(double n, double e, double cf) {
    const boost::math::normal_distribution<double> unit;
    const double z = boost::math::quantile(boost::math::complement(unit, cf));
    const double coeff = z * z;
    if (e < 1e-6) return n * (1.0 - std::exp(std::log(cf) / n));
    if (e < 0.9999) {
        const double v0 = n * (1.0 - std::exp(std::log(cf) / n));
        return v0 + e * (pessimistic_extra_errors(n, 1.0, cf) - v0);
    }
    if (e + 0.5 >= n) return 0.67 * (n - e);
    const double pr = (e + 0.5 + coeff / 2.0 + std::sqrt(coeff * ((e + 0.5) * (1.0 - (e + 0.5) / n) + coeff / 4.0))) /
                      (n + coeff);
    return n * pr - e;
}

class GainRatioTreeBuilder {
public:
    GainRatioTreeBuilder(const FeatureMatrix& x, const GainRatioParams& p) : x_(x), p_(p) {}

    Tree build() {
        tree_ = Tree{};
        std::vector<std::size_t> rows(x_.rows());
        std::iota(rows.begin(), rows.end(), 0);
        grow(rows);
        prune(0);
        compact();
        for (auto& nd : tree_.nodes)
            if (nd.is_leaf()) nd.value = (nd.n_pos + 1.0) / (nd.n + 2.0);  // Laplace-corrected leaf score
        return std::move(tree_);
    }

private:
    static double entropy(double n, double pos) {
        double h = 0.0;
        for (double c : {pos, n - pos})
            if (c > 0) h -= c / n * std::log2(c / n);
        return h;
    }

    struct Candidate {
        int feature = -1;
        double threshold = 0.0;
        double gain = 0.0;
        double ratio = 0.0;
    };

    int grow(const std::vector<std::size_t>& rows) {
        const auto n = static_cast<double>(rows.size());
        double pos = 0;
        for (auto r : rows) pos += x_.label(r);
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.push_back({-1, 0.0, -1, -1, 0.0, n, pos});
        if (pos == 0 || pos == n || rows.size() < 2 * p_.min_cases) return id;

        const double info = entropy(n, pos);
        std::vector<Candidate> cands;
        for (std::size_t f = 0; f < x_.cols(); ++f) {
            const auto col = detail::sorted_column(x_, rows, f);
            Candidate best;
            double ln = 0, lpos = 0;
            for (std::size_t i = 0; i + 1 < col.size(); ++i) {
                ln += 1;
                lpos += x_.label(col[i].second);
                if (col[i].first == col[i + 1].first) continue;
                if (ln < static_cast<double>(p_.min_cases) || n - ln < static_cast<double>(p_.min_cases)) continue;
                const double rn = n - ln;
                const double gain = info - ln / n * entropy(ln, lpos) - rn / n * entropy(rn, pos - lpos);
                if (gain > best.gain + 1e-12) {
                    const double split_info = entropy(n, ln);
                    best = {static_cast<int>(f), detail::midpoint(col[i].first, col[i + 1].first), gain,
                            split_info > 0 ? gain / split_info : 0.0};
                }
            }
            if (best.feature >= 0) cands.push_back(best);
        }
        if (cands.empty()) return id;

        double avg_gain = 0;
        for (const auto& c : cands) avg_gain += c.gain;
        avg_gain /= static_cast<double>(cands.size());
        const Candidate* chosen = nullptr;
        for (const auto& c : cands)
            if (c.gain >= avg_gain - 1e-12 && (!chosen || c.ratio > chosen->ratio + 1e-12)) chosen = &c;

        std::vector<std::size_t> left, right;
        for (auto r : rows)
            (x_.at(r, static_cast<std::size_t>(chosen->feature)) <= chosen->threshold ? left : right).push_back(r);
        const Candidate pick = *chosen;
        const int l = grow(left);
        const int r = grow(right);
        auto& nd = tree_.nodes[static_cast<std::size_t>(id)];
        nd.feature = pick.feature;
        nd.threshold = pick.threshold;
        nd.left = l;
        nd.right = r;
        return id;
    }

    double leaf_estimate(const TreeNode& nd) const {
        const double errors = std::min(nd.n_pos, nd.n - nd.n_pos);
        return errors + pessimistic_extra_errors(nd.n, errors, p_.confidence);
    }

    /// Returns the pessimistic error estimate of the (possibly pruned) subtree.
    double prune(int id) {
        auto& nd = tree_.nodes[static_cast<std::size_t>(id)];
        if (nd.is_leaf()) return leaf_estimate(nd);
        const double subtree = prune(nd.left) + prune(nd.right);
        auto& again = tree_.nodes[static_cast<std::size_t>(id)];
        const double as_leaf = leaf_estimate(again);
        if (as_leaf <= subtree + 0.1) {
            again.feature = -1;
            again.left = again.right = -1;
            return as_leaf;
        }
        return subtree;
    }

    /// Drops nodes orphaned by pruning.
    void compact() {
        Tree out;
        copy_node(0, out);
        tree_ = std::move(out);
    }

    int copy_node(int old_id, Tree& out) {
        const TreeNode src = tree_.nodes[static_cast<std::size_t>(old_id)];
        const int id = static_cast<int>(out.nodes.size());
        out.nodes.push_back(src);
        if (!src.is_leaf()) {
            const int l = copy_node(src.left, out);
            const int r = copy_node(src.right, out);
            out.nodes[static_cast<std::size_t>(id)].left = l;
            out.nodes[static_cast<std::size_t>(id)].right = r;
        }
        return id;
    }

    const FeatureMatrix& x_;
    GainRatioParams p_;
    Tree tree_;
};

}  // namespace hrvbench::ml
