#pragma once

// The eight classifier families. Each one is fitted on standardized rows and
// scores a standardized row with a probability-like value in [0, 1].

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "hrvbench/common.hpp"
#include "hrvbench/ml/feature_matrix.hpp"
#include "hrvbench/ml/gain_ratio_tree.hpp"
#include "hrvbench/ml/tree.hpp"

namespace hrvbench::ml {

using json = nlohmann::json;

namespace detail {

inline Eigen::MatrixXd to_eigen(const FeatureMatrix& x) {
    Eigen::MatrixXd m(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x.at(i, j);
    return m;
}

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline json tree_to_json(const Tree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.n, n.n_pos});
    return nodes;
}

inline Tree tree_from_json(const json& j) {
    Tree t;
    for (const auto& a : j)
        t.nodes.push_back({a[0].get<int>(), a[1].get<double>(), a[2].get<int>(), a[3].get<int>(), a[4].get<double>(),
                           a[5].get<double>(), a[6].get<double>()});
    return t;
}

}  // namespace detail

// ------------------------------------------------------------
// logistic regression (IRLS)
// ------------------------------------------------------------

struct LogisticModel {
    double intercept = 0.0;
    std::vector<double> coef;

    struct Params {
        double ridge = 1e-6;
        int max_iter = 100;
    };

    double score(std::span<const double> z) const {
        double eta = intercept;
        for (std::size_t j = 0; j < coef.size(); ++j) eta += coef[j] * z[j];
        return sigmoid(eta);
    }

    static LogisticModel fit(const FeatureMatrix& x, const Params& p) {
        const auto n = static_cast<Eigen::Index>(x.rows());
        const auto k = static_cast<Eigen::Index>(x.cols()) + 1;
        Eigen::MatrixXd X(n, k);
        X.col(0).setOnes();
        X.rightCols(k - 1) = detail::to_eigen(x);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) y(i) = x.label(static_cast<std::size_t>(i));

        Eigen::VectorXd penalty = Eigen::VectorXd::Constant(k, p.ridge);
        penalty(0) = 0.0;  // intercept unpenalized

        auto objective = [&](const Eigen::VectorXd& b) {
            const Eigen::VectorXd eta = X * b;
            double nll = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                // log(1 + exp(eta)) - y * eta, computed stably
                const double e = eta(i);
                nll += (e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e))) - y(i) * e;
            }
            return nll + 0.5 * (penalty.array() * b.array().square()).sum();
        };

        Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
        double f = objective(beta);
        for (int it = 0; it < p.max_iter; ++it) {
            const Eigen::VectorXd eta = X * beta;
            Eigen::VectorXd mu(n), w(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                mu(i) = sigmoid(eta(i));
                w(i) = std::max(mu(i) * (1.0 - mu(i)), 1e-12);
            }
            const Eigen::VectorXd grad = X.transpose() * (y - mu) - penalty.cwiseProduct(beta);
            Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
            H.diagonal() += penalty;
            H.diagonal().array() += 1e-12;
            const Eigen::VectorXd step = H.ldlt().solve(grad);
            if (!step.allFinite()) break;
            double t = 1.0;
            bool improved = false;
            while (t > 1e-10) {
                const Eigen::VectorXd cand = beta + t * step;
                const double fc = objective(cand);
                if (fc <= f) {
                    beta = cand;
                    improved = f - fc > 1e-12 * std::max(1.0, std::abs(f));
                    f = fc;
                    break;
                }
                t /= 2.0;
            }
            if (!improved || (t * step).norm() < 1e-10) break;
        }
        LogisticModel m;
        m.intercept = beta(0);
        m.coef.assign(beta.data() + 1, beta.data() + k);
        return m;
    }

    json to_json() const { return {{"intercept", intercept}, {"coef", coef}}; }
    static LogisticModel from_json(const json& j) { return {j.at("intercept").get<double>(), j.at("coef").get<std::vector<double>>()}; }
};

// ------------------------------------------------------------
// linear discriminant analysis
// ------------------------------------------------------------

struct LdaModel {
    std::vector<double> weights;
    double bias = 0.0;

    struct Params {
        double diagonal_loading = 1e-6;
    };

    double score(std::span<const double> z) const {
        double s = bias;
        for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * z[j];
        return sigmoid(s);
    }

    static LdaModel fit(const FeatureMatrix& x, const Params& p) {
        const auto d = static_cast<Eigen::Index>(x.cols());
        Eigen::VectorXd mu[2] = {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
        double count[2] = {0, 0};
        for (std::size_t i = 0; i < x.rows(); ++i) {
            mu[x.label(i)] += detail::to_eigen(x.row(i));
            count[x.label(i)] += 1;
        }
        mu[0] /= count[0];
        mu[1] /= count[1];
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const Eigen::VectorXd c = detail::to_eigen(x.row(i)) - mu[x.label(i)];
            cov.noalias() += c * c.transpose();
        }
        cov /= std::max(1.0, count[0] + count[1] - 2.0);
        cov.diagonal().array() += p.diagonal_loading;
        const Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularCovariance, "pooled covariance not positive definite");
        const Eigen::VectorXd w = llt.solve(mu[1] - mu[0]);
        if (!w.allFinite()) throw Error(ErrorCode::SingularCovariance, "pooled covariance solve failed");
        LdaModel m;
        m.weights = detail::to_std(w);
        m.bias = -0.5 * w.dot(mu[0] + mu[1]) + std::log(count[1] / count[0]);
        return m;
    }

    json to_json() const { return {{"weights", weights}, {"bias", bias}}; }
    static LdaModel from_json(const json& j) { return {j.at("weights").get<std::vector<double>>(), j.at("bias").get<double>()}; }
};

// ------------------------------------------------------------
// k nearest neighbours
// ------------------------------------------------------------

/// Euclidean kNN; every training row tied with the k-th nearest distance
/// joins the vote, so ties never depend on row order.
struct KnnModel {
    std::size_t k = 5;
    std::size_t dims = 0;
    std::vector<double> rows;  // standardized training rows, row-major
    std::vector<int> labels;

    struct Params {
        std::size_t k = 5;
    };

    double score(std::span<const double> z) const {
        const std::size_t n = labels.size();
        std::vector<std::pair<double, std::size_t>> d(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < dims; ++j) {
                const double diff = rows[i * dims + j] - z[j];
                s += diff * diff;
            }
            d[i] = {s, i};
        }
        const std::size_t kk = std::min(k, n);
        std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk - 1), d.end());
        const double kth = d[kk - 1].first;
        double votes = 0, pos = 0;
        for (const auto& [dist, i] : d)
            if (dist <= kth) {
                votes += 1;
                pos += labels[i];
            }
        return pos / votes;
    }

    static KnnModel fit(const FeatureMatrix& x, const Params& p) {
        KnnModel m;
        m.k = p.k;
        m.dims = x.cols();
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const auto r = x.row(i);
            m.rows.insert(m.rows.end(), r.begin(), r.end());
        }
        m.labels = x.labels();
        return m;
    }

    json to_json() const { return {{"k", k}, {"dims", dims}, {"rows", rows}, {"labels", labels}}; }
    static KnnModel from_json(const json& j) {
        return {j.at("k").get<std::size_t>(), j.at("dims").get<std::size_t>(), j.at("rows").get<std::vector<double>>(),
                j.at("labels").get<std::vector<int>>()};
    }
};

// ------------------------------------------------------------
// random forest
// ------------------------------------------------------------

struct ForestModel {
    std::vector<Tree> trees;
    double oob_accuracy = std::numeric_limits<double>::quiet_NaN();

    struct Params {
        std::size_t trees = 500;
        std::size_t mtry = 0;  // 0: floor(sqrt(p))
        std::size_t min_node_size = 1;
    };

    double score(std::span<const double> z) const {
        double s = 0.0;
        for (const auto& t : trees) s += t.predict(z);
        return s / static_cast<double>(trees.size());
    }

    static ForestModel fit(const FeatureMatrix& x, const Params& p, std::uint64_t seed) {
        const std::size_t n = x.rows();
        CartParams cp;
        cp.mtry = p.mtry > 0 ? p.mtry : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(x.cols()))));
        cp.min_node_size = p.min_node_size;
        ForestModel m;
        m.trees.reserve(p.trees);
        std::vector<double> oob_sum(n, 0.0);
        std::vector<int> oob_n(n, 0);
        for (std::size_t t = 0; t < p.trees; ++t) {
            Rng rng(derive_seed(seed, {t}));
            std::vector<std::size_t> boot(n);
            std::vector<char> in_bag(n, 0);
            for (auto& b : boot) {
                b = rng.below(n);
                in_bag[b] = 1;
            }
            CartBuilder builder(x, cp, rng);
            m.trees.push_back(builder.build(std::move(boot)));
            for (std::size_t i = 0; i < n; ++i)
                if (!in_bag[i]) {
                    oob_sum[i] += m.trees.back().predict(x.row(i));
                    ++oob_n[i];
                }
        }
        std::size_t correct = 0, counted = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (oob_n[i] == 0) continue;
            ++counted;
            correct += (oob_sum[i] / oob_n[i] >= 0.5 ? 1 : 0) == x.label(i);
        }
        if (counted > 0) m.oob_accuracy = static_cast<double>(correct) / static_cast<double>(counted);
        return m;
    }

    json to_json() const {
        json ts = json::array();
        for (const auto& t : trees) ts.push_back(detail::tree_to_json(t));
        return {{"trees", ts}, {"oob_accuracy", std::isnan(oob_accuracy) ? json(nullptr) : json(oob_accuracy)}};
    }
    static ForestModel from_json(const json& j) {
        ForestModel m;
        for (const auto& t : j.at("trees")) m.trees.push_back(detail::tree_from_json(t));
        if (!j.at("oob_accuracy").is_null()) m.oob_accuracy = j.at("oob_accuracy").get<double>();
        return m;
    }
};

// ------------------------------------------------------------
// linear soft-margin SVM + Platt sigmoid
// ------------------------------------------------------------

struct PlattSigmoid {
    double a = 0.0;
    double b = 0.0;

    double operator()(double f) const { return sigmoid(-(a * f + b)); }

    /// Newton fit with backtracking on regularized targets.
    static PlattSigmoid fit(std::span<const double> f, std::span<const int> y) {
        double prior1 = 0, prior0 = 0;
        for (int v : y) (v == 1 ? prior1 : prior0) += 1;
        const double hi = (prior1 + 1.0) / (prior1 + 2.0);
        const double lo = 1.0 / (prior0 + 2.0);
        auto objective = [&](double A, double B) {
            double s = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) {
                const double t = y[i] == 1 ? hi : lo;
                const double z = f[i] * A + B;
                s += z >= 0 ? t * z + std::log1p(std::exp(-z)) : (t - 1.0) * z + std::log1p(std::exp(z));
            }
            return s;
        };
        double A = 0.0, B = std::log((prior0 + 1.0) / (prior1 + 1.0));
        double fval = objective(A, B);
        for (int it = 0; it < 100; ++it) {
            double h11 = 1e-12, h22 = 1e-12, h21 = 0, g1 = 0, g2 = 0;
            for (std::size_t i = 0; i < f.size(); ++i) {
                const double t = y[i] == 1 ? hi : lo;
                const double p = sigmoid(-(f[i] * A + B));
                const double d2 = p * (1.0 - p);
                h11 += f[i] * f[i] * d2;
                h22 += d2;
                h21 += f[i] * d2;
                const double d1 = t - p;
                g1 += f[i] * d1;
                g2 += d1;
            }
            if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
            const double det = h11 * h22 - h21 * h21;
            const double dA = -(h22 * g1 - h21 * g2) / det;
            const double dB = -(-h21 * g1 + h11 * g2) / det;
            const double gd = g1 * dA + g2 * dB;
            double step = 1.0;
            while (step >= 1e-10) {
                const double nf = objective(A + step * dA, B + step * dB);
                if (nf < fval + 1e-4 * step * gd) {
                    A += step * dA;
                    B += step * dB;
                    fval = nf;
                    break;
                }
                step /= 2.0;
            }
            if (step < 1e-10) break;
        }
        return {A, B};
    }
};

struct SvmModel {
    std::vector<double> weights;
    double bias = 0.0;
    PlattSigmoid platt;

    struct Params {
        double cost = 1.0;
        std::size_t epochs = 100;
    };

    double margin(std::span<const double> z) const {
        double s = bias;
        for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * z[j];
        return s;
    }

    double score(std::span<const double> z) const { return platt(margin(z)); }

    /// Pegasos subgradient descent on the hinge loss with lambda = 1 / (C n);
    /// the bias is an extra, equally regularized coordinate. Returns the
    /// average of the second-half iterates.
    static SvmModel fit(const FeatureMatrix& x, const Params& p, std::uint64_t seed) {
        const std::size_t n = x.rows(), d = x.cols();
        const double lambda = 1.0 / (p.cost * static_cast<double>(n));
        const std::size_t total = p.epochs * n;
        std::vector<double> w(d + 1, 0.0), avg(d + 1, 0.0);
        std::size_t averaged = 0;
        Rng rng(seed);
        for (std::size_t t = 1; t <= total; ++t) {
            const std::size_t i = rng.below(n);
            const auto row = x.row(i);
            const double yi = x.label(i) == 1 ? 1.0 : -1.0;
            double m = w[d];
            for (std::size_t j = 0; j < d; ++j) m += w[j] * row[j];
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const double shrink = 1.0 - eta * lambda;
            for (auto& v : w) v *= shrink;
            if (yi * m < 1.0) {
                for (std::size_t j = 0; j < d; ++j) w[j] += eta * yi * row[j];
                w[d] += eta * yi;
            }
            if (t > total / 2) {
                for (std::size_t j = 0; j <= d; ++j) avg[j] += w[j];
                ++averaged;
            }
        }
        SvmModel m;
        for (auto& v : avg) v /= static_cast<double>(std::max<std::size_t>(1, averaged));
        m.weights.assign(avg.begin(), avg.begin() + static_cast<std::ptrdiff_t>(d));
        m.bias = avg[d];
        std::vector<double> f(n);
        for (std::size_t i = 0; i < n; ++i) f[i] = m.margin(x.row(i));
        m.platt = PlattSigmoid::fit(f, x.labels());
        return m;
    }

    json to_json() const { return {{"weights", weights}, {"bias", bias}, {"platt_a", platt.a}, {"platt_b", platt.b}}; }
    static SvmModel from_json(const json& j) {
        return {j.at("weights").get<std::vector<double>>(), j.at("bias").get<double>(),
                {j.at("platt_a").get<double>(), j.at("platt_b").get<double>()}};
    }
};

// ------------------------------------------------------------
// Gaussian naive Bayes
// ------------------------------------------------------------

struct NaiveBayesModel {
    std::vector<double> mean[2];
    std::vector<double> var[2];
    double log_prior[2] = {0.0, 0.0};

    struct Params {
        double var_floor = 1e-9;
    };

    double score(std::span<const double> z) const {
        double ll[2];
        for (int c = 0; c < 2; ++c) {
            ll[c] = log_prior[c];
            for (std::size_t j = 0; j < z.size(); ++j) {
                const double d = z[j] - mean[c][j];
                ll[c] += -0.5 * std::log(2.0 * std::numbers::pi * var[c][j]) - d * d / (2.0 * var[c][j]);
            }
        }
        return sigmoid(ll[1] - ll[0]);
    }

    static NaiveBayesModel fit(const FeatureMatrix& x, const Params& p) {
        NaiveBayesModel m;
        const std::size_t d = x.cols();
        double count[2] = {0, 0};
        for (int c = 0; c < 2; ++c) {
            m.mean[c].assign(d, 0.0);
            m.var[c].assign(d, 0.0);
        }
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const int c = x.label(i);
            count[c] += 1;
            for (std::size_t j = 0; j < d; ++j) m.mean[c][j] += x.at(i, j);
        }
        for (int c = 0; c < 2; ++c)
            for (auto& v : m.mean[c]) v /= count[c];
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const int c = x.label(i);
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = x.at(i, j) - m.mean[c][j];
                m.var[c][j] += diff * diff;
            }
        }
        for (int c = 0; c < 2; ++c) {
            for (auto& v : m.var[c]) v = std::max(v / count[c], p.var_floor);
            m.log_prior[c] = std::log(count[c] / (count[0] + count[1]));
        }
        return m;
    }

    json to_json() const {
        return {{"mean", {mean[0], mean[1]}}, {"var", {var[0], var[1]}}, {"log_prior", {log_prior[0], log_prior[1]}}};
    }
    static NaiveBayesModel from_json(const json& j) {
        NaiveBayesModel m;
        for (int c = 0; c < 2; ++c) {
            m.mean[c] = j.at("mean")[c].get<std::vector<double>>();
            m.var[c] = j.at("var")[c].get<std::vector<double>>();
            m.log_prior[c] = j.at("log_prior")[c].get<double>();
        }
        return m;
    }
};

// ------------------------------------------------------------
// C5.0-style single tree
// ------------------------------------------------------------

struct GainRatioTreeModel {
    Tree tree;

    using Params = GainRatioParams;

    double score(std::span<const double> z) const { return tree.predict(z); }

    static GainRatioTreeModel fit(const FeatureMatrix& x, const Params& p) {
        GainRatioTreeBuilder b(x, p);
        return {b.build()};
    }

    json to_json() const { return {{"tree", detail::tree_to_json(tree)}}; }
    static GainRatioTreeModel from_json(const json& j) { return {detail::tree_from_json(j.at("tree"))}; }
};

// ------------------------------------------------------------
// stochastic gradient boosting
// ------------------------------------------------------------

struct BoostingModel {
    double init = 0.0;  // log-odds of the training prior
    double shrinkage = 0.1;
    std::vector<Tree> trees;
    std::vector<double> train_loss;  // mean logistic loss after each round

    struct Params {
        std::size_t rounds = 200;
        int depth = 3;
        double shrinkage = 0.1;
        double subsample = 0.5;
        std::size_t min_obs_in_node = 10;
    };

    double raw(std::span<const double> z) const {
        double f = init;
        for (const auto& t : trees) f += shrinkage * t.predict(z);
        return f;
    }

    double score(std::span<const double> z) const { return sigmoid(raw(z)); }

    static double logistic_loss(double f, int y) {
        // log(1 + exp(f)) - y f
        return (f > 0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f))) - y * f;
    }

    static BoostingModel fit(const FeatureMatrix& x, const Params& p, std::uint64_t seed) {
        const std::size_t n = x.rows();
        BoostingModel m;
        m.shrinkage = p.shrinkage;
        const double pos = static_cast<double>(x.count(1));
        m.init = std::log(pos / (static_cast<double>(n) - pos));
        std::vector<double> f(n, m.init), resid(n), hess(n);
        const auto bag = std::max<std::size_t>(
            1, std::min(n, static_cast<std::size_t>(std::floor(p.subsample * static_cast<double>(n)))));
        RegressionTreeParams tp{p.depth, p.min_obs_in_node};
        Rng rng(seed);
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        for (std::size_t round = 0; round < p.rounds; ++round) {
            for (std::size_t i = 0; i < n; ++i) {
                const double pr = sigmoid(f[i]);
                resid[i] = x.label(i) - pr;
                hess[i] = pr * (1.0 - pr);
            }
            std::vector<std::size_t> rows = all;
            if (bag < n) {
                rng.shuffle(rows);
                rows.resize(bag);
                std::sort(rows.begin(), rows.end());
            }
            RegressionTreeBuilder builder(x, resid, hess, tp);
            m.trees.push_back(builder.build(std::move(rows)));
            double loss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                f[i] += m.shrinkage * m.trees.back().predict(x.row(i));
                loss += logistic_loss(f[i], x.label(i));
            }
            m.train_loss.push_back(loss / static_cast<double>(n));
        }
        return m;
    }

    json to_json() const {
        json ts = json::array();
        for (const auto& t : trees) ts.push_back(detail::tree_to_json(t));
        return {{"init", init}, {"shrinkage", shrinkage}, {"trees", ts}};
    }
    static BoostingModel from_json(const json& j) {
        BoostingModel m;
        m.init = j.at("init").get<double>();
        m.shrinkage = j.at("shrinkage").get<double>();
        for (const auto& t : j.at("trees")) m.trees.push_back(detail::tree_from_json(t));
        return m;
    }
};

}  // namespace hrvbench::ml
