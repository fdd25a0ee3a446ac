#pragma once

// Group x segment statistics: two-way fixed-effects ANOVA with interaction
// and Tukey-Kramer comparisons over the six cell means.

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hrvbench/common.hpp"

namespace hrvbench::eval {

inline constexpr std::size_t kGroups = 2;    // Healthy, MI
inline constexpr std::size_t kSegments = 3;  // 24h, day, night
inline constexpr double kQuadratureTol = 1e-8;
inline constexpr double kAlpha = 0.05;

using CellData = std::array<std::array<std::vector<double>, kSegments>, kGroups>;

namespace detail {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// P(range of k iid standard normals < w).
inline double normal_range_cdf(double w, int k) {
    if (w <= 0) return 0.0;
    const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    auto f = [&](double z) {
        const double d = norm_cdf(z) - norm_cdf(z - w);
        return c * std::exp(-0.5 * z * z) * std::pow(d, k - 1);
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double v = k * (GK::integrate(f, -9.0, 0.0, 15, kQuadratureTol) + GK::integrate(f, 0.0, w / 2.0, 15, kQuadratureTol) +
                          GK::integrate(f, w / 2.0, w + 9.0, 15, kQuadratureTol));
    return std::clamp(v, 0.0, 1.0);
}

}  // namespace detail

/// Studentized-range CDF P(Q < q) for k means and df error degrees of freedom.
inline double ptukey(double q, int k, double df) {
    if (q <= 0) return 0.0;
    if (!std::isfinite(q)) return 1.0;
    if (df > 1e7) return detail::normal_range_cdf(q, k);
    const double log_norm = 0.5 * df * std::log(df) - std::lgamma(0.5 * df) - (0.5 * df - 1.0) * std::log(2.0);
    auto f = [&](double s) {
        if (s <= 0) return 0.0;
        const double dens = std::exp(log_norm + (df - 1.0) * std::log(s) - 0.5 * df * s * s);
        return dens == 0.0 ? 0.0 : dens * detail::normal_range_cdf(q * s, k);
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double spread = 1.0 / std::sqrt(df);
    const double a = std::max(0.0, 1.0 - 10.0 * spread);
    const double b = 1.0 + 10.0 * spread;
    double v = GK::integrate(f, a, 1.0, 15, kQuadratureTol) + GK::integrate(f, 1.0, b, 15, kQuadratureTol) +
               GK::integrate(f, b, std::numeric_limits<double>::infinity(), 15, kQuadratureTol);
    if (a > 0) v += GK::integrate(f, 0.0, a, 15, kQuadratureTol);
    return std::clamp(v, 0.0, 1.0);
}

struct AnovaTerm {
    double ss = 0.0;
    double df = 0.0;
    double f = 0.0;
    double p = 1.0;
};

struct AnovaResult {
    AnovaTerm group;
    AnovaTerm segment;
    AnovaTerm interaction;
    double ss_error = 0.0;
    double df_error = 0.0;
    double ms_error = 0.0;
};

struct CellSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
};

inline void require_cells(const CellData& cells) {
    for (std::size_t g = 0; g < kGroups; ++g)
        for (std::size_t s = 0; s < kSegments; ++s)
            if (cells[g][s].size() < 2)
                throw Error(ErrorCode::DegenerateCell, "each group x segment cell needs >= 2 recordings");
}

/// Sums of squares from cell means. Sequential (Type I) and order-free when
/// cell counts are proportional, which is how the cohort design is built.
inline AnovaResult two_way_anova(const CellData& cells) {
    require_cells(cells);
    double total = 0, n = 0;
    std::array<double, kGroups> g_sum{}, g_n{};
    std::array<double, kSegments> s_sum{}, s_n{};
    std::array<std::array<double, kSegments>, kGroups> c_mean{}, c_n{};
    for (std::size_t g = 0; g < kGroups; ++g)
        for (std::size_t s = 0; s < kSegments; ++s) {
            double sum = 0;
            for (double v : cells[g][s]) sum += v;
            const auto cn = static_cast<double>(cells[g][s].size());
            c_n[g][s] = cn;
            c_mean[g][s] = sum / cn;
            g_sum[g] += sum;
            g_n[g] += cn;
            s_sum[s] += sum;
            s_n[s] += cn;
            total += sum;
            n += cn;
        }
    const double grand = total / n;
    AnovaResult r;
    double ss_cells = 0;
    for (std::size_t g = 0; g < kGroups; ++g) {
        const double d = g_sum[g] / g_n[g] - grand;
        r.group.ss += g_n[g] * d * d;
    }
    for (std::size_t s = 0; s < kSegments; ++s) {
        const double d = s_sum[s] / s_n[s] - grand;
        r.segment.ss += s_n[s] * d * d;
    }
    for (std::size_t g = 0; g < kGroups; ++g)
        for (std::size_t s = 0; s < kSegments; ++s) {
            const double d = c_mean[g][s] - grand;
            ss_cells += c_n[g][s] * d * d;
            for (double v : cells[g][s]) r.ss_error += (v - c_mean[g][s]) * (v - c_mean[g][s]);
        }
    r.interaction.ss = std::max(0.0, ss_cells - r.group.ss - r.segment.ss);
    r.group.df = kGroups - 1;
    r.segment.df = kSegments - 1;
    r.interaction.df = (kGroups - 1) * (kSegments - 1);
    r.df_error = n - static_cast<double>(kGroups * kSegments);
    r.ms_error = r.ss_error / r.df_error;

    // numerically zero effects count as zero
    const double scale = std::max(1.0, grand * grand) * n * 1e-24;
    for (AnovaTerm* t : {&r.group, &r.segment, &r.interaction}) {
        if (t->ss <= scale) {
            t->ss = std::max(t->ss, 0.0);
            t->f = 0.0;
            t->p = 1.0;
        } else if (r.ms_error <= 0.0) {
            t->f = std::numeric_limits<double>::infinity();
            t->p = 0.0;
        } else {
            t->f = (t->ss / t->df) / r.ms_error;
            t->p = boost::math::cdf(boost::math::complement(boost::math::fisher_f_distribution<double>(t->df, r.df_error), t->f));
        }
    }
    return r;
}

/// Cell index used by the pairwise tables: group * 3 + segment.
inline constexpr std::size_t cell_index(std::size_t group, std::size_t segment) { return group * kSegments + segment; }

struct TukeyResult {
    std::array<std::array<double, 6>, 6> q{};
    std::array<std::array<double, 6>, 6> p{};
};

/// Tukey-Kramer pairwise p-values over the six cell means.
inline TukeyResult tukey_hsd(const CellData& cells, const AnovaResult& anova) {
    std::array<double, 6> m{}, n{};
    for (std::size_t g = 0; g < kGroups; ++g)
        for (std::size_t s = 0; s < kSegments; ++s) {
            m[cell_index(g, s)] = mean(cells[g][s]);
            n[cell_index(g, s)] = static_cast<double>(cells[g][s].size());
        }
    TukeyResult t;
    for (std::size_t i = 0; i < 6; ++i) {
        t.p[i][i] = 1.0;
        for (std::size_t j = i + 1; j < 6; ++j) {
            const double diff = std::abs(m[i] - m[j]);
            const double se = std::sqrt(anova.ms_error / 2.0 * (1.0 / n[i] + 1.0 / n[j]));
            double q, p;
            if (diff == 0.0) {
                q = 0.0;
                p = 1.0;
            } else if (se == 0.0) {
                q = std::numeric_limits<double>::infinity();
                p = 0.0;
            } else {
                q = diff / se;
                p = std::clamp(1.0 - ptukey(q, 6, anova.df_error), 0.0, 1.0);
            }
            t.q[i][j] = t.q[j][i] = q;
            t.p[i][j] = t.p[j][i] = p;
        }
    }
    return t;
}

/// Footnote symbols per cell:
///   *  Healthy day/night vs Healthy 24h      ¥  Healthy day vs night (on night)
///   #  MI day/night vs MI 24h                §  MI day vs night (on night)
///   †  Healthy vs MI within a segment (on the MI cell)
inline std::array<std::array<std::string, kSegments>, kGroups> cell_flags(const TukeyResult& t) {
    std::array<std::array<std::string, kSegments>, kGroups> f;
    auto sig = [&](std::size_t a, std::size_t b) { return t.p[a][b] < kAlpha; };
    for (std::size_t s = 0; s < kSegments; ++s)
        if (sig(cell_index(0, s), cell_index(1, s))) f[1][s] += "†";
    for (std::size_t s = 1; s < kSegments; ++s) {
        if (sig(cell_index(0, 0), cell_index(0, s))) f[0][s] += "*";
        if (sig(cell_index(1, 0), cell_index(1, s))) f[1][s] += "#";
    }
    if (sig(cell_index(0, 1), cell_index(0, 2))) f[0][2] += "¥";
    if (sig(cell_index(1, 1), cell_index(1, 2))) f[1][2] += "§";
    return f;
}

struct IndexStats {
    std::string index;
    std::array<std::array<CellSummary, kSegments>, kGroups> cells{};
    AnovaResult anova;
    TukeyResult tukey;
    std::array<std::array<std::string, kSegments>, kGroups> flags;
};

inline IndexStats group_stats(std::string index, const CellData& cells) {
    IndexStats r;
    r.index = std::move(index);
    for (std::size_t g = 0; g < kGroups; ++g)
        for (std::size_t s = 0; s < kSegments; ++s)
            r.cells[g][s] = {cells[g][s].size(), mean(cells[g][s]), std::sqrt(variance(cells[g][s], 1))};
    r.anova = two_way_anova(cells);
    r.tukey = tukey_hsd(cells, r.anova);
    r.flags = cell_flags(r.tukey);
    return r;
}

}  // namespace hrvbench::eval
