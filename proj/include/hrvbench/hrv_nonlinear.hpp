#pragma once

// Nonlinear and event-related HRV indexes: Poincare plot, largest Lyapunov
// exponent, heart-rate turbulence and phase-rectified signal averaging.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hrvbench/common.hpp"
#include "hrvbench/hrv_linear.hpp"
#include "hrvbench/signal_ingest.hpp"

namespace hrvbench {

// ------------------------------------------------------------
// Poincare plot
// ------------------------------------------------------------

struct PoincareIndexes {
    double centroid_ms = 0.0;
    double sd1_ms = 0.0;
    double sd2_ms = 0.0;
    std::optional<double> sd1_sd2_ratio;
    double sd1_nu = 0.0;
    double sd2_nu = 0.0;
};

/// Lag-1 pairs (x[k-1], x[k]) over contiguous intervals.
inline std::vector<std::pair<double, double>> poincare_pairs(const NNSeries& nn) {
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(nn.size());
    for (std::size_t k = 1; k < nn.size(); ++k)
        if (detail::contiguous(nn, k)) pairs.emplace_back(nn.intervals_ms[k - 1], nn.intervals_ms[k]);
    return pairs;
}

/// SD1/SD2 use the population convention (ellipse fit); normalized units
/// are 100 * SD / centroid.
inline PoincareIndexes poincare(const NNSeries& nn) {
    if (nn.size() < 3) throw Error(ErrorCode::TooFewIntervals, "Poincare plot needs >= 3 NN intervals");
    const auto pairs = poincare_pairs(nn);
    if (pairs.size() < 2) throw Error(ErrorCode::TooFewIntervals, "Poincare plot needs >= 2 lag-1 pairs");

    PoincareIndexes out;
    out.centroid_ms = mean(nn.intervals_ms);
    // centred first so that a constant series gives exactly zero spread
    std::vector<double> minor(pairs.size()), major(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double a = pairs[i].first - out.centroid_ms, b = pairs[i].second - out.centroid_ms;
        minor[i] = (b - a) / std::numbers::sqrt2;
        major[i] = (b + a) / std::numbers::sqrt2;
    }
    out.sd1_ms = std::sqrt(variance(minor, 0));
    out.sd2_ms = std::sqrt(variance(major, 0));
    if (out.sd2_ms > 0) out.sd1_sd2_ratio = out.sd1_ms / out.sd2_ms;
    out.sd1_nu = 100.0 * out.sd1_ms / out.centroid_ms;
    out.sd2_nu = 100.0 * out.sd2_ms / out.centroid_ms;
    return out;
}

// ------------------------------------------------------------
// largest Lyapunov exponent (Rosenstein)
// ------------------------------------------------------------

struct LyapunovConfig {
    int embedding_dim = 5;
    int delay_samples = 1;
    int theiler_window = 10;
    int fit_first_step = 0;
    int fit_last_step = 8;
    /// Longer series are truncated to their first max_points samples; the
    /// neighbour search is quadratic.
    std::size_t max_points = 2000;
    std::size_t min_points = 500;

    void validate() const {
        if (embedding_dim < 2 || delay_samples < 1 || theiler_window < 0 || fit_first_step < 0 ||
            fit_last_step <= fit_first_step || max_points < min_points)
            throw Error(ErrorCode::InvalidParams, "bad Lyapunov configuration");
    }
};

/// Mean log divergence curve, one entry per step from 0 to cfg.fit_last_step.
inline std::vector<double> divergence_curve(std::span<const double> series, const LyapunovConfig& cfg) {
    cfg.validate();
    const auto n = std::min(series.size(), cfg.max_points);
    if (n < cfg.min_points) throw Error(ErrorCode::TooFewIntervals, "Lyapunov exponent needs >= min_points samples");
    const auto m = static_cast<std::size_t>(cfg.embedding_dim);
    const auto tau = static_cast<std::size_t>(cfg.delay_samples);
    const auto steps = static_cast<std::size_t>(cfg.fit_last_step);
    const std::size_t span = (m - 1) * tau;
    if (n <= span + steps + 1) throw Error(ErrorCode::TooFewIntervals, "series too short for embedding");
    const std::size_t vectors = n - span;
    const std::size_t usable = vectors - steps;  // trajectories that can be followed for all steps
    const auto theiler = static_cast<std::size_t>(cfg.theiler_window);

    auto dist2 = [&](std::size_t a, std::size_t b) {
        double s = 0.0;
        for (std::size_t d = 0; d < m; ++d) {
            const double diff = series[a + d * tau] - series[b + d * tau];
            s += diff * diff;
        }
        return s;
    };

    std::vector<double> sum_log(steps + 1, 0.0);
    std::vector<std::size_t> count(steps + 1, 0);
    for (std::size_t i = 0; i < usable; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_j = usable;
        for (std::size_t j = 0; j < usable; ++j) {
            if ((i > j ? i - j : j - i) <= theiler) continue;
            const double d = dist2(i, j);
            // exact repeats carry no divergence information
            if (d > 0.0 && d < best) {
                best = d;
                best_j = j;
            }
        }
        if (best_j == usable) continue;
        for (std::size_t k = 0; k <= steps; ++k) {
            const double d = dist2(i + k, best_j + k);
            if (d > 0.0) {
                sum_log[k] += 0.5 * std::log(d);
                ++count[k];
            }
        }
    }
    std::vector<double> curve(steps + 1, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k <= steps; ++k)
        if (count[k] > 0) curve[k] = sum_log[k] / static_cast<double>(count[k]);
    return curve;
}

/// Largest Lyapunov exponent in nats per beat.
inline double lyapunov(std::span<const double> series, const LyapunovConfig& cfg = {}) {
    const auto curve = divergence_curve(series, cfg);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int k = cfg.fit_first_step; k <= cfg.fit_last_step; ++k) {
        const double y = curve[static_cast<std::size_t>(k)];
        if (std::isnan(y)) continue;
        sx += k;
        sy += y;
        sxx += double(k) * k;
        sxy += k * y;
        ++n;
    }
    if (n < 2) throw Error(ErrorCode::NoValidNeighbors, "no valid neighbour trajectories");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline double lyapunov(const NNSeries& nn, const LyapunovConfig& cfg = {}) { return lyapunov(std::span(nn.intervals_ms), cfg); }

// ------------------------------------------------------------
// heart-rate turbulence
// ------------------------------------------------------------

struct TurbulenceIndexes {
    std::size_t vpc_count = 0;
    std::optional<double> turbulence_onset_pct;
    std::optional<double> turbulence_slope_ms_per_beat;
    std::size_t valid_vpc_episodes = 0;
};

struct TurbulenceConfig {
    double max_prematurity = 0.80;
    double min_pause = 1.20;
    std::size_t pre_sinus_intervals = 2;
    std::size_t post_sinus_intervals = 15;
    std::size_t reference_intervals = 5;
    std::size_t slope_run = 5;
};

/// Least-squares slope of y against 0, 1, 2, ...
inline double index_slope(std::span<const double> y) {
    const auto n = static_cast<double>(y.size());
    const double xm = (n - 1.0) / 2.0;
    const double ym = mean(y);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double dx = static_cast<double>(i) - xm;
        sxy += dx * (y[i] - ym);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

/// Turbulence over all VPCs whose clock time satisfies `in_segment`
/// (every VPC when empty).
inline TurbulenceIndexes turbulence(const RRSeries& series, const TurbulenceConfig& cfg = {},
                                    const std::function<bool(double clock_s)>& in_segment = {}) {
    TurbulenceIndexes out;
    const auto& b = series.beats;
    double onset_sum = 0.0, slope_sum = 0.0;
    auto normal = [&](std::size_t i) { return b[i].label == BeatLabel::Normal; };

    for (std::size_t v = 0; v < b.size(); ++v) {
        if (b[v].label != BeatLabel::Ventricular) continue;
        if (in_segment && !in_segment(clock_of(series.start_clock_s, b[v].onset_ms))) continue;
        ++out.vpc_count;

        // sinus context before: beats v-1-pre .. v-1 Normal
        const std::size_t pre = cfg.pre_sinus_intervals;
        if (v < pre + 1) continue;
        bool ok = true;
        for (std::size_t i = v - pre - 1; i < v; ++i) ok = ok && normal(i);
        // sinus context after: beats v+1 .. v+1+post Normal
        const std::size_t post = cfg.post_sinus_intervals;
        if (v + post + 1 >= b.size()) continue;
        for (std::size_t i = v + 1; i <= v + post + 1; ++i) ok = ok && normal(i);
        if (!ok) continue;

        // reference: mean of up to reference_intervals NN intervals preceding the coupling interval
        double ref_sum = 0.0;
        std::size_t ref_n = 0;
        for (std::size_t i = v - 1; i >= 1 && ref_n < cfg.reference_intervals; --i) {
            if (!normal(i) || !normal(i - 1)) break;
            ref_sum += b[i - 1].rr_ms;
            ++ref_n;
        }
        const double reference = ref_sum / static_cast<double>(ref_n);
        const double coupling = b[v - 1].rr_ms;
        const double pause = b[v].rr_ms;
        if (coupling > cfg.max_prematurity * reference || pause < cfg.min_pause * reference) continue;

        const double before = b[v - 3].rr_ms + b[v - 2].rr_ms;
        const double after = b[v + 1].rr_ms + b[v + 2].rr_ms;
        onset_sum += 100.0 * (after - before) / before;

        std::vector<double> post_rr(post);
        for (std::size_t k = 0; k < post; ++k) post_rr[k] = b[v + 1 + k].rr_ms;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s + cfg.slope_run <= post; ++s)
            best = std::max(best, index_slope(std::span(post_rr).subspan(s, cfg.slope_run)));
        slope_sum += best;
        ++out.valid_vpc_episodes;
    }
    if (out.valid_vpc_episodes > 0) {
        const auto n = static_cast<double>(out.valid_vpc_episodes);
        out.turbulence_onset_pct = onset_sum / n;
        out.turbulence_slope_ms_per_beat = slope_sum / n;
    }
    return out;
}

// ------------------------------------------------------------
// phase-rectified signal averaging
// ------------------------------------------------------------

enum class AnchorRule { Deceleration, Acceleration };

struct PrsaComponent {
    double capacity_ms = 0.0;
    std::size_t anchors = 0;
};

struct PrsaIndexes {
    double acceleration_capacity_ms = 0.0;
    double deceleration_capacity_ms = 0.0;
    std::size_t anchor_count_ac = 0;
    std::size_t anchor_count_dc = 0;

    /// Physiologic series have DC >= 0 and AC <= 0; violations are flagged, not rejected.
    bool physiologic() const { return deceleration_capacity_ms >= 0 && acceleration_capacity_ms <= 0; }
};

inline PrsaComponent prsa(std::span<const double> x, AnchorRule rule, std::size_t window_l = 2) {
    if (window_l < 2) throw Error(ErrorCode::InvalidParams, "PRSA window must be >= 2");
    if (x.size() < 2 * window_l + 1) throw Error(ErrorCode::TooFewIntervals, "PRSA needs >= 2L+1 intervals");
    // averaged window covers offsets -L .. L-1 around each anchor
    double s_m2 = 0, s_m1 = 0, s_0 = 0, s_p1 = 0;
    std::size_t anchors = 0;
    for (std::size_t i = window_l; i + window_l <= x.size(); ++i) {
        const bool is_anchor = rule == AnchorRule::Deceleration ? x[i] > x[i - 1] : x[i] < x[i - 1];
        if (!is_anchor) continue;
        s_m2 += x[i - 2];
        s_m1 += x[i - 1];
        s_0 += x[i];
        s_p1 += x[i + 1];
        ++anchors;
    }
    if (anchors == 0) throw Error(ErrorCode::NoAnchors, "no PRSA anchors");
    const auto n = static_cast<double>(anchors);
    return {(s_0 / n + s_p1 / n - s_m1 / n - s_m2 / n) / 4.0, anchors};
}

inline PrsaComponent prsa(const NNSeries& nn, AnchorRule rule, std::size_t window_l = 2) {
    return prsa(std::span(nn.intervals_ms), rule, window_l);
}

inline PrsaIndexes prsa_indexes(const NNSeries& nn, std::size_t window_l = 2) {
    const auto dc = prsa(nn, AnchorRule::Deceleration, window_l);
    const auto ac = prsa(nn, AnchorRule::Acceleration, window_l);
    return {ac.capacity_ms, dc.capacity_ms, ac.anchors, dc.anchors};
}

}  // namespace hrvbench
