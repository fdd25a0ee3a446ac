#pragma once

// Time- and frequency-domain HRV indexes.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "hrvbench/common.hpp"
#include "hrvbench/signal_ingest.hpp"

namespace hrvbench {

struct TimeDomainIndexes {
    double mean_rr_ms = 0.0;
    double mean_hr_bpm = 0.0;
    double pcnn20_pct = 0.0;
    double pcnn30_pct = 0.0;
    double pcnn50_pct = 0.0;
    double sdnn_ms = 0.0;
    double rmssd_ms = 0.0;
    std::optional<double> sdann_ms;
    std::optional<double> sdnnidx_ms;
};

struct FrequencyDomainIndexes {
    double total_power_ms2 = 0.0;
    double vlf_ms2 = 0.0;
    double lf_ms2 = 0.0;
    double hf_ms2 = 0.0;
    std::optional<double> lf_nu;
    std::optional<double> hf_nu;
    std::optional<double> lf_hf_ratio;
};

struct Band {
    double lo_hz;
    double hi_hz;

    bool contains(double f) const { return f >= lo_hz && f < hi_hz; }
};

struct SpectralConfig {
    double resample_hz = 4.0;
    double window_s = 300.0;
    double overlap_fraction = 0.5;
    Band vlf{0.0033, 0.04};
    Band lf{0.04, 0.15};
    Band hf{0.15, 0.40};
    /// Larger jumps between consecutive NN onsets split the tachogram into
    /// independently resampled pieces (e.g. the two halves of a night).
    double max_gap_s = 5.0;

    void validate() const {
        if (!(vlf.lo_hz >= 0 && vlf.lo_hz < vlf.hi_hz && vlf.hi_hz <= lf.lo_hz && lf.lo_hz < lf.hi_hz &&
              lf.hi_hz <= hf.lo_hz && hf.lo_hz < hf.hi_hz))
            throw Error(ErrorCode::InvalidParams, "spectral bands must be disjoint and ascending");
        if (!(resample_hz > 2.0 * hf.hi_hz))
            throw Error(ErrorCode::InvalidParams, "resample_hz must exceed twice the HF upper edge");
        if (!(window_s > 0) || !(overlap_fraction >= 0 && overlap_fraction < 1))
            throw Error(ErrorCode::InvalidParams, "bad Welch window settings");
        if (window_samples() < 8) throw Error(ErrorCode::InvalidParams, "Welch window too short");
    }

    std::size_t window_samples() const { return static_cast<std::size_t>(std::lround(window_s * resample_hz)); }

    std::size_t fft_size() const {
        std::size_t n = 1;
        while (n < window_samples()) n <<= 1;
        return n;
    }
};

struct UniformSeries {
    double t0_s = 0.0;
    double fs_hz = 4.0;
    std::vector<double> values;
};

// ------------------------------------------------------------
// time domain
// ------------------------------------------------------------

namespace detail {

/// Interval k follows interval k-1 without a gap (its start is k-1's end).
inline bool contiguous(const NNSeries& nn, std::size_t k) {
    return std::abs(nn.onset_ms[k] - nn.intervals_ms[k] - nn.onset_ms[k - 1]) <= 1.0;
}

}  // namespace detail

/// Successive differences x[k] - x[k-1] over contiguous pairs only.
inline std::vector<double> successive_differences(const NNSeries& nn) {
    std::vector<double> d;
    d.reserve(nn.size());
    for (std::size_t k = 1; k < nn.size(); ++k)
        if (detail::contiguous(nn, k)) d.push_back(nn.intervals_ms[k] - nn.intervals_ms[k - 1]);
    return d;
}

inline constexpr double kShortTermWindowMs = 300000.0;

inline TimeDomainIndexes time_domain(const NNSeries& nn) {
    if (nn.size() < 2) throw Error(ErrorCode::TooFewIntervals, "time domain needs >= 2 NN intervals");
    TimeDomainIndexes out;
    const std::span<const double> x(nn.intervals_ms);
    out.mean_rr_ms = mean(x);
    out.mean_hr_bpm = 60000.0 / out.mean_rr_ms;
    out.sdnn_ms = std::sqrt(variance(x, 1));

    const auto diffs = successive_differences(nn);
    if (!diffs.empty()) {
        double sq = 0.0;
        std::size_t over20 = 0, over30 = 0, over50 = 0;
        for (double d : diffs) {
            sq += d * d;
            const double a = std::abs(d);
            over20 += a > 20.0;
            over30 += a > 30.0;
            over50 += a > 50.0;
        }
        const auto n = static_cast<double>(diffs.size());
        out.rmssd_ms = std::sqrt(sq / n);
        out.pcnn20_pct = 100.0 * static_cast<double>(over20) / n;
        out.pcnn30_pct = 100.0 * static_cast<double>(over30) / n;
        out.pcnn50_pct = 100.0 * static_cast<double>(over50) / n;
    }

    // 5-minute windows anchored at the first onset; the trailing partial window is dropped
    const double t0 = nn.onset_ms.front();
    const auto complete = static_cast<std::size_t>(std::floor((nn.onset_ms.back() - t0) / kShortTermWindowMs));
    std::vector<std::vector<double>> windows(complete);
    for (std::size_t k = 0; k < nn.size(); ++k) {
        const auto w = static_cast<std::size_t>(std::floor((nn.onset_ms[k] - t0) / kShortTermWindowMs));
        if (w < complete) windows[w].push_back(nn.intervals_ms[k]);
    }
    std::vector<double> means, sds;
    for (const auto& w : windows) {
        if (w.empty()) continue;
        means.push_back(mean(w));
        if (w.size() >= 2) sds.push_back(std::sqrt(variance(w, 1)));
    }
    if (means.size() >= 2) {
        out.sdann_ms = std::sqrt(variance(means, 1));
        if (!sds.empty()) out.sdnnidx_ms = mean(sds);
    }
    return out;
}

// ------------------------------------------------------------
// resampling
// ------------------------------------------------------------

/// Natural cubic spline through strictly increasing knots.
class CubicSpline {
public:
    CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        m_.assign(n, 0.0);
        if (n < 3) return;
        // tridiagonal system for second derivatives, natural ends
        std::vector<double> c(n, 0.0), d(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x_[i] - x_[i - 1];
            const double h1 = x_[i + 1] - x_[i];
            const double a = h0 / 6.0, b = (h0 + h1) / 3.0, cc = h1 / 6.0;
            const double rhs = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
            const double denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (rhs - a * d[i - 1]) / denom;
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m_[i] = d[i] - c[i] * m_[i + 1];
            if (i == 1) break;
        }
    }

    /// Evaluates at ascending query points in one pass.
    std::vector<double> sample(std::span<const double> t) const {
        std::vector<double> out(t.size());
        std::size_t seg = 0;
        for (std::size_t j = 0; j < t.size(); ++j) {
            while (seg + 2 < x_.size() && t[j] > x_[seg + 1]) ++seg;
            out[j] = eval(seg, t[j]);
        }
        return out;
    }

    double operator()(double t) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), t);
        std::size_t seg = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
        seg = std::min(seg, x_.size() - 2);
        return eval(seg, t);
    }

private:
    double eval(std::size_t i, double t) const {
        const double h = x_[i + 1] - x_[i];
        const double a = (x_[i + 1] - t) / h;
        const double b = (t - x_[i]) / h;
        return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
    }

    std::vector<double> x_, y_, m_;
};

/// Cubic-spline tachogram (interval value at its terminating beat's time)
/// sampled uniformly at cfg.resample_hz.
inline UniformSeries resample_tachogram(const NNSeries& nn, const SpectralConfig& cfg = {}) {
    if (nn.size() < 4) throw Error(ErrorCode::SpanTooShort, "resampling needs >= 4 NN intervals");
    std::vector<double> t(nn.size());
    for (std::size_t k = 0; k < nn.size(); ++k) t[k] = nn.onset_ms[k] / 1000.0;
    const double span = t.back() - t.front();
    if (span < cfg.window_s) throw Error(ErrorCode::SpanTooShort, "tachogram shorter than one spectral window");

    UniformSeries out;
    out.t0_s = t.front();
    out.fs_hz = cfg.resample_hz;
    const auto n = static_cast<std::size_t>(std::floor(span * cfg.resample_hz)) + 1;
    std::vector<double> q(n);
    for (std::size_t j = 0; j < n; ++j) q[j] = out.t0_s + static_cast<double>(j) / cfg.resample_hz;
    CubicSpline spline(std::move(t), nn.intervals_ms);
    out.values = spline.sample(q);
    return out;
}

// ------------------------------------------------------------
// Welch periodogram
// ------------------------------------------------------------

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// Owns one r2c plan and its buffers; the FFTW planner is not thread-safe.
class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n) {
        in_ = fftw_alloc_real(n);
        out_ = fftw_alloc_complex(n / 2 + 1);
        std::lock_guard lock(fftw_planner_mutex());
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
    }
    ~RealFft() {
        {
            std::lock_guard lock(fftw_planner_mutex());
            fftw_destroy_plan(plan_);
        }
        fftw_free(in_);
        fftw_free(out_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    double* input() { return in_; }
    void execute() { fftw_execute(plan_); }
    double power(std::size_t k) const { return out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1]; }

private:
    std::size_t n_;
    double* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan plan_ = nullptr;
};

inline void detrend_linear(std::span<double> y) {
    const auto n = static_cast<double>(y.size());
    const double tm = (n - 1.0) / 2.0;
    double ym = 0.0;
    for (double v : y) ym += v;
    ym /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double dt = static_cast<double>(i) - tm;
        sxy += dt * (y[i] - ym);
        sxx += dt * dt;
    }
    const double slope = sxx > 0 ? sxy / sxx : 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= ym + slope * (static_cast<double>(i) - tm);
}

/// Splits an NN series where consecutive onsets are further apart than max_gap_s.
inline std::vector<NNSeries> contiguous_pieces(const NNSeries& nn, double max_gap_s) {
    std::vector<NNSeries> pieces;
    for (std::size_t k = 0; k < nn.size(); ++k) {
        if (k == 0 || nn.onset_ms[k] - nn.onset_ms[k - 1] > max_gap_s * 1000.0) {
            pieces.emplace_back();
            pieces.back().recording_id = nn.recording_id;
            pieces.back().start_clock_s = nn.start_clock_s;
            pieces.back().segment = nn.segment;
        }
        pieces.back().intervals_ms.push_back(nn.intervals_ms[k]);
        pieces.back().onset_ms.push_back(nn.onset_ms[k]);
    }
    return pieces;
}

}  // namespace detail

/// One-sided Welch power spectral density in ms^2/Hz.
struct PowerSpectrum {
    double df_hz = 0.0;
    std::vector<double> psd;
    std::size_t windows = 0;

    double frequency(std::size_t k) const { return static_cast<double>(k) * df_hz; }

    /// Rectangle-rule integral over bins whose frequency lies in [lo, hi).
    double integrate(Band b) const {
        double s = 0.0;
        for (std::size_t k = 0; k < psd.size(); ++k)
            if (b.contains(frequency(k))) s += psd[k];
        return s * df_hz;
    }
};

inline PowerSpectrum welch_psd(const NNSeries& nn, const SpectralConfig& cfg = {}) {
    cfg.validate();
    const std::size_t nwin = cfg.window_samples();
    const std::size_t nfft = cfg.fft_size();
    const auto step = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                   std::lround(static_cast<double>(nwin) * (1.0 - cfg.overlap_fraction))));

    // periodic Hann
    std::vector<double> hann(nwin);
    double wss = 0.0;
    for (std::size_t i = 0; i < nwin; ++i) {
        hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(nwin));
        wss += hann[i] * hann[i];
    }

    PowerSpectrum out;
    out.df_hz = cfg.resample_hz / static_cast<double>(nfft);
    out.psd.assign(nfft / 2 + 1, 0.0);
    detail::RealFft fft(nfft);
    std::vector<double> seg(nwin);

    for (NNSeries& piece : detail::contiguous_pieces(nn, cfg.max_gap_s)) {
        if (piece.size() < 4 || (piece.onset_ms.back() - piece.onset_ms.front()) / 1000.0 < cfg.window_s) continue;
        // centring first keeps a constant tachogram exactly zero after detrending
        const double level = mean(piece.intervals_ms);
        for (double& v : piece.intervals_ms) v -= level;
        const UniformSeries u = resample_tachogram(piece, cfg);
        for (std::size_t start = 0; start + nwin <= u.values.size(); start += step) {
            std::copy_n(u.values.begin() + static_cast<std::ptrdiff_t>(start), nwin, seg.begin());
            detail::detrend_linear(seg);
            double* in = fft.input();
            for (std::size_t i = 0; i < nwin; ++i) in[i] = seg[i] * hann[i];
            std::fill(in + nwin, in + nfft, 0.0);
            fft.execute();
            for (std::size_t k = 0; k < out.psd.size(); ++k) {
                double p = fft.power(k) / (cfg.resample_hz * wss);
                if (k != 0 && !(nfft % 2 == 0 && k == nfft / 2)) p *= 2.0;
                out.psd[k] += p;
            }
            ++out.windows;
        }
    }
    if (out.windows == 0) throw Error(ErrorCode::SpanTooShort, "no complete spectral window in '" + nn.recording_id + "'");
    for (double& p : out.psd) p /= static_cast<double>(out.windows);
    return out;
}

inline FrequencyDomainIndexes band_powers(const NNSeries& nn, const SpectralConfig& cfg = {}) {
    const PowerSpectrum s = welch_psd(nn, cfg);
    FrequencyDomainIndexes out;
    out.vlf_ms2 = s.integrate(cfg.vlf);
    out.lf_ms2 = s.integrate(cfg.lf);
    out.hf_ms2 = s.integrate(cfg.hf);
    out.total_power_ms2 = s.integrate({cfg.vlf.lo_hz, cfg.hf.hi_hz});
    const double lfhf = out.lf_ms2 + out.hf_ms2;
    if (lfhf > 0) {
        out.lf_nu = 100.0 * out.lf_ms2 / lfhf;
        out.hf_nu = 100.0 - *out.lf_nu;
    }
    if (out.hf_ms2 > 0) out.lf_hf_ratio = out.lf_ms2 / out.hf_ms2;
    return out;
}

}  // namespace hrvbench
