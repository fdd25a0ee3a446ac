#pragma once

// Phenomenological 24 h RR generator: subject mean + circadian sinusoid +
// LF and HF tones + white noise, with Poisson VPCs followed by a scripted
// turbulence response.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hrvbench/common.hpp"
#include "hrvbench/signal_ingest.hpp"

namespace hrvbench {

enum class CohortLabel : std::uint8_t { Healthy = 0, MI = 1 };

inline const char* to_string(CohortLabel l) { return l == CohortLabel::MI ? "MI" : "Healthy"; }

inline std::optional<CohortLabel> cohort_label_from(std::string_view s) {
    if (s == "Healthy") return CohortLabel::Healthy;
    if (s == "MI") return CohortLabel::MI;
    return std::nullopt;
}

struct GeneratorParams {
    double mean_rr_ms = 800.0;
    double mean_rr_between_sd_ms = 0.0;
    double circadian_amplitude_ms = 0.0;
    double lf_mod_amplitude_ms = 0.0;
    double hf_mod_amplitude_ms = 0.0;
    double broadband_noise_sd_ms = 0.0;
    /// Between-subject coefficient of variation of the amplitudes above.
    double amplitude_between_cv = 0.0;
    double vpc_rate_per_hour = 0.0;
    double vpc_rate_between_cv = 0.0;
    double vpc_prematurity_fraction = 0.65;
    double turbulence_onset_pct = 0.0;
    double turbulence_onset_between_sd = 0.0;
    double turbulence_slope_ms_per_beat = 0.0;
    double turbulence_slope_between_sd = 0.0;
    double duration_h = 24.0;
    /// Recording start is drawn uniformly in [start_clock_min_s, start_clock_max_s].
    double start_clock_min_s = 0.0;
    double start_clock_max_s = 0.0;
    double lf_hz = 0.1;
    double hf_hz = 0.25;

    void validate() const {
        const bool amplitudes_ok = mean_rr_between_sd_ms >= 0 && circadian_amplitude_ms >= 0 &&
                                   lf_mod_amplitude_ms >= 0 && hf_mod_amplitude_ms >= 0 &&
                                   broadband_noise_sd_ms >= 0 && amplitude_between_cv >= 0 &&
                                   vpc_rate_per_hour >= 0 && vpc_rate_between_cv >= 0 &&
                                   turbulence_onset_between_sd >= 0 && turbulence_slope_between_sd >= 0;
        if (!amplitudes_ok) throw Error(ErrorCode::InvalidParams, "generator amplitudes must be >= 0");
        if (!(mean_rr_ms >= 500 && mean_rr_ms <= 1200))
            throw Error(ErrorCode::InvalidParams, "mean_rr_ms must lie in [500, 1200]");
        if (!(vpc_prematurity_fraction > 0 && vpc_prematurity_fraction < 1))
            throw Error(ErrorCode::InvalidParams, "vpc_prematurity_fraction must lie in (0, 1)");
        if (!(duration_h > 0) || start_clock_min_s < 0 || start_clock_max_s < start_clock_min_s ||
            start_clock_max_s >= kSecondsPerDay)
            throw Error(ErrorCode::InvalidParams, "bad duration or start clock range");
    }

    /// Group defaults: autonomic modulation reduced after infarction.
    static GeneratorParams healthy_defaults() {
        GeneratorParams p;
        p.mean_rr_ms = 790.0;
        p.mean_rr_between_sd_ms = 90.0;
        p.circadian_amplitude_ms = 210.0;
        p.lf_mod_amplitude_ms = 45.0;
        p.hf_mod_amplitude_ms = 30.0;
        p.broadband_noise_sd_ms = 17.0;
        p.amplitude_between_cv = 0.35;
        p.vpc_rate_per_hour = 0.3;
        p.vpc_rate_between_cv = 2.0;
        p.turbulence_onset_pct = -1.0;
        p.turbulence_onset_between_sd = 1.5;
        p.turbulence_slope_ms_per_beat = 6.0;
        p.turbulence_slope_between_sd = 3.0;
        p.start_clock_min_s = 8 * 3600.0;
        p.start_clock_max_s = 11 * 3600.0;
        return p;
    }

    static GeneratorParams mi_defaults() {
        GeneratorParams p = healthy_defaults();
        p.mean_rr_ms = 870.0;
        p.mean_rr_between_sd_ms = 110.0;
        p.circadian_amplitude_ms = 95.0;
        p.lf_mod_amplitude_ms = 30.0;
        p.hf_mod_amplitude_ms = 20.0;
        p.broadband_noise_sd_ms = 12.0;
        p.vpc_rate_per_hour = 1.5;
        p.turbulence_onset_pct = 0.5;
        p.turbulence_slope_ms_per_beat = 3.5;
        p.turbulence_slope_between_sd = 2.0;
        return p;
    }
};

struct CohortParams {
    std::size_t n_healthy = 128;
    std::size_t n_mi = 90;
    std::uint64_t seed = 42;
    GeneratorParams healthy = GeneratorParams::healthy_defaults();
    GeneratorParams mi = GeneratorParams::mi_defaults();

    void validate() const {
        healthy.validate();
        mi.validate();
    }
};

/// Per-subject realisation of a group's parameters.
struct SubjectParams {
    double mean_rr_ms;
    double circadian_amplitude_ms;
    double lf_amplitude_ms;
    double hf_amplitude_ms;
    double noise_sd_ms;
    double vpc_rate_per_hour;
    double turbulence_onset_pct;
    double turbulence_slope_ms_per_beat;
    double start_clock_s;
    double lf_phase;
    double hf_phase;
};

namespace detail {

inline double lognormal_scale(Rng& rng, double cv) {
    if (cv <= 0) return 1.0;
    const double s2 = std::log1p(cv * cv);
    return std::exp(std::sqrt(s2) * rng.normal() - 0.5 * s2);
}

inline constexpr std::size_t kScriptedPostBeats = 15;
inline constexpr std::size_t kTurbulenceRampBeats = 8;
/// Largest lf + hf + 3 noise-SD swing, as a fraction of the subject's mean RR.
inline constexpr double kMaxShortTermSwing = 0.15;

}  // namespace detail

inline SubjectParams draw_subject(const GeneratorParams& p, Rng& rng) {
    SubjectParams s{};
    s.mean_rr_ms = std::clamp(p.mean_rr_ms + p.mean_rr_between_sd_ms * rng.normal(), 500.0, 1200.0);
    // variability amplitudes are given at the group mean RR and scale with the subject's RR
    const double rr_scale = s.mean_rr_ms / p.mean_rr_ms;
    s.circadian_amplitude_ms = rr_scale * p.circadian_amplitude_ms * detail::lognormal_scale(rng, p.amplitude_between_cv);
    s.lf_amplitude_ms = rr_scale * p.lf_mod_amplitude_ms * detail::lognormal_scale(rng, p.amplitude_between_cv);
    s.hf_amplitude_ms = rr_scale * p.hf_mod_amplitude_ms * detail::lognormal_scale(rng, p.amplitude_between_cv);
    s.noise_sd_ms = rr_scale * p.broadband_noise_sd_ms * detail::lognormal_scale(rng, p.amplitude_between_cv);
    // keep beat-to-beat swings within what artifact cleaning accepts as sinus rhythm
    const double swing = s.lf_amplitude_ms + s.hf_amplitude_ms + 3.0 * s.noise_sd_ms;
    const double max_swing = detail::kMaxShortTermSwing * s.mean_rr_ms;
    if (swing > max_swing) {
        const double shrink = max_swing / swing;
        s.lf_amplitude_ms *= shrink;
        s.hf_amplitude_ms *= shrink;
        s.noise_sd_ms *= shrink;
    }
    s.vpc_rate_per_hour = p.vpc_rate_per_hour * detail::lognormal_scale(rng, p.vpc_rate_between_cv);
    s.turbulence_onset_pct = p.turbulence_onset_pct + p.turbulence_onset_between_sd * rng.normal();
    s.turbulence_slope_ms_per_beat =
        std::max(0.0, p.turbulence_slope_ms_per_beat + p.turbulence_slope_between_sd * rng.normal());
    s.start_clock_s = std::floor(rng.uniform(p.start_clock_min_s, p.start_clock_max_s + 1.0));
    s.start_clock_s = std::min(s.start_clock_s, p.start_clock_max_s);
    s.lf_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    s.hf_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return s;
}

/// One recording; RR values are rounded to whole milliseconds.
inline RRSeries generate_recording(const GeneratorParams& params, std::uint64_t subject_seed,
                                   std::string recording_id = "synthetic") {
    params.validate();
    Rng rng(subject_seed);
    const SubjectParams s = draw_subject(params, rng);

    RRSeries out;
    out.recording_id = std::move(recording_id);
    out.start_clock_s = s.start_clock_s;
    const double end_ms = params.duration_h * 3600.0 * 1000.0;
    out.beats.reserve(static_cast<std::size_t>(end_ms / (s.mean_rr_ms * 0.8)) + 16);

    const double two_pi = 2.0 * std::numbers::pi;
    auto baseline = [&](double t_ms) {
        const double t = t_ms / 1000.0;
        const double clock = clock_of(s.start_clock_s, t_ms);
        // longest intervals around 03:00
        const double circadian = s.circadian_amplitude_ms * std::cos(two_pi * (clock - 3.0 * 3600.0) / kSecondsPerDay);
        return s.mean_rr_ms + circadian + s.lf_amplitude_ms * std::sin(two_pi * params.lf_hz * t + s.lf_phase) +
               s.hf_amplitude_ms * std::sin(two_pi * params.hf_hz * t + s.hf_phase);
    };
    auto emit = [&](double onset, double rr, BeatLabel label) {
        rr = std::max(1.0, std::round(rr));
        out.beats.push_back({onset, rr, label});
        return onset + rr;
    };

    const double rate_per_ms = s.vpc_rate_per_hour / 3.6e6;
    double next_vpc = rate_per_ms > 0 ? rng.exponential(rate_per_ms) : std::numeric_limits<double>::infinity();
    double t = 0.0;
    while (t < end_ms) {
        const double rr = baseline(t) + s.noise_sd_ms * rng.normal();
        if (t < next_vpc) {
            t = emit(t, rr, BeatLabel::Normal);
            continue;
        }
        // premature beat, full compensatory pause, then the scripted turbulence response
        const double base = baseline(t);
        t = emit(t, base * params.vpc_prematurity_fraction, BeatLabel::Normal);
        t = emit(t, base * (2.0 - params.vpc_prematurity_fraction), BeatLabel::Ventricular);
        const double onset_offset = base * s.turbulence_onset_pct / 100.0;
        double offset = onset_offset;
        for (std::size_t k = 1; k <= detail::kScriptedPostBeats && t < end_ms; ++k) {
            if (k <= 2) offset = onset_offset;
            else if (k <= 2 + detail::kTurbulenceRampBeats) offset += s.turbulence_slope_ms_per_beat;
            else offset *= 0.6;
            t = emit(t, baseline(t) + offset + s.noise_sd_ms * rng.normal(), BeatLabel::Normal);
        }
        next_vpc = t + rng.exponential(rate_per_ms);
    }
    return out;
}

inline std::uint64_t subject_seed(std::uint64_t cohort_seed, CohortLabel group, std::size_t index) {
    return derive_seed(cohort_seed, {static_cast<std::uint64_t>(group) + 1, index});
}

inline std::string subject_id(CohortLabel group, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%04zu", group == CohortLabel::MI ? "mi" : "healthy", index + 1);
    return buf;
}

struct CohortMember {
    std::string recording_id;
    CohortLabel label;
    std::uint64_t seed;
};

/// Identity of every subject, healthy first; recordings are generated on demand.
inline std::vector<CohortMember> cohort_manifest(const CohortParams& params) {
    std::vector<CohortMember> out;
    out.reserve(params.n_healthy + params.n_mi);
    for (std::size_t i = 0; i < params.n_healthy; ++i)
        out.push_back({subject_id(CohortLabel::Healthy, i), CohortLabel::Healthy,
                       subject_seed(params.seed, CohortLabel::Healthy, i)});
    for (std::size_t i = 0; i < params.n_mi; ++i)
        out.push_back({subject_id(CohortLabel::MI, i), CohortLabel::MI, subject_seed(params.seed, CohortLabel::MI, i)});
    return out;
}

inline RRSeries generate_member(const CohortParams& params, const CohortMember& m) {
    return generate_recording(m.label == CohortLabel::MI ? params.mi : params.healthy, m.seed, m.recording_id);
}

inline std::vector<std::pair<RRSeries, CohortLabel>> generate_cohort(const CohortParams& params) {
    params.validate();
    std::vector<std::pair<RRSeries, CohortLabel>> out;
    for (const auto& m : cohort_manifest(params)) out.emplace_back(generate_member(params, m), m.label);
    return out;
}

}  // namespace hrvbench
