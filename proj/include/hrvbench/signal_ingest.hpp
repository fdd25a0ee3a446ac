#pragma once

// RR-interval recordings: parsing, NN filtering and clock segmentation.
//
// Interval convention: beat i carries rr_ms[i], the interval from beat i to
// beat i + 1, so onset_ms[i + 1] - onset_ms[i] == rr_ms[i]. An interval is
// attributed to (and clocked by) its terminating beat.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <deque>
#include <string>
#include <string_view>
#include <vector>

#include "hrvbench/common.hpp"

namespace hrvbench {

enum class BeatLabel : std::uint8_t { Normal, Ventricular, Artifact, Unknown };

inline char label_code(BeatLabel l) {
    switch (l) {
        case BeatLabel::Normal: return 'N';
        case BeatLabel::Ventricular: return 'V';
        case BeatLabel::Artifact: return 'A';
        case BeatLabel::Unknown: return 'U';
    }
    return 'U';
}

inline BeatLabel label_from_code(std::string_view s) {
    if (s == "N") return BeatLabel::Normal;
    if (s == "V") return BeatLabel::Ventricular;
    if (s == "A") return BeatLabel::Artifact;
    return BeatLabel::Unknown;
}

struct Beat {
    double onset_ms = 0.0;
    double rr_ms = 0.0;
    BeatLabel label = BeatLabel::Normal;

    bool operator==(const Beat&) const = default;
};

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kFullDayMinHours = 20.0;

struct RRSeries {
    std::string recording_id;
    double start_clock_s = 0.0;  // seconds since midnight
    std::vector<Beat> beats;

    double duration_ms() const {
        if (beats.empty()) return 0.0;
        return beats.back().onset_ms + beats.back().rr_ms - beats.front().onset_ms;
    }

    /// Whether the recording covers enough signal to count as a 24 h Holter.
    bool is_full_day() const { return duration_ms() >= kFullDayMinHours * 3600.0 * 1000.0; }

    bool operator==(const RRSeries&) const = default;
};

enum class Segment : std::uint8_t { Full24h, Day, Night };

inline const char* to_string(Segment s) {
    switch (s) {
        case Segment::Full24h: return "24h";
        case Segment::Day: return "day";
        case Segment::Night: return "night";
    }
    return "?";
}

struct NNSeries {
    std::string recording_id;
    double start_clock_s = 0.0;
    std::vector<double> intervals_ms;
    std::vector<double> onset_ms;  // onset of each interval's terminating beat
    Segment segment = Segment::Full24h;

    std::size_t size() const { return intervals_ms.size(); }
};

struct FilterConfig {
    double min_nn_ms = 300.0;
    double max_nn_ms = 2000.0;
    double relative_jump_fraction = 0.20;
    int median_window_beats = 11;

    void validate() const {
        if (!(min_nn_ms > 0 && min_nn_ms < max_nn_ms))
            throw Error(ErrorCode::InvalidParams, "filter bounds must satisfy 0 < min_nn_ms < max_nn_ms");
        if (!(relative_jump_fraction > 0 && relative_jump_fraction < 1))
            throw Error(ErrorCode::InvalidParams, "relative_jump_fraction must lie in (0, 1)");
        if (median_window_beats < 3 || median_window_beats % 2 == 0)
            throw Error(ErrorCode::InvalidParams, "median_window_beats must be odd and >= 3");
    }
};

struct SegmentSpec {
    double day_start_s = 8 * 3600.0;
    double day_end_s = 20 * 3600.0;

    void validate() const {
        if (day_start_s == day_end_s) throw Error(ErrorCode::InvalidParams, "day_start must differ from day_end");
    }

    bool is_day(double clock_s) const {
        if (day_start_s < day_end_s) return clock_s >= day_start_s && clock_s < day_end_s;
        return clock_s >= day_start_s || clock_s < day_end_s;
    }
};

// ------------------------------------------------------------
// clock helpers
// ------------------------------------------------------------

inline std::optional<double> parse_clock(std::string_view s) {
    int h = 0, m = 0, sec = 0;
    if (s.size() != 8 || s[2] != ':' || s[5] != ':') return std::nullopt;
    auto num = [&](std::size_t pos, int& out) {
        auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + 2, out);
        return ec == std::errc{} && p == s.data() + pos + 2;
    };
    if (!num(0, h) || !num(3, m) || !num(6, sec)) return std::nullopt;
    if (h > 23 || m > 59 || sec > 59) return std::nullopt;
    return h * 3600.0 + m * 60.0 + sec;
}

inline std::string format_clock(double seconds) {
    auto total = static_cast<long>(std::floor(seconds));
    total = ((total % 86400) + 86400) % 86400;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02ld:%02ld:%02ld", total / 3600, (total / 60) % 60, total % 60);
    return buf;
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

// ------------------------------------------------------------
// RR-CSV
// ------------------------------------------------------------

inline constexpr std::string_view kRrCsvHeader = "onset_ms,rr_ms,label";

namespace detail {

inline bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Parses an RR-CSV document. Line numbers in errors are 1-based.
inline RRSeries parse_rr_csv(std::string_view text) {
    RRSeries out;
    bool header_seen = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        if (!header_seen) {
            if (line.front() == '#') {
                line.remove_prefix(1);
                while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
                if (line.starts_with("start_clock=")) {
                    auto clock = parse_clock(line.substr(12));
                    if (!clock) throw Error(ErrorCode::MalformedLine, "bad start_clock", line_no);
                    out.start_clock_s = *clock;
                } else if (line.starts_with("recording_id=")) {
                    out.recording_id = std::string(line.substr(13));
                }
                continue;
            }
            if (line != kRrCsvHeader)
                throw Error(ErrorCode::MalformedLine, "expected header 'onset_ms,rr_ms,label'", line_no);
            header_seen = true;
            continue;
        }

        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos)
            throw Error(ErrorCode::MalformedLine, "expected 3 fields", line_no);
        Beat b;
        if (!detail::parse_double(line.substr(0, c1), b.onset_ms))
            throw Error(ErrorCode::MalformedLine, "non-numeric onset", line_no);
        if (!detail::parse_double(line.substr(c1 + 1, c2 - c1 - 1), b.rr_ms) || b.rr_ms <= 0)
            throw Error(ErrorCode::MalformedLine, "rr must be a positive number", line_no);
        b.label = label_from_code(line.substr(c2 + 1));

        if (!out.beats.empty()) {
            const Beat& prev = out.beats.back();
            if (b.onset_ms <= prev.onset_ms)
                throw Error(ErrorCode::NonMonotonicTime, "onset does not increase", line_no);
            if (std::abs(b.onset_ms - prev.onset_ms - prev.rr_ms) > 1.0)
                throw Error(ErrorCode::MalformedLine, "onset inconsistent with previous rr", line_no);
        }
        out.beats.push_back(b);
    }
    if (!header_seen) throw Error(ErrorCode::MalformedLine, "missing header", line_no == 0 ? 1 : line_no);
    if (out.beats.empty()) throw Error(ErrorCode::EmptyRecording, "no beats");
    return out;
}

inline void append_rr_rows(std::string& out, const RRSeries& series) {
    for (const Beat& b : series.beats) {
        out += format_number(b.onset_ms);
        out += ',';
        out += format_number(b.rr_ms);
        out += ',';
        out += label_code(b.label);
        out += '\n';
    }
}

inline std::string serialize_rr_csv(const RRSeries& series) {
    std::string out;
    out.reserve(series.beats.size() * 16 + 96);
    if (!series.recording_id.empty()) out += "# recording_id=" + series.recording_id + "\n";
    out += "# start_clock=" + format_clock(series.start_clock_s) + "\n";
    out += kRrCsvHeader;
    out += '\n';
    append_rr_rows(out, series);
    return out;
}

// ------------------------------------------------------------
// NN filtering
// ------------------------------------------------------------

namespace detail {

inline double window_median(const std::deque<double>& w) {
    std::vector<double> v(w.begin(), w.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    if (v.size() % 2 == 1) return v[mid];
    const double hi = v[mid];
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Keeps Normal-to-Normal intervals that pass the range rule and lie within
/// the relative-jump band of the running median of recently accepted ones.
inline NNSeries filter_to_nn(const RRSeries& series, const FilterConfig& cfg = {}) {
    cfg.validate();
    if (series.beats.empty()) throw Error(ErrorCode::EmptyRecording, "no beats");

    NNSeries nn;
    nn.recording_id = series.recording_id;
    nn.start_clock_s = series.start_clock_s;
    nn.intervals_ms.reserve(series.beats.size());
    nn.onset_ms.reserve(series.beats.size());

    std::deque<double> recent;
    const auto window = static_cast<std::size_t>(cfg.median_window_beats);
    for (std::size_t i = 0; i + 1 < series.beats.size(); ++i) {
        const Beat& from = series.beats[i];
        const Beat& to = series.beats[i + 1];
        if (from.label != BeatLabel::Normal || to.label != BeatLabel::Normal) continue;
        const double x = from.rr_ms;
        if (x < cfg.min_nn_ms || x > cfg.max_nn_ms) continue;
        if (!recent.empty()) {
            const double med = detail::window_median(recent);
            if (std::abs(x - med) > cfg.relative_jump_fraction * med) continue;
        }
        nn.intervals_ms.push_back(x);
        nn.onset_ms.push_back(to.onset_ms);
        recent.push_back(x);
        if (recent.size() > window) recent.pop_front();
    }
    if (nn.intervals_ms.size() < 2)
        throw Error(ErrorCode::TooFewBeats, "fewer than 2 accepted NN intervals in '" + series.recording_id + "'");
    return nn;
}

/// Rebuilds an all-Normal RR series from NN intervals; gaps between
/// non-contiguous intervals are bridged by an Unknown-labelled beat so no
/// spurious NN interval appears.
inline RRSeries nn_to_rr(const NNSeries& nn) {
    RRSeries rr;
    rr.recording_id = nn.recording_id;
    rr.start_clock_s = nn.start_clock_s;
    for (std::size_t k = 0; k < nn.size(); ++k) {
        const double x = nn.intervals_ms[k];
        const double start = nn.onset_ms[k] - x;
        if (rr.beats.empty()) {
            rr.beats.push_back({start, x, BeatLabel::Normal});
        } else {
            Beat& last = rr.beats.back();
            const double gap = start - last.onset_ms;
            if (std::abs(gap) <= 1e-6) {
                last.rr_ms = x;
            } else {
                const double half = gap / 2.0;
                last.rr_ms = half;
                rr.beats.push_back({last.onset_ms + half, gap - half, BeatLabel::Unknown});
                rr.beats.push_back({start, x, BeatLabel::Normal});
            }
        }
        // terminating beat; its rr is provisional until the next interval arrives
        rr.beats.push_back({nn.onset_ms[k], x, BeatLabel::Normal});
    }
    return rr;
}

// ------------------------------------------------------------
// segmentation
// ------------------------------------------------------------

struct SegmentedNN {
    NNSeries full;
    NNSeries day;
    NNSeries night;

    const NNSeries& get(Segment s) const {
        switch (s) {
            case Segment::Day: return day;
            case Segment::Night: return night;
            default: return full;
        }
    }
};

inline double clock_of(double start_clock_s, double onset_ms) {
    return std::fmod(start_clock_s + onset_ms / 1000.0, kSecondsPerDay);
}

inline SegmentedNN segment(const NNSeries& series, const SegmentSpec& spec = {}) {
    spec.validate();
    SegmentedNN out;
    out.full = series;
    out.full.segment = Segment::Full24h;
    for (auto* part : {&out.day, &out.night}) {
        part->recording_id = series.recording_id;
        part->start_clock_s = series.start_clock_s;
    }
    out.day.segment = Segment::Day;
    out.night.segment = Segment::Night;
    for (std::size_t k = 0; k < series.size(); ++k) {
        NNSeries& dst = spec.is_day(clock_of(series.start_clock_s, series.onset_ms[k])) ? out.day : out.night;
        dst.intervals_ms.push_back(series.intervals_ms[k]);
        dst.onset_ms.push_back(series.onset_ms[k]);
    }
    return out;
}

}  // namespace hrvbench
