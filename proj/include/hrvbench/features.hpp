#pragma once

// Index panel per (recording, segment) and the features CSV that carries it
// between extraction, benchmarking and statistics.

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hrvbench/common.hpp"
#include "hrvbench/hrv_linear.hpp"
#include "hrvbench/hrv_nonlinear.hpp"
#include "hrvbench/ml/feature_matrix.hpp"
#include "hrvbench/signal_ingest.hpp"
#include "hrvbench/synth_cohort.hpp"

namespace hrvbench {

inline constexpr std::array<std::string_view, 28> kIndexColumns = {
    "mean_rr", "mean_hr", "pcnn20", "pcnn30",  "pcnn50",  "sdnn",   "rmssd",  "sdann",     "sdnnidx", "total_power",
    "vlf",     "lf",      "hf",     "lf_nu",   "hf_nu",   "lf_hf",  "centroid", "sd1",     "sd2",     "sd1_sd2",
    "sd1_nu",  "sd2_nu",  "lle",    "vpc_count", "to",    "ts",     "ac",     "dc",
};

inline std::string features_csv_header() {
    std::string h = "recording_id,label,segment";
    for (auto c : kIndexColumns) {
        h += ',';
        h += c;
    }
    return h;
}

struct ExtractConfig {
    FilterConfig filter;
    SegmentSpec segments;
    SpectralConfig spectral;
    LyapunovConfig lyapunov;
    TurbulenceConfig turbulence;
    std::size_t prsa_window = 2;
};

struct FeatureRow {
    std::string recording_id;
    std::optional<CohortLabel> label;
    Segment segment = Segment::Full24h;
    std::vector<std::optional<double>> values;  // aligned with FeatureTable::columns
};

struct FeatureTable {
    std::vector<std::string> columns;
    std::vector<FeatureRow> rows;

    std::optional<std::size_t> column(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        return std::nullopt;
    }
};

inline std::vector<std::string> index_column_names() { return {kIndexColumns.begin(), kIndexColumns.end()}; }

namespace detail {

/// Runs one index computation; domain errors (too short, no anchors, ...)
/// and non-finite results leave the value absent.
template <class Fn>
void attempt(Fn&& fn) {
    try {
        fn();
    } catch (const Error&) {
    }
}

inline std::optional<double> finite(std::optional<double> v) {
    if (v && !std::isfinite(*v)) return std::nullopt;
    return v;
}

}  // namespace detail

/// Three rows (24h, day, night) for one recording.
inline std::vector<FeatureRow> extract_recording(const RRSeries& rr, std::optional<CohortLabel> label,
                                                 const ExtractConfig& cfg = {}) {
    const NNSeries nn = filter_to_nn(rr, cfg.filter);
    const SegmentedNN parts = segment(nn, cfg.segments);
    std::vector<FeatureRow> out;
    for (Segment seg : {Segment::Full24h, Segment::Day, Segment::Night}) {
        const NNSeries& s = parts.get(seg);
        std::map<std::string_view, std::optional<double>> v;
        if (s.size() > 0) {
            detail::attempt([&] {
                const auto t = time_domain(s);
                v["mean_rr"] = t.mean_rr_ms;
                v["mean_hr"] = t.mean_hr_bpm;
                v["pcnn20"] = t.pcnn20_pct;
                v["pcnn30"] = t.pcnn30_pct;
                v["pcnn50"] = t.pcnn50_pct;
                v["sdnn"] = t.sdnn_ms;
                v["rmssd"] = t.rmssd_ms;
                v["sdann"] = t.sdann_ms;
                v["sdnnidx"] = t.sdnnidx_ms;
            });
            detail::attempt([&] {
                const auto f = band_powers(s, cfg.spectral);
                v["total_power"] = f.total_power_ms2;
                v["vlf"] = f.vlf_ms2;
                v["lf"] = f.lf_ms2;
                v["hf"] = f.hf_ms2;
                v["lf_nu"] = f.lf_nu;
                v["hf_nu"] = f.hf_nu;
                v["lf_hf"] = f.lf_hf_ratio;
            });
            detail::attempt([&] {
                const auto p = poincare(s);
                v["centroid"] = p.centroid_ms;
                v["sd1"] = p.sd1_ms;
                v["sd2"] = p.sd2_ms;
                v["sd1_sd2"] = p.sd1_sd2_ratio;
                v["sd1_nu"] = p.sd1_nu;
                v["sd2_nu"] = p.sd2_nu;
            });
            detail::attempt([&] { v["lle"] = lyapunov(s, cfg.lyapunov); });
            detail::attempt([&] {
                const auto p = prsa_indexes(s, cfg.prsa_window);
                v["ac"] = p.acceleration_capacity_ms;
                v["dc"] = p.deceleration_capacity_ms;
            });
        }
        std::function<bool(double)> in_seg;
        if (seg == Segment::Day) in_seg = [&](double c) { return cfg.segments.is_day(c); };
        if (seg == Segment::Night) in_seg = [&](double c) { return !cfg.segments.is_day(c); };
        const auto t = turbulence(rr, cfg.turbulence, in_seg);
        v["vpc_count"] = static_cast<double>(t.vpc_count);
        v["to"] = t.turbulence_onset_pct;
        v["ts"] = t.turbulence_slope_ms_per_beat;

        FeatureRow row{rr.recording_id, label, seg, {}};
        for (auto c : kIndexColumns) row.values.push_back(detail::finite(v[c]));
        out.push_back(std::move(row));
    }
    return out;
}

// ------------------------------------------------------------
// CSV
// ------------------------------------------------------------

inline std::optional<Segment> segment_from(std::string_view s) {
    if (s == "24h") return Segment::Full24h;
    if (s == "day") return Segment::Day;
    if (s == "night") return Segment::Night;
    return std::nullopt;
}

inline void append_feature_rows(std::string& out, const std::vector<FeatureRow>& rows) {
    for (const auto& r : rows) {
        if (r.recording_id.find_first_of(",\n\r") != std::string::npos)
            throw Error(ErrorCode::InvalidParams, "recording id '" + r.recording_id + "' contains a separator");
        out += r.recording_id;
        out += ',';
        if (r.label) out += to_string(*r.label);
        out += ',';
        out += to_string(r.segment);
        for (const auto& v : r.values) {
            out += ',';
            out += format_g6(v);
        }
        out += '\n';
    }
}

inline std::string serialize_features_csv(const FeatureTable& t) {
    std::string out = "recording_id,label,segment";
    for (const auto& c : t.columns) out += ',' + c;
    out += '\n';
    append_feature_rows(out, t.rows);
    return out;
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> f;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        f.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return f;
}

}  // namespace detail

/// Reads a features CSV. `required` lists index columns that must be
/// present; id, label and segment columns are always required.
inline FeatureTable parse_features_csv(std::string_view text, const std::vector<std::string>& required = {}) {
    FeatureTable t;
    std::size_t line_no = 0, pos = 0;
    std::optional<std::size_t> id_col, label_col, seg_col;
    std::vector<std::size_t> value_cols;
    bool header_seen = false;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const auto fields = detail::split_commas(line);
        if (!header_seen) {
            header_seen = true;
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (fields[i] == "recording_id") id_col = i;
                else if (fields[i] == "label") label_col = i;
                else if (fields[i] == "segment") seg_col = i;
                else {
                    t.columns.emplace_back(fields[i]);
                    value_cols.push_back(i);
                }
            }
            for (auto [col, name] : {std::pair{id_col, "recording_id"}, {label_col, "label"}, {seg_col, "segment"}})
                if (!col) throw Error(ErrorCode::Schema, std::string("features CSV lacks the '") + name + "' column", line_no);
            for (const auto& r : required)
                if (!t.column(r)) throw Error(ErrorCode::Schema, "features CSV lacks the '" + r + "' column", line_no);
            continue;
        }
        if (fields.size() != value_cols.size() + 3)
            throw Error(ErrorCode::MalformedLine, "expected " + std::to_string(value_cols.size() + 3) + " fields", line_no);
        FeatureRow row;
        row.recording_id = std::string(fields[*id_col]);
        if (!fields[*label_col].empty()) {
            row.label = cohort_label_from(fields[*label_col]);
            if (!row.label) throw Error(ErrorCode::MalformedLine, "unknown label '" + std::string(fields[*label_col]) + "'", line_no);
        }
        const auto seg = segment_from(fields[*seg_col]);
        if (!seg) throw Error(ErrorCode::MalformedLine, "unknown segment '" + std::string(fields[*seg_col]) + "'", line_no);
        row.segment = *seg;
        for (auto c : value_cols) {
            if (fields[c].empty()) {
                row.values.emplace_back();
                continue;
            }
            double v;
            if (!detail::parse_double(fields[c], v))
                throw Error(ErrorCode::MalformedLine, "non-numeric value '" + std::string(fields[c]) + "'", line_no);
            row.values.emplace_back(std::isfinite(v) ? std::optional(v) : std::nullopt);
        }
        t.rows.push_back(std::move(row));
    }
    if (!header_seen) throw Error(ErrorCode::Schema, "features CSV is empty");
    return t;
}

/// Labelled rows of one segment as a model-ready matrix. Absent values are
/// filled with the column median over all rows of that segment (labels are
/// not consulted).
inline ml::FeatureMatrix to_feature_matrix(const FeatureTable& t, Segment seg, const std::vector<std::string>& columns) {
    std::vector<std::size_t> idx;
    for (const auto& c : columns) {
        const auto i = t.column(c);
        if (!i) throw Error(ErrorCode::Schema, "features table lacks the '" + c + "' column");
        idx.push_back(*i);
    }
    std::vector<const FeatureRow*> rows;
    for (const auto& r : t.rows)
        if (r.segment == seg && r.label) rows.push_back(&r);

    std::vector<double> fill(idx.size(), 0.0);
    for (std::size_t j = 0; j < idx.size(); ++j) {
        std::vector<double> present;
        for (const auto* r : rows)
            if (r->values[idx[j]]) present.push_back(*r->values[idx[j]]);
        if (present.empty()) continue;
        std::sort(present.begin(), present.end());
        const auto m = present.size();
        fill[j] = m % 2 ? present[m / 2] : (present[m / 2 - 1] + present[m / 2]) / 2.0;
    }
    ml::FeatureMatrix x(columns);
    std::vector<double> buf(idx.size());
    for (const auto* r : rows) {
        for (std::size_t j = 0; j < idx.size(); ++j) buf[j] = r->values[idx[j]].value_or(fill[j]);
        x.add_row(r->recording_id, buf, static_cast<int>(*r->label));
    }
    return x;
}

}  // namespace hrvbench
