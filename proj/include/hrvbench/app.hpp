#pragma once

// Command implementations behind the hrvbench tool: synth, extract, bench,
// stats, plus single-model train/score. Data goes to files, logs to stderr.

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hrvbench/common.hpp"
#include "hrvbench/eval/group_stats.hpp"
#include "hrvbench/eval/protocol.hpp"
#include "hrvbench/features.hpp"
#include "hrvbench/ml/classifiers.hpp"
#include "hrvbench/synth_cohort.hpp"

namespace hrvbench {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GeneratorParams, mean_rr_ms, mean_rr_between_sd_ms, circadian_amplitude_ms,
                                                lf_mod_amplitude_ms, hf_mod_amplitude_ms, broadband_noise_sd_ms,
                                                amplitude_between_cv, vpc_rate_per_hour, vpc_rate_between_cv,
                                                vpc_prematurity_fraction, turbulence_onset_pct,
                                                turbulence_onset_between_sd, turbulence_slope_ms_per_beat,
                                                turbulence_slope_between_sd, duration_h, start_clock_min_s,
                                                start_clock_max_s, lf_hz, hf_hz)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(FilterConfig, min_nn_ms, max_nn_ms, relative_jump_fraction,
                                                median_window_beats)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SegmentSpec, day_start_s, day_end_s)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Band, lo_hz, hi_hz)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SpectralConfig, resample_hz, window_s, overlap_fraction, vlf, lf, hf,
                                                max_gap_s)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(LyapunovConfig, embedding_dim, delay_samples, theiler_window,
                                                fit_first_step, fit_last_step, max_points, min_points)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TurbulenceConfig, max_prematurity, min_pause, pre_sinus_intervals,
                                                post_sinus_intervals, reference_intervals, slope_run)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ExtractConfig, filter, segments, spectral, lyapunov, turbulence,
                                                prsa_window)

namespace eval {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EvalProtocol, holdout_fraction, cv_folds, stratified,
                                                decision_threshold)
}

namespace app {

using json = nlohmann::json;

// ------------------------------------------------------------
// configuration
// ------------------------------------------------------------

struct SynthSection {
    std::size_t healthy = 128;
    std::size_t mi = 90;
    GeneratorParams healthy_params = GeneratorParams::healthy_defaults();
    GeneratorParams mi_params = GeneratorParams::mi_defaults();
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SynthSection, healthy, mi, healthy_params, mi_params)

struct ExtractSection {
    std::string input = "cohort";
    ExtractConfig config;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ExtractSection, input, config)

inline std::vector<std::string> all_set_keys() {
    std::vector<std::string> k;
    for (const auto& s : eval::standard_feature_sets()) k.push_back(s.key());
    return k;
}

inline std::vector<std::string> all_model_keys() {
    std::vector<std::string> k;
    for (auto f : ml::kAllFamilies) k.emplace_back(ml::family_key(f));
    return k;
}

struct BenchSection {
    std::string features = "features/features.csv";
    eval::EvalProtocol protocol;
    std::vector<std::string> sets = all_set_keys();
    std::vector<std::string> models = all_model_keys();
    std::map<std::string, ml::Hyperparameters> hyperparameters;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BenchSection, features, protocol, sets, models, hyperparameters)

struct StatsSection {
    std::string features = "features/features.csv";
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(StatsSection, features)

struct RunConfig {
    std::uint64_t seed = 42;
    std::size_t jobs = 1;
    std::string out = "out";
    SynthSection synth;
    ExtractSection extract;
    BenchSection bench;
    StatsSection stats;

    void validate() const {
        if (jobs == 0) throw Error(ErrorCode::InvalidParams, "--jobs must be >= 1");
        synth.healthy_params.validate();
        synth.mi_params.validate();
        extract.config.filter.validate();
        extract.config.segments.validate();
        extract.config.spectral.validate();
        extract.config.lyapunov.validate();
        bench.protocol.validate();
        const auto known_sets = all_set_keys();
        for (const auto& s : bench.sets)
            if (std::find(known_sets.begin(), known_sets.end(), s) == known_sets.end())
                throw Error(ErrorCode::InvalidParams, "unknown feature set '" + s + "'");
        for (const auto& m : bench.models)
            if (!ml::family_from_key(m)) throw Error(ErrorCode::InvalidParams, "unknown model '" + m + "'");
        for (const auto& [m, h] : bench.hyperparameters)
            if (!ml::family_from_key(m)) throw Error(ErrorCode::InvalidParams, "hyperparameters for unknown model '" + m + "'");
    }
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RunConfig, seed, jobs, out, synth, extract, bench, stats)

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path.string() + "'");
    try {
        // overlay onto the defaults so partial nested objects keep the remaining defaults
        json merged = RunConfig{};
        merged.merge_patch(json::parse(in));
        return merged.get<RunConfig>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidParams, "config '" + path.string() + "': " + e.what());
    }
}

// ------------------------------------------------------------
// io helpers
// ------------------------------------------------------------

inline void log(std::string_view level, std::string_view msg) {
    std::cerr << "hrvbench: " << level << ": " << msg << '\n';
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view content) {
    std::error_code ec;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + p.string() + "'");
    out << content;
    if (!out) throw Error(ErrorCode::Io, "write failed for '" + p.string() + "'");
}

inline void echo_config(const RunConfig& cfg, std::string_view command) {
    json j = cfg;
    j["command"] = command;
    write_file(std::filesystem::path(cfg.out) / "config.json", j.dump(2) + "\n");
}

/// 1 for problems with the request or its inputs, 2 for everything else.
inline int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidParams:
        case ErrorCode::Schema:
        case ErrorCode::TooSmall:
        case ErrorCode::MalformedLine:
        case ErrorCode::NonMonotonicTime:
        case ErrorCode::ArityMismatch: return 1;
        default: return 2;
    }
}

// ------------------------------------------------------------
// synth
// ------------------------------------------------------------

inline constexpr std::string_view kManifestHeader = "recording_id,label,seed";

inline void cmd_synth(const RunConfig& cfg) {
    CohortParams cp;
    cp.n_healthy = cfg.synth.healthy;
    cp.n_mi = cfg.synth.mi;
    cp.seed = cfg.seed;
    cp.healthy = cfg.synth.healthy_params;
    cp.mi = cfg.synth.mi_params;
    cp.validate();
    const std::filesystem::path out(cfg.out);
    std::filesystem::create_directories(out);

    const auto members = cohort_manifest(cp);
    if (members.empty()) log("warning", "cohort is empty; writing an empty manifest");
    parallel_for(members.size(), cfg.jobs, [&](std::size_t i) {
        const auto rr = generate_member(cp, members[i]);
        write_file(out / (members[i].recording_id + ".csv"), serialize_rr_csv(rr));
    });
    std::string manifest(kManifestHeader);
    manifest += '\n';
    for (const auto& m : members)
        manifest += m.recording_id + "," + to_string(m.label) + "," + std::to_string(m.seed) + "\n";
    write_file(out / "manifest.csv", manifest);
    echo_config(cfg, "synth");
    log("info", "wrote " + std::to_string(members.size()) + " recordings to " + out.string());
}

// ------------------------------------------------------------
// extract
// ------------------------------------------------------------

inline std::map<std::string, CohortLabel> read_manifest(const std::filesystem::path& p) {
    std::map<std::string, CohortLabel> labels;
    std::istringstream in(read_file(p));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line_no == 1) continue;
        const auto f = detail::split_commas(line);
        if (f.size() < 2) throw Error(ErrorCode::MalformedLine, p.string() + ": expected recording_id,label,...", line_no);
        const auto l = cohort_label_from(f[1]);
        if (!l) throw Error(ErrorCode::MalformedLine, p.string() + ": unknown label '" + std::string(f[1]) + "'", line_no);
        labels[std::string(f[0])] = *l;
    }
    return labels;
}

/// Returns the number of recordings extracted.
inline std::size_t cmd_extract(const RunConfig& cfg) {
    const std::filesystem::path in(cfg.extract.input);
    if (!std::filesystem::is_directory(in)) throw Error(ErrorCode::Io, "input directory '" + in.string() + "' not found");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(in))
        if (e.is_regular_file() && e.path().extension() == ".csv" && e.path().filename() != "manifest.csv")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());

    std::map<std::string, CohortLabel> labels;
    if (std::filesystem::exists(in / "manifest.csv")) labels = read_manifest(in / "manifest.csv");
    else log("warning", "no manifest.csv in " + in.string() + "; rows will be unlabelled");

    std::vector<std::vector<FeatureRow>> rows(files.size());
    std::vector<std::string> failures(files.size());
    parallel_for(files.size(), cfg.jobs, [&](std::size_t i) {
        try {
            const RRSeries rr = parse_rr_csv(read_file(files[i]));
            RRSeries named = rr;
            if (named.recording_id.empty()) named.recording_id = files[i].stem().string();
            std::optional<CohortLabel> label;
            if (auto it = labels.find(named.recording_id); it != labels.end()) label = it->second;
            rows[i] = extract_recording(named, label, cfg.extract.config);
        } catch (const Error& e) {
            failures[i] = files[i].string() + (e.line() ? ":" + std::to_string(*e.line()) : "") + ": " + e.what();
        }
    });

    FeatureTable table;
    table.columns = index_column_names();
    std::size_t ok = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (!failures[i].empty()) {
            log("error", "skipped " + failures[i]);
            continue;
        }
        if (!labels.empty() && !rows[i].empty() && !rows[i].front().label)
            log("warning", files[i].string() + ": recording not in manifest; label left empty");
        ++ok;
        for (auto& r : rows[i]) table.rows.push_back(std::move(r));
    }
    if (!files.empty() && ok == 0) throw Error(ErrorCode::Io, "no recording could be processed");
    const std::filesystem::path out(cfg.out);
    write_file(out / "features.csv", serialize_features_csv(table));
    echo_config(cfg, "extract");
    log("info", "extracted " + std::to_string(ok) + " of " + std::to_string(files.size()) + " recordings");
    return ok;
}

// ------------------------------------------------------------
// bench
// ------------------------------------------------------------

inline std::string metric_header() { return "accuracy,kappa,auroc,sensitivity,specificity"; }

inline std::string metric_fields(const eval::MetricBlock& m) {
    return format_g6(m.accuracy) + "," + format_g6(m.kappa) + "," + format_g6(m.auroc) + "," + format_g6(m.sensitivity) +
           "," + format_g6(m.specificity);
}

/// Sample SD of each metric across the folds that define it.
inline std::string fold_sd_fields(const eval::CvResult& cv) {
    std::array<std::vector<double>, 5> v;
    for (const auto& f : cv.per_fold) {
        if (!f) continue;
        v[0].push_back(f->accuracy);
        if (f->kappa) v[1].push_back(*f->kappa);
        v[2].push_back(f->auroc);
        v[3].push_back(f->sensitivity);
        v[4].push_back(f->specificity);
    }
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        if (v[i].size() >= 2) s += format_g6(std::sqrt(variance(v[i], 1)));
    }
    return s;
}

struct BenchReport {
    std::vector<eval::FeatureSetDef> sets;
    std::vector<ml::ModelSpec> specs;
    std::vector<eval::BenchmarkCell> cells;
};

inline eval::FeatureSetDef set_by_key(const std::string& key) {
    for (auto& s : eval::standard_feature_sets())
        if (s.key() == key) return s;
    throw Error(ErrorCode::InvalidParams, "unknown feature set '" + key + "'");
}

inline BenchReport cmd_bench(const RunConfig& cfg) {
    eval::EvalProtocol protocol = cfg.bench.protocol;
    protocol.split_seed = cfg.seed;
    protocol.validate();

    BenchReport rep;
    for (const auto& k : cfg.bench.sets) rep.sets.push_back(set_by_key(k));
    std::vector<std::string> needed;
    for (const auto& s : rep.sets) needed.insert(needed.end(), s.feature_names.begin(), s.feature_names.end());
    std::sort(needed.begin(), needed.end());
    needed.erase(std::unique(needed.begin(), needed.end()), needed.end());
    for (const auto& m : cfg.bench.models) {
        const auto fam = ml::family_from_key(m);
        if (!fam) throw Error(ErrorCode::InvalidParams, "unknown model '" + m + "'");
        ml::ModelSpec spec{*fam, {}, 0};
        if (auto it = cfg.bench.hyperparameters.find(m); it != cfg.bench.hyperparameters.end()) spec.hyperparameters = it->second;
        rep.specs.push_back(spec);
    }

    FeatureTable table;
    try {
        table = parse_features_csv(read_file(cfg.bench.features), needed);
    } catch (const Error& e) {
        throw Error(e.code(), cfg.bench.features + (e.line() ? ":" + std::to_string(*e.line()) : "") + ": " + e.what());
    }
    const auto x = to_feature_matrix(table, Segment::Full24h, needed);
    if (x.rows() == 0) throw Error(ErrorCode::Schema, "no labelled 24h rows in '" + cfg.bench.features + "'");
    log("info", "benchmarking " + std::to_string(rep.sets.size()) + " sets x " + std::to_string(rep.specs.size()) +
                    " models on " + std::to_string(x.rows()) + " recordings");
    rep.cells = eval::benchmark_feature_sets(x, rep.sets, rep.specs, protocol, cfg.jobs);

    const std::filesystem::path out(cfg.out);
    const std::size_t nm = rep.specs.size();
    for (std::size_t si = 0; si < rep.sets.size(); ++si) {
        std::string held = "model," + metric_header() + "\n";
        std::string cv = "model," + metric_header() + ",accuracy_sd,kappa_sd,auroc_sd,sensitivity_sd,specificity_sd\n";
        for (std::size_t mi = 0; mi < nm; ++mi) {
            const auto& c = rep.cells[si * nm + mi];
            const std::string name(ml::family_display_name(c.family));
            held += name + "," + metric_fields(c.holdout) + "\n";
            cv += name + "," + metric_fields(c.cv.pooled) + "," + fold_sd_fields(c.cv) + "\n";
            std::string roc = "threshold,fpr,tpr\n";
            for (const auto& p : c.holdout_roc.points)
                roc += format_g6(p.threshold) + "," + format_g6(p.fpr) + "," + format_g6(p.tpr) + "\n";
            write_file(out / "roc" / (c.set_key + "_" + std::string(ml::family_key(c.family)) + ".csv"), roc);
        }
        write_file(out / "tables" / (rep.sets[si].key() + ".csv"), held);
        write_file(out / "tables" / (rep.sets[si].key() + "_cv.csv"), cv);
    }

    const auto sgb = std::find_if(rep.specs.begin(), rep.specs.end(),
                                  [](const auto& s) { return s.family == ml::ModelFamily::StochasticGradientBoosting; });
    if (sgb != rep.specs.end()) {
        const auto mi = static_cast<std::size_t>(sgb - rep.specs.begin());
        std::string held = "feature_set," + metric_header() + "\n";
        std::string cv = held;
        std::printf("%-20s %9s %9s %9s %12s %12s\n", "SGB (held-out)", "Accuracy", "Kappa", "AUROC", "Sensitivity",
                    "Specificity");
        for (std::size_t si = 0; si < rep.sets.size(); ++si) {
            const auto& c = rep.cells[si * nm + mi];
            held += rep.sets[si].display_name() + "," + metric_fields(c.holdout) + "\n";
            cv += rep.sets[si].display_name() + "," + metric_fields(c.cv.pooled) + "\n";
            std::printf("%-20s %9.2f %9s %9.2f %12.2f %12.2f\n", rep.sets[si].display_name().c_str(), c.holdout.accuracy,
                        c.holdout.kappa ? format_g6(std::round(*c.holdout.kappa * 100) / 100).c_str() : "",
                        c.holdout.auroc, c.holdout.sensitivity, c.holdout.specificity);
        }
        write_file(out / "tables" / "sgb_summary.csv", held);
        write_file(out / "tables" / "sgb_summary_cv.csv", cv);
    }
    echo_config(cfg, "bench");
    return rep;
}

// ------------------------------------------------------------
// stats
// ------------------------------------------------------------

inline const char* kCellNames[2][3] = {{"Healthy_24h", "Healthy_day", "Healthy_night"}, {"MI_24h", "MI_day", "MI_night"}};

inline std::vector<std::optional<eval::IndexStats>> cmd_stats(const RunConfig& cfg) {
    FeatureTable table;
    try {
        table = parse_features_csv(read_file(cfg.stats.features));
    } catch (const Error& e) {
        throw Error(e.code(), cfg.stats.features + (e.line() ? ":" + std::to_string(*e.line()) : "") + ": " + e.what());
    }

    // recording -> label, value row per segment
    struct Rec {
        CohortLabel label;
        std::array<const FeatureRow*, 3> seg{};
    };
    std::map<std::string, Rec> recs;
    for (const auto& r : table.rows) {
        if (!r.label) continue;
        auto& rec = recs.try_emplace(r.recording_id, Rec{*r.label, {}}).first->second;
        rec.seg[static_cast<std::size_t>(r.segment)] = &r;
    }
    if (recs.empty()) throw Error(ErrorCode::Schema, "no labelled rows in '" + cfg.stats.features + "'");

    const auto& cols = table.columns;
    std::vector<std::optional<eval::IndexStats>> results(cols.size());
    std::vector<eval::CellData> data(cols.size());
    std::vector<std::string> problems(cols.size());
    parallel_for(cols.size(), cfg.jobs, [&](std::size_t c) {
        // only recordings with the index present in all three segments, keeping the design proportional
        for (const auto& [id, rec] : recs) {
            bool all = true;
            for (const auto* row : rec.seg) all = all && row && row->values[c];
            if (!all) continue;
            for (std::size_t s = 0; s < 3; ++s)
                data[c][static_cast<std::size_t>(rec.label)][s].push_back(*rec.seg[s]->values[c]);
        }
        try {
            results[c] = eval::group_stats(cols[c], data[c]);
        } catch (const Error& e) {
            problems[c] = e.what();
        }
    });

    std::string t7 = "index";
    for (const auto& g : kCellNames)
        for (const char* cell : g)
            for (const char* f : {"n", "mean", "sd", "flags"}) t7 += std::string(",") + cell + "_" + f;
    t7 += ",f_group,p_group,f_segment,p_segment,f_interaction,p_interaction\n";
    std::string tk = "index,cell_a,cell_b,q,p\n";
    for (std::size_t c = 0; c < cols.size(); ++c) {
        t7 += cols[c];
        if (!results[c]) {
            log("warning", "stats for '" + cols[c] + "' skipped: " + problems[c]);
            for (const auto& g : data[c])
                for (const auto& v : g) {
                    t7 += "," + std::to_string(v.size());
                    t7 += v.empty() ? ",," : "," + format_g6(mean(v)) + "," + (v.size() >= 2 ? format_g6(std::sqrt(variance(v, 1))) : "");
                    t7 += ",";
                }
            t7 += ",,,,,,\n";
            continue;
        }
        const auto& r = *results[c];
        for (std::size_t g = 0; g < 2; ++g)
            for (std::size_t s = 0; s < 3; ++s) {
                const auto& cell = r.cells[g][s];
                t7 += "," + std::to_string(cell.n) + "," + format_g6(cell.mean) + "," + format_g6(cell.sd) + "," + r.flags[g][s];
            }
        for (const auto* term : {&r.anova.group, &r.anova.segment, &r.anova.interaction})
            t7 += "," + format_g6(term->f) + "," + format_g6(term->p);
        t7 += "\n";
        for (std::size_t a = 0; a < 6; ++a)
            for (std::size_t b = a + 1; b < 6; ++b)
                tk += cols[c] + "," + kCellNames[a / 3][a % 3] + "," + kCellNames[b / 3][b % 3] + "," +
                      format_g6(r.tukey.q[a][b]) + "," + format_g6(r.tukey.p[a][b]) + "\n";
    }
    const std::filesystem::path out(cfg.out);
    write_file(out / "stats" / "table7.csv", t7);
    write_file(out / "stats" / "tukey.csv", tk);
    echo_config(cfg, "stats");
    return results;
}

// ------------------------------------------------------------
// single model train / score
// ------------------------------------------------------------

/// Fits one model on the labelled 24h rows and writes model.json.
inline void cmd_train(const RunConfig& cfg, const std::string& model_key, const std::vector<std::string>& columns) {
    const auto fam = ml::family_from_key(model_key);
    if (!fam) throw Error(ErrorCode::InvalidParams, "unknown model '" + model_key + "'");
    const auto table = parse_features_csv(read_file(cfg.bench.features), columns);
    const auto x = to_feature_matrix(table, Segment::Full24h, columns);
    ml::ModelSpec spec{*fam, {}, derive_seed(cfg.seed, {hash_string(model_key)})};
    if (auto it = cfg.bench.hyperparameters.find(model_key); it != cfg.bench.hyperparameters.end()) spec.hyperparameters = it->second;
    const auto model = ml::train(spec, x);
    write_file(std::filesystem::path(cfg.out) / "model.json", model.to_json().dump(2) + "\n");
    echo_config(cfg, "train");
}

/// Scores the 24h rows of a features CSV with a saved model; writes scores.csv.
inline void cmd_score(const RunConfig& cfg, const std::string& model_path) {
    json doc;
    try {
        doc = json::parse(read_file(model_path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Schema, model_path + ": " + e.what());
    }
    const auto model = ml::model_from_json(doc);
    const auto table = parse_features_csv(read_file(cfg.bench.features), model.feature_names());
    std::vector<std::size_t> idx;
    for (const auto& c : model.feature_names()) idx.push_back(*table.column(c));
    std::string out = "recording_id,score,prediction\n";
    std::vector<double> row(idx.size());
    for (const auto& r : table.rows) {
        if (r.segment != Segment::Full24h) continue;
        bool complete = true;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            complete = complete && r.values[idx[j]].has_value();
            row[j] = r.values[idx[j]].value_or(0.0);
        }
        if (!complete) {
            out += r.recording_id + ",,\n";
            continue;
        }
        const double s = model.score(row);
        out += r.recording_id + "," + format_g6(s) + "," + (s >= cfg.bench.protocol.decision_threshold ? "MI" : "Healthy") + "\n";
    }
    write_file(std::filesystem::path(cfg.out) / "scores.csv", out);
    echo_config(cfg, "score");
}

}  // namespace app
}  // namespace hrvbench
