// Acceptance run: one PASS/FAIL line per criterion; nonzero exit on any failure.
// Usage: acceptance <path to hrvbench>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hrvbench/eval/group_stats.hpp"
#include "hrvbench/eval/metrics.hpp"
#include "hrvbench/eval/protocol.hpp"
#include "hrvbench/features.hpp"
#include "hrvbench/hrv_linear.hpp"
#include "hrvbench/hrv_nonlinear.hpp"
#include "hrvbench/ml/classifiers.hpp"
#include "kappa_oracle.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace hrvbench;

namespace {

std::string g_cli;
const fs::path kWork = fs::absolute("acceptance_work");

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ------------------------------------------------------------
// oracles
// ------------------------------------------------------------

long double pop_var(const std::vector<double>& v) {
    long double m = 0;
    for (double x : v) m += x;
    m /= static_cast<long double>(v.size());
    long double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<long double>(v.size());
}

double rel_err(double got, long double want) {
    const long double scale = std::max<long double>(std::abs(want), 1e-300L);
    return static_cast<double>(std::abs(static_cast<long double>(got) - want) / scale);
}

double mann_whitney(const std::vector<int>& y, const std::vector<double>& s) {
    double u = 0, np = 0, nn = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 1) continue;
        ++np;
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (y[j] != 0) continue;
            u += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
        }
    }
    for (int v : y) nn += v == 0;
    return u / (np * nn);
}

// Full sort of squared distances; rows tied with the k-th distance join the vote.
double knn_oracle(const ml::FeatureMatrix& train, const ml::Standardizer& st, std::size_t k, std::span<const double> q) {
    const auto zq = st.apply(q);
    std::vector<std::pair<double, int>> d;
    for (std::size_t i = 0; i < train.rows(); ++i) {
        const auto zr = st.apply(train.row(i));
        double s = 0;
        for (std::size_t j = 0; j < zr.size(); ++j) s += (zr[j] - zq[j]) * (zr[j] - zq[j]);
        d.emplace_back(s, train.label(i));
    }
    std::sort(d.begin(), d.end());
    const double kth = d[std::min(k, d.size()) - 1].first;
    double votes = 0, pos = 0;
    for (const auto& [dist, label] : d)
        if (dist <= kth) {
            ++votes;
            pos += label;
        }
    return pos / votes;
}

struct HandAnova {
    double ss_a, ss_b, ss_ab, ss_e;
};

// Raw-total ("correction term") formulas.
HandAnova hand_anova(const eval::CellData& c) {
    double g = 0, n = 0, raw = 0, cells = 0;
    double ta[2] = {0, 0}, na[2] = {0, 0}, tb[3] = {0, 0, 0}, nb[3] = {0, 0, 0};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) {
            double t = 0;
            for (double v : c[i][j]) {
                t += v;
                raw += v * v;
            }
            const double m = static_cast<double>(c[i][j].size());
            ta[i] += t;
            na[i] += m;
            tb[j] += t;
            nb[j] += m;
            g += t;
            n += m;
            cells += t * t / m;
        }
    const double corr = g * g / n;
    double a = 0, b = 0;
    for (int i = 0; i < 2; ++i) a += ta[i] * ta[i] / na[i];
    for (int j = 0; j < 3; ++j) b += tb[j] * tb[j] / nb[j];
    return {a - corr, b - corr, cells - a - b + corr, raw - cells};
}

// ------------------------------------------------------------
// CLI helpers
// ------------------------------------------------------------

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = "\"" + g_cli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> out;
    std::stringstream text(slurp(p));
    for (std::string line; std::getline(text, line);) {
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            const auto c = line.find(',', start);
            f.push_back(line.substr(start, c == std::string::npos ? std::string::npos : c - start));
            if (c == std::string::npos) break;
            start = c + 1;
        }
        out.push_back(std::move(f));
    }
    return out;
}

// synth + extract + bench into `dir`; returns an empty string on success.
std::string pipeline(const fs::path& dir, const std::string& extra) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto log = dir / "log.txt";
    if (run_cli("synth --seed 42 " + extra + " --out \"" + (dir / "cohort").string() + "\"", log) != 0)
        return "synth failed: " + slurp(log);
    if (run_cli("extract --in \"" + (dir / "cohort").string() + "\" " + extra + " --out \"" + (dir / "features").string() +
                    "\"",
                log) != 0)
        return "extract failed: " + slurp(log);
    if (run_cli("bench --seed 42 --features \"" + (dir / "features" / "features.csv").string() + "\" " + extra +
                    " --out \"" + (dir / "bench").string() + "\"",
                log) != 0)
        return "bench failed: " + slurp(log);
    return {};
}

// ------------------------------------------------------------
// criteria
// ------------------------------------------------------------

Outcome identity_suite() {
    Outcome o;
    const auto t0 = Clock::now();
    Rng rng(101);
    double worst = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 3 + rng.below(10000 - 3 + 1);
        const double base = rng.uniform(500, 1100), spread = rng.uniform(1, 120);
        std::vector<double> x(n);
        for (auto& v : x) v = base + rng.normal(0, spread);
        const auto p = poincare(testutil::make_nn(x));
        std::vector<double> d, first, second;
        for (std::size_t k = 1; k < n; ++k) {
            d.push_back(x[k] - x[k - 1]);
            first.push_back(x[k - 1]);
            second.push_back(x[k]);
        }
        // population SD of successive differences over sqrt 2
        const long double sd1 = std::sqrt(pop_var(d) / 2.0L);
        const long double sum_sq = pop_var(first) + pop_var(second);
        worst = std::max({worst, rel_err(p.sd1_ms, sd1), rel_err(p.sd1_ms * p.sd1_ms + p.sd2_ms * p.sd2_ms, sum_sq)});
    }
    const double secs = seconds_since(t0);
    o.require(worst <= 1e-9, "max relative error " + format_g6(worst));
    o.require(secs < 10.0, "took " + format_g6(secs) + " s");
    if (o.pass) o.detail = "max rel err " + format_g6(worst) + ", " + format_g6(secs) + " s";
    return o;
}

Outcome parseval() {
    Outcome o;
    const auto t0 = Clock::now();
    Rng rng(202);
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        const double duration = rng.uniform(1200, 2400);
        const int tones = 1 + static_cast<int>(rng.below(3));
        std::vector<double> amp, freq, phase;
        for (int i = 0; i < tones; ++i) {
            amp.push_back(rng.uniform(10, 50));
            freq.push_back(rng.uniform(0.05, 0.35));
            phase.push_back(rng.uniform(0, 2 * std::numbers::pi));
        }
        const double mean_rr = rng.uniform(700, 1000);
        Rng noise(rng.next());
        const auto nn = testutil::tachogram(duration, [&](double s) {
            double v = mean_rr + noise.normal(0, 2.0);
            for (int i = 0; i < tones; ++i) v += amp[i] * std::sin(2 * std::numbers::pi * freq[i] * s + phase[i]);
            return v;
        });
        const double tp = band_powers(nn).total_power_ms2;
        auto u = resample_tachogram(nn).values;
        detail::detrend_linear(u);
        const auto var = static_cast<double>(pop_var(u));
        worst = std::max(worst, std::abs(tp - var) / var);
    }
    const double secs = seconds_since(t0);
    o.require(worst <= 0.05, "max relative deviation " + format_g6(worst));
    o.require(secs < 60.0, "took " + format_g6(secs) + " s");
    if (o.pass) o.detail = "max rel deviation " + format_g6(worst) + ", " + format_g6(secs) + " s";
    return o;
}

Outcome metric_oracles() {
    Outcome o;
    const auto t0 = Clock::now();
    Rng rng(303);
    int mismatches = 0;
    for (int t = 0; t < 10000; ++t) {
        const std::uint64_t cap = t % 3 == 0 ? 5 : t % 3 == 1 ? 200 : 100000;
        eval::ConfusionMatrix cm{rng.below(cap), rng.below(cap), rng.below(cap), rng.below(cap)};
        if (cm.total() == 0) cm.tp = 1;
        const auto got = eval::kappa(cm);
        const auto want = testutil::kappa_exact(cm.tp, cm.fn, cm.fp, cm.tn);
        if (got.has_value() != want.has_value() || (got && *got != *want)) ++mismatches;
    }
    o.require(mismatches == 0, std::to_string(mismatches) + " kappa mismatches");
    double worst = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 2 + rng.below(400);
        const std::size_t levels = 1 + rng.below(25);
        std::vector<int> y(n);
        std::vector<double> s(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.below(2));
            s[i] = static_cast<double>(rng.below(levels)) / static_cast<double>(levels);
        }
        worst = std::max(worst, std::abs(eval::roc_auroc(y, s).auroc - mann_whitney(y, s)));
    }
    const double secs = seconds_since(t0);
    o.require(worst <= 1e-12, "AUROC deviation " + format_g6(worst));
    o.require(secs < 30.0, "took " + format_g6(secs) + " s");
    if (o.pass) o.detail = "kappa exact on 10000, AUROC max dev " + format_g6(worst) + ", " + format_g6(secs) + " s";
    return o;
}

Outcome knn_oracle_check() {
    Outcome o;
    const auto t0 = Clock::now();
    Rng rng(404);
    int bad = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t dims = 1 + rng.below(6), n = 10 + rng.below(90), k = 1 + rng.below(15);
        const bool coarse = rng.below(2) == 0;  // integer grids produce distance ties
        std::vector<std::string> names;
        for (std::size_t j = 0; j < dims; ++j) names.push_back("f" + std::to_string(j));
        auto draw = [&](std::size_t rows, bool labelled) {
            ml::FeatureMatrix x(names);
            std::vector<double> r(dims);
            for (std::size_t i = 0; i < rows; ++i) {
                const int c = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.below(2));
                for (auto& v : r) v = coarse ? static_cast<double>(rng.below(4)) : rng.normal(c * 0.8, 1.0);
                x.add_row("r" + std::to_string(i), r, labelled ? c : 0);
            }
            return x;
        };
        const auto train = draw(n, true);
        const auto query = draw(30, false);
        const auto m = ml::train({ml::ModelFamily::KNearestNeighbor, {{"k", static_cast<double>(k)}}, 0}, train);
        for (std::size_t i = 0; i < query.rows(); ++i) {
            const double got = m.score(query.row(i));
            const double want = knn_oracle(train, m.standardization(), k, query.row(i));
            if (got != want || (got >= 0.5) != (want >= 0.5)) ++bad;
        }
    }
    const double secs = seconds_since(t0);
    o.require(bad == 0, std::to_string(bad) + " disagreements");
    o.require(secs < 30.0, "took " + format_g6(secs) + " s");
    if (o.pass) o.detail = "200 sets x 30 queries agree, " + format_g6(secs) + " s";
    return o;
}

Outcome hrt_prsa() {
    Outcome o;
    // sinus 800, coupling 600, pause 1000, then the scripted recovery
    std::vector<double> rr(10, 800.0);
    rr.push_back(600);
    rr.push_back(1000);
    for (double v : {780.0, 790.0, 800.0, 805.0, 810.0}) rr.push_back(v);
    rr.resize(rr.size() + 10, 800.0);
    rr.push_back(800);
    auto s = testutil::make_rr(rr);
    s.beats[11].label = BeatLabel::Ventricular;
    const auto t = turbulence(s);
    o.require(t.turbulence_onset_pct && *t.turbulence_onset_pct == -1.875,
              "TO = " + format_g6(t.turbulence_onset_pct));
    o.require(t.turbulence_slope_ms_per_beat && *t.turbulence_slope_ms_per_beat == 7.5,
              "TS = " + format_g6(t.turbulence_slope_ms_per_beat));

    Rng rng(505);
    for (int i = 0; i < 20; ++i) {
        const double step = rng.uniform(1, 30);
        std::vector<double> ramp(60);
        for (std::size_t k = 0; k < ramp.size(); ++k) ramp[k] = 600 + step * static_cast<double>(k);
        const double dc = prsa(ramp, AnchorRule::Deceleration).capacity_ms;
        o.require(std::abs(dc - step) <= 1e-9 * step, "ramp step " + format_g6(step) + " gave DC " + format_g6(dc));
    }
    std::vector<double> alt(60);
    for (std::size_t k = 0; k < alt.size(); ++k) alt[k] = k % 2 ? 830 : 790;
    o.require(prsa(alt, AnchorRule::Deceleration).capacity_ms == 0.0, "alternation DC != 0");
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x(5 + rng.below(2000));
        for (auto& v : x) v = 800 + rng.normal(0, 40);
        const std::vector<double> r(x.rbegin(), x.rend());
        worst = std::max(worst, std::abs(prsa(x, AnchorRule::Deceleration).capacity_ms +
                                         prsa(r, AnchorRule::Acceleration).capacity_ms));
    }
    o.require(worst <= 1e-9, "DC + AC(reversed) = " + format_g6(worst));
    if (o.pass) o.detail = "TO -1.875, TS 7.5, PRSA duality max dev " + format_g6(worst);
    return o;
}

Outcome lyapunov_sanity() {
    Outcome o;
    const auto t0 = Clock::now();
    std::vector<double> logistic(5000);
    double v = 0.1234567;
    for (auto& s : logistic) {
        s = 600 + 400 * v;
        v = 4.0 * v * (1.0 - v);
    }
    const double lle = lyapunov(logistic);
    const std::vector<double> cycle = {800, 830, 760, 845, 790, 815, 770};
    std::vector<double> periodic(2000), noise(2000);
    Rng rng(606);
    for (std::size_t i = 0; i < periodic.size(); ++i) {
        periodic[i] = cycle[i % cycle.size()];
        noise[i] = rng.uniform(600, 1000);
    }
    const double lp = lyapunov(periodic), ln = lyapunov(noise);
    const double secs = seconds_since(t0);
    o.require(std::abs(lle - 0.693) <= 0.15, "logistic LLE " + format_g6(lle));
    o.require(lp <= 0.01, "periodic LLE " + format_g6(lp));
    o.require(ln > lp, "noise LLE " + format_g6(ln) + " <= periodic");
    o.require(secs < 120.0, "took " + format_g6(secs) + " s");
    if (o.pass)
        o.detail = "logistic " + format_g6(lle) + ", periodic " + format_g6(lp) + ", noise " + format_g6(ln) + ", " +
                   format_g6(secs) + " s";
    return o;
}

Outcome benchmark_shape(const fs::path& run) {
    Outcome o;
    const auto t0 = Clock::now();
    const auto err = pipeline(run, "");
    const double secs = seconds_since(t0);
    if (!err.empty()) {
        o.require(false, err);
        return o;
    }
    o.require(secs < 600.0, "pipeline took " + format_g6(secs) + " s");
    const std::string sgb(ml::family_display_name(ml::ModelFamily::StochasticGradientBoosting));
    std::map<std::string, double> sgb_auroc;
    for (const auto& set : eval::standard_feature_sets()) {
        const auto rows = read_csv(run / "bench" / "tables" / (set.key() + ".csv"));
        o.require(rows.size() == 1 + ml::kAllFamilies.size(), set.key() + " table has " + std::to_string(rows.size()) + " lines");
        for (std::size_t i = 1; i < rows.size(); ++i) {
            o.require(rows[i].size() == 6, set.key() + " row " + std::to_string(i) + " is short");
            for (const auto& cell : rows[i]) o.require(!cell.empty(), set.key() + "/" + rows[i][0] + " has an empty cell");
            if (rows[i][0] == sgb && rows[i].size() == 6) sgb_auroc[set.key()] = std::stod(rows[i][3]);
        }
    }
    o.require(sgb_auroc.count("sd12nu") && sgb_auroc.count("turbulence"), "SGB rows missing");
    if (!o.pass) return o;
    o.require(sgb_auroc["sd12nu"] >= 0.90, "sd12nu SGB AUROC " + format_g6(sgb_auroc["sd12nu"]));
    o.require(sgb_auroc["sd12nu"] >= sgb_auroc["turbulence"],
              "sd12nu " + format_g6(sgb_auroc["sd12nu"]) + " < turbulence " + format_g6(sgb_auroc["turbulence"]));
    if (o.pass)
        o.detail = "40 cells populated, SGB AUROC sd12nu " + format_g6(sgb_auroc["sd12nu"]) + " vs turbulence " +
                   format_g6(sgb_auroc["turbulence"]) + ", " + format_g6(secs) + " s";
    return o;
}

Outcome null_control(const fs::path& run) {
    Outcome o;
    const auto t0 = Clock::now();
    const auto path = run / "features" / "features.csv";
    if (!fs::exists(path)) {
        o.require(false, "no features from the reference run");
        return o;
    }
    const std::vector<std::string> columns = {"sd1_nu", "sd2_nu", "sdnn", "rmssd", "lf_nu", "to", "dc"};
    const auto x = to_feature_matrix(parse_features_csv(slurp(path)), Segment::Full24h, columns);
    std::map<ml::ModelFamily, double> kappa_sum;
    for (int trial = 0; trial < 20; ++trial) {
        auto labels = x.labels();
        Rng rng(derive_seed(9000, {static_cast<std::uint64_t>(trial)}));
        rng.shuffle(labels);
        ml::FeatureMatrix permuted(x.feature_names());
        for (std::size_t i = 0; i < x.rows(); ++i) permuted.add_row(x.id(i), x.row(i), labels[i]);
        eval::EvalProtocol protocol;
        protocol.split_seed = static_cast<std::uint64_t>(trial);
        for (auto f : ml::kAllFamilies) {
            const auto cv = eval::cross_validate({f, {}, static_cast<std::uint64_t>(trial)}, permuted, protocol);
            kappa_sum[f] += cv.pooled.kappa.value_or(0.0);
        }
    }
    std::string summary;
    for (const auto& [f, s] : kappa_sum) {
        const double m = s / 20.0;
        o.require(m >= -0.1 && m <= 0.1, std::string(ml::family_key(f)) + " mean kappa " + format_g6(m));
        summary += std::string(ml::family_key(f)) + " " + format_g6(std::round(m * 1000) / 1000) + " ";
    }
    if (o.pass) o.detail = "mean kappa: " + summary + "(" + format_g6(seconds_since(t0)) + " s)";
    return o;
}

Outcome anova_oracle() {
    Outcome o;
    Rng rng(707);
    double worst = 0;
    for (int t = 0; t < 201; ++t) {
        eval::CellData c;
        if (t == 0) {
            c = {{{{{4, 5, 6}, {6, 7, 9}, {5, 5, 8}}}, {{{8, 9, 10}, {7, 9, 11}, {12, 13, 15}}}}};
        } else {
            for (auto& g : c)
                for (auto& s : g)
                    for (int i = 0; i < 3; ++i) s.push_back(std::round(rng.uniform(0, 100) * 4) / 4);
        }
        const auto r = eval::two_way_anova(c);
        const auto h = hand_anova(c);
        const double mse = h.ss_e / 12.0;
        const double fa = h.ss_a / mse, fb = h.ss_b / 2.0 / mse, fab = h.ss_ab / 2.0 / mse;
        for (auto [got, want] : {std::pair{r.group.ss, h.ss_a}, {r.segment.ss, h.ss_b}, {r.interaction.ss, h.ss_ab},
                                 {r.ss_error, h.ss_e}, {r.group.f, fa}, {r.segment.f, fb}, {r.interaction.f, fab}})
            worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
    }
    o.require(worst <= 1e-9, "max deviation " + format_g6(worst));
    eval::CellData same;
    for (auto& g : same)
        for (auto& s : g) s = {3.0, 5.0, 7.0};
    const auto r = eval::two_way_anova(same);
    o.require(r.group.p == 1.0 && r.segment.p == 1.0 && r.interaction.p == 1.0, "identical cells do not give p = 1");
    if (o.pass) o.detail = "hand design + 200 random designs, max dev " + format_g6(worst) + "; identical cells p = 1";
    return o;
}

Outcome determinism(const fs::path& first) {
    Outcome o;
    const auto second = kWork / "run_b";
    const auto err = pipeline(second, "--jobs 2");
    if (!err.empty()) {
        o.require(false, err);
        return o;
    }
    std::size_t compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(first)) {
        if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
        const auto rel = fs::relative(e.path(), first);
        const auto other = second / rel;
        o.require(fs::exists(other), rel.string() + " missing in second run");
        o.require(slurp(e.path()) == slurp(other), rel.string() + " differs");
        ++compared;
    }
    std::size_t second_count = 0;
    for (const auto& e : fs::recursive_directory_iterator(second))
        second_count += e.is_regular_file() && e.path().extension() == ".csv";
    o.require(second_count == compared, "file sets differ");
    o.require(compared > 0, "no CSV outputs");
    if (o.pass) o.detail = std::to_string(compared) + " CSV files byte-identical (jobs 1 vs 2)";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <path to hrvbench>\n");
        return 2;
    }
    g_cli = argv[1];
    fs::create_directories(kWork);
    const auto reference = kWork / "run_a";

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"poincare identities", identity_suite},
        {"parseval", parseval},
        {"metric oracles", metric_oracles},
        {"knn oracle", knn_oracle_check},
        {"turbulence and prsa", hrt_prsa},
        {"lyapunov sanity", lyapunov_sanity},
        {"benchmark shape", [&] { return benchmark_shape(reference); }},
        {"null control", [&] { return null_control(reference); }},
        {"anova oracle", anova_oracle},
        {"determinism", [&] { return determinism(reference); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        failed += !o.pass;
        std::printf("%s %2zu %-24s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
