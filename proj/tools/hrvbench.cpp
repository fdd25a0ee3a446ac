// hrvbench: synthetic cohort generation, HRV index extraction, classifier
// benchmarking and group statistics.

#include <CLI11.hpp>

#include "hrvbench/app.hpp"

using namespace hrvbench;

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"HRV feature extraction and MI classification benchmark"};
    cli.require_subcommand(1);
    cli.fallthrough();

    std::string config_path;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::string out;
    auto* o_config = cli.add_option("--config", config_path, "JSON run configuration");
    auto* o_seed = cli.add_option("--seed", seed, "master seed (cohort and split)");
    auto* o_jobs = cli.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    auto* o_out = cli.add_option("--out", out, "output directory");

    auto* synth = cli.add_subcommand("synth", "generate a synthetic cohort of RR-CSV files");
    std::size_t n_healthy = 0, n_mi = 0;
    auto* o_healthy = synth->add_option("--healthy", n_healthy, "healthy subjects");
    auto* o_mi = synth->add_option("--mi", n_mi, "MI subjects");

    auto* extract = cli.add_subcommand("extract", "compute the index panel for a directory of RR-CSV files");
    std::string input;
    auto* o_in = extract->add_option("--in", input, "input directory");

    auto* bench = cli.add_subcommand("bench", "benchmark feature sets x models");
    std::string features, sets, models;
    double holdout = 0;
    std::size_t folds = 0;
    auto* o_bfeat = bench->add_option("--features", features, "features CSV");
    auto* o_sets = bench->add_option("--sets", sets, "comma list of: time,frequency,nonlinear,turbulence,sd12nu");
    auto* o_models = bench->add_option("--models", models, "comma list of: lr,lda,knn,rf,svm,nb,c50,sgb");
    auto* o_holdout = bench->add_option("--holdout", holdout, "held-out test fraction");
    auto* o_folds = bench->add_option("--folds", folds, "cross-validation folds");

    auto* stats = cli.add_subcommand("stats", "two-way ANOVA and Tukey comparisons per index");
    auto* o_sfeat = stats->add_option("--features", features, "features CSV");

    auto* train = cli.add_subcommand("train", "fit one model on the 24h rows and save it as JSON");
    std::string model_key, columns;
    auto* o_tfeat = train->add_option("--features", features, "features CSV");
    train->add_option("--model", model_key, "model key")->required();
    train->add_option("--columns", columns, "comma list of feature columns")->required();

    auto* score = cli.add_subcommand("score", "score 24h rows with a saved model");
    std::string model_file;
    auto* o_scfeat = score->add_option("--features", features, "features CSV");
    score->add_option("--model-file", model_file, "model JSON")->required();

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return cli.exit(e) == 0 ? 0 : 1;
    }

    try {
        app::RunConfig cfg = o_config->count() ? app::load_config(config_path) : app::RunConfig{};
        if (o_seed->count()) cfg.seed = seed;
        if (o_jobs->count()) cfg.jobs = jobs;
        if (o_out->count()) cfg.out = out;
        if (o_healthy->count()) cfg.synth.healthy = n_healthy;
        if (o_mi->count()) cfg.synth.mi = n_mi;
        if (o_in->count()) cfg.extract.input = input;
        for (auto* o : {o_bfeat, o_sfeat, o_tfeat, o_scfeat})
            if (o->count()) cfg.bench.features = cfg.stats.features = features;
        if (o_sets->count()) cfg.bench.sets = split_list(sets);
        if (o_models->count()) cfg.bench.models = split_list(models);
        if (o_holdout->count()) cfg.bench.protocol.holdout_fraction = holdout;
        if (o_folds->count()) cfg.bench.protocol.cv_folds = folds;
        cfg.validate();

        if (synth->parsed()) app::cmd_synth(cfg);
        else if (extract->parsed()) app::cmd_extract(cfg);
        else if (bench->parsed()) app::cmd_bench(cfg);
        else if (stats->parsed()) app::cmd_stats(cfg);
        else if (train->parsed()) app::cmd_train(cfg, model_key, split_list(columns));
        else if (score->parsed()) app::cmd_score(cfg, model_file);
        return 0;
    } catch (const Error& e) {
        app::log("error", e.what());
        return app::exit_code_for(e.code());
    } catch (const std::exception& e) {
        app::log("error", e.what());
        return 2;
    }
}
