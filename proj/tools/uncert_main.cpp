#include <CLI11.hpp>
#include <iostream>

#include "uncert/pipeline.hpp"
#include "uncert/util.hpp"
#include "uncert/version.hpp"

namespace {

// "label=path" or bare path (label defaults to the file stem).
std::pair<std::string, std::string> parse_series_arg(const std::string& arg) {
    auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0) return {"", arg};
    return {arg.substr(0, eq), arg.substr(eq + 1)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"News-based uncertainty index and Granger-causality toolkit"};
    app.set_version_flag("--version", uncert::kVersion);
    app.require_subcommand(1);

    // lexicon ---------------------------------------------------------------
    uncert::LexiconCmdOptions lex;
    std::size_t profile_n = 0;
    auto* lex_cmd = app.add_subcommand("lexicon", "Expand a seed word via embedding nearest neighbors");
    lex_cmd->add_option("--embeddings", lex.embeddings_path, "Word-vector file (text format)")->required();
    lex_cmd->add_option("--seed", lex.seed, "Seed word")->required();
    lex_cmd->add_option("--k", lex.k, "Number of expansion words")->capture_default_str();
    lex_cmd->add_option("--out", lex.out_path, "Lexicon output file")->required();
    lex_cmd->add_flag("--stream", lex.stream, "Two-pass file scan instead of an in-memory table");
    lex_cmd->add_flag("!--no-lowercase-seed", lex.lowercase_seed, "Keep the seed's case on lookup");
    lex_cmd->add_option("--profile", profile_n, "Also write the N nearest distances as CSV");
    lex_cmd->add_option("--profile-out", lex.profile_out, "Distance profile output path");

    // index -----------------------------------------------------------------
    uncert::IndexCmdOptions idx;
    bool lenient = false;
    bool daily_mean = false;
    auto* idx_cmd = app.add_subcommand("index", "Count lexicon matches into a monthly proportion series");
    idx_cmd->add_option("--articles", idx.articles_path, "Line-delimited JSON articles")->required();
    idx_cmd->add_option("--lexicon", idx.lexicon_path, "Lexicon file")->required();
    idx_cmd->add_option("--out", idx.out_path, "Monthly series CSV output")->required();
    idx_cmd->add_option("--label", idx.label, "Series label")->capture_default_str();
    idx_cmd->add_flag("--lenient", lenient, "Skip malformed lines instead of aborting");
    idx_cmd->add_flag("--daily-mean", daily_mean, "Average daily proportions instead of count-weighting");
    idx_cmd->add_flag("--standardize", idx.standardize, "Write the z-scored series");

    // causality ---------------------------------------------------------------
    uncert::CausalityCmdOptions caus;
    std::vector<std::string> series_args;
    std::string split_arg;
    std::vector<std::string> range_args;
    std::string criterion_arg = "AIC";
    std::string adf_arg = "ct";
    auto* caus_cmd = app.add_subcommand("causality", "Toda-Yamamoto Granger causality between series");
    caus_cmd->add_option("--series", series_args, "Series CSV as label=path or path (first = index under study)")
        ->required()
        ->expected(-2);
    caus_cmd->add_option("--out-dir", caus.out_dir, "Output directory")->required();
    caus_cmd->add_option("--criterion", criterion_arg, "Lag criterion: AIC, HQ, SC, FPE")->capture_default_str();
    caus_cmd->add_option("--p-max", caus.ty.p_max, "Maximum lag order")->capture_default_str();
    caus_cmd->add_option("--alpha-diag", caus.ty.alpha_diag, "Serial-correlation threshold")->capture_default_str();
    caus_cmd->add_option("--h-portmanteau", caus.ty.h_portmanteau, "Portmanteau horizon")->capture_default_str();
    caus_cmd->add_option("--h-bg", caus.ty.h_bg, "Breusch-Godfrey lag order")->capture_default_str();
    caus_cmd->add_option("--max-d", caus.ty.max_d, "Maximum integration order")->capture_default_str();
    caus_cmd->add_option("--min-months", caus.ty.min_months, "Minimum common months")->capture_default_str();
    caus_cmd->add_option("--cusum-alpha", caus.ty.cusum_alpha, "OLS-CUSUM significance level")
        ->capture_default_str();
    caus_cmd->add_option("--adf", adf_arg, "ADF deterministic terms: ct (constant+trend) or c")
        ->capture_default_str();
    caus_cmd->add_option("--split", split_arg, "Split month YYYY-MM: adds the two subsamples around it");
    caus_cmd->add_option("--range", range_args, "Extra subsample YYYY-MM:YYYY-MM (repeatable)");

    // pipeline ----------------------------------------------------------------
    // Every config setting has a matching flag here; the command line wins.
    std::string config_path;
    struct PipeArgs {
        std::string embeddings, seed, articles, label, out_dir, criterion, adf, split;
        std::size_t k = 0, profile = 0;
        bool stream = false, lenient = false, daily_mean = false, standardize = false;
        int p_max = 0, h_portmanteau = 0, h_bg = 0, max_d = 0, min_months = 0;
        double alpha_diag = 0.0, cusum_alpha = 0.0;
    } pa;
    auto* pipe_cmd = app.add_subcommand("pipeline", "Run lexicon -> index -> causality from one config file");
    pipe_cmd->add_option("--config", config_path, "Pipeline config file")
        ->envname("UNCERT_CONFIG")
        ->required();
    pipe_cmd->add_option("--embeddings", pa.embeddings, "Override the embedding file");
    pipe_cmd->add_option("--seed", pa.seed, "Override the seed word");
    pipe_cmd->add_option("--k", pa.k, "Override the expansion size");
    pipe_cmd->add_flag("--stream", pa.stream, "Scan the vector file in two passes");
    pipe_cmd->add_option("--profile", pa.profile, "Override the distance-profile size");
    pipe_cmd->add_option("--articles", pa.articles, "Override the article file");
    pipe_cmd->add_option("--label", pa.label, "Override the index label");
    pipe_cmd->add_flag("--lenient", pa.lenient, "Skip malformed article lines");
    pipe_cmd->add_flag("--daily-mean", pa.daily_mean, "Average daily proportions");
    pipe_cmd->add_flag("--standardize", pa.standardize, "Write the z-scored index");
    pipe_cmd->add_option("--criterion", pa.criterion, "Override the lag criterion");
    pipe_cmd->add_option("--p-max", pa.p_max, "Override the maximum lag order");
    pipe_cmd->add_option("--alpha-diag", pa.alpha_diag, "Override the diagnostics threshold");
    pipe_cmd->add_option("--h-portmanteau", pa.h_portmanteau, "Override the Portmanteau horizon");
    pipe_cmd->add_option("--h-bg", pa.h_bg, "Override the Breusch-Godfrey lag order");
    pipe_cmd->add_option("--max-d", pa.max_d, "Override the maximum integration order");
    pipe_cmd->add_option("--min-months", pa.min_months, "Override the minimum common months");
    pipe_cmd->add_option("--cusum-alpha", pa.cusum_alpha, "Override the OLS-CUSUM level");
    pipe_cmd->add_option("--adf", pa.adf, "Override the ADF deterministic terms (ct or c)");
    pipe_cmd->add_option("--split", pa.split, "Override the subsample split month");
    pipe_cmd->add_option("--out-dir", pa.out_dir, "Override the output directory");

    CLI11_PARSE(app, argc, argv);

    if (lex_cmd->parsed()) {
        if (profile_n > 0) {
            lex.profile_n = profile_n;
            if (lex.profile_out.empty()) {
                std::cerr << "error: --profile requires --profile-out\n";
                return 1;
            }
        }
        return uncert::cmd_lexicon(lex, std::cerr);
    }
    if (idx_cmd->parsed()) {
        idx.mode = lenient ? uncert::ParseMode::Lenient : uncert::ParseMode::Strict;
        idx.monthly = daily_mean ? uncert::MonthlyMode::MeanOfDailyProportions
                                 : uncert::MonthlyMode::CountWeighted;
        return uncert::cmd_index(idx, std::cerr);
    }
    if (caus_cmd->parsed()) {
        auto criterion = uncert::criterion_from_name(criterion_arg);
        if (!criterion) {
            std::cerr << "error: unknown criterion '" << criterion_arg << "'\n";
            return 1;
        }
        caus.ty.criterion = *criterion;
        if (adf_arg == "c")
            caus.ty.adf_spec = uncert::AdfSpec::Constant;
        else if (adf_arg == "ct")
            caus.ty.adf_spec = uncert::AdfSpec::ConstantTrend;
        else {
            std::cerr << "error: --adf must be ct or c\n";
            return 1;
        }
        if (!split_arg.empty()) {
            auto m = uncert::Month::parse(split_arg);
            if (!m) {
                std::cerr << "error: bad --split month '" << split_arg << "'\n";
                return 1;
            }
            caus.split = *m;
        }
        for (const auto& r : range_args) {
            auto parts = uncert::split(r, ':');
            auto from = parts.size() == 2 ? uncert::Month::parse(parts[0]) : std::nullopt;
            auto to = parts.size() == 2 ? uncert::Month::parse(parts[1]) : std::nullopt;
            if (!from || !to || *to < *from) {
                std::cerr << "error: bad --range '" << r << "'\n";
                return 1;
            }
            caus.explicit_ranges.push_back({*from, *to});
        }
        for (const auto& arg : series_args) {
            auto [label, path] = parse_series_arg(arg);
            caus.series.emplace_back(label, path);
        }
        return uncert::cmd_causality(caus, std::cerr);
    }

    uncert::PipelineOverrides ov;
    auto passed = [&](const char* name) { return pipe_cmd->count(name) > 0; };
    if (passed("--embeddings")) ov.embeddings_path = pa.embeddings;
    if (passed("--seed")) ov.seed = pa.seed;
    if (passed("--k")) ov.k = pa.k;
    if (passed("--stream")) ov.stream = pa.stream;
    if (passed("--profile")) ov.profile_n = pa.profile;
    if (passed("--articles")) ov.articles_path = pa.articles;
    if (passed("--label")) ov.label = pa.label;
    if (passed("--lenient")) ov.mode = uncert::ParseMode::Lenient;
    if (passed("--daily-mean")) ov.monthly = uncert::MonthlyMode::MeanOfDailyProportions;
    if (passed("--standardize")) ov.standardize = true;
    if (passed("--criterion")) {
        auto c = uncert::criterion_from_name(pa.criterion);
        if (!c) {
            std::cerr << "error: unknown criterion '" << pa.criterion << "'\n";
            return 1;
        }
        ov.criterion = *c;
    }
    if (passed("--p-max")) ov.p_max = pa.p_max;
    if (passed("--alpha-diag")) ov.alpha_diag = pa.alpha_diag;
    if (passed("--h-portmanteau")) ov.h_portmanteau = pa.h_portmanteau;
    if (passed("--h-bg")) ov.h_bg = pa.h_bg;
    if (passed("--max-d")) ov.max_d = pa.max_d;
    if (passed("--min-months")) ov.min_months = pa.min_months;
    if (passed("--cusum-alpha")) ov.cusum_alpha = pa.cusum_alpha;
    if (passed("--adf")) {
        if (pa.adf == "c") ov.adf_spec = uncert::AdfSpec::Constant;
        else if (pa.adf == "ct") ov.adf_spec = uncert::AdfSpec::ConstantTrend;
        else {
            std::cerr << "error: --adf must be ct or c\n";
            return 1;
        }
    }
    if (passed("--split")) {
        auto m = uncert::Month::parse(pa.split);
        if (!m) {
            std::cerr << "error: bad --split month '" << pa.split << "'\n";
            return 1;
        }
        ov.split = *m;
    }
    if (passed("--out-dir")) ov.out_dir = pa.out_dir;
    return uncert::cmd_pipeline(config_path, std::cerr, ov);
}
