#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uncert/corpus.hpp"
#include "uncert/granger.hpp"

namespace uncert {

struct LexiconCmdOptions {
    std::string embeddings_path;
    std::string seed;
    std::size_t k = 4;
    std::string out_path;
    bool stream = false;          // two-pass scan instead of an in-memory table
    bool lowercase_seed = true;   // published vector files are lowercase
    std::optional<std::size_t> profile_n;
    std::string profile_out;
};

struct IndexCmdOptions {
    std::string articles_path;
    std::string lexicon_path;
    std::string out_path;
    std::string label = "UNCERT";
    ParseMode mode = ParseMode::Strict;
    MonthlyMode monthly = MonthlyMode::CountWeighted;
    bool standardize = false;
};

struct CausalityCmdOptions {
    std::vector<std::pair<std::string, std::string>> series;  // label, csv path
    std::string out_dir;
    TYConfig ty;
    std::optional<Month> split;                // paper-style two-way split
    std::vector<MonthRange> explicit_ranges;   // used instead of split when set
};

// Each command returns a process exit status and reports progress or errors
// on `log`; module errors come back as status 1 with a message.
int cmd_lexicon(const LexiconCmdOptions& opt, std::ostream& log);
int cmd_index(const IndexCmdOptions& opt, std::ostream& log);
int cmd_causality(const CausalityCmdOptions& opt, std::ostream& log);

/// Fully resolved pipeline configuration; see parse_pipeline_config for the
/// file format.
struct PipelineConfig {
    LexiconCmdOptions lexicon;
    IndexCmdOptions index;
    std::vector<std::pair<std::string, std::string>> series;
    TYConfig ty;
    std::optional<Month> split;
    std::vector<MonthRange> explicit_ranges;
    std::string out_dir;

    /// Checks referenced input paths before any stage runs.
    void validate() const;
};

/// Flat sectioned key=value file: [lexicon], [index], [series], [causality],
/// [output]; '#' and ';' start comments. Unknown keys are errors.
PipelineConfig parse_pipeline_config(std::istream& in);
PipelineConfig load_pipeline_config(const std::string& path);

/// Command-line overrides for pipeline runs; set fields win over the
/// config file.
struct PipelineOverrides {
    std::optional<std::string> embeddings_path;
    std::optional<std::string> seed;
    std::optional<std::size_t> k;
    std::optional<bool> stream;
    std::optional<std::size_t> profile_n;
    std::optional<std::string> articles_path;
    std::optional<std::string> label;
    std::optional<ParseMode> mode;
    std::optional<MonthlyMode> monthly;
    std::optional<bool> standardize;
    std::optional<LagCriterion> criterion;
    std::optional<int> p_max;
    std::optional<double> alpha_diag;
    std::optional<int> h_portmanteau;
    std::optional<int> h_bg;
    std::optional<int> max_d;
    std::optional<int> min_months;
    std::optional<double> cusum_alpha;
    std::optional<AdfSpec> adf_spec;
    std::optional<Month> split;
    std::optional<std::string> out_dir;

    void apply(PipelineConfig& cfg) const;
};

/// lexicon -> index -> causality on one config; every intermediate artifact
/// lands in out_dir and a manifest records config and input digests. The
/// first failing stage aborts and the manifest records the failure.
int cmd_pipeline(const std::string& config_path, std::ostream& log,
                 const PipelineOverrides& overrides = {});

std::string sanitize_filename(std::string_view name);

}  // namespace uncert
