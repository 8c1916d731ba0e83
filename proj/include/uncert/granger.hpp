#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "uncert/econometrics.hpp"

namespace uncert {

/// Tuning constants of the causality procedure.
struct TYConfig {
    LagCriterion criterion = LagCriterion::AIC;
    int p_max = 10;
    double alpha_diag = 0.05;
    int h_portmanteau = 16;
    int h_bg = 5;
    int max_d = 2;
    AdfSpec adf_spec = AdfSpec::ConstantTrend;
    double cusum_alpha = 0.05;
    int min_months = 60;  // alignment floor

    void validate() const;
};

struct WaldResult {
    double statistic = 0.0;
    int df = 0;
    PValue pvalue;
};

/// Wald statistic (R b)' (R V R')^{-1} (R b) for a general restriction
/// matrix R on a coefficient vector with covariance V.
double wald_statistic(const Eigen::VectorXd& beta, const Eigen::MatrixXd& cov, const Eigen::MatrixXd& r);

/// Exclusion test of source_var's lags 1..p in target_eq's equation. The
/// augmentation lags beyond p are never part of the restriction, so df = p.
WaldResult wald_exclusion(const VarModel& model, int target_eq, int source_var, int p);

/// One recorded step of the procedure, in execution order.
struct TrailEntry {
    std::string label;
    double statistic = 0.0;
    double pvalue = 0.0;
    bool has_stats = false;
    std::string note;
};

struct GrangerReport {
    std::string label_x;
    std::string label_y;
    Month sample_start;
    Month sample_end;
    int n_months = 0;
    int m = 0;           // max integration order
    int p = 0;           // post-diagnostics lag order
    bool diag_clean = true;
    StabilityResult stability;
    std::vector<TrailEntry> trail;
    WaldResult wald_xy;  // x -> y
    WaldResult wald_yx;  // y -> x
    std::string diag_notes() const;  // compact, comma-free trail summary
};

/// Runs the full procedure on the common months of x and y:
/// integration orders (ADF + KPSS), lag choice on levels, OLS-CUSUM,
/// serial-correlation loop, lag augmentation by m, and both Wald tests.
GrangerReport toda_yamamoto(const MonthlySeries& x, const MonthlySeries& y, const TYConfig& cfg);

struct CausalityCell {
    std::string label_x;
    std::string label_y;
    std::string range_name;
    std::variant<GrangerReport, std::string> outcome;  // report or error text

    bool ok() const { return outcome.index() == 0; }
    const GrangerReport& report() const { return std::get<0>(outcome); }
    const std::string& error() const { return std::get<1>(outcome); }
};

struct CausalityTable {
    std::vector<std::string> range_names;  // column order of the summary
    std::vector<CausalityCell> cells;
};

/// One report per pair per subsample; per-cell failures are recorded inline
/// and leave the other cells untouched. An empty `subsamples` list means the
/// full common sample.
CausalityTable causality_matrix(const std::vector<std::pair<MonthlySeries, MonthlySeries>>& pairs,
                                const TYConfig& cfg, const std::vector<std::optional<MonthRange>>& subsamples);

// Report CSV: from,to,sample_start,sample_end,m,p,wald_stat,df,pvalue,
// stability_crossed,diag_notes; two rows (one per direction) per cell.
void write_report_csv(const CausalityTable& table, std::ostream& out);

/// Aligned From/To grid of p-values, one column per subsample, three
/// decimals with a "<0.001" convention, plus a per-cell detail block.
void write_summary(const CausalityTable& table, std::ostream& out);

std::string format_pvalue_3(double p);

}  // namespace uncert
