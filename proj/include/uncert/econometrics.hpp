#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uncert/distributions.hpp"
#include "uncert/series.hpp"

namespace uncert {

/// K series on a common, gap-free monthly sample. data is T x K.
struct AlignedSeries {
    std::vector<std::string> labels;
    std::vector<Month> months;
    Eigen::MatrixXd data;

    int T() const { return static_cast<int>(data.rows()); }
    int K() const { return static_cast<int>(data.cols()); }
};

/// Inner-joins the series on months, restricted to `window` when given.
/// Gaps or empty overlap are hard errors listing the offending months.
AlignedSeries align_series(const std::vector<MonthlySeries>& series, std::optional<MonthRange> window = {});

enum class UnitRootMethod { ADF, KPSS };

struct UnitRootResult {
    UnitRootMethod method;
    double statistic = 0.0;
    int lags = 0;
    PValue pvalue;
};

/// Augmented Dickey-Fuller regression of dy_t on deterministic terms,
/// y_{t-1} and `lags` lagged differences; the statistic is the t-ratio of
/// the y_{t-1} coefficient. Default lag order is floor((T-1)^(1/3)).
UnitRootResult adf_test(std::span<const double> series, std::optional<int> lags = {},
                        AdfSpec spec = AdfSpec::ConstantTrend);

/// KPSS level-stationarity statistic with a Bartlett-window long-run
/// variance truncated at floor(4 (T/100)^(1/4)).
UnitRootResult kpss_test(std::span<const double> series);

/// The bare statistic and bandwidth, without the sample-size floor that the
/// p-value path enforces.
std::pair<double, int> kpss_statistic(std::span<const double> series);

struct IntegrationOrder {
    int order = 0;
    bool decisive = false;  // false when no d <= max_d passed both tests
    std::vector<UnitRootResult> trail;
};

/// Smallest d <= max_d whose d-th difference both rejects ADF and fails to
/// reject KPSS at 5%. Returns max_d with decisive=false when none does.
IntegrationOrder integration_order(std::span<const double> series, int max_d);

/// VAR(p) fitted by equation-wise least squares on levels, optionally with
/// `extra` augmentation lags appended. Least squares goes through a
/// column-pivoted QR; the normal equations are never formed.
struct VarModel {
    int lag_order = 0;   // p
    int extra_lags = 0;  // augmentation lags, bookkeeping only
    int K = 0;
    int T_eff = 0;

    Eigen::VectorXd intercept;              // K
    std::vector<Eigen::MatrixXd> coef;      // A_1..A_{p+extra}, each K x K
    Eigen::MatrixXd design;                 // Z: T_eff x (1 + K(p+extra))
    Eigen::MatrixXd fitted;                 // T_eff x K
    Eigen::MatrixXd residuals;              // T_eff x K
    Eigen::MatrixXd sigma_mle;              // E'E / T_eff
    Eigen::MatrixXd sigma_unbiased;         // E'E / (T_eff - regressors)
    Eigen::MatrixXd zz_inv;                 // (Z'Z)^{-1}

    int total_lags() const { return lag_order + extra_lags; }
    int n_regressors() const { return 1 + K * total_lags(); }
    /// Covariance of vec(B), equations stacked: sigma_unbiased (x) (Z'Z)^{-1}.
    Eigen::MatrixXd coef_cov() const;
    /// Coefficient of source variable at `lag` in `eq`.
    double coef_at(int eq, int source, int lag) const { return coef[lag - 1](eq, source); }
};

VarModel fit_var(const AlignedSeries& data, int p, int extra = 0);

/// Response and lag-regressor matrices (Y, Z) for a VAR with `total_lags`
/// lags; Z rows are [1, y_{t-1}', ..., y_{t-L}'].
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> var_design(const Eigen::MatrixXd& data, int total_lags);

struct LagCriteriaRow {
    int p = 0;
    double aic = 0.0;
    double hq = 0.0;
    double sc = 0.0;
    double fpe = 0.0;
    double log_det_sigma = 0.0;
};

struct LagSelection {
    int p_max = 0;
    std::vector<LagCriteriaRow> rows;  // p = 1..p_max
};

enum class LagCriterion { AIC, HQ, SC, FPE };

/// Information criteria for p = 1..p_max, every candidate fitted on the
/// common effective sample of T - p_max observations:
///   AIC(p) = ln det(S_p) + (2/T*) p K^2
///   HQ(p)  = ln det(S_p) + (2 ln ln T* / T*) p K^2
///   SC(p)  = ln det(S_p) + (ln T* / T*) p K^2
///   FPE(p) = ((T*+q)/(T*-q))^K det(S_p),  q = K p + 1
LagSelection lag_criteria(const AlignedSeries& data, int p_max);

/// Argmin of the chosen criterion; ties resolve to the smallest p.
int select_lag(const LagSelection& table, LagCriterion criterion);

const char* criterion_name(LagCriterion c);
std::optional<LagCriterion> criterion_from_name(std::string_view name);

enum class SerialTest { PortmanteauAdjusted, BreuschGodfrey };

struct DiagnosticResult {
    SerialTest method;
    double statistic = 0.0;
    int df = 0;
    PValue pvalue;
};

/// Small-sample-adjusted multivariate Portmanteau statistic over residual
/// autocovariances at lags 1..h; df = K^2 (h - fitted lag order).
DiagnosticResult portmanteau_test(const VarModel& model, int h);

/// Multivariate Breusch-Godfrey LM test: auxiliary regression of residuals
/// on the original regressors plus h zero-padded residual lags; df = h K^2.
DiagnosticResult breusch_godfrey_test(const VarModel& model, int h);

struct StabilityResult {
    std::vector<std::vector<double>> paths;  // per equation, T_eff points
    double boundary = 0.0;
    bool crossed = false;
    double alpha = 0.0;
};

/// OLS-CUSUM empirical fluctuation processes with a crossing boundary at
/// the alpha-level sup-|Brownian bridge| quantile.
StabilityResult ols_cusum(const VarModel& model, double alpha);

// Fluctuation path export: t,equation,value,boundary.
void write_fluctuation_csv(const StabilityResult& stability, const std::vector<std::string>& labels,
                           std::ostream& out);

}  // namespace uncert
