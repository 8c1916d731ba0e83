#include "uncert/econometrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "uncert/util.hpp"

namespace uncert {

namespace {

// (X'X)^{-1} recovered from a column-pivoted QR of X: with X P = Q R,
// (X'X)^{-1} = P R^{-1} R^{-T} P'.
Eigen::MatrixXd xtx_inverse(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr) {
    const Eigen::Index p = qr.matrixQR().cols();
    Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    Eigen::MatrixXd rinv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    Eigen::MatrixXd inv = rinv * rinv.transpose();
    return qr.colsPermutation() * inv * qr.colsPermutation().transpose();
}

bool is_constant(std::span<const double> series) {
    for (double v : series)
        if (v != series.front()) return false;
    return true;
}

std::vector<double> difference(std::span<const double> series) {
    std::vector<double> out;
    out.reserve(series.size() - 1);
    for (std::size_t i = 1; i < series.size(); ++i) out.push_back(series[i] - series[i - 1]);
    return out;
}

}  // namespace

AlignedSeries align_series(const std::vector<MonthlySeries>& series, std::optional<MonthRange> window) {
    if (series.empty()) throw std::invalid_argument("align_series: no series given");
    for (const auto& s : series)
        if (s.empty()) throw std::runtime_error("align_series: series '" + s.label + "' is empty");

    Month start = series.front().first_month();
    Month end = series.front().last_month();
    for (const auto& s : series) {
        start = std::max(start, s.first_month());
        end = std::min(end, s.last_month());
    }
    if (window) {
        start = std::max(start, window->from);
        end = std::min(end, window->to);
    }
    if (end < start) {
        std::ostringstream msg;
        msg << "align_series: no overlapping months";
        for (const auto& s : series)
            msg << "; " << s.label << " spans " << s.first_month().str() << ".." << s.last_month().str();
        if (window) msg << "; requested window " << window->from.str() << ".." << window->to.str();
        throw std::runtime_error(msg.str());
    }

    const int T = end.index() - start.index() + 1;
    AlignedSeries out;
    out.months.reserve(T);
    for (int i = 0; i < T; ++i) out.months.push_back(Month::from_index(start.index() + i));
    out.data.resize(T, static_cast<Eigen::Index>(series.size()));

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        out.labels.push_back(s.label);
        std::vector<Month> missing;
        std::size_t idx = 0;
        for (int i = 0; i < T; ++i) {
            Month m = out.months[static_cast<std::size_t>(i)];
            while (idx < s.points.size() && s.points[idx].first < m) ++idx;
            if (idx < s.points.size() && s.points[idx].first == m)
                out.data(i, static_cast<Eigen::Index>(k)) = s.points[idx].second;
            else
                missing.push_back(m);
        }
        if (!missing.empty()) {
            std::ostringstream msg;
            msg << "align_series: series '" << s.label << "' is missing";
            for (const auto& m : missing) msg << ' ' << m.str();
            throw std::runtime_error(msg.str());
        }
    }
    return out;
}

UnitRootResult adf_test(std::span<const double> series, std::optional<int> lags_opt, AdfSpec spec) {
    const int T = static_cast<int>(series.size());
    if (T < 25) throw std::runtime_error("adf_test: need at least 25 observations, got " + std::to_string(T));
    if (is_constant(series)) throw std::runtime_error("adf_test: constant series");

    const int lags = lags_opt.value_or(static_cast<int>(std::floor(std::cbrt(static_cast<double>(T - 1)))));
    if (lags < 0 || lags >= T / 3)
        throw std::invalid_argument("adf_test: lag order " + std::to_string(lags) + " out of range for T=" +
                                    std::to_string(T));

    std::vector<double> dy = difference(series);
    const int rows = T - 1 - lags;
    const int dets = spec == AdfSpec::ConstantTrend ? 2 : 1;
    const int cols = dets + 1 + lags;
    if (rows <= cols + 1) throw std::runtime_error("adf_test: sample too short after lagging");

    Eigen::MatrixXd x(rows, cols);
    Eigen::VectorXd y(rows);
    for (int i = 0; i < rows; ++i) {
        const int t = lags + 1 + i;  // index into dy; level index is t
        y(i) = dy[static_cast<std::size_t>(t - 1)];  // dy_t = y_t - y_{t-1}
        int c = 0;
        x(i, c++) = 1.0;
        if (spec == AdfSpec::ConstantTrend) x(i, c++) = static_cast<double>(t);
        x(i, c++) = series[static_cast<std::size_t>(t - 1)];  // y_{t-1}
        for (int j = 1; j <= lags; ++j) x(i, c++) = dy[static_cast<std::size_t>(t - 1 - j)];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < cols) throw std::runtime_error("adf_test: collinear regressors");
    Eigen::VectorXd beta = qr.solve(y);
    Eigen::VectorXd resid = y - x * beta;
    const double sigma2 = resid.squaredNorm() / static_cast<double>(rows - cols);
    Eigen::MatrixXd xtx_inv = xtx_inverse(qr);
    const int level_col = dets;
    const double se = std::sqrt(sigma2 * xtx_inv(level_col, level_col));
    if (se == 0.0) throw std::runtime_error("adf_test: degenerate regression");
    const double stat = beta(level_col) / se;

    UnitRootResult result;
    result.method = UnitRootMethod::ADF;
    result.statistic = stat;
    result.lags = lags;
    result.pvalue = adf_pvalue(stat, rows, spec);
    return result;
}

std::pair<double, int> kpss_statistic(std::span<const double> series) {
    const int T = static_cast<int>(series.size());
    if (T < 4) throw std::runtime_error("kpss_statistic: series too short");
    if (is_constant(series)) throw std::runtime_error("kpss_statistic: constant series");

    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= T;

    std::vector<double> e(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) e[i] = series[i] - mean;

    double cum = 0.0;
    double s2_sum = 0.0;
    for (double v : e) {
        cum += v;
        s2_sum += cum * cum;
    }

    const int bandwidth = static_cast<int>(std::floor(4.0 * std::pow(T / 100.0, 0.25)));
    double lrv = 0.0;
    for (double v : e) lrv += v * v;
    for (int s = 1; s <= bandwidth; ++s) {
        double gamma = 0.0;
        for (int t = s; t < T; ++t) gamma += e[static_cast<std::size_t>(t)] * e[static_cast<std::size_t>(t - s)];
        lrv += 2.0 * (1.0 - static_cast<double>(s) / (bandwidth + 1.0)) * gamma;
    }
    lrv /= T;
    if (lrv <= 0.0) throw std::runtime_error("kpss_statistic: nonpositive long-run variance");

    return {s2_sum / (static_cast<double>(T) * T * lrv), bandwidth};
}

UnitRootResult kpss_test(std::span<const double> series) {
    const int T = static_cast<int>(series.size());
    if (T < 25) throw std::runtime_error("kpss_test: need at least 25 observations, got " + std::to_string(T));
    auto [stat, bandwidth] = kpss_statistic(series);
    UnitRootResult result;
    result.method = UnitRootMethod::KPSS;
    result.statistic = stat;
    result.lags = bandwidth;
    result.pvalue = kpss_pvalue(stat);
    return result;
}

IntegrationOrder integration_order(std::span<const double> series, int max_d) {
    if (max_d < 1 || max_d > 2) throw std::invalid_argument("integration_order: max_d must be 1 or 2");
    IntegrationOrder result;
    std::vector<double> current(series.begin(), series.end());
    for (int d = 0; d <= max_d; ++d) {
        if (static_cast<int>(current.size()) < 25)
            throw std::runtime_error("integration_order: series too short after differencing " +
                                     std::to_string(d) + " times");
        UnitRootResult adf = adf_test(current);
        UnitRootResult kpss = kpss_test(current);
        result.trail.push_back(adf);
        result.trail.push_back(kpss);
        const bool stationary = adf.pvalue.value < 0.05 && !(kpss.pvalue.value < 0.05);
        if (stationary) {
            result.order = d;
            result.decisive = true;
            return result;
        }
        if (d < max_d) current = difference(current);
    }
    result.order = max_d;
    result.decisive = false;
    return result;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> var_design(const Eigen::MatrixXd& data, int total_lags) {
    const int T = static_cast<int>(data.rows());
    const int K = static_cast<int>(data.cols());
    const int rows = T - total_lags;
    Eigen::MatrixXd y = data.bottomRows(rows);
    Eigen::MatrixXd z(rows, 1 + K * total_lags);
    z.col(0).setOnes();
    for (int j = 1; j <= total_lags; ++j)
        z.middleCols(1 + (j - 1) * K, K) = data.middleRows(total_lags - j, rows);
    return {std::move(y), std::move(z)};
}

VarModel fit_var(const AlignedSeries& data, int p, int extra) {
    if (p < 1) throw std::invalid_argument("fit_var: lag order must be positive");
    if (extra < 0) throw std::invalid_argument("fit_var: extra lags must be nonnegative");
    const int K = data.K();
    const int L = p + extra;
    const int T = data.T();
    const int n_reg = 1 + K * L;
    if (T - L <= n_reg)
        throw std::runtime_error("fit_var: infeasible sample (T=" + std::to_string(T) + ", K=" +
                                 std::to_string(K) + ", p=" + std::to_string(p) + ", extra=" +
                                 std::to_string(extra) + ")");

    auto [y, z] = var_design(data.data, L);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
    if (qr.rank() < n_reg)
        throw std::runtime_error("fit_var: rank-deficient regressor matrix (K=" + std::to_string(K) +
                                 ", p=" + std::to_string(p) + ", extra=" + std::to_string(extra) +
                                 ", T=" + std::to_string(T) + ")");

    VarModel m;
    m.lag_order = p;
    m.extra_lags = extra;
    m.K = K;
    m.T_eff = static_cast<int>(y.rows());

    Eigen::MatrixXd b = qr.solve(y);  // n_reg x K
    m.design = std::move(z);
    m.fitted = m.design * b;
    m.residuals = y - m.fitted;
    m.sigma_mle = m.residuals.transpose() * m.residuals / static_cast<double>(m.T_eff);
    m.sigma_unbiased = m.residuals.transpose() * m.residuals / static_cast<double>(m.T_eff - n_reg);
    m.zz_inv = xtx_inverse(qr);
    m.intercept = b.row(0).transpose();
    m.coef.reserve(static_cast<std::size_t>(L));
    for (int j = 0; j < L; ++j) m.coef.push_back(b.middleRows(1 + j * K, K).transpose());
    return m;
}

Eigen::MatrixXd VarModel::coef_cov() const {
    const int n_reg_ = n_regressors();
    Eigen::MatrixXd cov(K * n_reg_, K * n_reg_);
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
            cov.block(i * n_reg_, j * n_reg_, n_reg_, n_reg_) = sigma_unbiased(i, j) * zz_inv;
    return cov;
}

LagSelection lag_criteria(const AlignedSeries& data, int p_max) {
    if (p_max < 1) throw std::invalid_argument("lag_criteria: p_max must be positive");
    const int K = data.K();
    const int T = data.T();
    const int t_star = T - p_max;
    if (t_star <= K * p_max + 1)
        throw std::runtime_error("lag_criteria: infeasible p_max=" + std::to_string(p_max) + " for T=" +
                                 std::to_string(T) + ", K=" + std::to_string(K));

    // All candidate orders share the common effective sample of T - p_max
    // rows so their criteria are comparable.
    auto [y, z_full] = var_design(data.data, p_max);

    LagSelection table;
    table.p_max = p_max;
    for (int p = 1; p <= p_max; ++p) {
        const int n_reg = 1 + K * p;
        Eigen::MatrixXd z = z_full.leftCols(n_reg);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
        if (qr.rank() < n_reg)
            throw std::runtime_error("lag_criteria: rank-deficient regressors at p=" + std::to_string(p));
        Eigen::MatrixXd resid = y - z * qr.solve(y);
        Eigen::MatrixXd sigma = resid.transpose() * resid / static_cast<double>(t_star);

        Eigen::LLT<Eigen::MatrixXd> llt(sigma);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("lag_criteria: singular residual covariance at p=" + std::to_string(p));
        Eigen::MatrixXd chol = llt.matrixL();
        double log_det = 0.0;
        for (int i = 0; i < K; ++i) log_det += 2.0 * std::log(chol(i, i));

        const double ts = static_cast<double>(t_star);
        const double penalty = static_cast<double>(p) * K * K;
        const double q = static_cast<double>(K) * p + 1.0;
        LagCriteriaRow row;
        row.p = p;
        row.log_det_sigma = log_det;
        row.aic = log_det + (2.0 / ts) * penalty;
        row.hq = log_det + (2.0 * std::log(std::log(ts)) / ts) * penalty;
        row.sc = log_det + (std::log(ts) / ts) * penalty;
        row.fpe = std::pow((ts + q) / (ts - q), K) * std::exp(log_det);
        if (!std::isfinite(row.aic) || !std::isfinite(row.hq) || !std::isfinite(row.sc) || !std::isfinite(row.fpe))
            throw std::runtime_error("lag_criteria: non-finite criterion at p=" + std::to_string(p));
        table.rows.push_back(row);
    }
    return table;
}

namespace {

double criterion_value(const LagCriteriaRow& row, LagCriterion c) {
    switch (c) {
        case LagCriterion::AIC: return row.aic;
        case LagCriterion::HQ: return row.hq;
        case LagCriterion::SC: return row.sc;
        case LagCriterion::FPE: return row.fpe;
    }
    throw std::logic_error("criterion_value: bad criterion");
}

}  // namespace

int select_lag(const LagSelection& table, LagCriterion criterion) {
    if (table.rows.empty()) throw std::invalid_argument("select_lag: empty criteria table");
    int best_p = table.rows.front().p;
    double best = criterion_value(table.rows.front(), criterion);
    for (const auto& row : table.rows) {
        double v = criterion_value(row, criterion);
        if (v < best) {
            best = v;
            best_p = row.p;
        }
    }
    return best_p;
}

const char* criterion_name(LagCriterion c) {
    switch (c) {
        case LagCriterion::AIC: return "AIC";
        case LagCriterion::HQ: return "HQ";
        case LagCriterion::SC: return "SC";
        case LagCriterion::FPE: return "FPE";
    }
    return "?";
}

std::optional<LagCriterion> criterion_from_name(std::string_view name) {
    if (name == "AIC" || name == "aic") return LagCriterion::AIC;
    if (name == "HQ" || name == "hq") return LagCriterion::HQ;
    if (name == "SC" || name == "sc") return LagCriterion::SC;
    if (name == "FPE" || name == "fpe") return LagCriterion::FPE;
    return std::nullopt;
}

DiagnosticResult portmanteau_test(const VarModel& model, int h) {
    const int L = model.total_lags();
    if (h <= L)
        throw std::invalid_argument("portmanteau_test: horizon h=" + std::to_string(h) +
                                    " must exceed the fitted lag order " + std::to_string(L));
    const int T = model.T_eff;
    const int K = model.K;
    if (h >= T) throw std::invalid_argument("portmanteau_test: horizon exceeds the sample");

    const Eigen::MatrixXd& e = model.residuals;
    Eigen::MatrixXd c0 = e.transpose() * e / static_cast<double>(T);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(c0);
    if (!lu.isInvertible()) throw std::runtime_error("portmanteau_test: singular residual covariance");
    Eigen::MatrixXd c0_inv = lu.inverse();

    double q = 0.0;
    for (int j = 1; j <= h; ++j) {
        Eigen::MatrixXd cj = e.bottomRows(T - j).transpose() * e.topRows(T - j) / static_cast<double>(T);
        q += (cj.transpose() * c0_inv * cj * c0_inv).trace() / static_cast<double>(T - j);
    }
    q *= static_cast<double>(T) * T;

    DiagnosticResult result;
    result.method = SerialTest::PortmanteauAdjusted;
    result.statistic = q;
    result.df = K * K * (h - L);
    result.pvalue = chi_square_sf(q, result.df);
    return result;
}

DiagnosticResult breusch_godfrey_test(const VarModel& model, int h) {
    if (h < 1) throw std::invalid_argument("breusch_godfrey_test: h must be positive");
    const int T = model.T_eff;
    const int K = model.K;
    const Eigen::MatrixXd& e = model.residuals;

    // Original regressors plus h lags of residuals; initial residual lags
    // are zero-filled.
    Eigen::MatrixXd z(T, model.design.cols() + h * K);
    z.leftCols(model.design.cols()) = model.design;
    for (int j = 1; j <= h; ++j) {
        Eigen::MatrixXd lagged = Eigen::MatrixXd::Zero(T, K);
        lagged.bottomRows(T - j) = e.topRows(T - j);
        z.middleCols(model.design.cols() + (j - 1) * K, K) = lagged;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
    Eigen::MatrixXd resid = e - z * qr.solve(e);
    Eigen::MatrixXd sigma_aux = resid.transpose() * resid / static_cast<double>(T);

    Eigen::FullPivLU<Eigen::MatrixXd> lu(model.sigma_mle);
    if (!lu.isInvertible()) throw std::runtime_error("breusch_godfrey_test: singular residual covariance");
    const double lm = T * (K - (lu.inverse() * sigma_aux).trace());

    DiagnosticResult result;
    result.method = SerialTest::BreuschGodfrey;
    result.statistic = std::max(lm, 0.0);
    result.df = h * K * K;
    result.pvalue = chi_square_sf(result.statistic, result.df);
    return result;
}

StabilityResult ols_cusum(const VarModel& model, double alpha) {
    if (model.T_eff < 10) throw std::runtime_error("ols_cusum: effective sample too short");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ols_cusum: alpha must be in (0,1)");

    StabilityResult result;
    result.alpha = alpha;
    result.boundary = brownian_bridge_sup_quantile(alpha);
    const double scale_t = std::sqrt(static_cast<double>(model.T_eff));
    for (int k = 0; k < model.K; ++k) {
        const double sd = std::sqrt(model.sigma_unbiased(k, k));
        if (sd == 0.0) throw std::runtime_error("ols_cusum: zero residual variance in equation " +
                                                std::to_string(k));
        std::vector<double> path;
        path.reserve(static_cast<std::size_t>(model.T_eff));
        double cum = 0.0;
        for (int t = 0; t < model.T_eff; ++t) {
            cum += model.residuals(t, k);
            path.push_back(cum / (sd * scale_t));
            if (std::abs(path.back()) > result.boundary) result.crossed = true;
        }
        result.paths.push_back(std::move(path));
    }
    return result;
}

void write_fluctuation_csv(const StabilityResult& stability, const std::vector<std::string>& labels,
                           std::ostream& out) {
    out << "t,equation,value,boundary\n";
    for (std::size_t k = 0; k < stability.paths.size(); ++k) {
        const std::string label = k < labels.size() ? labels[k] : "eq" + std::to_string(k);
        for (std::size_t t = 0; t < stability.paths[k].size(); ++t)
            out << t + 1 << ',' << label << ',' << format_fixed(stability.paths[k][t], 8) << ','
                << format_fixed(stability.boundary, 8) << '\n';
    }
}

}  // namespace uncert
