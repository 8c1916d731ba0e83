#include "uncert/granger.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "uncert/util.hpp"

namespace uncert {

void TYConfig::validate() const {
    if (p_max < 1) throw std::invalid_argument("config: p_max must be >= 1");
    if (!(alpha_diag > 0.0 && alpha_diag < 1.0))
        throw std::invalid_argument("config: alpha_diag must be in (0,1)");
    if (!(cusum_alpha > 0.0 && cusum_alpha < 1.0))
        throw std::invalid_argument("config: cusum_alpha must be in (0,1)");
    if (h_portmanteau <= p_max)
        throw std::invalid_argument("config: h_portmanteau must exceed p_max so the diagnostics loop can run");
    if (h_bg < 1) throw std::invalid_argument("config: h_bg must be >= 1");
    if (max_d < 1 || max_d > 2) throw std::invalid_argument("config: max_d must be 1 or 2");
    if (min_months < 12) throw std::invalid_argument("config: min_months must be >= 12");
}

double wald_statistic(const Eigen::VectorXd& beta, const Eigen::MatrixXd& cov, const Eigen::MatrixXd& r) {
    if (r.cols() != beta.size() || cov.rows() != beta.size() || cov.cols() != beta.size())
        throw std::invalid_argument("wald_statistic: dimension mismatch");
    Eigen::VectorXd rb = r * beta;
    Eigen::MatrixXd rvr = r * cov * r.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(rvr);
    if (!lu.isInvertible()) throw std::runtime_error("wald_statistic: singular restricted covariance");
    return rb.dot(lu.solve(rb));
}

WaldResult wald_exclusion(const VarModel& model, int target_eq, int source_var, int p) {
    if (target_eq < 0 || target_eq >= model.K || source_var < 0 || source_var >= model.K)
        throw std::invalid_argument("wald_exclusion: variable index out of range");
    if (p < 1 || p > model.lag_order)
        throw std::invalid_argument("wald_exclusion: p=" + std::to_string(p) +
                                    " outside the restrictable lags 1.." + std::to_string(model.lag_order));

    const int n_reg = model.n_regressors();
    Eigen::VectorXd beta(n_reg);
    beta(0) = model.intercept(target_eq);
    for (int j = 1; j <= model.total_lags(); ++j)
        for (int v = 0; v < model.K; ++v) beta(1 + (j - 1) * model.K + v) = model.coef_at(target_eq, v, j);

    Eigen::MatrixXd cov = model.sigma_unbiased(target_eq, target_eq) * model.zz_inv;

    // Restriction picks source lags 1..p only; augmentation lags stay free.
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(p, n_reg);
    for (int j = 1; j <= p; ++j) r(j - 1, 1 + (j - 1) * model.K + source_var) = 1.0;

    WaldResult result;
    result.statistic = wald_statistic(beta, cov, r);
    result.df = p;
    result.pvalue = chi_square_sf(result.statistic, result.df);
    return result;
}

namespace {

TrailEntry stat_entry(std::string label, double stat, double pvalue, std::string note = {}) {
    TrailEntry e;
    e.label = std::move(label);
    e.statistic = stat;
    e.pvalue = pvalue;
    e.has_stats = true;
    e.note = std::move(note);
    return e;
}

TrailEntry note_entry(std::string label, std::string note) {
    TrailEntry e;
    e.label = std::move(label);
    e.note = std::move(note);
    return e;
}

void record_unit_roots(std::vector<TrailEntry>& trail, const std::string& label, const IntegrationOrder& order) {
    for (std::size_t i = 0; i < order.trail.size(); ++i) {
        const auto& u = order.trail[i];
        const int d = static_cast<int>(i / 2);
        std::string name = std::string(u.method == UnitRootMethod::ADF ? "ADF" : "KPSS") + "(" + label +
                           " d=" + std::to_string(d) + ")";
        trail.push_back(stat_entry(std::move(name), u.statistic, u.pvalue.value,
                                   "lags=" + std::to_string(u.lags)));
    }
    trail.push_back(note_entry("integration(" + label + ")", "d=" + std::to_string(order.order)));
}

std::string compact_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace

std::string GrangerReport::diag_notes() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& e : trail) {
        if (!first) out << "; ";
        first = false;
        out << e.label;
        if (e.has_stats) out << "=" << compact_number(e.statistic) << " p=" << compact_number(e.pvalue);
        if (!e.note.empty()) out << " [" << e.note << "]";
    }
    std::string s = out.str();
    std::replace(s.begin(), s.end(), ',', ' ');
    return s;
}

GrangerReport toda_yamamoto(const MonthlySeries& x, const MonthlySeries& y, const TYConfig& cfg) {
    cfg.validate();
    AlignedSeries aligned = align_series({x, y});
    if (aligned.T() < cfg.min_months)
        throw std::runtime_error("toda_yamamoto: only " + std::to_string(aligned.T()) +
                                 " common months between '" + x.label + "' and '" + y.label +
                                 "', need at least " + std::to_string(cfg.min_months));

    GrangerReport report;
    report.label_x = aligned.labels[0];
    report.label_y = aligned.labels[1];
    report.sample_start = aligned.months.front();
    report.sample_end = aligned.months.back();
    report.n_months = aligned.T();

    // Step 1: order of integration of both series.
    std::vector<double> col_x(aligned.data.col(0).data(), aligned.data.col(0).data() + aligned.T());
    std::vector<double> col_y(aligned.data.col(1).data(), aligned.data.col(1).data() + aligned.T());
    IntegrationOrder ox = integration_order(col_x, cfg.max_d);
    record_unit_roots(report.trail, report.label_x, ox);
    IntegrationOrder oy = integration_order(col_y, cfg.max_d);
    record_unit_roots(report.trail, report.label_y, oy);
    if (!ox.decisive)
        throw std::runtime_error("toda_yamamoto: integration order of '" + report.label_x +
                                 "' undetermined within max_d=" + std::to_string(cfg.max_d));
    if (!oy.decisive)
        throw std::runtime_error("toda_yamamoto: integration order of '" + report.label_y +
                                 "' undetermined within max_d=" + std::to_string(cfg.max_d));
    report.m = std::max(ox.order, oy.order);

    // Step 2: lag order from information criteria on the levels.
    LagSelection criteria = lag_criteria(aligned, cfg.p_max);
    report.p = select_lag(criteria, cfg.criterion);
    report.trail.push_back(note_entry(std::string("lag-selection(") + criterion_name(cfg.criterion) + ")",
                                      "p=" + std::to_string(report.p)));

    // Step 3: OLS-CUSUM stability of the chosen VAR.
    VarModel model = fit_var(aligned, report.p);
    report.stability = ols_cusum(model, cfg.cusum_alpha);
    report.trail.push_back(note_entry("ols-cusum",
                                      report.stability.crossed ? "boundary crossed (instability warning)"
                                                               : "stable"));

    // Step 4: raise p until both serial-correlation tests pass.
    while (true) {
        DiagnosticResult pt = portmanteau_test(model, cfg.h_portmanteau);
        DiagnosticResult bg = breusch_godfrey_test(model, cfg.h_bg);
        report.trail.push_back(stat_entry("portmanteau(h=" + std::to_string(cfg.h_portmanteau) + " p=" +
                                              std::to_string(report.p) + ")",
                                          pt.statistic, pt.pvalue.value, "df=" + std::to_string(pt.df)));
        report.trail.push_back(stat_entry("breusch-godfrey(h=" + std::to_string(cfg.h_bg) + " p=" +
                                              std::to_string(report.p) + ")",
                                          bg.statistic, bg.pvalue.value, "df=" + std::to_string(bg.df)));
        const bool autocorrelated = pt.pvalue.value < cfg.alpha_diag || bg.pvalue.value < cfg.alpha_diag;
        if (!autocorrelated) {
            report.diag_clean = true;
            break;
        }
        if (report.p >= cfg.p_max) {
            report.diag_clean = false;
            report.trail.push_back(note_entry("diagnostics", "serial correlation persists at p_max=" +
                                                                 std::to_string(cfg.p_max)));
            break;
        }
        ++report.p;
        model = fit_var(aligned, report.p);
    }

    // Steps 5-6: augment by m lags, then test exclusion of the first p lags.
    VarModel augmented = fit_var(aligned, report.p, report.m);
    report.wald_xy = wald_exclusion(augmented, 1, 0, report.p);
    report.wald_yx = wald_exclusion(augmented, 0, 1, report.p);
    report.trail.push_back(stat_entry("wald(" + report.label_x + "->" + report.label_y + ")",
                                      report.wald_xy.statistic, report.wald_xy.pvalue.value,
                                      "df=" + std::to_string(report.wald_xy.df)));
    report.trail.push_back(stat_entry("wald(" + report.label_y + "->" + report.label_x + ")",
                                      report.wald_yx.statistic, report.wald_yx.pvalue.value,
                                      "df=" + std::to_string(report.wald_yx.df)));
    return report;
}

CausalityTable causality_matrix(const std::vector<std::pair<MonthlySeries, MonthlySeries>>& pairs,
                                const TYConfig& cfg, const std::vector<std::optional<MonthRange>>& subsamples) {
    std::vector<std::optional<MonthRange>> ranges = subsamples;
    if (ranges.empty()) ranges.push_back(std::nullopt);

    CausalityTable table;
    for (const auto& r : ranges)
        table.range_names.push_back(r ? r->from.str() + ".." + r->to.str() : "full");

    for (const auto& [x, y] : pairs) {
        for (std::size_t ri = 0; ri < ranges.size(); ++ri) {
            CausalityCell cell;
            cell.label_x = x.label;
            cell.label_y = y.label;
            cell.range_name = table.range_names[ri];
            try {
                const MonthlySeries xs = ranges[ri] ? slice(x, ranges[ri]->from, ranges[ri]->to) : x;
                const MonthlySeries ys = ranges[ri] ? slice(y, ranges[ri]->from, ranges[ri]->to) : y;
                cell.outcome = toda_yamamoto(xs, ys, cfg);
            } catch (const std::exception& e) {
                cell.outcome = std::string(e.what());
            }
            table.cells.push_back(std::move(cell));
        }
    }
    return table;
}

namespace {

std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ' ';
    return s;
}

void report_row(std::ostream& out, const CausalityCell& cell, bool forward) {
    const std::string& from = forward ? cell.label_x : cell.label_y;
    const std::string& to = forward ? cell.label_y : cell.label_x;
    out << csv_safe(from) << ',' << csv_safe(to) << ',';
    if (cell.ok()) {
        const GrangerReport& rep = cell.report();
        const WaldResult& w = forward ? rep.wald_xy : rep.wald_yx;
        out << rep.sample_start.str() << ',' << rep.sample_end.str() << ',' << rep.m << ',' << rep.p << ','
            << format_fixed(w.statistic, 8) << ',' << w.df << ',' << format_fixed(w.pvalue.value, 8) << ','
            << (rep.stability.crossed ? "true" : "false") << ',' << csv_safe(rep.diag_notes()) << '\n';
    } else {
        out << ",,,,,,,," << "error: " << csv_safe(cell.error()) << '\n';
    }
}

}  // namespace

void write_report_csv(const CausalityTable& table, std::ostream& out) {
    out << "from,to,sample_start,sample_end,m,p,wald_stat,df,pvalue,stability_crossed,diag_notes\n";
    for (const auto& cell : table.cells) {
        report_row(out, cell, true);
        report_row(out, cell, false);
    }
}

std::string format_pvalue_3(double p) {
    if (p < 0.001) return "<0.001";
    return format_fixed(p, 3);
}

void write_summary(const CausalityTable& table, std::ostream& out) {
    // Collect one row per direction per pair, keyed in first-seen order.
    struct Row {
        std::string from, to;
        std::vector<std::string> values;
    };
    std::vector<Row> rows;
    auto row_for = [&](const std::string& from, const std::string& to) -> Row& {
        for (auto& r : rows)
            if (r.from == from && r.to == to) return r;
        rows.push_back({from, to, std::vector<std::string>(table.range_names.size(), "-")});
        return rows.back();
    };
    auto range_index = [&](const std::string& name) {
        for (std::size_t i = 0; i < table.range_names.size(); ++i)
            if (table.range_names[i] == name) return i;
        return std::size_t{0};
    };
    for (const auto& cell : table.cells) {
        std::size_t ri = range_index(cell.range_name);
        Row& fwd = row_for(cell.label_x, cell.label_y);
        fwd.values[ri] = cell.ok() ? format_pvalue_3(cell.report().wald_xy.pvalue.value) : "err";
        Row& rev = row_for(cell.label_y, cell.label_x);
        rev.values[ri] = cell.ok() ? format_pvalue_3(cell.report().wald_yx.pvalue.value) : "err";
    }

    std::size_t wf = 4, wt = 2;
    for (const auto& r : rows) {
        wf = std::max(wf, r.from.size());
        wt = std::max(wt, r.to.size());
    }
    std::vector<std::size_t> wc;
    for (const auto& name : table.range_names) wc.push_back(std::max<std::size_t>(name.size(), 8));

    auto pad = [&](std::ostream& o, const std::string& s, std::size_t w) {
        o << s;
        for (std::size_t i = s.size(); i < w + 2; ++i) o << ' ';
    };

    out << "Granger causality p-values (Toda-Yamamoto procedure)\n\n";
    pad(out, "From", wf);
    pad(out, "To", wt);
    for (std::size_t i = 0; i < table.range_names.size(); ++i) pad(out, table.range_names[i], wc[i]);
    out << '\n';
    for (const auto& r : rows) {
        pad(out, r.from, wf);
        pad(out, r.to, wt);
        for (std::size_t i = 0; i < r.values.size(); ++i) pad(out, r.values[i], wc[i]);
        out << '\n';
    }

    out << "\nDetails\n";
    for (const auto& cell : table.cells) {
        out << "- " << cell.label_x << " / " << cell.label_y << " [" << cell.range_name << "]: ";
        if (cell.ok()) {
            const GrangerReport& rep = cell.report();
            out << rep.sample_start.str() << ".." << rep.sample_end.str() << " (" << rep.n_months
                << " months), m=" << rep.m << ", p=" << rep.p << ", wald " << rep.label_x << "->"
                << rep.label_y << " stat=" << format_fixed(rep.wald_xy.statistic, 3)
                << " p=" << format_pvalue_3(rep.wald_xy.pvalue.value) << ", wald " << rep.label_y << "->"
                << rep.label_x << " stat=" << format_fixed(rep.wald_yx.statistic, 3)
                << " p=" << format_pvalue_3(rep.wald_yx.pvalue.value)
                << (rep.stability.crossed ? ", stability: boundary crossed" : ", stability: ok")
                << (rep.diag_clean ? "" : ", WARNING: serial correlation persists at p_max") << '\n';
        } else {
            out << "error: " << cell.error() << '\n';
        }
    }
}

}  // namespace uncert
