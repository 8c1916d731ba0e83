#include "uncert/series.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "uncert/util.hpp"

namespace uncert {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

int days_in_month(int year, int month) {
    static const int table[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return table[month - 1];
}

}  // namespace

std::optional<Month> Month::parse(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') return std::nullopt;
    auto y = text.substr(0, 4);
    auto m = text.substr(5, 2);
    if (!all_digits(y) || !all_digits(m)) return std::nullopt;
    Month out;
    parse_int(y, out.year);
    parse_int(m, out.month);
    if (out.month < 1 || out.month > 12) return std::nullopt;
    return out;
}

std::string Month::str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

Month Month::from_index(int idx) {
    Month m;
    m.year = idx / 12;
    m.month = idx % 12 + 1;
    if (idx < 0 && idx % 12 != 0) {
        m.year -= 1;
        m.month = idx - 12 * m.year + 1;
    }
    return m;
}

std::optional<Date> Date::parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto y = text.substr(0, 4);
    auto m = text.substr(5, 2);
    auto d = text.substr(8, 2);
    if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return std::nullopt;
    Date out;
    parse_int(y, out.year);
    parse_int(m, out.month);
    parse_int(d, out.day);
    if (out.month < 1 || out.month > 12) return std::nullopt;
    if (out.day < 1 || out.day > days_in_month(out.year, out.month)) return std::nullopt;
    return out;
}

std::string Date::str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

MonthlySeries read_series_csv(std::istream& in, std::string label) {
    MonthlySeries series;
    series.label = std::move(label);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("series CSV: empty input");
    if (trim(line) != "month,value")
        throw std::runtime_error("series CSV: expected header 'month,value', got '" + std::string(trim(line)) + "'");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = trim(line);
        if (row.empty()) continue;
        auto fields = split(row, ',');
        if (fields.size() != 2)
            throw std::runtime_error("series CSV: line " + std::to_string(line_no) + ": expected 2 fields");
        auto month = Month::parse(fields[0]);
        if (!month)
            throw std::runtime_error("series CSV: line " + std::to_string(line_no) + ": bad month '" +
                                     std::string(fields[0]) + "'");
        double value = 0.0;
        if (!parse_double(fields[1], value) || !std::isfinite(value))
            throw std::runtime_error("series CSV: line " + std::to_string(line_no) + ": bad value '" +
                                     std::string(fields[1]) + "'");
        if (!series.points.empty() && !(series.points.back().first < *month))
            throw std::runtime_error("series CSV: line " + std::to_string(line_no) +
                                     ": months not strictly increasing at " + month->str());
        series.points.emplace_back(*month, value);
    }
    return series;
}

MonthlySeries load_series_csv(const std::string& path, std::string label) {
    if (label.empty()) label = std::filesystem::path(path).stem().string();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open series CSV: " + path);
    try {
        return read_series_csv(in, std::move(label));
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void write_series_csv(const MonthlySeries& series, std::ostream& out) {
    out << "month,value\n";
    for (const auto& [month, value] : series.points)
        out << month.str() << ',' << format_fixed(value, 8) << '\n';
}

void save_series_csv(const MonthlySeries& series, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write series CSV: " + path);
    write_series_csv(series, out);
}

std::vector<Month> missing_months(const MonthlySeries& series) {
    std::vector<Month> out;
    if (series.empty()) return out;
    std::size_t idx = 0;
    for (int i = series.first_month().index(); i <= series.last_month().index(); ++i) {
        Month m = Month::from_index(i);
        if (idx < series.points.size() && series.points[idx].first == m)
            ++idx;
        else
            out.push_back(m);
    }
    return out;
}

MonthlySeries standardize(const MonthlySeries& series) {
    const std::size_t n = series.size();
    if (n < 2) throw std::runtime_error("standardize: need at least 2 points");
    double mean = 0.0;
    for (const auto& p : series.points) mean += p.second;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& p : series.points) {
        double d = p.second - mean;
        ss += d * d;
    }
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) throw std::runtime_error("standardize: series has zero variance");
    MonthlySeries out;
    out.label = series.label;
    out.points.reserve(n);
    for (const auto& [month, value] : series.points)
        out.points.emplace_back(month, (value - mean) / sd);
    return out;
}

MonthlySeries slice(const MonthlySeries& series, Month from, Month to) {
    MonthlySeries out;
    out.label = series.label;
    for (const auto& p : series.points)
        if (!(p.first < from) && !(to < p.first)) out.points.push_back(p);
    return out;
}

}  // namespace uncert
