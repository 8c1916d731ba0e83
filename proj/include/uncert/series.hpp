#pragma once

#include <compare>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace uncert {

/// Calendar month, the index unit of every series in the pipeline.
struct Month {
    int year = 0;
    int month = 1;  // 1..12

    static std::optional<Month> parse(std::string_view text);  // "YYYY-MM"
    std::string str() const;

    int index() const { return year * 12 + (month - 1); }
    static Month from_index(int idx);
    Month next() const { return from_index(index() + 1); }

    auto operator<=>(const Month&) const = default;
};

/// Calendar date with validity checking (leap years included).
struct Date {
    int year = 0;
    int month = 1;
    int day = 1;

    static std::optional<Date> parse(std::string_view text);  // "YYYY-MM-DD"
    std::string str() const;
    Month month_key() const { return Month{year, month}; }

    auto operator<=>(const Date&) const = default;
};

/// Month-indexed series with strictly increasing months. Proportion series
/// stay in [0,1]; imported index series and standardized output reuse the
/// type without that bound.
struct MonthlySeries {
    std::string label;
    std::vector<std::pair<Month, double>> points;

    bool empty() const { return points.empty(); }
    std::size_t size() const { return points.size(); }
    Month first_month() const { return points.front().first; }
    Month last_month() const { return points.back().first; }
};

struct MonthRange {
    Month from;
    Month to;  // inclusive
};

// CSV schema: header "month,value", months as YYYY-MM, values to 8 decimals.
MonthlySeries read_series_csv(std::istream& in, std::string label);
MonthlySeries load_series_csv(const std::string& path, std::string label = "");
void write_series_csv(const MonthlySeries& series, std::ostream& out);
void save_series_csv(const MonthlySeries& series, const std::string& path);

/// Months absent between the series' first and last month.
std::vector<Month> missing_months(const MonthlySeries& series);

/// Z-scores a series (sample standard deviation). Errors on fewer than two
/// points or zero variance.
MonthlySeries standardize(const MonthlySeries& series);

/// Points with from <= month <= to.
MonthlySeries slice(const MonthlySeries& series, Month from, Month to);

}  // namespace uncert
