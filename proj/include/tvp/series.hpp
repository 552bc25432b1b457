#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tvp {

/// Calendar month. Ordered by 12*year + month.
class MonthDate {
public:
    constexpr MonthDate() = default;
    MonthDate(int year, int month);

    /// Parses "YYYY-MM". Throws Error(MalformedInput).
    static MonthDate parse(std::string_view text);
    static MonthDate from_index(long index);

    [[nodiscard]] constexpr int year() const noexcept { return year_; }
    [[nodiscard]] constexpr int month() const noexcept { return month_; }

    /// Months since year 0, month 1.
    [[nodiscard]] constexpr long index() const noexcept { return 12L * year_ + (month_ - 1); }

    [[nodiscard]] MonthDate plus_months(long months) const;
    [[nodiscard]] long months_until(const MonthDate& later) const noexcept {
        return later.index() - index();
    }

    /// "YYYY-MM"
    [[nodiscard]] std::string iso() const;
    /// "YYYYMmm", e.g. 1971M01
    [[nodiscard]] std::string label() const;

    friend constexpr bool operator==(const MonthDate& a, const MonthDate& b) noexcept {
        return a.index() == b.index();
    }
    friend constexpr std::strong_ordering operator<=>(const MonthDate& a,
                                                      const MonthDate& b) noexcept {
        return a.index() <=> b.index();
    }

private:
    int year_ = 1970;
    int month_ = 1;
};

std::ostream& operator<<(std::ostream& os, const MonthDate& d);

/// Gap-free monthly observations of one variable. Immutable after construction.
class MonthlySeries {
public:
    MonthlySeries(MonthDate start, std::vector<double> values, std::string name = {});

    [[nodiscard]] const MonthDate& start() const noexcept { return start_; }
    [[nodiscard]] MonthDate end() const { return date_at(values_.size() - 1); }
    [[nodiscard]] MonthDate date_at(std::size_t i) const { return start_.plus_months(static_cast<long>(i)); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

    [[nodiscard]] MonthlySeries renamed(std::string name) const;

    friend bool operator==(const MonthlySeries&, const MonthlySeries&) = default;

private:
    MonthDate start_;
    std::vector<double> values_;
    std::string name_;
};

/// Price-index level (y) and money-stock level (x), aligned and strictly positive.
class Dataset {
public:
    Dataset(MonthlySeries y_raw, MonthlySeries x_raw);

    [[nodiscard]] const MonthlySeries& y_raw() const noexcept { return y_raw_; }
    [[nodiscard]] const MonthlySeries& x_raw() const noexcept { return x_raw_; }
    [[nodiscard]] std::size_t size() const noexcept { return y_raw_.size(); }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    MonthlySeries y_raw_;
    MonthlySeries x_raw_;
};

/// Which columns of a CSV hold the date, price level and money level.
/// Empty value-column names select the first and second non-date columns.
struct CsvSchema {
    std::string date_column = "date";
    std::string y_column;
    std::string x_column;
};

[[nodiscard]] Dataset parse_csv(std::istream& source, const CsvSchema& schema = {});
[[nodiscard]] Dataset read_csv_file(const std::string& path, const CsvSchema& schema = {});

/// Writes `date,<y name>,<x name>` with shortest round-trip number formatting.
void write_csv(std::ostream& out, const Dataset& data);

/// Shortest decimal representation that parses back to the same double.
[[nodiscard]] std::string format_double(double v);

enum class GrowthMode { LogDiff, PctChange };

[[nodiscard]] GrowthMode parse_growth_mode(std::string_view text);
[[nodiscard]] std::string_view to_string(GrowthMode mode) noexcept;

/// Year-on-year growth in percent: 100*(ln s_t - ln s_{t-12}) or 100*(s_t/s_{t-12} - 1).
[[nodiscard]] MonthlySeries yoy_growth(const MonthlySeries& s, GrowthMode mode = GrowthMode::LogDiff);

/// Natural log of every value; values must be positive.
[[nodiscard]] MonthlySeries log_levels(const MonthlySeries& s);

/// s_t - s_{t-1}, starting one month later.
[[nodiscard]] MonthlySeries first_difference(const MonthlySeries& s);

/// Multiplies every value by `factor`.
[[nodiscard]] MonthlySeries scaled(const MonthlySeries& s, double factor);

/// Returns the mean-removed series and the removed mean.
[[nodiscard]] std::pair<MonthlySeries, double> demean(const MonthlySeries& s);

/// Inclusive slice [from, to].
[[nodiscard]] MonthlySeries window(const MonthlySeries& s, MonthDate from, MonthDate to);

struct DecadeAverage {
    std::string label;  // "1970s"
    MonthDate first;
    MonthDate last;
    double mean = 0.0;
};

/// One entry per calendar decade touched by the series; partial decades average
/// over the months available.
[[nodiscard]] std::vector<DecadeAverage> decade_averages(const MonthlySeries& s);

/// Throws Error(LengthMismatch) unless both series share start and length.
void require_aligned(const MonthlySeries& a, const MonthlySeries& b);

}  // namespace tvp
