#include "tvp/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "tvp/error.hpp"

namespace tvp {

// ---------------------------------------------------------------- MonthDate

MonthDate::MonthDate(int year, int month) : year_(year), month_(month) {
    if (month < 1 || month > 12) {
        throw Error(ErrorKind::InvalidArgument, fmt::format("month {} outside 1..12", month));
    }
}

MonthDate MonthDate::from_index(long index) {
    const long year = index >= 0 ? index / 12 : (index - 11) / 12;
    return {static_cast<int>(year), static_cast<int>(index - 12 * year) + 1};
}

MonthDate MonthDate::parse(std::string_view text) {
    auto bad = [&] {
        return Error(ErrorKind::MalformedInput, fmt::format("bad date '{}', expected YYYY-MM", text));
    };
    if (text.size() != 7 || text[4] != '-') throw bad();
    int year = 0;
    int month = 0;
    auto [p1, e1] = std::from_chars(text.data(), text.data() + 4, year);
    auto [p2, e2] = std::from_chars(text.data() + 5, text.data() + 7, month);
    if (e1 != std::errc{} || e2 != std::errc{} || p1 != text.data() + 4 || p2 != text.data() + 7) {
        throw bad();
    }
    if (month < 1 || month > 12) throw bad();
    return {year, month};
}

MonthDate MonthDate::plus_months(long months) const { return from_index(index() + months); }

std::string MonthDate::iso() const { return fmt::format("{:04d}-{:02d}", year_, month_); }

std::string MonthDate::label() const { return fmt::format("{:04d}M{:02d}", year_, month_); }

std::ostream& operator<<(std::ostream& os, const MonthDate& d) { return os << d.iso(); }

// ------------------------------------------------------------ MonthlySeries

MonthlySeries::MonthlySeries(MonthDate start, std::vector<double> values, std::string name)
    : start_(start), values_(std::move(values)), name_(std::move(name)) {
    if (values_.empty()) {
        throw Error(ErrorKind::EmptySeries, fmt::format("series '{}' has no observations", name_));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw Error(ErrorKind::MissingValue,
                        fmt::format("series '{}' has a non-finite value at {}", name_,
                                    date_at(i).iso()));
        }
    }
}

MonthlySeries MonthlySeries::renamed(std::string name) const {
    MonthlySeries out = *this;
    out.name_ = std::move(name);
    return out;
}

void require_aligned(const MonthlySeries& a, const MonthlySeries& b) {
    if (a.start() != b.start() || a.size() != b.size()) {
        throw Error(ErrorKind::LengthMismatch,
                    fmt::format("series '{}' ({} from {}) and '{}' ({} from {}) are not aligned",
                                a.name(), a.size(), a.start().iso(), b.name(), b.size(),
                                b.start().iso()));
    }
}

// ------------------------------------------------------------------ Dataset

Dataset::Dataset(MonthlySeries y_raw, MonthlySeries x_raw)
    : y_raw_(std::move(y_raw)), x_raw_(std::move(x_raw)) {
    require_aligned(y_raw_, x_raw_);
    for (const MonthlySeries* s : {&y_raw_, &x_raw_}) {
        for (std::size_t i = 0; i < s->size(); ++i) {
            if (!((*s)[i] > 0.0)) {
                throw Error(ErrorKind::NonPositiveLevel,
                            fmt::format("column '{}' at {} has non-positive level {}", s->name(),
                                        s->date_at(i).iso(), (*s)[i]));
            }
        }
    }
}

// ---------------------------------------------------------------------- CSV

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(pos)));
            return cells;
        }
        cells.push_back(trim(line.substr(pos, comma - pos)));
        pos = comma + 1;
    }
}

bool parse_number(std::string_view cell, double& out) {
    if (cell.empty()) return false;
    if (cell.front() == '+') cell.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc{} && ptr == cell.data() + cell.size() && std::isfinite(out);
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw Error(ErrorKind::MalformedInput, fmt::format("column '{}' not in header", name));
    }
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

Dataset parse_csv(std::istream& source, const CsvSchema& schema) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(source, line)) {
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (trim(line).empty()) continue;
        for (auto cell : split(line)) header.emplace_back(cell);
        break;
    }
    if (header.empty()) throw Error(ErrorKind::MalformedInput, "missing header row");

    const std::size_t date_col = find_column(header, schema.date_column);
    std::vector<std::size_t> value_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != date_col) value_cols.push_back(c);
    }
    if (value_cols.size() < 2) {
        throw Error(ErrorKind::MalformedInput, "need a date column and at least two numeric columns");
    }
    const std::size_t y_col =
        schema.y_column.empty() ? value_cols[0] : find_column(header, schema.y_column);
    const std::size_t x_col =
        schema.x_column.empty() ? value_cols[1] : find_column(header, schema.x_column);
    if (y_col == x_col || y_col == date_col || x_col == date_col) {
        throw Error(ErrorKind::InvalidArgument, "date, price and money columns must be distinct");
    }

    struct Row {
        MonthDate date;
        double y;
        double x;
        std::size_t line;
    };
    std::vector<Row> rows;
    while (std::getline(source, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw Error(ErrorKind::MissingValue,
                        fmt::format("line {}: expected {} cells, found {}", line_no, header.size(),
                                    cells.size()));
        }
        Row row{MonthDate::parse(cells[date_col]), 0.0, 0.0, line_no};
        for (std::size_t c : value_cols) {
            double v = 0.0;
            if (!parse_number(cells[c], v)) {
                throw Error(ErrorKind::MissingValue,
                            fmt::format("line {}: column '{}' has empty or non-numeric cell '{}'",
                                        line_no, header[c], cells[c]));
            }
            if (c == y_col) row.y = v;
            if (c == x_col) row.x = v;
        }
        for (auto [v, col] : {std::pair{row.y, y_col}, std::pair{row.x, x_col}}) {
            if (!(v > 0.0)) {
                throw Error(ErrorKind::NonPositiveLevel,
                            fmt::format("line {}: column '{}' has non-positive level {}", line_no,
                                        header[col], v));
            }
        }
        rows.push_back(row);
    }
    if (rows.empty()) throw Error(ErrorKind::MalformedInput, "no data rows");

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const long step = rows[i - 1].date.months_until(rows[i].date);
        if (step == 0) {
            throw Error(ErrorKind::DuplicateDate,
                        fmt::format("date {} appears twice (lines {} and {})", rows[i].date.iso(),
                                    rows[i - 1].line, rows[i].line));
        }
        if (step != 1) {
            throw Error(ErrorKind::GapInDates, fmt::format("gap between {} and {}",
                                                           rows[i - 1].date.iso(),
                                                           rows[i].date.iso()));
        }
    }

    std::vector<double> ys;
    std::vector<double> xs;
    ys.reserve(rows.size());
    xs.reserve(rows.size());
    for (const auto& r : rows) {
        ys.push_back(r.y);
        xs.push_back(r.x);
    }
    return Dataset(MonthlySeries(rows.front().date, std::move(ys), header[y_col]),
                   MonthlySeries(rows.front().date, std::move(xs), header[x_col]));
}

Dataset read_csv_file(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::MalformedInput, fmt::format("cannot open '{}'", path));
    return parse_csv(in, schema);
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, ptr};
}

void write_csv(std::ostream& out, const Dataset& data) {
    const auto& y = data.y_raw();
    const auto& x = data.x_raw();
    out << "date," << (y.name().empty() ? "y" : y.name()) << ','
        << (x.name().empty() ? "x" : x.name()) << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << y.date_at(i).iso() << ',' << format_double(y[i]) << ',' << format_double(x[i])
            << '\n';
    }
}

// --------------------------------------------------------------- transforms

GrowthMode parse_growth_mode(std::string_view text) {
    if (text == "logdiff" || text == "log-diff") return GrowthMode::LogDiff;
    if (text == "pct" || text == "pct-change") return GrowthMode::PctChange;
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("unknown growth mode '{}' (expected logdiff or pct)", text));
}

std::string_view to_string(GrowthMode mode) noexcept {
    return mode == GrowthMode::LogDiff ? "logdiff" : "pct";
}

MonthlySeries yoy_growth(const MonthlySeries& s, GrowthMode mode) {
    if (s.size() < 13) {
        throw Error(ErrorKind::TooShort,
                    fmt::format("year-on-year growth of '{}' needs 13 months, have {}", s.name(),
                                s.size()));
    }
    std::vector<double> out(s.size() - 12);
    for (std::size_t t = 12; t < s.size(); ++t) {
        const double now = s[t];
        const double before = s[t - 12];
        if (!(now > 0.0) || !(before > 0.0)) {
            throw Error(ErrorKind::NonPositiveLevel,
                        fmt::format("'{}' has a non-positive level near {}", s.name(),
                                    s.date_at(t).iso()));
        }
        out[t - 12] = mode == GrowthMode::LogDiff ? 100.0 * (std::log(now) - std::log(before))
                                                  : 100.0 * (now / before - 1.0);
    }
    return {s.start().plus_months(12), std::move(out), s.name()};
}

MonthlySeries log_levels(const MonthlySeries& s) {
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(s[i] > 0.0)) {
            throw Error(ErrorKind::NonPositiveLevel,
                        fmt::format("'{}' at {} is not positive", s.name(), s.date_at(i).iso()));
        }
        out[i] = std::log(s[i]);
    }
    return {s.start(), std::move(out), s.name()};
}

MonthlySeries first_difference(const MonthlySeries& s) {
    if (s.size() < 2) {
        throw Error(ErrorKind::TooShort, fmt::format("cannot difference '{}' of length 1", s.name()));
    }
    std::vector<double> out(s.size() - 1);
    for (std::size_t i = 1; i < s.size(); ++i) out[i - 1] = s[i] - s[i - 1];
    return {s.start().plus_months(1), std::move(out), s.name()};
}

MonthlySeries scaled(const MonthlySeries& s, double factor) {
    std::vector<double> out(s.values().begin(), s.values().end());
    for (double& v : out) v *= factor;
    return {s.start(), std::move(out), s.name()};
}

std::pair<MonthlySeries, double> demean(const MonthlySeries& s) {
    const auto v = s.values();
    double sum = 0.0;
    double abs_sum = 0.0;
    for (double e : v) {
        sum += e;
        abs_sum += std::abs(e);
    }
    const double mean = sum / static_cast<double>(v.size());
    // A mean inside the summation rounding bound is treated as zero, which makes
    // demeaning an already demeaned series a fixed point.
    if (std::abs(mean) <= 4.0 * std::numeric_limits<double>::epsilon() * abs_sum) {
        return {s, 0.0};
    }
    std::vector<double> out(v.begin(), v.end());
    for (double& e : out) e -= mean;
    return {MonthlySeries(s.start(), std::move(out), s.name()), mean};
}

MonthlySeries window(const MonthlySeries& s, MonthDate from, MonthDate to) {
    if (from > to) {
        throw Error(ErrorKind::OutOfRange,
                    fmt::format("window start {} is after end {}", from.iso(), to.iso()));
    }
    if (from < s.start() || to > s.end()) {
        throw Error(ErrorKind::OutOfRange,
                    fmt::format("window {}..{} outside span {}..{} of '{}'", from.iso(), to.iso(),
                                s.start().iso(), s.end().iso(), s.name()));
    }
    const auto first = static_cast<std::size_t>(s.start().months_until(from));
    const auto last = static_cast<std::size_t>(s.start().months_until(to));
    std::vector<double> out(s.values().begin() + static_cast<std::ptrdiff_t>(first),
                            s.values().begin() + static_cast<std::ptrdiff_t>(last) + 1);
    return {from, std::move(out), s.name()};
}

std::vector<DecadeAverage> decade_averages(const MonthlySeries& s) {
    std::vector<DecadeAverage> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const MonthDate first = s.date_at(i);
        const int decade = first.year() >= 0 ? first.year() / 10 * 10 : (first.year() - 9) / 10 * 10;
        std::size_t j = i;
        double sum = 0.0;
        while (j < s.size() && s.date_at(j).year() < decade + 10) {
            sum += s[j];
            ++j;
        }
        out.push_back({fmt::format("{}s", decade), first, s.date_at(j - 1),
                       sum / static_cast<double>(j - i)});
        i = j;
    }
    return out;
}

}  // namespace tvp
