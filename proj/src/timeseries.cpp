#include "embedcast/timeseries.hpp"

#include "embedcast/csv.hpp"
#include "embedcast/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

namespace embedcast {

namespace {

bool iequals(std::string_view a, std::string_view b)
{
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

int days_in_month(int year, int month)
{
    static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return month == 2 && leap ? 29 : days[month - 1];
}

} // namespace

bool is_iso_date(std::string_view text)
{
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return false;
    }
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
            return false;
        }
    }
    auto number = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            v = v * 10 + (text[i] - '0');
        }
        return v;
    };
    const int year = number(0, 4);
    const int month = number(5, 2);
    const int day = number(8, 2);
    return month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
}

SeriesFrame::SeriesFrame(std::vector<Column> columns, std::optional<std::vector<std::string>> dates, Step first_step)
    : columns_(std::move(columns)), dates_(std::move(dates)), first_step_(first_step)
{
    if (columns_.empty()) {
        throw DataError("series frame needs at least one column");
    }
    length_ = columns_.front().values.size();
    if (length_ == 0) {
        throw DataError("series frame needs at least one row");
    }
    std::set<std::string> seen;
    for (const auto& col : columns_) {
        if (!seen.insert(col.name).second) {
            throw DataError("duplicate column name: " + col.name);
        }
        if (col.values.size() != length_) {
            throw DataError("column '" + col.name + "' has length " + std::to_string(col.values.size()) +
                            ", expected " + std::to_string(length_));
        }
        for (std::size_t i = 0; i < col.values.size(); ++i) {
            if (!std::isfinite(col.values[i])) {
                throw DataError("column '" + col.name + "' has a non-finite value at row " + std::to_string(i));
            }
        }
    }
    if (dates_) {
        if (dates_->size() != length_) {
            throw DataError("date column length does not match the data");
        }
        for (std::size_t i = 0; i < dates_->size(); ++i) {
            if (!is_iso_date((*dates_)[i])) {
                throw DataError("invalid ISO-8601 date '" + (*dates_)[i] + "' at row " + std::to_string(i));
            }
            // Fixed-width ISO dates order lexicographically.
            if (i > 0 && (*dates_)[i] <= (*dates_)[i - 1]) {
                throw DataError("dates not strictly increasing at row " + std::to_string(i));
            }
        }
    }
}

std::size_t SeriesFrame::row_of(Step step) const
{
    if (step < first_step_ || step >= first_step_ + static_cast<Step>(length_)) {
        throw DataError("step " + std::to_string(step) + " outside frame");
    }
    return static_cast<std::size_t>(step - first_step_);
}

bool SeriesFrame::has_column(std::string_view name) const
{
    return std::any_of(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == name; });
}

const std::vector<double>& SeriesFrame::column(std::string_view name) const
{
    for (const auto& c : columns_) {
        if (c.name == name) {
            return c.values;
        }
    }
    throw DataError("unknown column: " + std::string(name));
}

std::vector<std::string> SeriesFrame::names() const
{
    std::vector<std::string> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) {
        out.push_back(c.name);
    }
    return out;
}

SeriesFrame SeriesFrame::slice(std::size_t begin, std::size_t end) const
{
    if (begin >= end || end > length_) {
        throw DataError("invalid slice [" + std::to_string(begin) + ", " + std::to_string(end) + ")");
    }
    std::vector<Column> cols;
    for (const auto& c : columns_) {
        cols.push_back({c.name, std::vector<double>(c.values.begin() + begin, c.values.begin() + end)});
    }
    std::optional<std::vector<std::string>> d;
    if (dates_) {
        d = std::vector<std::string>(dates_->begin() + begin, dates_->begin() + end);
    }
    return SeriesFrame(std::move(cols), std::move(d), step_at(begin));
}

SeriesFrame SeriesFrame::select(const std::vector<std::string>& names) const
{
    std::vector<Column> cols;
    for (const auto& n : names) {
        cols.push_back({n, column(n)});
    }
    return SeriesFrame(std::move(cols), dates_, first_step_);
}

SeriesFrame parse_csv(const std::vector<std::string>& lines, std::optional<std::string> date_column,
                      const std::string& source)
{
    if (lines.empty()) {
        throw DataError(source + ": empty file, header row expected");
    }
    const auto header = csv::split_line(lines.front());
    std::optional<std::size_t> date_idx;
    if (date_column) {
        const auto it = std::find(header.begin(), header.end(), *date_column);
        if (it == header.end()) {
            throw DataError(source + ": date column '" + *date_column + "' not in header");
        }
        date_idx = static_cast<std::size_t>(it - header.begin());
    } else if (!header.empty() && iequals(header.front(), "date")) {
        date_idx = 0;
    }

    std::vector<Column> cols;
    std::vector<std::size_t> col_idx;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (date_idx && j == *date_idx) {
            continue;
        }
        if (header[j].empty()) {
            throw DataError(source + ": empty header name in column " + std::to_string(j + 1));
        }
        cols.push_back({header[j], {}});
        col_idx.push_back(j);
    }
    std::optional<std::vector<std::string>> dates;
    if (date_idx) {
        dates.emplace();
    }

    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = csv::split_line(lines[r]);
        if (cells.size() != header.size()) {
            throw DataError(source + ": ragged row " + std::to_string(r + 1) + " has " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(header.size()));
        }
        if (date_idx) {
            dates->push_back(cells[*date_idx]);
        }
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const auto& cell = cells[col_idx[c]];
            const auto value = csv::parse_double(cell);
            if (!value || !std::isfinite(*value)) {
                throw DataError(source + ": non-numeric cell '" + cell + "' at row " + std::to_string(r + 1) +
                                ", column '" + cols[c].name + "'");
            }
            cols[c].values.push_back(*value);
        }
    }
    if (cols.empty()) {
        throw DataError(source + ": no numeric columns");
    }
    return SeriesFrame(std::move(cols), std::move(dates));
}

SeriesFrame load_csv(const std::string& path, std::optional<std::string> date_column)
{
    return parse_csv(csv::read_lines(path), std::move(date_column), path);
}

void write_csv(const SeriesFrame& frame, std::ostream& out)
{
    std::vector<std::string> cells;
    if (frame.dates()) {
        cells.emplace_back("date");
    }
    for (const auto& c : frame.columns()) {
        cells.push_back(c.name);
    }
    out << csv::join(cells) << '\n';
    for (std::size_t r = 0; r < frame.length(); ++r) {
        cells.clear();
        if (frame.dates()) {
            cells.push_back((*frame.dates())[r]);
        }
        for (const auto& c : frame.columns()) {
            cells.push_back(csv::format_double(c.values[r]));
        }
        out << csv::join(cells) << '\n';
    }
}

void write_csv(const SeriesFrame& frame, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write file: " + path);
    }
    write_csv(frame, out);
}

namespace {

std::vector<double> difference(const std::vector<double>& v, const std::string& name, Differencing mode)
{
    std::vector<double> d(v.size() - 1);
    for (std::size_t t = 1; t < v.size(); ++t) {
        if (mode == Differencing::Log) {
            if (v[t] <= 0.0 || v[t - 1] <= 0.0) {
                throw DataError("log differencing needs positive values in column '" + name + "'");
            }
            d[t - 1] = std::log(v[t]) - std::log(v[t - 1]);
        } else {
            d[t - 1] = v[t] - v[t - 1];
        }
    }
    return d;
}

std::optional<std::vector<std::string>> drop_first_date(const SeriesFrame& frame)
{
    if (!frame.dates()) {
        return std::nullopt;
    }
    return std::vector<std::string>(frame.dates()->begin() + 1, frame.dates()->end());
}

} // namespace

SeriesFrame first_difference(const SeriesFrame& frame, std::string_view column, Differencing mode)
{
    const auto& v = frame.column(column);
    if (v.size() < 2) {
        throw DataError("first difference needs at least 2 rows");
    }
    std::vector<Column> cols{{std::string(column), difference(v, std::string(column), mode)}};
    return SeriesFrame(std::move(cols), drop_first_date(frame), frame.first_step() + 1);
}

SeriesFrame first_difference_all(const SeriesFrame& frame, Differencing mode)
{
    if (frame.length() < 2) {
        throw DataError("first difference needs at least 2 rows");
    }
    std::vector<Column> cols;
    for (const auto& c : frame.columns()) {
        cols.push_back({c.name, difference(c.values, c.name, mode)});
    }
    return SeriesFrame(std::move(cols), drop_first_date(frame), frame.first_step() + 1);
}

void WindowPlan::validate(std::size_t total) const
{
    if (fit_len < 1 || select_len < 1 || test_len < 1 || stride < 1) {
        throw ConfigError("window plan lengths and stride must all be >= 1");
    }
    if (stride < test_len) {
        throw ConfigError("window stride must be >= test length so test ranges do not overlap");
    }
    if (fit_len + select_len + test_len > total) {
        throw ConfigError("window plan needs " + std::to_string(fit_len + select_len + test_len) +
                          " steps but the series has " + std::to_string(total));
    }
}

std::vector<Window> walk_forward_windows(std::size_t total, const WindowPlan& plan)
{
    plan.validate(total);
    std::vector<Window> windows;
    const std::size_t span = plan.fit_len + plan.select_len + plan.test_len;
    for (std::size_t start = 0; start + span <= total; start += plan.stride) {
        const std::size_t sel = start + plan.fit_len;
        const std::size_t test = sel + plan.select_len;
        windows.push_back({{start, sel}, {sel, test}, {test, test + plan.test_len}});
    }
    return windows;
}

WindowPlan plan_from_years(double fit_years, double select_years, double test_years, std::size_t steps_per_year)
{
    auto steps = [&](double years) {
        if (!(years > 0.0)) {
            throw ConfigError("window lengths in years must be positive");
        }
        return static_cast<std::size_t>(std::llround(years * static_cast<double>(steps_per_year)));
    };
    const std::size_t test = steps(test_years);
    return {steps(fit_years), steps(select_years), test, test};
}

} // namespace embedcast
