#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace embedcast {

/// Integer time stamp of a row. Frames derived by differencing keep the
/// stamps of the rows they came from, so steps need not start at zero.
using Step = std::int64_t;

struct Column {
    std::string name;
    std::vector<double> values;
};

/// Multivariate series on a common integer step index, optionally dated.
///
/// Invariants (checked on construction): at least one column, all columns
/// the same length T >= 1, unique names, finite values, dates (when present)
/// aligned to T and strictly increasing ISO-8601 days.
class SeriesFrame {
public:
    SeriesFrame(std::vector<Column> columns, std::optional<std::vector<std::string>> dates = std::nullopt,
                Step first_step = 0);

    std::size_t length() const { return length_; }
    std::size_t width() const { return columns_.size(); }
    Step first_step() const { return first_step_; }
    Step step_at(std::size_t row) const { return first_step_ + static_cast<Step>(row); }

    /// Row position of a step; throws if the step lies outside the frame.
    std::size_t row_of(Step step) const;

    bool has_column(std::string_view name) const;
    const std::vector<double>& column(std::string_view name) const;
    const std::vector<Column>& columns() const { return columns_; }
    std::vector<std::string> names() const;

    const std::optional<std::vector<std::string>>& dates() const { return dates_; }

    /// Copy of rows [begin, end) keeping their step stamps.
    SeriesFrame slice(std::size_t begin, std::size_t end) const;

    /// Copy with only the named columns, in the given order.
    SeriesFrame select(const std::vector<std::string>& names) const;

private:
    std::vector<Column> columns_;
    std::optional<std::vector<std::string>> dates_;
    Step first_step_ = 0;
    std::size_t length_ = 0;
};

/// True for a syntactically valid YYYY-MM-DD calendar date.
bool is_iso_date(std::string_view text);

/// Parse a CSV with a header row. When `date_column` is given that column
/// holds the dates; otherwise a leading column named "date" (any case) is
/// taken as the date column. Every other column must be numeric.
SeriesFrame load_csv(const std::string& path, std::optional<std::string> date_column = std::nullopt);
SeriesFrame parse_csv(const std::vector<std::string>& lines, std::optional<std::string> date_column = std::nullopt,
                      const std::string& source = "<memory>");

/// Emit in the ingestion format (leading "date" column when dated).
void write_csv(const SeriesFrame& frame, std::ostream& out);
void write_csv(const SeriesFrame& frame, const std::string& path);

enum class Differencing { Raw, Log };

/// d[t] = v[t] - v[t-1] (or log v[t] - log v[t-1]), stamped at the later step t.
/// Returns a one-column frame named after `column`, length T-1.
SeriesFrame first_difference(const SeriesFrame& frame, std::string_view column,
                             Differencing mode = Differencing::Raw);

/// First difference of every column, same alignment as first_difference.
SeriesFrame first_difference_all(const SeriesFrame& frame, Differencing mode = Differencing::Raw);

/// Half-open row range [begin, end).
struct Range {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool contains(std::size_t i) const { return i >= begin && i < end; }
    friend bool operator==(const Range&, const Range&) = default;
};

/// Walk-forward plan, all lengths in steps.
struct WindowPlan {
    std::size_t fit_len = 0;
    std::size_t select_len = 0;
    std::size_t test_len = 0;
    std::size_t stride = 0;

    /// Throws ConfigError unless all lengths >= 1, stride >= test_len and the
    /// plan fits in `total` steps.
    void validate(std::size_t total) const;
};

struct Window {
    Range fit;
    Range select;
    Range test;
    friend bool operator==(const Window&, const Window&) = default;
};

/// Contiguous fit | select | test windows advanced by `stride`; a window
/// whose test range would run past T is dropped.
std::vector<Window> walk_forward_windows(std::size_t total, const WindowPlan& plan);

/// Plan from calendar-like units: `steps_per_year` converts years to steps.
WindowPlan plan_from_years(double fit_years, double select_years, double test_years, std::size_t steps_per_year);

} // namespace embedcast
