#pragma once

#include "embedcast/forecast.hpp"
#include "embedcast/timeseries.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace embedcast {

enum class Position { In, Out };

std::string_view to_string(Position position);

/// OUT iff the predicted change is below the threshold; ties and non-finite
/// predictions stay IN (a non-finite prediction also prints a warning).
Position threshold_decision(double predicted_change, double threshold = 0.0);

struct LedgerRow {
    Step step = 0;
    std::string date;
    double prediction = 0.0;
    Position position = Position::In;
    double index_return = 0.0;
    double strategy_return = 0.0; ///< index return when IN, 0 when OUT (before cost)
    bool trade = false;           ///< position differs from the previous step
    double capital = 1.0;         ///< cumulative multiple after this step, net of cost
};

struct TradeLedger {
    std::vector<LedgerRow> rows;

    double capital() const { return rows.empty() ? 1.0 : rows.back().capital; }
    double index_multiple() const;
    /// Per-step return net of trading cost: capital[t] / capital[t-1] - 1.
    std::vector<double> net_returns() const;
    Position final_position(Position initial = Position::In) const
    {
        return rows.empty() ? initial : rows.back().position;
    }
};

/// Build a ledger from per-step predictions and index returns. The capital
/// update for a step is capital * (1 - cost_bp/1e4 if trading) * (1 + strategy_return).
TradeLedger assemble_ledger(std::span<const Step> steps, std::span<const double> predictions,
                            std::span<const double> index_returns, double threshold, double cost_bp,
                            Position initial = Position::In, std::span<const std::string> dates = {});

struct BacktestConfig {
    ForecastSpec forecast;     ///< target = traded index; lead is forced to 1
    double fit_years = 3.0;
    double select_years = 5.0;
    double test_years = 2.0;
    std::size_t steps_per_year = 250;
    std::size_t paths = 5;
    double cost_bp = 0.0;
    double threshold = 0.0;
    Differencing differencing = Differencing::Raw;
    std::uint64_t seed = 1;

    void validate() const;
    WindowPlan plan() const;
};

/// Daily index returns aligned with the differenced frame: r[t] = level[t]/level[t-1] - 1.
std::vector<double> index_returns(const SeriesFrame& levels, const std::string& column);

/// Ensemble predictions of the next change for every test step of `window`
/// (window rows index the differenced frame).
std::vector<double> path_predictions(const SeriesFrame& levels, const Window& window, const BacktestConfig& config,
                                     std::uint64_t path_seed);

/// One trading path over one window's test range, starting from `initial`.
TradeLedger run_path(const SeriesFrame& levels, const Window& window, const BacktestConfig& config,
                     std::uint64_t path_seed, Position initial = Position::In);

struct AveragedRow {
    Step step = 0;
    std::string date;
    double mean_prediction = 0.0;
    double fraction_in = 0.0;
    double index_return = 0.0;
    double strategy_return = 0.0; ///< mean of the paths' net returns
    double capital = 1.0;
};

/// Average net returns across paths step by step, then compound.
std::vector<AveragedRow> average_paths(const std::vector<TradeLedger>& paths);

struct WindowMetrics {
    Step window_start = 0; ///< first test step
    double strategy_multiple = 1.0;
    double index_multiple = 1.0;
    double gain = 1.0;
};

struct SharpeResult {
    double value = 0.0;        ///< NaN when undefined
    bool zero_variance = false;
    std::size_t decades = 0;
};

struct BacktestResult {
    std::vector<Window> windows;
    std::vector<TradeLedger> path_ledgers; ///< one per path, all windows concatenated
    std::vector<AveragedRow> averaged;
    std::vector<WindowMetrics> window_metrics;
    WindowMetrics overall;
    std::optional<SharpeResult> sharpe; ///< empty when fewer than 2 complete decades
    std::optional<double> sign_p;       ///< empty when every window ties
};

/// Map-sampling seed of one window of one path: path p of a backtest uses
/// path_seed = config.seed + p.
std::uint64_t window_seed(std::uint64_t path_seed, std::size_t window_index);

BacktestResult run_backtest(const SeriesFrame& levels, const BacktestConfig& config);

double gain(double strategy_multiple, double index_multiple);

/// Mean over sample standard deviation of the per-decade excesses
/// log(strategy multiple) - log(baseline multiple). Decades start at the
/// first return; a trailing partial decade is dropped.
SharpeResult sharpe_decadal(std::span<const double> strategy_returns, std::span<const double> baseline_returns,
                            std::size_t steps_per_decade);

/// Same statistic from precomputed decadal excesses.
SharpeResult sharpe_from_excess(std::span<const double> excess);

/// One-sided exact binomial p = P(Binomial(n, 1/2) >= wins) where wins
/// counts windows with strategy > baseline and ties are dropped.
double sign_test(std::span<const double> strategy_multiples, std::span<const double> baseline_multiples);

/// Ledger CSV: step,date,prediction,position,index_return,strategy_return,trade,capital
void write_ledger_csv(const TradeLedger& ledger, std::ostream& out);
void write_averaged_csv(const std::vector<AveragedRow>& rows, std::ostream& out);

} // namespace embedcast
