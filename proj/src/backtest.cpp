#include "embedcast/backtest.hpp"

#include "embedcast/csv.hpp"
#include "embedcast/error.hpp"
#include "embedcast/parallel.hpp"
#include "embedcast/random.hpp"
#include "embedcast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <ostream>

namespace embedcast {

std::string_view to_string(Position position)
{
    return position == Position::In ? "IN" : "OUT";
}

Position threshold_decision(double predicted_change, double threshold)
{
    if (!std::isfinite(predicted_change)) {
        std::cerr << "warning: non-finite prediction, staying in the market\n";
        return Position::In;
    }
    return predicted_change < threshold ? Position::Out : Position::In;
}

double TradeLedger::index_multiple() const
{
    double m = 1.0;
    for (const auto& r : rows) {
        m *= 1.0 + r.index_return;
    }
    return m;
}

std::vector<double> TradeLedger::net_returns() const
{
    std::vector<double> out;
    out.reserve(rows.size());
    double prev = 1.0;
    for (const auto& r : rows) {
        out.push_back(r.capital / prev - 1.0);
        prev = r.capital;
    }
    return out;
}

TradeLedger assemble_ledger(std::span<const Step> steps, std::span<const double> predictions,
                            std::span<const double> index_returns, double threshold, double cost_bp,
                            Position initial, std::span<const std::string> dates)
{
    if (steps.size() != predictions.size() || steps.size() != index_returns.size()) {
        throw DataError("ledger inputs have different lengths");
    }
    if (!dates.empty() && dates.size() != steps.size()) {
        throw DataError("ledger dates do not align with steps");
    }
    if (cost_bp < 0.0) {
        throw ConfigError("cost_bp must be >= 0");
    }
    const double cost_factor = 1.0 - cost_bp / 1e4;
    TradeLedger ledger;
    ledger.rows.reserve(steps.size());
    Position previous = initial;
    double capital = 1.0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        LedgerRow row;
        row.step = steps[i];
        if (!dates.empty()) {
            row.date = dates[i];
        }
        row.prediction = predictions[i];
        row.position = threshold_decision(predictions[i], threshold);
        row.index_return = index_returns[i];
        row.strategy_return = row.position == Position::In ? index_returns[i] : 0.0;
        row.trade = row.position != previous;
        if (row.trade) {
            capital *= cost_factor;
        }
        capital *= 1.0 + row.strategy_return;
        row.capital = capital;
        previous = row.position;
        ledger.rows.push_back(std::move(row));
    }
    return ledger;
}

void BacktestConfig::validate() const
{
    forecast.validate();
    if (std::abs(fit_years + select_years - 8.0) > 1e-9) {
        throw ConfigError("fit_years + select_years must equal 8");
    }
    if (steps_per_year < 1) {
        throw ConfigError("steps_per_year must be >= 1");
    }
    if (paths < 1) {
        throw ConfigError("paths must be >= 1");
    }
    if (cost_bp < 0.0) {
        throw ConfigError("cost_bp must be >= 0");
    }
}

WindowPlan BacktestConfig::plan() const
{
    return plan_from_years(fit_years, select_years, test_years, steps_per_year);
}

std::vector<double> index_returns(const SeriesFrame& levels, const std::string& column)
{
    const auto& v = levels.column(column);
    if (v.size() < 2) {
        throw DataError("index returns need at least 2 levels");
    }
    std::vector<double> r(v.size() - 1);
    for (std::size_t t = 1; t < v.size(); ++t) {
        if (v[t - 1] <= 0.0) {
            throw DataError("index level must be positive to form returns (column '" + column + "')");
        }
        r[t - 1] = v[t] / v[t - 1] - 1.0;
    }
    return r;
}

namespace {

ForecastSpec trading_spec(const BacktestConfig& config)
{
    ForecastSpec spec = config.forecast;
    spec.lead = 1;
    return spec;
}

SeriesFrame trading_frame(const SeriesFrame& levels, const BacktestConfig& config)
{
    auto names = config.forecast.variables.empty() ? levels.names() : config.forecast.variables;
    if (std::find(names.begin(), names.end(), config.forecast.target) == names.end()) {
        names.push_back(config.forecast.target);
    }
    return first_difference_all(levels.select(names), config.differencing);
}

std::vector<std::string> window_dates(const SeriesFrame& diffs, const Window& window)
{
    if (!diffs.dates()) {
        return {};
    }
    return {diffs.dates()->begin() + static_cast<std::ptrdiff_t>(window.test.begin),
            diffs.dates()->begin() + static_cast<std::ptrdiff_t>(window.test.end)};
}

} // namespace

std::vector<double> path_predictions(const SeriesFrame& levels, const Window& window, const BacktestConfig& config,
                                     std::uint64_t path_seed)
{
    const auto diffs = trading_frame(levels, config);
    const auto wf = forecast_window(diffs, window, trading_spec(config), path_seed);
    return {wf.combined.data(), wf.combined.data() + wf.combined.size()};
}

TradeLedger run_path(const SeriesFrame& levels, const Window& window, const BacktestConfig& config,
                     std::uint64_t path_seed, Position initial)
{
    config.validate();
    const auto diffs = trading_frame(levels, config);
    const auto returns = index_returns(levels, config.forecast.target);
    const auto wf = forecast_window(diffs, window, trading_spec(config), path_seed);
    const std::vector<double> pred(wf.combined.data(), wf.combined.data() + wf.combined.size());
    const std::vector<double> r(returns.begin() + static_cast<std::ptrdiff_t>(window.test.begin),
                                returns.begin() + static_cast<std::ptrdiff_t>(window.test.end));
    const auto dates = window_dates(diffs, window);
    return assemble_ledger(wf.test_steps, pred, r, config.threshold, config.cost_bp, initial, dates);
}

std::vector<AveragedRow> average_paths(const std::vector<TradeLedger>& paths)
{
    if (paths.empty()) {
        throw DataError("no paths to average");
    }
    const std::size_t n = paths.front().rows.size();
    std::vector<std::vector<double>> net;
    for (const auto& p : paths) {
        if (p.rows.size() != n) {
            throw DataError("paths have different lengths");
        }
        net.push_back(p.net_returns());
    }
    const auto count = static_cast<double>(paths.size());
    std::vector<AveragedRow> out(n);
    double capital = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
        auto& row = out[t];
        const auto& ref = paths.front().rows[t];
        row.step = ref.step;
        row.date = ref.date;
        row.index_return = ref.index_return;
        double pred = 0.0;
        double in = 0.0;
        double ret = 0.0;
        for (std::size_t p = 0; p < paths.size(); ++p) {
            if (paths[p].rows[t].step != ref.step) {
                throw DataError("paths are not aligned in time");
            }
            pred += paths[p].rows[t].prediction;
            in += paths[p].rows[t].position == Position::In ? 1.0 : 0.0;
            ret += net[p][t];
        }
        row.mean_prediction = pred / count;
        row.fraction_in = in / count;
        row.strategy_return = ret / count;
        capital *= 1.0 + row.strategy_return;
        row.capital = capital;
    }
    return out;
}

std::uint64_t window_seed(std::uint64_t path_seed, std::size_t window_index)
{
    return mix_seed(path_seed, window_index);
}

double gain(double strategy_multiple, double index_multiple)
{
    if (!(index_multiple > 0.0)) {
        throw DataError("gain needs a positive index multiple");
    }
    return strategy_multiple / index_multiple;
}

SharpeResult sharpe_from_excess(std::span<const double> excess)
{
    if (excess.size() < 2) {
        throw DataError("decadal Sharpe ratio needs at least 2 complete decades");
    }
    SharpeResult r;
    r.decades = excess.size();
    const double m = mean(excess);
    // Exact comparison: a rounded mean can leave a tiny spurious sd for equal values.
    const bool constant = std::all_of(excess.begin(), excess.end(), [&](double e) { return e == excess.front(); });
    if (constant) {
        r.zero_variance = true;
        r.value = excess.front() == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                           : std::copysign(std::numeric_limits<double>::infinity(), excess.front());
        return r;
    }
    double ss = 0.0;
    for (double e : excess) {
        ss += (e - m) * (e - m);
    }
    r.value = m / std::sqrt(ss / static_cast<double>(excess.size() - 1));
    return r;
}

SharpeResult sharpe_decadal(std::span<const double> strategy_returns, std::span<const double> baseline_returns,
                            std::size_t steps_per_decade)
{
    if (strategy_returns.size() != baseline_returns.size()) {
        throw DataError("strategy and baseline returns are not aligned");
    }
    if (steps_per_decade < 1) {
        throw ConfigError("steps_per_decade must be >= 1");
    }
    const std::size_t decades = strategy_returns.size() / steps_per_decade;
    std::vector<double> excess;
    excess.reserve(decades);
    for (std::size_t d = 0; d < decades; ++d) {
        double log_s = 0.0;
        double log_b = 0.0;
        for (std::size_t t = d * steps_per_decade; t < (d + 1) * steps_per_decade; ++t) {
            log_s += std::log1p(strategy_returns[t]);
            log_b += std::log1p(baseline_returns[t]);
        }
        excess.push_back(log_s - log_b);
    }
    return sharpe_from_excess(excess);
}

double sign_test(std::span<const double> strategy_multiples, std::span<const double> baseline_multiples)
{
    if (strategy_multiples.size() != baseline_multiples.size() || strategy_multiples.empty()) {
        throw DataError("sign test needs aligned, non-empty window multiples");
    }
    std::size_t wins = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < strategy_multiples.size(); ++i) {
        if (strategy_multiples[i] == baseline_multiples[i]) {
            continue;
        }
        ++n;
        if (strategy_multiples[i] > baseline_multiples[i]) {
            ++wins;
        }
    }
    if (n == 0) {
        throw DataError("sign test: every window is tied");
    }
    if (n <= 62) {
        // Exact: sum_{i >= wins} C(n, i) / 2^n with integer binomials.
        std::uint64_t total = 0;
        std::uint64_t binom = 1; // C(n, 0)
        for (std::size_t i = 0; i <= n; ++i) {
            if (i >= wins) {
                total += binom;
            }
            binom = binom * (n - i) / (i + 1);
        }
        return std::ldexp(static_cast<double>(total), -static_cast<int>(n));
    }
    double p = 0.0;
    for (std::size_t i = wins; i <= n; ++i) {
        p += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) -
                      static_cast<double>(n) * std::log(2.0));
    }
    return std::min(p, 1.0);
}

BacktestResult run_backtest(const SeriesFrame& levels, const BacktestConfig& config)
{
    config.validate();
    const auto diffs = trading_frame(levels, config);
    const auto returns = index_returns(levels, config.forecast.target);

    BacktestResult result;
    result.windows = walk_forward_windows(diffs.length(), config.plan());
    const auto spec = trading_spec(config);
    const std::size_t n_win = result.windows.size();

    // Predictions for every (path, window) are independent; ledgers are then
    // assembled serially so positions carry across window boundaries.
    std::vector<std::vector<double>> preds(config.paths * n_win);
    std::vector<std::vector<Step>> steps(n_win);
    ForecastSpec inner = spec;
    inner.threads = 1;
    parallel_for(preds.size(), spec.threads, [&](std::size_t job) {
        const std::size_t path = job / n_win;
        const std::size_t w = job % n_win;
        const auto wf = forecast_window(diffs, result.windows[w], inner, window_seed(config.seed + path, w));
        preds[job].assign(wf.combined.data(), wf.combined.data() + wf.combined.size());
    });

    std::vector<Step> all_steps;
    std::vector<double> all_returns;
    std::vector<std::string> all_dates;
    for (const auto& w : result.windows) {
        for (std::size_t r = w.test.begin; r < w.test.end; ++r) {
            all_steps.push_back(diffs.step_at(r));
            all_returns.push_back(returns[r]);
            if (diffs.dates()) {
                all_dates.push_back((*diffs.dates())[r]);
            }
        }
    }
    for (std::size_t path = 0; path < config.paths; ++path) {
        std::vector<double> p;
        for (std::size_t w = 0; w < n_win; ++w) {
            const auto& v = preds[path * n_win + w];
            p.insert(p.end(), v.begin(), v.end());
        }
        result.path_ledgers.push_back(
            assemble_ledger(all_steps, p, all_returns, config.threshold, config.cost_bp, Position::In, all_dates));
    }
    result.averaged = average_paths(result.path_ledgers);

    std::vector<double> strat_multiples;
    std::vector<double> index_multiples;
    std::size_t offset = 0;
    for (const auto& w : result.windows) {
        WindowMetrics m;
        m.window_start = diffs.step_at(w.test.begin);
        for (std::size_t i = 0; i < w.test.size(); ++i) {
            m.strategy_multiple *= 1.0 + result.averaged[offset + i].strategy_return;
            m.index_multiple *= 1.0 + result.averaged[offset + i].index_return;
        }
        m.gain = gain(m.strategy_multiple, m.index_multiple);
        offset += w.test.size();
        strat_multiples.push_back(m.strategy_multiple);
        index_multiples.push_back(m.index_multiple);
        result.window_metrics.push_back(m);
    }

    std::vector<double> strat_returns;
    for (const auto& row : result.averaged) {
        strat_returns.push_back(row.strategy_return);
    }
    result.overall.window_start = all_steps.empty() ? 0 : all_steps.front();
    result.overall.strategy_multiple = result.averaged.empty() ? 1.0 : result.averaged.back().capital;
    result.overall.index_multiple = 1.0;
    for (double r : all_returns) {
        result.overall.index_multiple *= 1.0 + r;
    }
    result.overall.gain = gain(result.overall.strategy_multiple, result.overall.index_multiple);

    const std::size_t per_decade = 10 * config.steps_per_year;
    if (strat_returns.size() / per_decade >= 2) {
        result.sharpe = sharpe_decadal(strat_returns, all_returns, per_decade);
    }
    try {
        result.sign_p = sign_test(strat_multiples, index_multiples);
    } catch (const DataError&) {
        result.sign_p.reset();
    }
    return result;
}

void write_ledger_csv(const TradeLedger& ledger, std::ostream& out)
{
    out << "step,date,prediction,position,index_return,strategy_return,trade,capital\n";
    for (const auto& r : ledger.rows) {
        out << r.step << ',' << r.date << ',' << csv::format_double(r.prediction) << ',' << to_string(r.position)
            << ',' << csv::format_double(r.index_return) << ',' << csv::format_double(r.strategy_return) << ','
            << (r.trade ? 1 : 0) << ',' << csv::format_double(r.capital) << '\n';
    }
}

void write_averaged_csv(const std::vector<AveragedRow>& rows, std::ostream& out)
{
    out << "step,date,mean_prediction,fraction_in,index_return,strategy_return,capital\n";
    for (const auto& r : rows) {
        out << r.step << ',' << r.date << ',' << csv::format_double(r.mean_prediction) << ','
            << csv::format_double(r.fraction_in) << ',' << csv::format_double(r.index_return) << ','
            << csv::format_double(r.strategy_return) << ',' << csv::format_double(r.capital) << '\n';
    }
}

} // namespace embedcast
