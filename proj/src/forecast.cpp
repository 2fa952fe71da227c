#include "embedcast/forecast.hpp"

#include "embedcast/error.hpp"
#include "embedcast/parallel.hpp"

#include <algorithm>

namespace embedcast {

void ForecastSpec::validate() const
{
    if (target.empty()) {
        throw ConfigError("forecast target column is not set");
    }
    if (max_lag < 1) {
        throw ConfigError("max_lag must be >= 1");
    }
    if (k < 1) {
        throw ConfigError("k must be >= 1");
    }
    if (lead < 1) {
        throw ConfigError("lead must be >= 1");
    }
    if (sampler == Sampler::Disjoint && partitions < 1) {
        throw ConfigError("partitions must be >= 1");
    }
    if (!(trim >= 0.0 && trim < 0.5)) {
        throw ConfigError("trim fraction must lie in [0, 0.5)");
    }
}

std::vector<DelayMap> sample_maps(const ForecastSpec& spec, const CoordinateUniverse& universe, std::uint64_t seed)
{
    if (spec.sampler == Sampler::Disjoint) {
        return sample_disjoint_partitions(universe, spec.k, spec.partitions, seed, spec.target, spec.lead);
    }
    if (spec.k > universe.size()) {
        throw ConfigError("delay map size k exceeds universe size");
    }
    const std::size_t count =
        spec.random_maps != 0 ? spec.random_maps : spec.partitions * (universe.size() / spec.k);
    return sample_random_maps(universe, spec.k, count, seed, spec.target, spec.lead);
}

WindowForecast forecast_window(const SeriesFrame& frame, const Window& window, const ForecastSpec& spec,
                               std::uint64_t seed)
{
    spec.validate();
    if (window.test.end > frame.length()) {
        throw ConfigError("window runs past the end of the series");
    }
    const auto variables = spec.variables.empty() ? frame.names() : spec.variables;
    const auto universe = build_universe(variables, spec.max_lag);

    // Rows without full history for the largest lag are skipped, so all maps
    // share the same target steps.
    const Step earliest = first_supported_target(frame, spec.max_lag, spec.lead);
    const Step fit_begin = std::max(frame.step_at(window.fit.begin), earliest);
    const Step fit_end = frame.step_at(window.fit.end);
    const Step select_begin = std::max(frame.step_at(window.select.begin), earliest);
    const Step select_end = frame.step_at(window.select.end) - (spec.lead - 1);
    const Step test_begin = frame.step_at(window.test.begin);
    const Step test_end = frame.step_at(window.test.end);
    const auto min_rows = static_cast<Step>(spec.k) + 2;
    if (fit_end - fit_begin < min_rows) {
        throw DataError("fit range leaves " + std::to_string(std::max<Step>(fit_end - fit_begin, 0)) +
                        " usable rows after the lag history; need at least " + std::to_string(min_rows));
    }
    if (select_end - select_begin < 2) {
        throw DataError("selection range leaves fewer than 2 usable rows");
    }

    WindowForecast out;
    out.maps = sample_maps(spec, universe, seed);
    const std::size_t n_maps = out.maps.size();

    std::vector<LinearModel> models(n_maps);
    std::vector<Eigen::VectorXd> select_pred(n_maps);
    Eigen::VectorXd select_obs;
    parallel_for(n_maps, spec.threads, [&](std::size_t i) {
        const auto& map = out.maps[i];
        const Design fit = materialize_design(frame, map, fit_begin, fit_end);
        LinearModel model;
        if (spec.fit_method == FitMethod::Ols) {
            model = fit_ols(fit.X, fit.y, map.id);
        } else {
            LarsCvOptions options;
            options.folds = spec.folds;
            model = fit_lars_cv(fit.X, fit.y, options, map.id);
        }
        const Design sel = materialize_design(frame, map, select_begin, select_end);
        select_pred[i] = predict(model, sel.X);
        models[i] = std::move(model);
    });
    {
        const auto& y = frame.column(spec.target);
        select_obs.resize(select_end - select_begin);
        for (Step t = select_begin; t < select_end; ++t) {
            select_obs(t - select_begin) = y[frame.row_of(t)];
        }
        out.fit_targets.resize(fit_end - fit_begin);
        for (Step t = fit_begin; t < fit_end; ++t) {
            out.fit_targets(t - fit_begin) = y[frame.row_of(t)];
        }
    }

    out.pool = score_models(std::move(models), select_pred, select_obs);
    out.kept = downselect(out.pool, spec.selection);

    const std::size_t n_test = static_cast<std::size_t>(test_end - test_begin);
    const std::size_t n_kept = out.kept.size();
    out.member_predictions.resize(static_cast<Eigen::Index>(n_test), static_cast<Eigen::Index>(n_kept));
    out.select_residuals.resize(n_kept);
    auto map_by_id = [&](int id) -> const DelayMap& {
        const auto it = std::find_if(out.maps.begin(), out.maps.end(), [&](const DelayMap& m) { return m.id == id; });
        return *it;
    };
    parallel_for(n_kept, spec.threads, [&](std::size_t j) {
        const auto& model = out.kept.entries[j].model;
        const auto& map = map_by_id(model.map_id);
        const Design test = materialize_design(frame, map, test_begin, test_end);
        out.member_predictions.col(static_cast<Eigen::Index>(j)) = predict(model, test.X);
        const Design sel = materialize_design(frame, map, select_begin, select_end);
        out.select_residuals[j] = sel.y - predict(model, sel.X);
    });

    out.test_steps.resize(n_test);
    out.observed.resize(static_cast<Eigen::Index>(n_test));
    out.combined.resize(static_cast<Eigen::Index>(n_test));
    const auto& y = frame.column(spec.target);
    std::vector<double> row(n_kept);
    for (std::size_t t = 0; t < n_test; ++t) {
        const Step step = test_begin + static_cast<Step>(t);
        out.test_steps[t] = step;
        out.observed(static_cast<Eigen::Index>(t)) = y[frame.row_of(step)];
        for (std::size_t j = 0; j < n_kept; ++j) {
            row[j] = out.member_predictions(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
        }
        out.combined(static_cast<Eigen::Index>(t)) = spec.combiner == Combiner::TrimmedMean
                                                         ? trimmed_mean_prediction(row, spec.trim)
                                                         : sqrt_n_best_average(out.kept, row);
    }
    return out;
}

} // namespace embedcast
