#pragma once

#include "embedcast/embedding.hpp"
#include "embedcast/ensemble.hpp"
#include "embedcast/regress.hpp"
#include "embedcast/timeseries.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace embedcast {

enum class Sampler { Disjoint, Random };

/// Everything needed to turn one walk-forward window into ensemble predictions.
struct ForecastSpec {
    std::vector<std::string> variables; ///< empty = every column of the frame
    std::string target;
    int max_lag = 40;
    std::size_t k = 20;
    int lead = 1;
    Sampler sampler = Sampler::Disjoint;
    std::size_t partitions = 10;
    std::size_t random_maps = 0; ///< 0 = match the disjoint map count
    FitMethod fit_method = FitMethod::Ols;
    int folds = 10;
    SelectionRule selection = SelectionRule::top_fraction(0.4);
    Combiner combiner = Combiner::TrimmedMean;
    double trim = 0.2;
    unsigned threads = 1;

    void validate() const;
};

/// Draw the delay maps for one window.
std::vector<DelayMap> sample_maps(const ForecastSpec& spec, const CoordinateUniverse& universe, std::uint64_t seed);

struct WindowForecast {
    std::vector<DelayMap> maps;
    ScoredPool pool;
    ScoredPool kept;
    std::vector<Step> test_steps;
    Eigen::VectorXd observed;           ///< target on the test steps
    Eigen::VectorXd combined;           ///< ensemble prediction on the test steps
    Eigen::MatrixXd member_predictions; ///< test steps x kept models, in kept order
    /// Kept models' selection-window residuals (observed - predicted), one vector per kept model.
    std::vector<Eigen::VectorXd> select_residuals;
    Eigen::VectorXd fit_targets;        ///< target values over the fit range
};

/// Fit every sampled map on the window's fit range, score and down-select
/// on the selection range, and combine the survivors over the test range.
///
/// For lead L the last L-1 selection targets are left out so that every
/// test prediction uses only data available L steps before its target.
WindowForecast forecast_window(const SeriesFrame& frame, const Window& window, const ForecastSpec& spec,
                               std::uint64_t seed);

} // namespace embedcast
