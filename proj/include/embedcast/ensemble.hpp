#pragma once

#include "embedcast/regress.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace embedcast {

struct ScoredModel {
    LinearModel model;
    /// Pearson correlation on the selection window; -inf for constant predictions.
    double select_corr = 0.0;
};

/// Models sorted by select_corr descending, ties by map_id ascending.
struct ScoredPool {
    std::vector<ScoredModel> entries;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
};

/// Correlate each model's selection-window predictions with the
/// observations and rank the pool.
ScoredPool score_models(std::vector<LinearModel> models, const std::vector<Eigen::VectorXd>& predictions_on_select,
                        const Eigen::VectorXd& observed);

struct SelectionRule {
    enum class Mode { TopFraction, MinCorr };

    Mode mode = Mode::TopFraction;
    double value = 0.4; ///< q for TopFraction, r_t for MinCorr

    static SelectionRule top_fraction(double q);
    static SelectionRule min_corr(double r_t);
};

/// TopFraction keeps the ceil(q*n) best; MinCorr keeps every model with
/// select_corr >= r_t and throws when that leaves nothing.
ScoredPool downselect(const ScoredPool& pool, const SelectionRule& rule);

/// Sort, drop floor(trim*m) values from each tail, average the rest.
double trimmed_mean_prediction(std::span<const double> values, double trim);

/// Mean of the floor(sqrt(n)) best-ranked predictions. `predictions_at_t`
/// follows the pool's ranking order.
double sqrt_n_best_average(const ScoredPool& pool, std::span<const double> predictions_at_t);

enum class Combiner { TrimmedMean, SqrtNBest };

/// Scored-pool CSV: map_id,method,select_corr,kept_flag. `kept` is the
/// down-selected subset of `pool`.
void write_pool_csv(const ScoredPool& pool, const ScoredPool& kept, std::ostream& out);

} // namespace embedcast
