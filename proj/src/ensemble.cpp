#include "embedcast/ensemble.hpp"

#include "embedcast/csv.hpp"
#include "embedcast/error.hpp"
#include "embedcast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

namespace embedcast {

ScoredPool score_models(std::vector<LinearModel> models, const std::vector<Eigen::VectorXd>& predictions_on_select,
                        const Eigen::VectorXd& observed)
{
    if (models.size() != predictions_on_select.size()) {
        throw DataError("score_models: " + std::to_string(models.size()) + " models but " +
                        std::to_string(predictions_on_select.size()) + " prediction vectors");
    }
    ScoredPool pool;
    pool.entries.reserve(models.size());
    const std::span<const double> obs(observed.data(), static_cast<std::size_t>(observed.size()));
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto& p = predictions_on_select[i];
        if (p.size() != observed.size()) {
            throw DataError("score_models: prediction length does not match observations");
        }
        const auto r = pearson(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), obs);
        pool.entries.push_back({std::move(models[i]), r.value_or(-std::numeric_limits<double>::infinity())});
    }
    std::stable_sort(pool.entries.begin(), pool.entries.end(), [](const ScoredModel& a, const ScoredModel& b) {
        if (a.select_corr != b.select_corr) {
            return a.select_corr > b.select_corr;
        }
        return a.model.map_id < b.model.map_id;
    });
    return pool;
}

SelectionRule SelectionRule::top_fraction(double q)
{
    if (!(q > 0.0 && q <= 1.0)) {
        throw ConfigError("top fraction q must lie in (0, 1]");
    }
    return {Mode::TopFraction, q};
}

SelectionRule SelectionRule::min_corr(double r_t)
{
    if (!(r_t >= -1.0 && r_t <= 1.0)) {
        throw ConfigError("minimum correlation r_t must lie in [-1, 1]");
    }
    return {Mode::MinCorr, r_t};
}

ScoredPool downselect(const ScoredPool& pool, const SelectionRule& rule)
{
    if (pool.empty()) {
        throw DataError("cannot down-select an empty pool");
    }
    ScoredPool out;
    if (rule.mode == SelectionRule::Mode::TopFraction) {
        if (!(rule.value > 0.0 && rule.value <= 1.0)) {
            throw ConfigError("top fraction q must lie in (0, 1]");
        }
        // Guard q*n landing a hair above an integer (0.7 * 10 = 7.000000000000001).
        const double want = rule.value * static_cast<double>(pool.size());
        auto keep = static_cast<std::size_t>(std::ceil(want - 1e-9 * want));
        keep = std::clamp<std::size_t>(keep, 1, pool.size());
        out.entries.assign(pool.entries.begin(), pool.entries.begin() + static_cast<std::ptrdiff_t>(keep));
    } else {
        // r_t = -1 keeps every model, including constant predictors scored -inf.
        for (const auto& e : pool.entries) {
            if (rule.value <= -1.0 || e.select_corr >= rule.value) {
                out.entries.push_back(e);
            }
        }
        if (out.empty()) {
            throw DataError("no model reaches minimum correlation " + csv::format_double(rule.value) +
                            "; relax r_t");
        }
    }
    return out;
}

double trimmed_mean_prediction(std::span<const double> values, double trim)
{
    if (values.empty()) {
        throw DataError("trimmed mean of no predictions");
    }
    if (!(trim >= 0.0 && trim < 0.5)) {
        throw ConfigError("trim fraction must lie in [0, 0.5)");
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const auto cut = static_cast<std::size_t>(std::floor(trim * static_cast<double>(v.size()) + 1e-9));
    double s = 0.0;
    for (std::size_t i = cut; i < v.size() - cut; ++i) {
        s += v[i];
    }
    return s / static_cast<double>(v.size() - 2 * cut);
}

double sqrt_n_best_average(const ScoredPool& pool, std::span<const double> predictions_at_t)
{
    if (pool.empty()) {
        throw DataError("sqrt-n averaging of an empty pool");
    }
    if (predictions_at_t.size() != pool.size()) {
        throw DataError("sqrt-n averaging: prediction count does not match pool size");
    }
    auto k = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(pool.size())) + 1e-9));
    k = std::max<std::size_t>(k, 1);
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        s += predictions_at_t[i];
    }
    return s / static_cast<double>(k);
}

void write_pool_csv(const ScoredPool& pool, const ScoredPool& kept, std::ostream& out)
{
    std::set<int> kept_ids;
    for (const auto& e : kept.entries) {
        kept_ids.insert(e.model.map_id);
    }
    out << "map_id,method,select_corr,kept_flag\n";
    for (const auto& e : pool.entries) {
        out << e.model.map_id << ',' << to_string(e.model.method) << ',' << csv::format_double(e.select_corr) << ','
            << (kept_ids.count(e.model.map_id) ? 1 : 0) << '\n';
    }
}

} // namespace embedcast
