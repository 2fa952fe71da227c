#include "embedcast/regress.hpp"

#include "embedcast/csv.hpp"
#include "embedcast/error.hpp"
#include "embedcast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

namespace embedcast {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(FitMethod method)
{
    switch (method) {
    case FitMethod::Ols:
        return "OLS";
    case FitMethod::LarsCv:
        return "LARS_CV";
    case FitMethod::UniformShrink:
        return "UNIFORM_SHRINK";
    }
    return "?";
}

FitMethod parse_fit_method(std::string_view text)
{
    if (text == "OLS" || text == "ols") {
        return FitMethod::Ols;
    }
    if (text == "LARS_CV" || text == "lars" || text == "lars_cv") {
        return FitMethod::LarsCv;
    }
    if (text == "UNIFORM_SHRINK") {
        return FitMethod::UniformShrink;
    }
    throw ConfigError("unknown fit method: " + std::string(text));
}

namespace {

std::optional<double> correlation(const VectorXd& a, const VectorXd& b)
{
    return pearson(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                   std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

void check_shapes(const MatrixXd& X, const VectorXd& y)
{
    if (X.rows() != y.size()) {
        throw DataError("design has " + std::to_string(X.rows()) + " rows but target has " +
                        std::to_string(y.size()));
    }
}

// Least-squares slopes on centred data, minimum norm when rank deficient.
VectorXd centred_ls(const MatrixXd& X, const VectorXd& y, const VectorXd& x_mean, double y_mean)
{
    if (X.cols() == 0) {
        return VectorXd(0);
    }
    const MatrixXd Xc = X.rowwise() - x_mean.transpose();
    const VectorXd yc = y.array() - y_mean;
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(Xc);
    return cod.solve(yc);
}

} // namespace

LinearModel fit_ols(const MatrixXd& X, const VectorXd& y, int map_id)
{
    check_shapes(X, y);
    if (X.rows() < 2) {
        throw DataError("least squares needs at least 2 rows");
    }
    LinearModel m;
    m.map_id = map_id;
    m.method = FitMethod::Ols;
    const VectorXd x_mean = X.colwise().mean();
    const double y_mean = y.mean();
    m.coefficients = centred_ls(X, y, x_mean, y_mean);
    m.intercept = y_mean - x_mean.dot(m.coefficients);
    m.fit_corr = correlation(predict(m, X), y);
    return m;
}

LarsPath lars_path(const MatrixXd& X, const VectorXd& y)
{
    check_shapes(X, y);
    const Index n = X.rows();
    const Index p = X.cols();
    if (n < 2) {
        throw DataError("least-angle regression needs at least 2 rows");
    }

    LarsPath path;
    path.column_mean = X.colwise().mean();
    path.y_mean = y.mean();
    path.column_norm = VectorXd::Zero(p);

    MatrixXd Xs = X.rowwise() - path.column_mean.transpose();
    const VectorXd yc = y.array() - path.y_mean;
    std::vector<bool> usable(static_cast<std::size_t>(p), true);
    for (Index j = 0; j < p; ++j) {
        const double norm = Xs.col(j).norm();
        const double scale = std::max(1.0, std::abs(path.column_mean(j))) * std::sqrt(static_cast<double>(n));
        if (norm <= 1e-12 * scale) {
            usable[static_cast<std::size_t>(j)] = false;
            path.excluded.push_back(static_cast<int>(j));
            std::cerr << "warning: lars: column " << j << " has zero variance and is excluded\n";
            continue;
        }
        path.column_norm(j) = norm;
        Xs.col(j) /= norm;
    }

    auto record = [&](const std::vector<int>& active, const VectorXd& beta_std) {
        LarsStep step;
        step.active = active;
        step.beta_standardized = beta_std;
        step.coefficients = VectorXd::Zero(p);
        for (Index j = 0; j < p; ++j) {
            if (usable[static_cast<std::size_t>(j)]) {
                step.coefficients(j) = beta_std(j) / path.column_norm(j);
            }
        }
        step.intercept = path.y_mean - path.column_mean.dot(step.coefficients);
        path.steps.push_back(std::move(step));
    };

    VectorXd beta = VectorXd::Zero(p);
    VectorXd mu = VectorXd::Zero(n);
    std::vector<int> active;
    record(active, beta);

    const Index max_active = std::min<Index>(p, n - 1);
    constexpr double tiny = 1e-12;
    VectorXd c = Xs.transpose() * yc;

    for (;;) {
        std::vector<int> inactive;
        for (Index j = 0; j < p; ++j) {
            if (usable[static_cast<std::size_t>(j)] &&
                std::find(active.begin(), active.end(), static_cast<int>(j)) == active.end()) {
                inactive.push_back(static_cast<int>(j));
            }
        }
        if (inactive.empty() || static_cast<Index>(active.size()) >= max_active) {
            break;
        }

        double C = 0.0;
        for (Index j = 0; j < p; ++j) {
            if (usable[static_cast<std::size_t>(j)]) {
                C = std::max(C, std::abs(c(j)));
            }
        }
        if (C <= tiny * std::max(1.0, yc.norm())) {
            break;
        }

        // Enter the most correlated inactive column unless it is (numerically)
        // in the span of the active set, in which case it is dropped for good.
        int entering = inactive.front();
        for (int j : inactive) {
            if (std::abs(c(j)) > std::abs(c(entering))) {
                entering = j;
            }
        }
        if (!active.empty()) {
            MatrixXd XA(n, static_cast<Index>(active.size()));
            for (std::size_t a = 0; a < active.size(); ++a) {
                XA.col(static_cast<Index>(a)) = Xs.col(active[a]);
            }
            const VectorXd coef = XA.colPivHouseholderQr().solve(Xs.col(entering));
            const double resid = (Xs.col(entering) - XA * coef).norm();
            if (resid < 1e-10) {
                usable[static_cast<std::size_t>(entering)] = false;
                path.excluded.push_back(entering);
                std::cerr << "warning: lars: column " << entering << " is collinear with the active set, dropped\n";
                continue;
            }
        }
        active.push_back(entering);

        const auto na = static_cast<Index>(active.size());
        VectorXd signs(na);
        MatrixXd XA(n, na);
        for (Index a = 0; a < na; ++a) {
            const int j = active[static_cast<std::size_t>(a)];
            signs(a) = c(j) >= 0.0 ? 1.0 : -1.0;
            XA.col(a) = signs(a) * Xs.col(j);
        }
        const MatrixXd gram = XA.transpose() * XA;
        const VectorXd g = gram.ldlt().solve(VectorXd::Ones(na));
        const double norm_const = 1.0 / std::sqrt(g.sum());
        const VectorXd w = norm_const * g;
        const VectorXd u = XA * w;
        const VectorXd a = Xs.transpose() * u;

        // Largest step keeps the active set at the top correlation; it ends
        // at the joint least-squares fit when no other column can tie first.
        const double full_step = C / norm_const;
        double gamma = full_step;
        if (na < max_active) {
            for (Index j = 0; j < p; ++j) {
                if (!usable[static_cast<std::size_t>(j)] ||
                    std::find(active.begin(), active.end(), static_cast<int>(j)) != active.end()) {
                    continue;
                }
                for (double cand : {(C - c(j)) / (norm_const - a(j)), (C + c(j)) / (norm_const + a(j))}) {
                    if (cand > 1e-12 * full_step && cand < gamma) {
                        gamma = cand;
                    }
                }
            }
        }
        for (Index k = 0; k < na; ++k) {
            beta(active[static_cast<std::size_t>(k)]) += gamma * signs(k) * w(k);
        }
        mu += gamma * u;
        c = Xs.transpose() * (yc - mu);
        record(active, beta);
    }
    return path;
}

std::pair<double, VectorXd> lars_at_fraction(const LarsPath& path, double fraction)
{
    if (path.steps.empty()) {
        throw DataError("empty least-angle path");
    }
    fraction = std::clamp(fraction, 0.0, 1.0);
    std::vector<double> l1;
    l1.reserve(path.steps.size());
    for (const auto& s : path.steps) {
        l1.push_back(s.coefficients.lpNorm<1>());
    }
    const double goal = fraction * l1.back();
    const auto& first = path.steps.front();
    if (goal <= 0.0 || path.steps.size() == 1) {
        return {first.intercept, first.coefficients};
    }
    for (std::size_t i = 0; i + 1 < path.steps.size(); ++i) {
        const double lo = std::min(l1[i], l1[i + 1]);
        const double hi = std::max(l1[i], l1[i + 1]);
        if (goal >= lo && goal <= hi) {
            const double t = hi > lo ? (goal - l1[i]) / (l1[i + 1] - l1[i]) : 1.0;
            const auto& a = path.steps[i];
            const auto& b = path.steps[i + 1];
            return {a.intercept + t * (b.intercept - a.intercept), a.coefficients + t * (b.coefficients - a.coefficients)};
        }
    }
    const auto& last = path.steps.back();
    return {last.intercept, last.coefficients};
}

std::vector<double> LarsCvOptions::default_fraction_grid()
{
    std::vector<double> grid(21);
    for (int i = 0; i <= 20; ++i) {
        grid[static_cast<std::size_t>(i)] = i / 20.0;
    }
    return grid;
}

std::vector<double> LarsCvOptions::default_shrink_grid()
{
    std::vector<double> grid(10);
    for (int i = 1; i <= 10; ++i) {
        grid[static_cast<std::size_t>(i - 1)] = i / 10.0;
    }
    return grid;
}

namespace {

struct Fold {
    std::vector<Index> train;
    std::vector<Index> test;
};

// Contiguous row blocks; fold f holds rows [f*n/F, (f+1)*n/F).
std::vector<Fold> contiguous_folds(Index n, int folds)
{
    std::vector<Fold> out(static_cast<std::size_t>(folds));
    for (int f = 0; f < folds; ++f) {
        const Index begin = n * f / folds;
        const Index end = n * (f + 1) / folds;
        auto& fold = out[static_cast<std::size_t>(f)];
        for (Index i = 0; i < n; ++i) {
            (i >= begin && i < end ? fold.test : fold.train).push_back(i);
        }
    }
    return out;
}

MatrixXd take_rows(const MatrixXd& X, const std::vector<Index>& rows)
{
    MatrixXd out(static_cast<Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Index>(i)) = X.row(rows[i]);
    }
    return out;
}

VectorXd take_rows(const VectorXd& y, const std::vector<Index>& rows)
{
    VectorXd out(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out(static_cast<Index>(i)) = y(rows[i]);
    }
    return out;
}

std::size_t argmin_first(const std::vector<double>& v)
{
    return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

} // namespace

LinearModel fit_lars_cv(const MatrixXd& X, const VectorXd& y, const LarsCvOptions& options, int map_id,
                        LarsCvReport* report)
{
    check_shapes(X, y);
    const Index n = X.rows();
    const int folds = options.folds;
    if (folds < 2 || folds > n) {
        throw DataError("cross-validation needs 2 <= folds <= rows (folds=" + std::to_string(folds) +
                        ", rows=" + std::to_string(n) + ")");
    }
    // The largest held-out block has ceil(n/F) rows; every training set needs >= 2.
    if (n - (n + folds - 1) / folds < 2) {
        throw DataError("too few rows (" + std::to_string(n) + ") for " + std::to_string(folds) + " folds");
    }
    if (options.fraction_grid.empty() || options.shrink_grid.empty()) {
        throw ConfigError("cross-validation grids must be non-empty");
    }

    const auto fold_list = contiguous_folds(n, folds);
    std::vector<double> cv_error(options.fraction_grid.size(), 0.0);
    for (const auto& fold : fold_list) {
        const MatrixXd Xtr = take_rows(X, fold.train);
        const VectorXd ytr = take_rows(y, fold.train);
        const MatrixXd Xte = take_rows(X, fold.test);
        const VectorXd yte = take_rows(y, fold.test);
        const auto path = lars_path(Xtr, ytr);
        for (std::size_t g = 0; g < options.fraction_grid.size(); ++g) {
            const auto [b0, b] = lars_at_fraction(path, options.fraction_grid[g]);
            const VectorXd resid = yte - ((Xte * b).array() + b0).matrix();
            cv_error[g] += resid.squaredNorm();
        }
    }
    for (auto& e : cv_error) {
        e /= static_cast<double>(n);
    }
    const std::size_t best = argmin_first(cv_error);
    const double chosen = options.fraction_grid[best];

    LinearModel m;
    m.map_id = map_id;
    const auto full_path = lars_path(X, y);
    const auto [b0, b] = lars_at_fraction(full_path, chosen);
    const bool empty_active = (b.array() == 0.0).all();

    std::vector<double> shrink_error;
    if (!empty_active) {
        m.method = FitMethod::LarsCv;
        m.intercept = b0;
        m.coefficients = b;
    } else {
        // No variable chosen: least squares shrunk toward the mean by a CV-chosen factor.
        shrink_error.assign(options.shrink_grid.size(), 0.0);
        for (const auto& fold : fold_list) {
            const MatrixXd Xtr = take_rows(X, fold.train);
            const VectorXd ytr = take_rows(y, fold.train);
            const MatrixXd Xte = take_rows(X, fold.test);
            const VectorXd yte = take_rows(y, fold.test);
            const VectorXd x_mean = Xtr.colwise().mean();
            const double y_mean = ytr.mean();
            const VectorXd beta = centred_ls(Xtr, ytr, x_mean, y_mean);
            const VectorXd centred_fit = (Xte.rowwise() - x_mean.transpose()) * beta;
            for (std::size_t g = 0; g < options.shrink_grid.size(); ++g) {
                const VectorXd resid = yte - ((options.shrink_grid[g] * centred_fit).array() + y_mean).matrix();
                shrink_error[g] += resid.squaredNorm();
            }
        }
        for (auto& e : shrink_error) {
            e /= static_cast<double>(n);
        }
        const double factor = options.shrink_grid[argmin_first(shrink_error)];
        const VectorXd x_mean = X.colwise().mean();
        const double y_mean = y.mean();
        m.method = FitMethod::UniformShrink;
        m.coefficients = centred_ls(X, y, x_mean, y_mean);
        m.shrink_factor = factor;
        m.intercept = y_mean - factor * x_mean.dot(m.coefficients);
    }
    m.fit_corr = correlation(predict(m, X), y);

    if (report != nullptr) {
        report->cv_error = std::move(cv_error);
        report->chosen_fraction = chosen;
        report->shrink_cv_error = std::move(shrink_error);
    }
    return m;
}

VectorXd predict(const LinearModel& model, const MatrixXd& X)
{
    if (X.cols() != model.coefficients.size()) {
        throw DataError("prediction design has " + std::to_string(X.cols()) + " columns, model has " +
                        std::to_string(model.coefficients.size()) + " coefficients");
    }
    VectorXd out = X * model.effective_coefficients();
    out.array() += model.intercept;
    return out;
}

void write_models_csv(const std::vector<LinearModel>& models, std::ostream& out)
{
    const Index k = models.empty() ? 0 : models.front().coefficients.size();
    out << "map_id,method,intercept,shrink_factor";
    for (Index j = 1; j <= k; ++j) {
        out << ",coef_" << j;
    }
    out << ",fit_corr\n";
    for (const auto& m : models) {
        if (m.coefficients.size() != k) {
            throw DataError("model CSV needs every model to have the same number of coefficients");
        }
        out << m.map_id << ',' << to_string(m.method) << ',' << csv::format_double(m.intercept) << ','
            << csv::format_double(m.shrink_factor);
        for (Index j = 0; j < k; ++j) {
            out << ',' << csv::format_double(m.coefficients(j));
        }
        out << ',' << (m.fit_corr ? csv::format_double(*m.fit_corr) : "NA") << '\n';
    }
}

std::vector<LinearModel> read_models_csv(const std::vector<std::string>& lines)
{
    if (lines.empty()) {
        throw DataError("model CSV: missing header");
    }
    const auto header = csv::split_line(lines.front());
    if (header.size() < 5 || header[0] != "map_id" || header.back() != "fit_corr") {
        throw DataError("model CSV: unexpected header");
    }
    const std::size_t k = header.size() - 5;
    auto number = [&](const std::string& cell, std::size_t row) {
        const auto v = csv::parse_double(cell);
        if (!v) {
            throw DataError("model CSV: non-numeric cell '" + cell + "' in row " + std::to_string(row + 1));
        }
        return *v;
    };
    std::vector<LinearModel> models;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = csv::split_line(lines[r]);
        if (cells.size() != header.size()) {
            throw DataError("model CSV: ragged row " + std::to_string(r + 1));
        }
        LinearModel m;
        m.map_id = static_cast<int>(number(cells[0], r));
        m.method = parse_fit_method(cells[1]);
        m.intercept = number(cells[2], r);
        m.shrink_factor = number(cells[3], r);
        m.coefficients.resize(static_cast<Index>(k));
        for (std::size_t j = 0; j < k; ++j) {
            m.coefficients(static_cast<Index>(j)) = number(cells[4 + j], r);
        }
        if (cells.back() != "NA") {
            m.fit_corr = number(cells.back(), r);
        }
        models.push_back(std::move(m));
    }
    return models;
}

} // namespace embedcast
