#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace embedcast {

enum class FitMethod { Ols, LarsCv, UniformShrink };

std::string_view to_string(FitMethod method);
FitMethod parse_fit_method(std::string_view text);

/// Linear response model for one delay map.
///
/// Predictions are intercept + shrink_factor * (X * coefficients). For
/// UniformShrink models `coefficients` hold the unshrunk least-squares
/// estimate and the intercept already accounts for the shrinkage.
struct LinearModel {
    int map_id = 0;
    double intercept = 0.0;
    Eigen::VectorXd coefficients;
    FitMethod method = FitMethod::Ols;
    /// In-fit Pearson correlation; empty when fitted values or targets are constant.
    std::optional<double> fit_corr;
    double shrink_factor = 1.0;

    Eigen::VectorXd effective_coefficients() const { return shrink_factor * coefficients; }
};

/// Least squares with intercept. Rank-deficient designs get the
/// minimum-norm slope vector (complete orthogonal decomposition).
LinearModel fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int map_id = 0);

/// One breakpoint of a least-angle path.
struct LarsStep {
    std::vector<int> active;          ///< original column indices, in order of entry
    Eigen::VectorXd beta_standardized; ///< coefficients on the unit-norm, centred columns
    Eigen::VectorXd coefficients;      ///< same point on the original column scale
    double intercept = 0.0;
};

struct LarsPath {
    std::vector<LarsStep> steps; ///< steps.front() is the empty model
    std::vector<int> excluded;   ///< zero-variance or collinear columns, never entered
    Eigen::VectorXd column_mean;
    Eigen::VectorXd column_norm;
    double y_mean = 0.0;
};

/// Least-angle regression path (Efron, Hastie, Johnstone, Tibshirani).
/// Columns are centred and scaled to unit norm internally and y is centred.
/// On a full-rank design with more rows than columns the last step is the
/// least-squares fit.
LarsPath lars_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Point on the path where the L1 norm of the coefficients is `fraction` of
/// its value at the path end, interpolated linearly between breakpoints.
/// Returns (intercept, coefficients) on the original scale.
std::pair<double, Eigen::VectorXd> lars_at_fraction(const LarsPath& path, double fraction);

struct LarsCvOptions {
    int folds = 10;
    std::vector<double> fraction_grid = default_fraction_grid();
    std::vector<double> shrink_grid = default_shrink_grid();

    static std::vector<double> default_fraction_grid(); ///< 0, 0.05, ..., 1
    static std::vector<double> default_shrink_grid();   ///< 0.1, 0.2, ..., 1
};

/// Diagnostics of a cross-validated least-angle fit.
struct LarsCvReport {
    std::vector<double> cv_error;        ///< mean squared CV error per fraction
    double chosen_fraction = 1.0;
    std::vector<double> shrink_cv_error; ///< filled only when the shrinkage fallback ran
};

/// Least-angle regression with the path fraction chosen by cross-validation
/// over contiguous row blocks. When the chosen point keeps no variable the
/// model falls back to least squares shrunk by a CV-chosen uniform factor.
LinearModel fit_lars_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LarsCvOptions& options = {},
                        int map_id = 0, LarsCvReport* report = nullptr);

Eigen::VectorXd predict(const LinearModel& model, const Eigen::MatrixXd& X);

/// Model CSV: map_id,method,intercept,shrink_factor,coef_1..coef_k,fit_corr
void write_models_csv(const std::vector<LinearModel>& models, std::ostream& out);
std::vector<LinearModel> read_models_csv(const std::vector<std::string>& lines);

} // namespace embedcast
