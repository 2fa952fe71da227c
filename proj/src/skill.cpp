#include "embedcast/skill.hpp"

#include "embedcast/csv.hpp"
#include "embedcast/error.hpp"
#include "embedcast/parallel.hpp"
#include "embedcast/random.hpp"
#include "embedcast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>

namespace embedcast {

using Eigen::Index;

double silverman_bandwidth(std::span<const double> sample)
{
    if (sample.size() < 2) {
        throw DataError("bandwidth needs at least 2 points");
    }
    const double sd = sample_sd(sample);
    std::vector<double> v(sample.begin(), sample.end());
    const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (spread <= 0.0) {
        spread = sd > 0.0 ? sd : 0.0;
    }
    return 0.9 * spread * std::pow(static_cast<double>(sample.size()), -0.2);
}

GaussianKde::GaussianKde(std::vector<double> sample) : sample_(std::move(sample))
{
    const double h = silverman_bandwidth(sample_);
    const auto [lo, hi] = std::minmax_element(sample_.begin(), sample_.end());
    const double floor = 1e-9 * ((*hi - *lo) + 1.0);
    if (h < floor) {
        bandwidth_ = floor;
        floored_ = true;
    } else {
        bandwidth_ = h;
    }
}

double GaussianKde::density(double x) const
{
    const double norm = 1.0 / (static_cast<double>(sample_.size()) * bandwidth_ * std::sqrt(2.0 * std::numbers::pi));
    double s = 0.0;
    for (double v : sample_) {
        const double z = (x - v) / bandwidth_;
        s += std::exp(-0.5 * z * z);
    }
    return s * norm;
}

SkillMatrixBuild binary_skill_matrix(const std::vector<std::vector<std::vector<double>>>& members,
                                     std::span<const double> observed, std::span<const double> historic)
{
    if (historic.size() < 2) {
        throw DataError("historic sample needs at least 2 values");
    }
    const GaussianKde historic_kde({historic.begin(), historic.end()});
    SkillMatrixBuild out;
    out.floored_bandwidths += historic_kde.floored() ? 1 : 0;
    const auto rows = static_cast<Index>(members.size());
    const auto cols = static_cast<Index>(observed.size());
    out.matrix.M = Eigen::MatrixXi::Zero(rows, cols);
    for (Index s = 0; s < rows; ++s) {
        const auto& seq = members[static_cast<std::size_t>(s)];
        if (static_cast<Index>(seq.size()) != cols) {
            throw DataError("prediction sequence " + std::to_string(s) + " does not cover every season");
        }
        for (Index t = 0; t < cols; ++t) {
            const auto& ens = seq[static_cast<std::size_t>(t)];
            if (ens.size() < 2) {
                throw DataError("each season needs at least 2 ensemble members");
            }
            const GaussianKde kde(ens);
            out.floored_bandwidths += kde.floored() ? 1 : 0;
            const double x = observed[static_cast<std::size_t>(t)];
            out.matrix.M(s, t) = kde.density(x) > historic_kde.density(x) ? 1 : 0;
        }
        out.matrix.row_labels.push_back(std::to_string(s));
    }
    for (Index t = 0; t < cols; ++t) {
        out.matrix.column_labels.push_back(std::to_string(t));
    }
    return out;
}

ConditionalStatistic conditional_statistic(const Eigen::MatrixXi& M, std::size_t top_k, BaseProbability base,
                                           TopCombine combine)
{
    const Index n = M.rows();
    const Index s = M.cols();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const Eigen::MatrixXd Md = M.cast<double>();
    const Eigen::MatrixXd G = Md.transpose() * Md;
    const Eigen::VectorXd b = G.diagonal() / static_cast<double>(n);

    ConditionalStatistic out;
    out.CP = Eigen::MatrixXd::Constant(s, s, nan);
    out.P = Eigen::MatrixXd::Constant(s, s, nan);
    out.Z = Eigen::MatrixXd::Constant(s, s, nan);
    std::vector<double> finite;
    for (Index i = 0; i < s; ++i) {
        for (Index j = i + 1; j < s; ++j) {
            out.P(i, j) = base == BaseProbability::Outer ? b(i) * b(j) : b(j);
            if (G(i, i) == 0.0) {
                continue; // nothing to condition on in season i
            }
            out.CP(i, j) = G(i, j) / G(i, i);
            const double p = out.P(i, j);
            if (p > 0.0 && p < 1.0) {
                out.Z(i, j) = (out.CP(i, j) - p) / std::sqrt(p * (1.0 - p) / static_cast<double>(n));
                finite.push_back(out.Z(i, j));
            }
        }
    }
    const std::size_t used = std::min(top_k, finite.size());
    std::partial_sort(finite.begin(), finite.begin() + static_cast<std::ptrdiff_t>(used), finite.end(),
                      std::greater<>());
    double total = 0.0;
    for (std::size_t i = 0; i < used; ++i) {
        total += finite[i];
    }
    out.entries_used = used;
    out.statistic = combine == TopCombine::Mean && used > 0 ? total / static_cast<double>(used) : total;
    return out;
}

ConditionalTestResult conditional_test(const SkillMatrix& matrix, const ConditionalTestOptions& options)
{
    const auto& M = matrix.M;
    if (M.rows() < 1 || M.cols() < 2) {
        throw DataError("conditional test needs at least 1 model and 2 seasons");
    }
    if ((M.array() != 0 && M.array() != 1).any()) {
        throw DataError("skill matrix entries must be 0 or 1");
    }
    // An all-ones matrix is accepted: every permutation reproduces it and p = 1.
    if (M.sum() == 0) {
        throw DataError("skill matrix has no 1 entries");
    }
    if (options.top_k < 1 || options.n_perm < 1) {
        throw ConfigError("top_k and n_perm must be >= 1");
    }

    const auto observed = conditional_statistic(M, options.top_k, options.base, options.combine);
    ConditionalTestResult result;
    result.CP = observed.CP;
    result.P = observed.P;
    result.Z = observed.Z;
    result.statistic = observed.statistic;
    result.entries_used = observed.entries_used;
    result.n_perm = options.n_perm;
    result.top_k = options.top_k;
    result.seed = options.seed;

    std::vector<char> exceed(options.n_perm, 0);
    parallel_for(options.n_perm, options.threads, [&](std::size_t rep) {
        Rng rng(mix_seed(options.seed, rep));
        Eigen::MatrixXi perm = M;
        for (Index c = 0; c < perm.cols(); ++c) {
            rng.shuffle(std::span<int>(perm.col(c).data(), static_cast<std::size_t>(perm.rows())));
        }
        const auto stat = conditional_statistic(perm, options.top_k, options.base, options.combine);
        exceed[rep] = stat.statistic >= observed.statistic ? 1 : 0;
    });
    std::size_t count = 0;
    for (char e : exceed) {
        count += static_cast<std::size_t>(e);
    }
    result.p_value = static_cast<double>(count) / static_cast<double>(options.n_perm);
    return result;
}

std::vector<std::size_t> fdr_select(std::span<const double> p_values, double q)
{
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw DataError("p-values must lie in [0, 1]");
        }
    }
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::size_t cutoff = 0; // number selected
    for (std::size_t rank = 1; rank <= m; ++rank) {
        // p_(i) <= (i/m) q, compared as p * m <= i * q to avoid forming i/m.
        if (p_values[order[rank - 1]] * static_cast<double>(m) <= static_cast<double>(rank) * q) {
            cutoff = rank;
        }
    }
    std::vector<std::size_t> selected(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cutoff));
    std::sort(selected.begin(), selected.end());
    return selected;
}

void write_skill_matrix_csv(const SkillMatrix& matrix, std::ostream& out)
{
    out << "model";
    for (Index t = 0; t < matrix.seasons(); ++t) {
        out << ','
            << (static_cast<std::size_t>(t) < matrix.column_labels.size() ? matrix.column_labels[static_cast<std::size_t>(t)]
                                                                           : std::to_string(t));
    }
    out << '\n';
    for (Index s = 0; s < matrix.models(); ++s) {
        out << (static_cast<std::size_t>(s) < matrix.row_labels.size() ? matrix.row_labels[static_cast<std::size_t>(s)]
                                                                        : std::to_string(s));
        for (Index t = 0; t < matrix.seasons(); ++t) {
            out << ',' << matrix.M(s, t);
        }
        out << '\n';
    }
}

SkillMatrix read_skill_matrix_csv(const std::vector<std::string>& lines)
{
    if (lines.size() < 2) {
        throw DataError("skill matrix CSV needs a header and at least one row");
    }
    const auto header = csv::split_line(lines.front());
    if (header.size() < 2) {
        throw DataError("skill matrix CSV needs at least one season column");
    }
    SkillMatrix m;
    m.column_labels.assign(header.begin() + 1, header.end());
    const auto rows = static_cast<Index>(lines.size() - 1);
    const auto cols = static_cast<Index>(header.size() - 1);
    m.M.resize(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const auto cells = csv::split_line(lines[static_cast<std::size_t>(r + 1)]);
        if (cells.size() != header.size()) {
            throw DataError("skill matrix CSV: ragged row " + std::to_string(r + 2));
        }
        m.row_labels.push_back(cells.front());
        for (Index c = 0; c < cols; ++c) {
            const auto& cell = cells[static_cast<std::size_t>(c + 1)];
            if (cell != "0" && cell != "1") {
                throw DataError("skill matrix CSV: cell '" + cell + "' in row " + std::to_string(r + 2) +
                                " is not 0 or 1");
            }
            m.M(r, c) = cell == "1" ? 1 : 0;
        }
    }
    return m;
}

} // namespace embedcast
