#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace embedcast {

/// Binary models x seasons matrix: 1 where a model's predictive density
/// beat the historic density for that season.
struct SkillMatrix {
    Eigen::MatrixXi M;
    std::vector<std::string> row_labels;
    std::vector<std::string> column_labels;

    Eigen::Index models() const { return M.rows(); }
    Eigen::Index seasons() const { return M.cols(); }
};

/// Gaussian kernel density with Silverman's rule-of-thumb bandwidth
/// 0.9 * min(sd, IQR/1.34) * n^(-1/5), floored at 1e-9 * (range + 1).
class GaussianKde {
public:
    explicit GaussianKde(std::vector<double> sample);

    double density(double x) const;
    double bandwidth() const { return bandwidth_; }
    /// True when the rule-of-thumb bandwidth hit the floor (degenerate spread).
    bool floored() const { return floored_; }

private:
    std::vector<double> sample_;
    double bandwidth_ = 1.0;
    bool floored_ = false;
};

double silverman_bandwidth(std::span<const double> sample);

struct SkillMatrixBuild {
    SkillMatrix matrix;
    std::size_t floored_bandwidths = 0;
};

/// members[s][t] holds the ensemble members predicting season t for
/// prediction sequence s. Entry (s, t) is 1 iff the KDE of those members
/// gives observed[t] strictly higher density than the KDE of `historic`.
SkillMatrixBuild binary_skill_matrix(const std::vector<std::vector<std::vector<double>>>& members,
                                     std::span<const double> observed, std::span<const double> historic);

enum class BaseProbability {
    Outer,      ///< P[i,j] = b_i * b_j
    Conditional ///< P[i,j] = b_j
};

enum class TopCombine { Sum, Mean };

struct ConditionalTestOptions {
    std::size_t top_k = 4;
    std::size_t n_perm = 1000;
    std::uint64_t seed = 1;
    BaseProbability base = BaseProbability::Outer;
    TopCombine combine = TopCombine::Sum;
    unsigned threads = 1;
};

struct ConditionalTestResult {
    Eigen::MatrixXd CP; ///< upper triangle (j > i) filled; NaN elsewhere or where undefined
    Eigen::MatrixXd P;
    Eigen::MatrixXd Z;
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t entries_used = 0; ///< finite Z entries combined (<= top_k)
    std::size_t n_perm = 0;
    std::size_t top_k = 0;
    std::uint64_t seed = 0;
};

/// Pieces of the statistic for one matrix, without permutation.
struct ConditionalStatistic {
    Eigen::MatrixXd CP;
    Eigen::MatrixXd P;
    Eigen::MatrixXd Z;
    double statistic = 0.0;
    std::size_t entries_used = 0;
};

ConditionalStatistic conditional_statistic(const Eigen::MatrixXi& M, std::size_t top_k,
                                           BaseProbability base = BaseProbability::Outer,
                                           TopCombine combine = TopCombine::Sum);

/// G = M'M, CP = G[i,j]/G[i,i] (j > i), b = diag(G)/N, Z = (CP - P)/sqrt(P(1-P)/N);
/// statistic = top_k largest finite Z combined. The p-value is the share of
/// column-wise permutations whose statistic is >= the observed one.
ConditionalTestResult conditional_test(const SkillMatrix& matrix, const ConditionalTestOptions& options = {});

/// Benjamini-Hochberg step-up; returns selected indices in ascending order.
std::vector<std::size_t> fdr_select(std::span<const double> p_values, double q);

/// Skill-matrix CSV: header "model,<season labels...>", one 0/1 row per model.
void write_skill_matrix_csv(const SkillMatrix& matrix, std::ostream& out);
SkillMatrix read_skill_matrix_csv(const std::vector<std::string>& lines);

} // namespace embedcast
