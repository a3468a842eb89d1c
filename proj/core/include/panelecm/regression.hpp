#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "panelecm/covariance.hpp"
#include "panelecm/panel.hpp"

namespace panelecm {

/// Relative singular-value threshold below which a design is rank deficient.
inline constexpr double kRankTolerance = 1e-10;

/// Raw least-squares solve via Householder QR.
struct LeastSquaresSolution {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd residuals;
    Eigen::MatrixXd xtx_inverse;  ///< (X'X)^-1 from the triangular factor
    double ssr = 0.0;
};

/// Solves min ||y - Xb||. Throws RankDeficiencyError (naming columns from
/// `names` when given) if X is rank deficient or rows <= columns.
LeastSquaresSolution solve_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                         const std::vector<std::string>& names = {});

enum class WeightKind { identity, cross_section_sur };

struct WeightMatrix {
    WeightKind kind = WeightKind::identity;
    std::optional<CrossSectionCovariance> sigma;

    static WeightMatrix identity() { return {}; }
    static WeightMatrix cross_section_sur(CrossSectionCovariance s) { return {WeightKind::cross_section_sur, std::move(s)}; }
    void validate() const;
};

struct FitResult {
    std::string dependent;
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    Eigen::VectorXd t_statistics;
    Eigen::VectorXd p_values;
    Eigen::MatrixXd covariance;

    Eigen::VectorXd actual;              ///< y in original units
    Eigen::VectorXd fitted;              ///< X b in original units
    Eigen::VectorXd residuals;           ///< y - X b in original units
    Eigen::VectorXd weighted_residuals;  ///< residuals of the whitened system

    // Summary block; for weighted fits these are computed on whitened data.
    double r_squared = 0.0;
    double adjusted_r_squared = 0.0;
    double f_statistic = 0.0;
    double f_probability = 0.0;
    double durbin_watson = 0.0;
    double schwarz_criterion = 0.0;
    double ssr = 0.0;
    double se_regression = 0.0;
    double mean_dependent = 0.0;
    double sd_dependent = 0.0;

    std::size_t n_observations = 0;
    std::size_t n_parameters = 0;
    bool has_intercept = false;
    WeightMatrix weight;
    SampleDescriptor sample;

    std::optional<std::size_t> index_of(const std::string& name) const;
};

/// Pooled OLS treating all rows as one group.
FitResult ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool has_intercept);

/// Pooled OLS on a stacked panel design (Durbin-Watson within entity).
FitResult ols_fit(const PanelDesign& design);

/// Least squares of the whitened system. An identity weight reproduces ols_fit.
FitResult gls_fit(const PanelDesign& design, const WeightMatrix& weight);

/// Durbin-Watson with differences taken only within each entity.
/// `residuals` is N x T (entities by periods). Throws if all residuals are zero.
double durbin_watson(const Eigen::MatrixXd& residuals);

/// ln(SSR/n) + k ln(n)/n. Throws std::domain_error when SSR == 0.
double schwarz_criterion(double ssr, std::size_t n, std::size_t k);
double schwarz_criterion(const FitResult& fit);

struct NestedFTest {
    double f_statistic = 0.0;
    double p_value = 1.0;
    std::size_t df_numerator = 0;
    std::size_t df_denominator = 0;
};

/// F test of a restricted model against a larger model on the same sample.
NestedFTest nested_f_test(const FitResult& restricted, const FitResult& full);

}  // namespace panelecm
