#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "panelecm/ecm.hpp"
#include "panelecm/regression.hpp"

namespace panelecm {

struct KleinResult {
    std::vector<std::string> names;
    Eigen::MatrixXd correlation;
    double max_abs_off_diagonal = 0.0;
    std::pair<std::string, std::string> max_pair;
    double r_squared = 0.0;
    bool passed = false;  ///< every |rho_ij| (i != j) below r_squared
};

/// Pairwise regressor correlations judged against the regression R^2.
KleinResult klein_criterion(const Eigen::MatrixXd& X, const std::vector<std::string>& names, double r_squared);

struct ResidualCorrelation {
    std::vector<std::string> names;
    Eigen::VectorXd correlation;
    double threshold = 0.10;
    double max_abs = 0.0;
    bool passed = false;
};

ResidualCorrelation regressor_residual_correlation(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                                                   const Eigen::VectorXd& residuals, double threshold = 0.10);

struct JarqueBeraResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double skewness = 0.0;
    double kurtosis = 3.0;  ///< raw fourth standardised moment
    std::size_t n = 0;
};

/// n/6 (S^2 + (K-3)^2/4) with moment (1/n) estimators; chi-square(2) p-value.
JarqueBeraResult jarque_bera(const Eigen::VectorXd& residuals);

enum class WhiteTerms { levels_and_squares, levels_squares_and_cross };

struct WhiteResult {
    double n_times_r2 = 0.0;
    std::size_t df = 0;
    double critical_value = 0.0;
    double p_value = 1.0;
    bool homoskedastic = true;
    std::vector<std::string> terms;    ///< auxiliary regressors kept
    std::vector<std::string> dropped;  ///< collinear auxiliary terms removed
};

/// Auxiliary regression of squared residuals on a constant and the White
/// terms built from the non-constant columns of X.
WhiteResult white_test(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                       WhiteTerms terms = WhiteTerms::levels_squares_and_cross, double significance = 0.05);

struct CrossSectionTestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t df = 0;  ///< chi-square df (BP LM only)
};

/// Pairwise residual correlations over a balanced N x T residual matrix,
/// rho_ij = sum e_i e_j / sqrt(sum e_i^2 sum e_j^2).
Eigen::MatrixXd pairwise_residual_correlation(const Eigen::MatrixXd& residuals);

/// LM = T sum_{i<j} rho_ij^2 against chi-square(N(N-1)/2).
CrossSectionTestResult breusch_pagan_lm(const Eigen::MatrixXd& residuals);

/// CD = sqrt(2T/(N(N-1))) sum_{i<j} rho_ij, two-sided normal p-value.
CrossSectionTestResult pesaran_cd(const Eigen::MatrixXd& residuals);

struct TrendCheck {
    double slope = 0.0;
    double t_statistic = 0.0;
    double p_value = 1.0;
    bool passed = true;  ///< slope insignificant
};

struct ResidualPlot {
    SampleDescriptor sample;
    Eigen::VectorXd actual;
    Eigen::VectorXd fitted;
    Eigen::VectorXd residual;
    double mean_residual = 0.0;
    TrendCheck trend;
};

/// Actual, fitted and residual series in original units, stacked per sample.
ResidualPlot residual_plot_data(const FitResult& fit, double significance = 0.05);

/// entity,period,actual,fitted,residual rows.
void write_residual_plot(std::ostream& out, const ResidualPlot& plot);

struct DiagnosticsConfig {
    double significance = 0.05;
    double correlation_threshold = 0.10;
    WhiteTerms white_terms = WhiteTerms::levels_squares_and_cross;
};

struct Verdict {
    std::string hypothesis;
    std::string method;
    bool passed = false;
};

struct DiagnosticsReport {
    KleinResult klein;
    ResidualCorrelation regressor_residual;
    JarqueBeraResult jarque_bera;
    WhiteResult white;
    CrossSectionTestResult bp_lm;
    CrossSectionTestResult pesaran_cd;
    ResidualPlot plot;
    double residual_mean = 0.0;
    std::vector<std::string> insignificant_terms;
    std::size_t n_observations = 0;
    std::size_t n_parameters = 0;
    double significance = 0.05;
    std::vector<Verdict> verdicts;
    bool passed = false;
};

/// Short-run regressors excluding the constant and the residual term.
std::pair<Eigen::MatrixXd, std::vector<std::string>> core_regressors(const EcmResult& ecm);

/// Runs every check on an estimated error-correction model.
DiagnosticsReport gauss_markov_report(const EcmResult& ecm, const DiagnosticsConfig& config = {});

/// Hypothesis / method / result table plus the correlation matrices.
void render_diagnostics(std::ostream& out, const DiagnosticsReport& report);

}  // namespace panelecm
