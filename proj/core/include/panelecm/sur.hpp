#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "panelecm/covariance.hpp"
#include "panelecm/panel.hpp"
#include "panelecm/regression.hpp"

namespace panelecm {

struct SigmaOptions {
    /// Shrink a non positive definite estimate toward its diagonal using the
    /// smallest of {0.01, 0.05, 0.1} that restores definiteness.
    bool shrink_to_diagonal = false;
};

struct SigmaEstimate {
    CrossSectionCovariance covariance;
    double shrinkage = 0.0;  ///< lambda applied, 0 when none
};

/// sigma_ij = (1/T) sum_t e_it e_jt over N x T aligned residuals.
Eigen::MatrixXd residual_cross_product(const Eigen::MatrixXd& residuals);

/// Estimates the cross-section covariance. Throws NotPositiveDefiniteError when
/// the estimate is degenerate and shrinkage is disabled or insufficient.
SigmaEstimate estimate_sigma(const Eigen::MatrixXd& residuals, const std::vector<std::string>& entity_order,
                             const SigmaOptions& options = {});

/// Applies L^-1 (sigma = L L') across entities within every period of an
/// entity-major stacked array with `periods` rows per entity.
Eigen::MatrixXd whiten_by_period(const Eigen::MatrixXd& stacked, const Eigen::MatrixXd& sigma, std::size_t periods);

/// One-step cross-section SUR feasible GLS: sigma from the first-stage
/// residuals, one whitening pass, one least-squares solve.
FitResult sur_one_step_fit(const PanelDesign& design, const FitResult& first_stage, const SigmaOptions& options = {});

/// A further weighting iteration: re-estimates sigma from the unweighted
/// residuals of `previous` (itself a SUR fit) and solves again.
FitResult sur_reweight_fit(const PanelDesign& design, const FitResult& previous, const SigmaOptions& options = {});

/// Writes sigma as a delimited matrix with entity header row and column.
void write_sigma_csv(std::ostream& out, const CrossSectionCovariance& cov);

}  // namespace panelecm
