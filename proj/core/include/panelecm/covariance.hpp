#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace panelecm {

/// Contemporaneous N x N residual covariance across panel entities.
struct CrossSectionCovariance {
    std::vector<std::string> entity_order;
    Eigen::MatrixXd sigma;

    /// Throws NotPositiveDefiniteError unless symmetric (1e-12), with positive
    /// diagonal and a successful Cholesky factorisation.
    void validate() const;
};

}  // namespace panelecm
