#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace panelecm {

/// Malformed or inconsistent input data (ingestion, missing cells, gaps).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Design matrix without full column rank.
class RankDeficiencyError : public std::runtime_error {
public:
    RankDeficiencyError(const std::string& what, std::vector<std::string> columns)
        : std::runtime_error(what), columns_(std::move(columns)) {}

    /// Columns found to be linear combinations of the others.
    const std::vector<std::string>& columns() const noexcept { return columns_; }

private:
    std::vector<std::string> columns_;
};

/// Covariance matrix that is not symmetric positive definite.
class NotPositiveDefiniteError : public std::runtime_error {
public:
    NotPositiveDefiniteError(const std::string& what, Eigen::MatrixXd matrix)
        : std::runtime_error(what), matrix_(std::move(matrix)) {}

    const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }

private:
    Eigen::MatrixXd matrix_;
};

/// Error-correction estimation attempted on a non-stationary equilibrium error.
class GateNotPassedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace panelecm
