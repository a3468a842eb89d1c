#include "panelecm/sur.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "panelecm/error.hpp"
#include "text.hpp"

namespace panelecm {

namespace {

constexpr std::array<double, 3> kShrinkageSteps{0.01, 0.05, 0.1};

bool is_positive_definite(const Eigen::MatrixXd& m) {
    if ((m.diagonal().array() <= 0.0).any()) return false;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return false;
    // LLT succeeds on some numerically singular matrices; require a usable pivot.
    const Eigen::VectorXd d = llt.matrixLLT().diagonal();
    const double scale = m.diagonal().maxCoeff();
    return (d.array().square() > 1e-12 * scale).all();
}

}  // namespace

void CrossSectionCovariance::validate() const {
    const auto n = sigma.rows();
    if (sigma.cols() != n || static_cast<std::size_t>(n) != entity_order.size()) {
        throw std::invalid_argument("covariance shape does not match entity order");
    }
    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw NotPositiveDefiniteError("cross-section covariance is not symmetric", sigma);
    }
    if (!is_positive_definite(sigma)) {
        throw NotPositiveDefiniteError("cross-section covariance is not positive definite", sigma);
    }
}

Eigen::MatrixXd residual_cross_product(const Eigen::MatrixXd& residuals) {
    if (residuals.cols() < 2) throw std::invalid_argument("estimate_sigma: need at least 2 periods per entity");
    Eigen::MatrixXd s = residuals * residuals.transpose() / static_cast<double>(residuals.cols());
    // Exact symmetry regardless of the product kernel's rounding.
    return 0.5 * (s + s.transpose());
}

SigmaEstimate estimate_sigma(const Eigen::MatrixXd& residuals, const std::vector<std::string>& entity_order,
                             const SigmaOptions& options) {
    if (static_cast<std::size_t>(residuals.rows()) != entity_order.size()) {
        throw std::invalid_argument("estimate_sigma: one residual row per entity required");
    }
    SigmaEstimate out;
    out.covariance.entity_order = entity_order;
    out.covariance.sigma = residual_cross_product(residuals);
    const Eigen::MatrixXd& raw = out.covariance.sigma;
    if (is_positive_definite(raw)) return out;

    if (options.shrink_to_diagonal && (raw.diagonal().array() > 0.0).all()) {
        const Eigen::MatrixXd diag = raw.diagonal().asDiagonal();
        for (double lambda : kShrinkageSteps) {
            Eigen::MatrixXd shrunk = (1.0 - lambda) * raw + lambda * diag;
            if (is_positive_definite(shrunk)) {
                out.covariance.sigma = std::move(shrunk);
                out.shrinkage = lambda;
                return out;
            }
        }
    }
    std::ostringstream msg;
    msg << "estimated cross-section covariance (" << raw.rows() << " entities, " << residuals.cols()
        << " periods) is not positive definite";
    if (!options.shrink_to_diagonal) msg << "; enable the diagonal-shrinkage fallback to regularise it";
    throw NotPositiveDefiniteError(msg.str(), raw);
}

Eigen::MatrixXd whiten_by_period(const Eigen::MatrixXd& stacked, const Eigen::MatrixXd& sigma, std::size_t periods) {
    const auto N = sigma.rows();
    const auto T = static_cast<Eigen::Index>(periods);
    if (stacked.rows() != N * T) throw std::invalid_argument("whiten_by_period: row count mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw NotPositiveDefiniteError("covariance is not positive definite", sigma);
    const Eigen::MatrixXd L = llt.matrixL();
    Eigen::MatrixXd out(stacked.rows(), stacked.cols());
    Eigen::MatrixXd block(N, stacked.cols());
    for (Eigen::Index t = 0; t < T; ++t) {
        for (Eigen::Index i = 0; i < N; ++i) block.row(i) = stacked.row(i * T + t);
        L.triangularView<Eigen::Lower>().solveInPlace(block);
        for (Eigen::Index i = 0; i < N; ++i) out.row(i * T + t) = block.row(i);
    }
    return out;
}

FitResult sur_one_step_fit(const PanelDesign& design, const FitResult& first_stage, const SigmaOptions& options) {
    const auto n = design.X.rows();
    if (static_cast<std::size_t>(n) != design.sample.n_observations() || design.y.size() != n) {
        throw std::invalid_argument("sur_one_step_fit: design rows do not match the sample descriptor");
    }
    if (first_stage.residuals.size() != n) {
        throw std::invalid_argument("sur_one_step_fit: first-stage residuals do not cover the balanced sample");
    }
    const Eigen::MatrixXd e = unstack(first_stage.residuals, design.sample);
    auto est = estimate_sigma(e, design.sample.entities, options);
    return gls_fit(design, WeightMatrix::cross_section_sur(std::move(est.covariance)));
}

FitResult sur_reweight_fit(const PanelDesign& design, const FitResult& previous, const SigmaOptions& options) {
    return sur_one_step_fit(design, previous, options);
}

void write_sigma_csv(std::ostream& out, const CrossSectionCovariance& cov) {
    out << "entity";
    for (const auto& e : cov.entity_order) out << ',' << detail::quote_field(e);
    out << '\n';
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < cov.sigma.rows(); ++i) {
        out << detail::quote_field(cov.entity_order[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < cov.sigma.cols(); ++j) out << ',' << cov.sigma(i, j);
        out << '\n';
    }
}

}  // namespace panelecm
