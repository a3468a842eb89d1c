#include "panelecm/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "panelecm/distributions.hpp"
#include "panelecm/error.hpp"
#include "panelecm/sur.hpp"

namespace panelecm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string column_name(const std::vector<std::string>& names, Eigen::Index j) {
    if (static_cast<std::size_t>(j) < names.size()) return names[static_cast<std::size_t>(j)];
    return "x" + std::to_string(j);
}

double within_entity_dw(const Eigen::VectorXd& e, std::size_t groups) {
    const auto n = e.size();
    const Eigen::Index len = groups == 0 ? n : n / static_cast<Eigen::Index>(groups);
    double num = 0.0;
    for (Eigen::Index g = 0; g < n; g += len) {
        for (Eigen::Index t = 1; t < len; ++t) {
            const double d = e(g + t) - e(g + t - 1);
            num += d * d;
        }
    }
    const double den = e.squaredNorm();
    return den > 0.0 ? num / den : kNaN;
}

/// Summary statistics for a (possibly whitened) system. `Xw`, `yw` are the
/// whitened data; `b` the coefficients; `xtx_inv` = (Xw'Xw)^-1.
void fill_summary(FitResult& fit, const Eigen::MatrixXd& Xw, const Eigen::VectorXd& yw, const Eigen::MatrixXd& xtx_inv) {
    const auto n = static_cast<double>(Xw.rows());
    const auto k = static_cast<double>(Xw.cols());
    fit.n_observations = static_cast<std::size_t>(Xw.rows());
    fit.n_parameters = static_cast<std::size_t>(Xw.cols());
    fit.weighted_residuals = yw - Xw * fit.coefficients;
    fit.ssr = fit.weighted_residuals.squaredNorm();
    fit.mean_dependent = yw.mean();
    const double tss = (yw.array() - fit.mean_dependent).square().sum();
    fit.sd_dependent = n > 1 ? std::sqrt(tss / (n - 1.0)) : 0.0;
    fit.r_squared = tss > 0.0 ? 1.0 - fit.ssr / tss : kNaN;
    fit.adjusted_r_squared = 1.0 - (1.0 - fit.r_squared) * (n - 1.0) / (n - k);
    const double s2 = fit.ssr / (n - k);
    fit.se_regression = std::sqrt(s2);
    fit.covariance = s2 * xtx_inv;
    fit.standard_errors = fit.covariance.diagonal().array().sqrt();
    fit.t_statistics = fit.coefficients.array() / fit.standard_errors.array();
    fit.p_values.resize(fit.coefficients.size());
    for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
        const double t = fit.t_statistics(j);
        fit.p_values(j) = std::isnan(t) ? kNaN : student_t_two_sided_p(t, n - k);
    }
    if (fit.has_intercept && fit.n_parameters > 1 && std::isfinite(fit.r_squared) && fit.r_squared < 1.0) {
        fit.f_statistic = (fit.r_squared / (k - 1.0)) / ((1.0 - fit.r_squared) / (n - k));
        fit.f_probability = f_sf(fit.f_statistic, k - 1.0, n - k);
    } else if (fit.has_intercept && fit.n_parameters > 1) {
        fit.f_statistic = std::numeric_limits<double>::infinity();
        fit.f_probability = 0.0;
    } else {
        fit.f_statistic = kNaN;
        fit.f_probability = kNaN;
    }
    fit.durbin_watson = within_entity_dw(fit.weighted_residuals, fit.sample.n_entities());
    fit.schwarz_criterion = fit.ssr > 0.0 ? schwarz_criterion(fit.ssr, fit.n_observations, fit.n_parameters) : kNaN;
}

}  // namespace

LeastSquaresSolution solve_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                         const std::vector<std::string>& names) {
    const auto n = X.rows();
    const auto k = X.cols();
    if (y.size() != n) throw std::invalid_argument("solve_least_squares: X and y row counts differ");
    if (k == 0) throw std::invalid_argument("solve_least_squares: empty design");
    if (n <= k) {
        throw RankDeficiencyError("need more observations (" + std::to_string(n) + ") than coefficients (" +
                                      std::to_string(k) + ")",
                                  {});
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
    const auto& sv = svd.singularValues();
    if (!(sv(k - 1) > kRankTolerance * sv(0))) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> piv(X);
        piv.setThreshold(kRankTolerance);
        const auto rank = piv.rank();
        std::vector<std::string> dropped;
        std::string msg = "design matrix is rank deficient (rank " + std::to_string(rank) + " of " +
                          std::to_string(k) + "); collinear columns:";
        for (Eigen::Index j = std::max<Eigen::Index>(rank, 0); j < k; ++j) {
            dropped.push_back(column_name(names, piv.colsPermutation().indices()(j)));
            msg += " " + dropped.back();
        }
        if (dropped.empty()) {
            dropped.push_back(column_name(names, piv.colsPermutation().indices()(k - 1)));
            msg += " " + dropped.back();
        }
        throw RankDeficiencyError(msg, std::move(dropped));
    }
    LeastSquaresSolution out;
    const Eigen::VectorXd qty = qr.householderQ().transpose() * y;
    out.coefficients = R.triangularView<Eigen::Upper>().solve(qty.head(k));
    const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    out.xtx_inverse = Rinv * Rinv.transpose();
    out.residuals = y - X * out.coefficients;
    out.ssr = out.residuals.squaredNorm();
    return out;
}

void WeightMatrix::validate() const {
    if (kind == WeightKind::identity) {
        if (sigma) throw std::invalid_argument("identity weight must not carry a covariance");
        return;
    }
    if (!sigma) throw std::invalid_argument("cross-section SUR weight requires a covariance");
    sigma->validate();
}

std::optional<std::size_t> FitResult::index_of(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
}

FitResult ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool has_intercept) {
    PanelDesign d;
    d.X = X;
    d.y = y;
    d.dependent_label = "Y";
    for (Eigen::Index j = 0; j < X.cols(); ++j) d.names.push_back("x" + std::to_string(j));
    FitResult fit = ols_fit(d);
    fit.has_intercept = has_intercept;
    const auto n = static_cast<double>(fit.n_observations);
    const auto k = static_cast<double>(fit.n_parameters);
    if (has_intercept && fit.n_parameters > 1 && std::isfinite(fit.r_squared) && fit.r_squared < 1.0) {
        fit.f_statistic = (fit.r_squared / (k - 1.0)) / ((1.0 - fit.r_squared) / (n - k));
        fit.f_probability = f_sf(fit.f_statistic, k - 1.0, n - k);
    }
    return fit;
}

FitResult ols_fit(const PanelDesign& design) {
    auto ls = solve_least_squares(design.X, design.y, design.names);
    FitResult fit;
    fit.dependent = design.dependent_label;
    fit.names = design.names;
    fit.coefficients = std::move(ls.coefficients);
    fit.has_intercept = design.intercept_column.has_value();
    fit.sample = design.sample;
    fit.actual = design.y;
    fit.fitted = design.X * fit.coefficients;
    fit.residuals = design.y - fit.fitted;
    fill_summary(fit, design.X, design.y, ls.xtx_inverse);
    return fit;
}

FitResult gls_fit(const PanelDesign& design, const WeightMatrix& weight) {
    weight.validate();
    if (weight.kind == WeightKind::identity) return ols_fit(design);

    const auto& cov = *weight.sigma;
    const auto N = static_cast<Eigen::Index>(design.sample.n_entities());
    const auto T = static_cast<Eigen::Index>(design.sample.n_periods());
    if (cov.sigma.rows() != N || N * T != design.X.rows()) {
        throw std::invalid_argument("gls_fit: covariance dimension does not match the panel sample");
    }
    const Eigen::MatrixXd Xw = whiten_by_period(design.X, cov.sigma, static_cast<std::size_t>(T));
    const Eigen::VectorXd yw = whiten_by_period(design.y, cov.sigma, static_cast<std::size_t>(T));
    auto ls = solve_least_squares(Xw, yw, design.names);

    FitResult fit;
    fit.dependent = design.dependent_label;
    fit.names = design.names;
    fit.coefficients = std::move(ls.coefficients);
    fit.has_intercept = design.intercept_column.has_value();
    fit.sample = design.sample;
    fit.weight = weight;
    fit.actual = design.y;
    fit.fitted = design.X * fit.coefficients;
    fit.residuals = design.y - fit.fitted;
    fill_summary(fit, Xw, yw, ls.xtx_inverse);
    return fit;
}

double durbin_watson(const Eigen::MatrixXd& residuals) {
    if (residuals.cols() < 2) throw std::invalid_argument("durbin_watson: each entity needs at least 2 residuals");
    const double den = residuals.squaredNorm();
    if (den == 0.0) throw std::domain_error("durbin_watson: all residuals are zero");
    double num = 0.0;
    for (Eigen::Index i = 0; i < residuals.rows(); ++i)
        for (Eigen::Index t = 1; t < residuals.cols(); ++t) {
            const double d = residuals(i, t) - residuals(i, t - 1);
            num += d * d;
        }
    return num / den;
}

double schwarz_criterion(double ssr, std::size_t n, std::size_t k) {
    if (n <= k) throw std::invalid_argument("schwarz_criterion: need n > k");
    if (!(ssr > 0.0)) throw std::domain_error("schwarz_criterion: SSR is zero");
    const auto nd = static_cast<double>(n);
    return std::log(ssr / nd) + static_cast<double>(k) * std::log(nd) / nd;
}

double schwarz_criterion(const FitResult& fit) {
    return schwarz_criterion(fit.ssr, fit.n_observations, fit.n_parameters);
}

NestedFTest nested_f_test(const FitResult& restricted, const FitResult& full) {
    if (restricted.n_observations != full.n_observations) {
        throw std::invalid_argument("nested_f_test: models use different samples");
    }
    if (restricted.n_parameters >= full.n_parameters) {
        throw std::invalid_argument("nested_f_test: restricted model must have fewer parameters");
    }
    NestedFTest out;
    out.df_numerator = full.n_parameters - restricted.n_parameters;
    out.df_denominator = full.n_observations - full.n_parameters;
    const double num = std::max(restricted.ssr - full.ssr, 0.0) / static_cast<double>(out.df_numerator);
    const double den = full.ssr / static_cast<double>(out.df_denominator);
    out.f_statistic = num / den;
    out.p_value = f_sf(out.f_statistic, static_cast<double>(out.df_numerator), static_cast<double>(out.df_denominator));
    return out;
}

}  // namespace panelecm
