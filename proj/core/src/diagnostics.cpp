#include "panelecm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "panelecm/distributions.hpp"
#include "text.hpp"

namespace panelecm {

namespace {

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd da = a.array() - a.mean();
    const Eigen::VectorXd db = b.array() - b.mean();
    const double den = std::sqrt(da.squaredNorm() * db.squaredNorm());
    if (!(den > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::clamp(da.dot(db) / den, -1.0, 1.0);
}

bool is_constant(const Eigen::VectorXd& c) {
    return c.size() > 0 && (c.array() == c(0)).all();
}

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

}  // namespace

KleinResult klein_criterion(const Eigen::MatrixXd& X, const std::vector<std::string>& names, double r_squared) {
    const auto k = X.cols();
    if (static_cast<std::size_t>(k) != names.size()) throw std::invalid_argument("klein_criterion: name count mismatch");
    if (k < 2) throw std::invalid_argument("klein_criterion needs at least two regressors");
    KleinResult out;
    out.names = names;
    out.r_squared = r_squared;
    out.correlation = Eigen::MatrixXd::Identity(k, k);
    out.passed = true;
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i + 1; j < k; ++j) {
            double r = pearson(X.col(i), X.col(j));
            if (std::isnan(r)) r = 1.0;  // a constant column is collinear with the intercept
            out.correlation(i, j) = out.correlation(j, i) = r;
            if (std::abs(r) > out.max_abs_off_diagonal || (i == 0 && j == 1)) {
                out.max_abs_off_diagonal = std::abs(r);
                out.max_pair = {names[static_cast<std::size_t>(i)], names[static_cast<std::size_t>(j)]};
            }
            if (!(std::abs(r) < r_squared)) out.passed = false;
        }
    }
    return out;
}

ResidualCorrelation regressor_residual_correlation(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                                                   const Eigen::VectorXd& residuals, double threshold) {
    if (X.rows() != residuals.size()) throw std::invalid_argument("regressor_residual_correlation: row mismatch");
    if (static_cast<std::size_t>(X.cols()) != names.size()) {
        throw std::invalid_argument("regressor_residual_correlation: name count mismatch");
    }
    ResidualCorrelation out;
    out.names = names;
    out.threshold = threshold;
    out.correlation.resize(X.cols());
    out.passed = true;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        double r = pearson(X.col(j), residuals);
        if (std::isnan(r)) r = 0.0;
        out.correlation(j) = r;
        out.max_abs = std::max(out.max_abs, std::abs(r));
        if (!(std::abs(r) < threshold)) out.passed = false;
    }
    return out;
}

JarqueBeraResult jarque_bera(const Eigen::VectorXd& residuals) {
    const auto n = residuals.size();
    if (n < 3) throw std::invalid_argument("jarque_bera needs at least 3 observations");
    const Eigen::ArrayXd d = residuals.array() - residuals.mean();
    const double m2 = d.square().mean();
    if (!(m2 > 0.0)) throw std::invalid_argument("jarque_bera: residuals have zero variance");
    const double m3 = d.cube().mean();
    const double m4 = d.square().square().mean();
    JarqueBeraResult out;
    out.n = static_cast<std::size_t>(n);
    out.skewness = m3 / std::pow(m2, 1.5);
    out.kurtosis = m4 / (m2 * m2);
    const double ek = out.kurtosis - 3.0;
    out.statistic = static_cast<double>(n) / 6.0 * (out.skewness * out.skewness + ek * ek / 4.0);
    out.p_value = chi_square_sf(out.statistic, 2.0);
    return out;
}

WhiteResult white_test(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                       WhiteTerms terms, double significance) {
    const auto n = X.rows();
    if (residuals.size() != n) throw std::invalid_argument("white_test: residual length mismatch");
    if (static_cast<std::size_t>(X.cols()) != names.size()) throw std::invalid_argument("white_test: name count mismatch");

    std::vector<Eigen::Index> base;
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        if (!is_constant(X.col(j))) base.push_back(j);

    std::vector<Eigen::VectorXd> cols;
    std::vector<std::string> labels;
    for (auto j : base) {
        cols.push_back(X.col(j));
        labels.push_back(names[static_cast<std::size_t>(j)]);
    }
    for (auto j : base) {
        cols.push_back(X.col(j).array().square().matrix());
        labels.push_back(names[static_cast<std::size_t>(j)] + "^2");
    }
    if (terms == WhiteTerms::levels_squares_and_cross) {
        for (std::size_t a = 0; a < base.size(); ++a)
            for (std::size_t b = a + 1; b < base.size(); ++b) {
                cols.push_back(X.col(base[a]).cwiseProduct(X.col(base[b])));
                labels.push_back(names[static_cast<std::size_t>(base[a])] + "*" + names[static_cast<std::size_t>(base[b])]);
            }
    }

    // Greedy rank screen: keep a term only if it adds a direction.
    WhiteResult out;
    Eigen::MatrixXd Z(n, 1);
    Z.col(0).setOnes();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const double scale = cols[c].norm();
        bool keep = scale > 0.0;
        if (keep) {
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
            const Eigen::VectorXd r = cols[c] - Z * qr.solve(cols[c]);
            keep = r.norm() > 1e-8 * scale;
        }
        if (keep && Z.cols() + 1 < n) {
            Z.conservativeResize(Eigen::NoChange, Z.cols() + 1);
            Z.col(Z.cols() - 1) = cols[c];
            out.terms.push_back(labels[c]);
        } else {
            out.dropped.push_back(labels[c]);
        }
    }
    if (out.terms.empty()) throw std::invalid_argument("white_test: no usable auxiliary terms");

    const Eigen::VectorXd e2 = residuals.array().square().matrix();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
    const Eigen::VectorXd u = e2 - Z * qr.solve(e2);
    const double tss = (e2.array() - e2.mean()).square().sum();
    const double r2 = tss > 0.0 ? 1.0 - u.squaredNorm() / tss : 0.0;
    out.df = out.terms.size();
    out.n_times_r2 = static_cast<double>(n) * r2;
    out.critical_value = chi_square_quantile(1.0 - significance, static_cast<double>(out.df));
    out.p_value = chi_square_sf(out.n_times_r2, static_cast<double>(out.df));
    out.homoskedastic = out.n_times_r2 < out.critical_value;
    return out;
}

Eigen::MatrixXd pairwise_residual_correlation(const Eigen::MatrixXd& residuals) {
    const auto N = residuals.rows();
    if (N < 2) throw std::invalid_argument("cross-section dependence tests need at least two entities");
    if (residuals.cols() < 3) throw std::invalid_argument("cross-section dependence tests need at least three periods");
    const Eigen::VectorXd norms = residuals.rowwise().norm();
    if ((norms.array() <= 0.0).any()) throw std::invalid_argument("an entity has identically zero residuals");
    Eigen::MatrixXd rho = residuals * residuals.transpose();
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) rho(i, j) = std::clamp(rho(i, j) / (norms(i) * norms(j)), -1.0, 1.0);
    return rho;
}

CrossSectionTestResult breusch_pagan_lm(const Eigen::MatrixXd& residuals) {
    const Eigen::MatrixXd rho = pairwise_residual_correlation(residuals);
    const auto N = rho.rows();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = i + 1; j < N; ++j) sum += rho(i, j) * rho(i, j);
    CrossSectionTestResult out;
    out.df = static_cast<std::size_t>(N * (N - 1) / 2);
    out.statistic = static_cast<double>(residuals.cols()) * sum;
    out.p_value = chi_square_sf(out.statistic, static_cast<double>(out.df));
    return out;
}

CrossSectionTestResult pesaran_cd(const Eigen::MatrixXd& residuals) {
    const Eigen::MatrixXd rho = pairwise_residual_correlation(residuals);
    const auto N = static_cast<double>(rho.rows());
    double sum = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
        for (Eigen::Index j = i + 1; j < rho.rows(); ++j) sum += rho(i, j);
    CrossSectionTestResult out;
    out.statistic = std::sqrt(2.0 * static_cast<double>(residuals.cols()) / (N * (N - 1.0))) * sum;
    out.p_value = normal_two_sided_p(out.statistic);
    return out;
}

ResidualPlot residual_plot_data(const FitResult& fit, double significance) {
    ResidualPlot p;
    p.sample = fit.sample;
    p.actual = fit.actual;
    p.fitted = fit.fitted;
    p.residual = fit.residuals;
    const auto n = p.residual.size();
    if (n == 0) throw std::invalid_argument("residual_plot_data: empty fit");
    p.mean_residual = p.residual.mean();

    const auto T = p.sample.n_periods();
    if (T >= 2 && static_cast<std::size_t>(n) == p.sample.n_observations()) {
        Eigen::MatrixXd Z(n, 2);
        for (Eigen::Index r = 0; r < n; ++r) {
            Z(r, 0) = 1.0;
            Z(r, 1) = static_cast<double>(p.sample.first_period) + static_cast<double>(static_cast<std::size_t>(r) % T);
        }
        const auto ls = solve_least_squares(Z, p.residual);
        const double s2 = ls.ssr / static_cast<double>(n - 2);
        const double se = std::sqrt(s2 * ls.xtx_inverse(1, 1));
        p.trend.slope = ls.coefficients(1);
        p.trend.t_statistic = se > 0.0 ? p.trend.slope / se : 0.0;
        p.trend.p_value = se > 0.0 ? student_t_two_sided_p(p.trend.t_statistic, static_cast<double>(n - 2)) : 1.0;
        p.trend.passed = !(p.trend.p_value < significance);
    }
    return p;
}

void write_residual_plot(std::ostream& out, const ResidualPlot& plot) {
    out << "entity,period,actual,fitted,residual\n";
    out << std::setprecision(17);
    const auto T = plot.sample.n_periods();
    for (Eigen::Index r = 0; r < plot.residual.size(); ++r) {
        const auto row = static_cast<std::size_t>(r);
        out << detail::quote_field(plot.sample.entities[row / T]) << ','
            << plot.sample.first_period + static_cast<int>(row % T) << ',' << plot.actual(r) << ',' << plot.fitted(r)
            << ',' << plot.residual(r) << '\n';
    }
}

std::pair<Eigen::MatrixXd, std::vector<std::string>> core_regressors(const EcmResult& ecm) {
    const auto& d = ecm.design;
    const std::string ut_label = d.names.back();
    std::vector<Eigen::Index> keep;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < d.names.size(); ++c) {
        if (d.intercept_column && *d.intercept_column == c) continue;
        if (d.names[c] == ut_label) continue;
        keep.push_back(static_cast<Eigen::Index>(c));
        names.push_back(d.names[c]);
    }
    Eigen::MatrixXd X(d.X.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) X.col(static_cast<Eigen::Index>(c)) = d.X.col(keep[c]);
    return {std::move(X), std::move(names)};
}

DiagnosticsReport gauss_markov_report(const EcmResult& ecm, const DiagnosticsConfig& config) {
    const auto& fit = ecm.ecm_fit;
    DiagnosticsReport r;
    r.significance = config.significance;
    r.n_observations = fit.n_observations;
    r.n_parameters = fit.n_parameters;

    auto [X, names] = core_regressors(ecm);
    r.klein = klein_criterion(X, names, fit.r_squared);
    r.regressor_residual = regressor_residual_correlation(X, names, fit.residuals, config.correlation_threshold);

    // Distributional and dependence checks run on the weighted residuals.
    r.jarque_bera = jarque_bera(fit.weighted_residuals);
    Eigen::MatrixXd Xw(ecm.design.X.rows(), ecm.design.X.cols() - (ecm.design.intercept_column ? 1 : 0));
    std::vector<std::string> white_names;
    for (std::size_t c = 0, k = 0; c < ecm.design.names.size(); ++c) {
        if (ecm.design.intercept_column && *ecm.design.intercept_column == c) continue;
        Xw.col(static_cast<Eigen::Index>(k++)) = ecm.design.X.col(static_cast<Eigen::Index>(c));
        white_names.push_back(ecm.design.names[c]);
    }
    r.white = white_test(fit.weighted_residuals, Xw, white_names, config.white_terms, config.significance);
    const Eigen::MatrixXd ew = unstack(fit.weighted_residuals, fit.sample);
    r.bp_lm = breusch_pagan_lm(ew);
    r.pesaran_cd = pesaran_cd(ew);
    r.plot = residual_plot_data(fit, config.significance);
    r.residual_mean = r.plot.mean_residual;

    for (Eigen::Index j = 0; j < fit.p_values.size(); ++j) {
        if (!(fit.p_values(j) < config.significance)) r.insignificant_terms.push_back(fit.names[static_cast<std::size_t>(j)]);
    }

    const double a = config.significance;
    const double sd = fit.residuals.size() > 1 ? std::sqrt((fit.residuals.array() - r.residual_mean).square().mean()) : 0.0;
    r.verdicts = {
        {"Degrees of freedom (n > k)", "Observation count", r.n_observations > r.n_parameters},
        {"Significant parameters", "t-tests", r.insignificant_terms.empty()},
        {"No multicollinearity", "Klein criterion", r.klein.passed},
        {"Regressors uncorrelated with residuals", "Correlation matrix", r.regressor_residual.passed},
        {"Normal distribution of residuals", "Jarque-Bera", !(r.jarque_bera.p_value < a)},
        {"Homoskedasticity", "White test", r.white.homoskedastic},
        {"Cross-section dependence absence", "Breusch-Pagan LM", !(r.bp_lm.p_value < a)},
        {"Cross-section dependence absence", "Pesaran CD", !(r.pesaran_cd.p_value < a)},
        {"Zero conditional mean of errors", "Residual plot", r.plot.trend.passed && std::abs(r.residual_mean) <= 0.1 * sd},
    };
    r.passed = std::all_of(r.verdicts.begin(), r.verdicts.end(), [](const Verdict& v) { return v.passed; });
    return r;
}

void render_diagnostics(std::ostream& out, const DiagnosticsReport& r) {
    out << "Residuals hypothesis (alpha = " << r.significance << ")\n\n";
    out << std::left << std::setw(40) << "Hypothesis" << std::setw(20) << "Method" << std::setw(14) << "Statistic"
        << std::setw(8) << "df" << std::setw(10) << "Prob." << "Verdict\n";
    auto row = [&](const std::string& h, const std::string& m, double stat, const std::string& df, double p, bool ok) {
        out << std::setw(40) << h << std::setw(20) << m << std::setw(14) << fixed(stat, 3) << std::setw(8) << df
            << std::setw(10) << fixed(p, 3) << (ok ? "pass" : "FAIL") << '\n';
    };
    const double a = r.significance;
    row("Normal distribution of residuals", "Jarque-Bera", r.jarque_bera.statistic, "2", r.jarque_bera.p_value,
        !(r.jarque_bera.p_value < a));
    row("Homoskedasticity", "White test", r.white.n_times_r2, std::to_string(r.white.df), r.white.p_value,
        r.white.homoskedastic);
    row("Cross-section dependence absence", "Breusch-Pagan LM", r.bp_lm.statistic, std::to_string(r.bp_lm.df),
        r.bp_lm.p_value, !(r.bp_lm.p_value < a));
    row("Cross-section dependence absence", "Pesaran CD", r.pesaran_cd.statistic, "-", r.pesaran_cd.p_value,
        !(r.pesaran_cd.p_value < a));
    out << "\nWhite critical value " << fixed(r.white.critical_value, 3) << " (chi-square, " << r.white.df
        << " df, " << r.white.terms.size() << " auxiliary terms)\n";
    if (!r.white.dropped.empty()) {
        out << "White terms dropped as collinear:";
        for (const auto& d : r.white.dropped) out << ' ' << d;
        out << '\n';
    }
    out << "Jarque-Bera skewness " << fixed(r.jarque_bera.skewness, 4) << ", kurtosis " << fixed(r.jarque_bera.kurtosis, 4)
        << '\n';
    out << "Residual mean " << std::scientific << std::setprecision(3) << r.residual_mean << std::defaultfloat
        << "; trend slope p-value " << fixed(r.plot.trend.p_value, 3) << '\n';

    out << "\nKlein criterion (R-squared = " << fixed(r.klein.r_squared, 4) << ")\n";
    out << std::setw(16) << "";
    for (const auto& n : r.klein.names) out << std::setw(16) << n;
    out << '\n';
    for (std::size_t i = 0; i < r.klein.names.size(); ++i) {
        out << std::setw(16) << r.klein.names[i];
        for (std::size_t j = 0; j < r.klein.names.size(); ++j)
            out << std::setw(16) << fixed(r.klein.correlation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 2);
        out << '\n';
    }
    out << "max |rho| = " << fixed(r.klein.max_abs_off_diagonal, 2) << " (" << r.klein.max_pair.first << ", "
        << r.klein.max_pair.second << ")\n";

    out << "\nCorrelation between residuals and regressors\n";
    out << std::setw(16) << "";
    for (const auto& n : r.regressor_residual.names) out << std::setw(16) << n;
    out << '\n' << std::setw(16) << "Residuals";
    for (Eigen::Index j = 0; j < r.regressor_residual.correlation.size(); ++j)
        out << std::setw(16) << fixed(r.regressor_residual.correlation(j), 2);
    out << "\n\nVerdicts\n";
    for (const auto& v : r.verdicts) out << std::setw(40) << v.hypothesis << std::setw(24) << v.method << (v.passed ? "pass" : "FAIL") << '\n';
    out << "Overall: " << (r.passed ? "all Gauss-Markov checks pass" : "one or more checks fail") << '\n';
}

}  // namespace panelecm
