#include "panelecm/cli/report.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace panelecm::cli {

namespace {

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

void coefficient_table(std::ostream& out, const FitResult& f) {
    std::size_t width = 8;
    for (const auto& n : f.names) width = std::max(width, n.size());
    width += 2;
    out << std::left << std::setw(static_cast<int>(width)) << "Variable" << std::right << std::setw(14) << "Coefficient"
        << std::setw(14) << "Std. Error" << std::setw(14) << "t-Statistic" << std::setw(10) << "Prob." << '\n';
    for (std::size_t j = 0; j < f.names.size(); ++j) {
        const auto k = static_cast<Eigen::Index>(j);
        out << std::left << std::setw(static_cast<int>(width)) << f.names[j] << std::right << std::setw(14)
            << fixed(f.coefficients(k), 6) << std::setw(14) << fixed(f.standard_errors(k), 6) << std::setw(14)
            << fixed(f.t_statistics(k), 6) << std::setw(10) << fixed(f.p_values(k), 4) << '\n';
    }
}

void stat_pair(std::ostream& out, const std::string& a, const std::string& av, const std::string& b = {},
               const std::string& bv = {}) {
    out << std::left << std::setw(22) << a << std::right << std::setw(14) << av;
    if (!b.empty()) out << "    " << std::left << std::setw(22) << b << std::right << std::setw(14) << bv;
    out << '\n';
}

void summary_statistics(std::ostream& out, const FitResult& f) {
    stat_pair(out, "R-squared", fixed(f.r_squared, 6), "Mean dependent var", fixed(f.mean_dependent, 6));
    stat_pair(out, "Adjusted R-squared", fixed(f.adjusted_r_squared, 6), "S.D. dependent var", fixed(f.sd_dependent, 6));
    stat_pair(out, "S.E. of regression", fixed(f.se_regression, 6), "Sum squared resid", fixed(f.ssr, 6));
    stat_pair(out, "F-statistic", fixed(f.f_statistic, 6), "Durbin-Watson stat", fixed(f.durbin_watson, 6));
    stat_pair(out, "Prob(F-statistic)", fixed(f.f_probability, 6));
}

}  // namespace

DatasetSummary summarize_dataset(const PanelDataset& ds) {
    DatasetSummary s;
    s.n_entities = ds.n_entities();
    s.n_periods = ds.n_periods();
    if (!ds.periods().empty()) {
        s.first_period = ds.periods().front();
        s.last_period = ds.periods().back();
    }
    s.entities = ds.entities();
    s.variables = ds.variable_names();
    for (const auto& v : s.variables) {
        const std::size_t m = ds.missing_count(v);
        s.missing[v] = m;
        s.total_missing += m;
    }
    return s;
}

void render_dataset_summary(std::ostream& out, const DatasetSummary& s) {
    out << "Entities: " << s.n_entities << '\n';
    out << "Periods: " << s.n_periods << " (" << s.first_period << "-" << s.last_period << ")\n";
    out << "Variables: " << s.variables.size() << '\n';
    out << "Cells per variable: " << s.n_entities * s.n_periods << '\n';
    out << '\n' << std::left << std::setw(16) << "Variable" << std::right << std::setw(10) << "Missing" << '\n';
    for (const auto& v : s.variables) out << std::left << std::setw(16) << v << std::right << std::setw(10) << s.missing.at(v) << '\n';
    out << std::left << std::setw(16) << "Total" << std::right << std::setw(10) << s.total_missing << '\n';
}

nlohmann::json to_json(const DatasetSummary& s) {
    return {{"n_entities", s.n_entities},
            {"n_periods", s.n_periods},
            {"first_period", s.first_period},
            {"last_period", s.last_period},
            {"entities", s.entities},
            {"variables", s.variables},
            {"missing", s.missing},
            {"total_missing", s.total_missing}};
}

void render_estimation(std::ostream& out, const EcmResult& r) {
    const FitResult& f = r.ecm_fit;
    if (r.gate_overridden) out << kGateOverriddenBanner << "\n\n";
    out << "Dependent Variable: " << f.dependent << '\n';
    out << "Method: Panel EGLS (Cross-section SUR)\n";
    out << "Sample (adjusted): " << f.sample.first_period << ' ' << f.sample.last_period << '\n';
    out << "Periods included: " << f.sample.n_periods() << '\n';
    out << "Cross-sections included: " << f.sample.n_entities() << '\n';
    out << "Total panel (balanced) observations: " << f.n_observations << '\n';
    out << "Linear estimation after one-step weighting matrix\n";
    if (r.sigma.shrinkage > 0.0) {
        out << "Residual covariance shrunk toward its diagonal, lambda = " << fixed(r.sigma.shrinkage, 2) << '\n';
    }
    out << '\n';
    coefficient_table(out, f);
    out << "\nWeighted Statistics\n\n";
    summary_statistics(out, f);
}

void render_first_stage(std::ostream& out, const EcmResult& r) {
    const FitResult& f = r.long_run.fit;
    out << "Long-run regression (pooled least squares)\n";
    out << "Dependent Variable: " << f.dependent << '\n';
    out << "Sample: " << f.sample.first_period << ' ' << f.sample.last_period << ", observations: " << f.n_observations
        << "\n\n";
    coefficient_table(out, f);
    out << '\n';
    stat_pair(out, "R-squared", fixed(f.r_squared, 6), "Durbin-Watson stat", fixed(f.durbin_watson, 6));
    out << "\nStationarity gate on the long-run residual (" << r.gate.rule << "): " << r.gate.rejections << " of "
        << r.gate.applicable << " reject a unit root, " << (r.gate.passed ? "passed" : "FAILED") << '\n';
    if (!r.lag_selection.table.empty()) {
        out << "\nLag search (Schwarz criterion, common sample)\n";
        for (const auto& c : r.lag_selection.table) {
            out << "  lag " << c.lag << "  SIC " << fixed(c.schwarz, 6) << "  n " << c.n_observations
                << (c.lag == r.lag_selection.selected ? "  <- selected" : "") << '\n';
        }
    } else {
        out << "\nLag fixed at " << r.selected_lag << '\n';
    }
}

}  // namespace panelecm::cli
