#include "panelecm/cli/artifacts.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>
#include <system_error>

namespace panelecm::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_from(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

std::string decision_name(Decision d) {
    switch (d) {
        case Decision::reject: return "reject";
        case Decision::fail_to_reject: return "fail_to_reject";
        case Decision::not_applicable: return "not_applicable";
    }
    return "?";
}

json to_json(const SummaryCell& c) {
    json j = {{"test", to_string(c.test)},
              {"deterministic", to_string(c.deterministic)},
              {"statistic", number(c.statistic)},
              {"p_value", number(c.p_value)},
              {"decision", decision_name(c.decision)}};
    if (!c.error.empty()) j["error"] = c.error;
    return j;
}

Decision parse_decision(const std::string& s) {
    if (s == "reject") return Decision::reject;
    if (s == "fail_to_reject") return Decision::fail_to_reject;
    return Decision::not_applicable;
}

Deterministic deterministic_from(const std::string& s) {
    if (s == "none") return Deterministic::none;
    return s == "intercept" ? Deterministic::intercept : Deterministic::intercept_and_trend;
}

SummaryCell cell_from_json(const json& j) {
    SummaryCell c;
    c.test = parse_unit_root_test(j.at("test").get<std::string>());
    c.deterministic = deterministic_from(j.at("deterministic").get<std::string>());
    c.statistic = number_from(j.at("statistic"));
    c.p_value = number_from(j.at("p_value"));
    c.decision = parse_decision(j.at("decision").get<std::string>());
    if (j.contains("error")) c.error = j.at("error").get<std::string>();
    return c;
}

SummaryBlock block_from_json(const json& j) {
    SummaryBlock b;
    b.deterministic = deterministic_from(j.at("deterministic").get<std::string>());
    b.rejections = j.at("rejections").get<int>();
    b.applicable = j.at("applicable").get<int>();
    for (const auto& c : j.at("cells")) b.cells.push_back(cell_from_json(c));
    return b;
}

json to_json(const SummaryBlock& b) {
    json cells = json::array();
    for (const auto& c : b.cells) cells.push_back(to_json(c));
    return {{"deterministic", to_string(b.deterministic)},
            {"rejections", b.rejections},
            {"applicable", b.applicable},
            {"cells", cells}};
}

json verdicts_json(const std::vector<Verdict>& vs) {
    json out = json::array();
    for (const auto& v : vs) out.push_back({{"hypothesis", v.hypothesis}, {"method", v.method}, {"passed", v.passed}});
    return out;
}

json test_json(const CrossSectionTestResult& t) {
    return {{"statistic", number(t.statistic)}, {"p_value", number(t.p_value)}, {"df", t.df}};
}

}  // namespace

json to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
    return out;
}

json to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number(m(r, c)));
        out.push_back(std::move(row));
    }
    return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number_from(j[i]);
    return v;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (static_cast<Eigen::Index>(row.size()) != cols) throw std::invalid_argument("ragged matrix in document");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number_from(row[static_cast<std::size_t>(c)]);
    }
    return m;
}

json to_json(const SampleDescriptor& s) {
    return {{"entities", s.entities}, {"first_period", s.first_period}, {"last_period", s.last_period}};
}

SampleDescriptor sample_from_json(const json& j) {
    SampleDescriptor s;
    s.entities = j.at("entities").get<std::vector<std::string>>();
    s.first_period = j.at("first_period").get<int>();
    s.last_period = j.at("last_period").get<int>();
    return s;
}

json to_json(const PanelDesign& d) {
    return {{"dependent", d.dependent_label},
            {"names", d.names},
            {"intercept_column", d.intercept_column ? json(*d.intercept_column) : json(nullptr)},
            {"sample", to_json(d.sample)},
            {"y", to_json(d.y)},
            {"X", to_json(d.X)}};
}

PanelDesign design_from_json(const json& j) {
    PanelDesign d;
    d.dependent_label = j.at("dependent").get<std::string>();
    d.names = j.at("names").get<std::vector<std::string>>();
    if (!j.at("intercept_column").is_null()) d.intercept_column = j.at("intercept_column").get<std::size_t>();
    d.sample = sample_from_json(j.at("sample"));
    d.y = vector_from_json(j.at("y"));
    d.X = matrix_from_json(j.at("X"));
    return d;
}

json to_json(const FitResult& f) {
    json weight = {{"kind", f.weight.kind == WeightKind::identity ? "identity" : "cross_section_sur"}};
    if (f.weight.sigma) {
        weight["entities"] = f.weight.sigma->entity_order;
        weight["sigma"] = to_json(f.weight.sigma->sigma);
    }
    return {
        {"dependent", f.dependent},
        {"names", f.names},
        {"coefficients", to_json(f.coefficients)},
        {"standard_errors", to_json(f.standard_errors)},
        {"t_statistics", to_json(f.t_statistics)},
        {"p_values", to_json(f.p_values)},
        {"covariance", to_json(f.covariance)},
        {"actual", to_json(f.actual)},
        {"fitted", to_json(f.fitted)},
        {"residuals", to_json(f.residuals)},
        {"weighted_residuals", to_json(f.weighted_residuals)},
        {"r_squared", number(f.r_squared)},
        {"adjusted_r_squared", number(f.adjusted_r_squared)},
        {"f_statistic", number(f.f_statistic)},
        {"f_probability", number(f.f_probability)},
        {"durbin_watson", number(f.durbin_watson)},
        {"schwarz_criterion", number(f.schwarz_criterion)},
        {"ssr", number(f.ssr)},
        {"se_regression", number(f.se_regression)},
        {"mean_dependent", number(f.mean_dependent)},
        {"sd_dependent", number(f.sd_dependent)},
        {"n_observations", f.n_observations},
        {"n_parameters", f.n_parameters},
        {"has_intercept", f.has_intercept},
        {"weight", weight},
        {"sample", to_json(f.sample)},
    };
}

FitResult fit_from_json(const json& j) {
    FitResult f;
    f.dependent = j.at("dependent").get<std::string>();
    f.names = j.at("names").get<std::vector<std::string>>();
    f.coefficients = vector_from_json(j.at("coefficients"));
    f.standard_errors = vector_from_json(j.at("standard_errors"));
    f.t_statistics = vector_from_json(j.at("t_statistics"));
    f.p_values = vector_from_json(j.at("p_values"));
    f.covariance = matrix_from_json(j.at("covariance"));
    f.actual = vector_from_json(j.at("actual"));
    f.fitted = vector_from_json(j.at("fitted"));
    f.residuals = vector_from_json(j.at("residuals"));
    f.weighted_residuals = vector_from_json(j.at("weighted_residuals"));
    f.r_squared = number_from(j.at("r_squared"));
    f.adjusted_r_squared = number_from(j.at("adjusted_r_squared"));
    f.f_statistic = number_from(j.at("f_statistic"));
    f.f_probability = number_from(j.at("f_probability"));
    f.durbin_watson = number_from(j.at("durbin_watson"));
    f.schwarz_criterion = number_from(j.at("schwarz_criterion"));
    f.ssr = number_from(j.at("ssr"));
    f.se_regression = number_from(j.at("se_regression"));
    f.mean_dependent = number_from(j.at("mean_dependent"));
    f.sd_dependent = number_from(j.at("sd_dependent"));
    f.n_observations = j.at("n_observations").get<std::size_t>();
    f.n_parameters = j.at("n_parameters").get<std::size_t>();
    f.has_intercept = j.at("has_intercept").get<bool>();
    const auto& w = j.at("weight");
    if (w.at("kind").get<std::string>() == "cross_section_sur") {
        f.weight = WeightMatrix::cross_section_sur(
            {w.at("entities").get<std::vector<std::string>>(), matrix_from_json(w.at("sigma"))});
    }
    f.sample = sample_from_json(j.at("sample"));
    return f;
}

json to_json(const UnitRootSummary& s) {
    json level = json::array();
    json diff = json::array();
    for (const auto& b : s.level) level.push_back(to_json(b));
    for (const auto& b : s.first_difference) diff.push_back(to_json(b));
    return {{"variable", s.variable},
            {"level", level},
            {"first_difference", diff},
            {"hadri_level", to_json(s.hadri_level)},
            {"hadri_difference", to_json(s.hadri_difference)},
            {"hadri_footnote", s.hadri_footnote()}};
}

json to_json(const GateOutcome& g) {
    return {{"passed", g.passed},
            {"rejections", g.rejections},
            {"applicable", g.applicable},
            {"rule", g.rule},
            {"block", to_json(g.block)}};
}

json to_json(const EcmResult& r) {
    json lags = json::array();
    for (const auto& c : r.lag_selection.table)
        lags.push_back({{"lag", c.lag}, {"schwarz", number(c.schwarz)}, {"n_observations", c.n_observations}});
    return {
        {"long_run", {{"fit", to_json(r.long_run.fit)}, {"ut", to_json(r.long_run.ut)}}},
        {"gate", to_json(r.gate)},
        {"gate_overridden", r.gate_overridden},
        {"lag_selection", {{"selected", r.lag_selection.selected}, {"table", lags}}},
        {"selected_lag", r.selected_lag},
        {"design", to_json(r.design)},
        {"first_stage", to_json(r.first_stage)},
        {"ecm_fit", to_json(r.ecm_fit)},
        {"sigma",
         {{"entities", r.sigma.covariance.entity_order},
          {"matrix", to_json(r.sigma.covariance.sigma)},
          {"shrinkage", r.sigma.shrinkage}}},
        {"speed_of_adjustment", number(r.speed_of_adjustment)},
    };
}

EcmResult ecm_from_json(const json& j) {
    EcmResult r;
    r.long_run.fit = fit_from_json(j.at("long_run").at("fit"));
    r.long_run.ut = matrix_from_json(j.at("long_run").at("ut"));
    const auto& g = j.at("gate");
    r.gate.passed = g.at("passed").get<bool>();
    r.gate.rejections = g.at("rejections").get<int>();
    r.gate.applicable = g.at("applicable").get<int>();
    r.gate.rule = g.at("rule").get<std::string>();
    r.gate.block = block_from_json(g.at("block"));
    r.gate_overridden = j.at("gate_overridden").get<bool>();
    r.lag_selection.selected = j.at("lag_selection").at("selected").get<int>();
    for (const auto& c : j.at("lag_selection").at("table")) {
        r.lag_selection.table.push_back(
            {c.at("lag").get<int>(), number_from(c.at("schwarz")), c.at("n_observations").get<std::size_t>()});
    }
    r.selected_lag = j.at("selected_lag").get<int>();
    r.design = design_from_json(j.at("design"));
    r.first_stage = fit_from_json(j.at("first_stage"));
    r.ecm_fit = fit_from_json(j.at("ecm_fit"));
    r.sigma.covariance.entity_order = j.at("sigma").at("entities").get<std::vector<std::string>>();
    r.sigma.covariance.sigma = matrix_from_json(j.at("sigma").at("matrix"));
    r.sigma.shrinkage = j.at("sigma").at("shrinkage").get<double>();
    r.speed_of_adjustment = number_from(j.at("speed_of_adjustment"));
    return r;
}

json to_json(const DiagnosticsReport& r) {
    std::vector<std::string> max_pair{r.klein.max_pair.first, r.klein.max_pair.second};
    return {
        {"n_observations", r.n_observations},
        {"n_parameters", r.n_parameters},
        {"significance", r.significance},
        {"klein",
         {{"names", r.klein.names},
          {"correlation", to_json(r.klein.correlation)},
          {"max_abs_off_diagonal", number(r.klein.max_abs_off_diagonal)},
          {"max_pair", max_pair},
          {"r_squared", number(r.klein.r_squared)},
          {"passed", r.klein.passed}}},
        {"regressor_residual",
         {{"names", r.regressor_residual.names},
          {"correlation", to_json(r.regressor_residual.correlation)},
          {"threshold", r.regressor_residual.threshold},
          {"max_abs", number(r.regressor_residual.max_abs)},
          {"passed", r.regressor_residual.passed}}},
        {"jarque_bera",
         {{"statistic", number(r.jarque_bera.statistic)},
          {"p_value", number(r.jarque_bera.p_value)},
          {"df", 2},
          {"skewness", number(r.jarque_bera.skewness)},
          {"kurtosis", number(r.jarque_bera.kurtosis)},
          {"n", r.jarque_bera.n}}},
        {"white",
         {{"statistic", number(r.white.n_times_r2)},
          {"df", r.white.df},
          {"critical_value", number(r.white.critical_value)},
          {"p_value", number(r.white.p_value)},
          {"homoskedastic", r.white.homoskedastic},
          {"terms", r.white.terms},
          {"dropped", r.white.dropped}}},
        {"breusch_pagan_lm", test_json(r.bp_lm)},
        {"pesaran_cd", test_json(r.pesaran_cd)},
        {"residual_mean", number(r.residual_mean)},
        {"trend",
         {{"slope", number(r.plot.trend.slope)},
          {"t_statistic", number(r.plot.trend.t_statistic)},
          {"p_value", number(r.plot.trend.p_value)},
          {"passed", r.plot.trend.passed}}},
        {"insignificant_terms", r.insignificant_terms},
        {"verdicts", verdicts_json(r.verdicts)},
        {"passed", r.passed},
    };
}

json to_json(const InterpolationLog& log) {
    json out = json::array();
    for (const auto& e : log.entries) {
        out.push_back({{"entity", e.entity},
                       {"variable", e.variable},
                       {"period", e.period},
                       {"value", e.filled_value},
                       {"left_anchor", {{"period", e.left_anchor_period}, {"value", e.left_anchor_value}}},
                       {"right_anchor", {{"period", e.right_anchor_period}, {"value", e.right_anchor_value}}}});
    }
    return out;
}

StagedDirectory::StagedDirectory(fs::path target) : target_(std::move(target)) {
    if (target_.filename().empty()) target_ = target_.parent_path();
    const fs::path parent = target_.has_parent_path() ? target_.parent_path() : fs::path(".");
    fs::create_directories(parent);
    std::random_device rd;
    for (int attempt = 0; attempt < 16; ++attempt) {
        staging_ = parent / ("." + target_.filename().string() + ".staging-" + std::to_string(rd()));
        if (fs::create_directory(staging_)) return;
    }
    throw std::runtime_error("cannot create a staging directory next to '" + target_.string() + "'");
}

StagedDirectory::~StagedDirectory() {
    if (!committed_) {
        std::error_code ec;
        fs::remove_all(staging_, ec);
    }
}

void StagedDirectory::write(const std::string& file, const std::string& contents) const {
    std::ofstream out(path(file), std::ios::binary);
    out << contents;
    out.close();
    if (!out) throw std::runtime_error("failed writing '" + path(file).string() + "'");
}

void StagedDirectory::write_json(const std::string& file, const json& doc) const { write(file, doc.dump(2) + "\n"); }

void StagedDirectory::commit() {
    if (fs::exists(target_)) {
        const fs::path old = staging_.string() + ".old";
        fs::rename(target_, old);
        fs::rename(staging_, target_);
        fs::remove_all(old);
    } else {
        fs::rename(staging_, target_);
    }
    committed_ = true;
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

}  // namespace panelecm::cli
