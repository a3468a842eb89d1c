#include "panelecm/ecm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "panelecm/error.hpp"

namespace panelecm {

EcmSpec EcmSpec::replication() {
    EcmSpec s;
    s.dependent = "gini";
    s.long_run_terms = {"creditp", "he", "ed", "un", "tax", "cpi", "openness", "gfcf"};
    s.lagged_difference_terms = {"gini", "creditp", "he", "ed", "un", "tax"};
    s.contemporaneous_difference_terms = {"cpi", "openness", "gfcf"};
    s.include_constant = true;
    s.min_lag = 1;
    s.max_lag = 4;
    s.residual_name = "ut";
    return s;
}

void EcmSpec::validate() const {
    if (dependent.empty()) throw std::invalid_argument("ECM specification has no dependent variable");
    if (long_run_terms.empty()) throw std::invalid_argument("ECM specification has no long-run terms");
    if (std::count(lagged_difference_terms.begin(), lagged_difference_terms.end(), dependent) != 1) {
        throw std::invalid_argument("dependent '" + dependent + "' must appear exactly once among the lagged differences");
    }
    std::set<std::string> lagged(lagged_difference_terms.begin(), lagged_difference_terms.end());
    if (lagged.size() != lagged_difference_terms.size()) throw std::invalid_argument("duplicate lagged-difference term");
    std::set<std::string> contemporaneous;
    for (const auto& v : contemporaneous_difference_terms) {
        if (lagged.count(v)) {
            throw std::invalid_argument("'" + v + "' appears in both the lagged and contemporaneous difference lists");
        }
        if (!contemporaneous.insert(v).second) throw std::invalid_argument("duplicate contemporaneous term '" + v + "'");
    }
    if (min_lag < 1 || max_lag > kMaxTransformLag || min_lag > max_lag) {
        throw std::invalid_argument("lag search range must lie within 1.." + std::to_string(kMaxTransformLag));
    }
    if (residual_name.empty()) throw std::invalid_argument("residual series needs a name");
}

std::vector<std::string> EcmSpec::variables() const {
    std::vector<std::string> out{dependent};
    auto add = [&](const std::vector<std::string>& list) {
        for (const auto& v : list)
            if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    };
    add(long_run_terms);
    add(lagged_difference_terms);
    add(contemporaneous_difference_terms);
    return out;
}

namespace {

void require_variables(const PanelDataset& ds, const EcmSpec& spec) {
    spec.validate();
    for (const auto& v : spec.variables()) {
        if (!ds.has_variable(v)) throw DataError("variable '" + v + "' is not in the dataset");
    }
}

}  // namespace

LongRunFit long_run_fit(const PanelDataset& ds, const EcmSpec& spec) {
    require_variables(ds, spec);
    std::vector<Regressor> regs;
    for (const auto& v : spec.long_run_terms) regs.push_back(Regressor::of({v, Transform::level, 0}));
    regs.push_back(Regressor::intercept());
    const PanelDesign design = align_balanced(ds, regs, {spec.dependent, Transform::level, 0});
    LongRunFit out;
    out.fit = ols_fit(design);
    out.ut = unstack(out.fit.residuals, design.sample);
    return out;
}

PanelDataset with_residual(const PanelDataset& ds, const EcmSpec& spec, const Eigen::MatrixXd& ut) {
    return ds.with_variable(spec.residual_name, ut);
}

GateOutcome cointegration_gate(const Eigen::MatrixXd& ut, const GateConfig& config) {
    SeriesPanel panel(static_cast<std::size_t>(ut.rows()));
    for (Eigen::Index i = 0; i < ut.rows(); ++i) {
        auto& s = panel[static_cast<std::size_t>(i)];
        s.resize(static_cast<std::size_t>(ut.cols()));
        for (Eigen::Index t = 0; t < ut.cols(); ++t) s[static_cast<std::size_t>(t)] = ut(i, t);
    }
    GateOutcome g;
    g.block = summarize_block(panel, config.deterministic, config.unit_root);
    const auto& block = g.block;
    if (config.rule == GateConfig::Rule::majority) {
        g.rejections = block.rejections;
        g.applicable = block.applicable;
        g.passed = 2 * g.rejections > g.applicable;
        g.rule = "strict majority of " + std::to_string(g.applicable) + " tests, " + to_string(config.deterministic);
    } else {
        g.applicable = 1;
        g.rule = to_string(config.test) + ", " + to_string(config.deterministic);
        const SummaryCell* cell = nullptr;
        for (const auto& c : block.cells)
            if (c.test == config.test) cell = &c;
        SummaryCell extra;
        if (cell == nullptr) {
            UnitRootConfig cfg = config.unit_root;
            cfg.deterministic = config.deterministic;
            const auto r = run_test(config.test, panel, cfg);
            extra.test = config.test;
            extra.deterministic = config.deterministic;
            extra.statistic = r.statistic;
            extra.p_value = r.p_value;
            extra.decision = decide(r.p_value, cfg.significance);
            cell = &extra;
        }
        // Hadri's null is stationarity, so passing means failing to reject it.
        const bool stationary = config.test == UnitRootTest::hadri ? cell->decision == Decision::fail_to_reject
                                                                   : cell->decision == Decision::reject;
        g.rejections = stationary ? 1 : 0;
        g.passed = stationary;
    }
    return g;
}

PanelDesign ecm_design(const PanelDataset& ds_with_ut, const EcmSpec& spec, int lag, std::optional<int> earliest_period) {
    if (lag < 1 || lag > kMaxTransformLag) throw std::invalid_argument("ECM lag must lie within 1..4");
    std::vector<Regressor> regs;
    for (const auto& v : spec.lagged_difference_terms) regs.push_back(Regressor::of({v, Transform::first_difference, lag}));
    for (const auto& v : spec.contemporaneous_difference_terms)
        regs.push_back(Regressor::of({v, Transform::first_difference, 0}));
    if (spec.include_constant) regs.push_back(Regressor::intercept());
    regs.push_back(Regressor::of({spec.residual_name, Transform::level, 1}));
    return align_balanced(ds_with_ut, regs, {spec.dependent, Transform::first_difference, 0}, earliest_period);
}

LagSelectionResult select_lag(const PanelDataset& ds_with_ut, const EcmSpec& spec) {
    spec.validate();
    const int common_start = ecm_design(ds_with_ut, spec, spec.max_lag).sample.first_period;
    LagSelectionResult out;
    double best = std::numeric_limits<double>::infinity();
    for (int lag = spec.min_lag; lag <= spec.max_lag; ++lag) {
        const PanelDesign d = ecm_design(ds_with_ut, spec, lag, common_start);
        const FitResult fit = ols_fit(d);
        LagCandidate c{lag, schwarz_criterion(fit), fit.n_observations};
        out.table.push_back(c);
        if (c.schwarz < best) {
            best = c.schwarz;
            out.selected = lag;
        }
    }
    return out;
}

EcmResult estimate_ecm(const PanelDataset& ds, const EcmSpec& spec, int lag, LongRunFit long_run, GateOutcome gate,
                       bool force_gate, const SigmaOptions& sigma) {
    require_variables(ds, spec);
    if (!gate.passed && !force_gate) {
        throw GateNotPassedError(
            "cointegration gate failed (" + std::to_string(gate.rejections) + " of " + std::to_string(gate.applicable) +
            " tests reject a unit root in " + TransformSpec{spec.residual_name, Transform::level, 0}.label() +
            "): error-correction estimation requires a stationary long-run residual; use the gate override to proceed");
    }
    EcmResult r;
    r.long_run = std::move(long_run);
    r.gate = std::move(gate);
    r.gate_overridden = !r.gate.passed;
    r.selected_lag = lag;
    const PanelDataset full = with_residual(ds, spec, r.long_run.ut);
    r.design = ecm_design(full, spec, lag);
    r.first_stage = ols_fit(r.design);
    const Eigen::MatrixXd e = unstack(r.first_stage.residuals, r.design.sample);
    r.sigma = estimate_sigma(e, r.design.sample.entities, sigma);
    r.ecm_fit = gls_fit(r.design, WeightMatrix::cross_section_sur(r.sigma.covariance));
    r.speed_of_adjustment = r.ecm_fit.coefficients(static_cast<Eigen::Index>(r.design.names.size() - 1));
    return r;
}

EcmResult run_ecm(const PanelDataset& ds, const EcmSpec& spec, const EcmOptions& options) {
    require_variables(ds, spec);
    LongRunFit lr = long_run_fit(ds, spec);
    GateOutcome gate = cointegration_gate(lr.ut, options.gate);
    if (!gate.passed && !options.force_gate) {
        return estimate_ecm(ds, spec, spec.min_lag, std::move(lr), std::move(gate), false, options.sigma);
    }
    const PanelDataset full = with_residual(ds, spec, lr.ut);
    LagSelectionResult sel;
    if (options.lag) {
        sel.selected = *options.lag;
    } else {
        sel = select_lag(full, spec);
    }
    EcmResult r = estimate_ecm(ds, spec, sel.selected, std::move(lr), std::move(gate), options.force_gate, options.sigma);
    r.lag_selection = std::move(sel);
    return r;
}

bool validate_adjustment(double coefficient, double p_value, double significance) {
    return coefficient < 0.0 && p_value < significance;
}

bool validate_adjustment(const EcmResult& result, double significance) {
    const auto k = static_cast<Eigen::Index>(result.ecm_fit.names.size() - 1);
    return validate_adjustment(result.speed_of_adjustment, result.ecm_fit.p_values(k), significance);
}

}  // namespace panelecm
