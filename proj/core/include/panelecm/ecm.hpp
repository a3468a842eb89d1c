#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "panelecm/panel.hpp"
#include "panelecm/regression.hpp"
#include "panelecm/sur.hpp"
#include "panelecm/unit_root.hpp"

namespace panelecm {

/// Two-stage error-correction specification.
///
/// The short-run equation regresses D(dependent) on the lagged-difference
/// terms at the chosen lag, the contemporaneous differences, an optional
/// constant and the lagged long-run residual, in that order.
struct EcmSpec {
    std::string dependent = "gini";
    std::vector<std::string> long_run_terms;
    std::vector<std::string> lagged_difference_terms;
    std::vector<std::string> contemporaneous_difference_terms;
    bool include_constant = true;
    int min_lag = 1;
    int max_lag = 4;
    std::string residual_name = "ut";

    /// gini on creditp, he, ed, un, tax, cpi, openness, gfcf.
    static EcmSpec replication();

    /// Throws std::invalid_argument when the dependent is not among the lagged
    /// differences exactly once, a variable sits in both difference lists, or
    /// the lag range is outside 1..4.
    void validate() const;

    /// Every dataset variable the specification reads, dependent first.
    std::vector<std::string> variables() const;
};

struct GateConfig {
    enum class Rule { majority, single_test };
    Rule rule = Rule::majority;
    UnitRootTest test = UnitRootTest::adf_fisher;  ///< used by single_test
    Deterministic deterministic = Deterministic::intercept;
    UnitRootConfig unit_root;
};

struct GateOutcome {
    bool passed = false;
    int rejections = 0;
    int applicable = 0;
    std::string rule;
    SummaryBlock block;  ///< level tests under the gate's deterministic terms
};

struct LongRunFit {
    FitResult fit;
    Eigen::MatrixXd ut;  ///< N x T residuals over the full period range
};

struct LagCandidate {
    int lag = 0;
    double schwarz = 0.0;
    std::size_t n_observations = 0;
};

struct LagSelectionResult {
    int selected = 1;
    std::vector<LagCandidate> table;
};

struct EcmResult {
    LongRunFit long_run;
    GateOutcome gate;
    bool gate_overridden = false;
    LagSelectionResult lag_selection;
    int selected_lag = 1;
    PanelDesign design;   ///< short-run design in original units
    FitResult first_stage;
    FitResult ecm_fit;
    SigmaEstimate sigma;
    double speed_of_adjustment = 0.0;
};

/// Pooled OLS of the dependent level on the long-run levels plus a constant.
LongRunFit long_run_fit(const PanelDataset& ds, const EcmSpec& spec);

/// Adds the long-run residual to `ds` under spec.residual_name.
PanelDataset with_residual(const PanelDataset& ds, const EcmSpec& spec, const Eigen::MatrixXd& ut);

/// Unit-root battery on the residual panel; pass per the configured rule.
GateOutcome cointegration_gate(const Eigen::MatrixXd& ut, const GateConfig& config);

/// Short-run design at `lag`; `earliest_period` trims to a common sample.
PanelDesign ecm_design(const PanelDataset& ds_with_ut, const EcmSpec& spec, int lag,
                       std::optional<int> earliest_period = std::nullopt);

/// Schwarz criterion of pooled OLS fits for every lag in range, all on the
/// sample of the largest lag. Ties go to the smaller lag.
LagSelectionResult select_lag(const PanelDataset& ds_with_ut, const EcmSpec& spec);

struct EcmOptions {
    GateConfig gate;
    bool force_gate = false;
    std::optional<int> lag;  ///< skip the search when set
    SigmaOptions sigma;
};

/// Full pipeline: long-run fit, gate, lag selection, one-step SUR estimation.
/// Throws GateNotPassedError when the gate fails without force_gate.
EcmResult run_ecm(const PanelDataset& ds, const EcmSpec& spec, const EcmOptions& options = {});

/// Short-run estimation at a given lag from a completed long-run stage.
EcmResult estimate_ecm(const PanelDataset& ds, const EcmSpec& spec, int lag, LongRunFit long_run, GateOutcome gate,
                       bool force_gate, const SigmaOptions& sigma = {});

/// Pass iff the residual coefficient is negative with p-value below `significance`.
bool validate_adjustment(const EcmResult& result, double significance);
bool validate_adjustment(double coefficient, double p_value, double significance);

}  // namespace panelecm
