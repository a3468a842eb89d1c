#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panelecm/panel.hpp"

namespace panelecm {

enum class Deterministic { none, intercept, intercept_and_trend };

/// Column order of the summary window: intercept, intercept and trend, none.
inline constexpr std::array<Deterministic, 3> kSummaryOrder{Deterministic::intercept, Deterministic::intercept_and_trend,
                                                            Deterministic::none};

std::string to_string(Deterministic d);
int deterministic_terms(Deterministic d) noexcept;

struct LagSelection {
    enum class Mode { fixed, schwarz };
    Mode mode = Mode::schwarz;
    int fixed_lag = 0;
    std::optional<int> max_lag;  ///< overrides the automatic maximum for Schwarz search
};

struct UnitRootConfig {
    Deterministic deterministic = Deterministic::intercept;
    LagSelection lags;
    double significance = 0.05;
    /// Bartlett bandwidth override for PP, Hadri and LLC; automatic when empty.
    std::optional<int> bandwidth;

    /// Throws std::invalid_argument if significance is outside (0, 0.5] or a
    /// fixed lag exceeds series_length / 3.
    void validate(std::size_t series_length) const;
};

/// floor(min(T/3, 12) * (T/100)^(1/4)), further capped so the Schwarz search
/// regression keeps positive degrees of freedom.
int default_max_lag(std::size_t series_length, Deterministic det);

// ---------------------------------------------------------------------------
// Single-series tests
// ---------------------------------------------------------------------------

struct AdfResult {
    double statistic = 0.0;  ///< t statistic on the lagged level
    double p_value = 1.0;
    int lags = 0;
    std::size_t n_obs = 0;
    double residual_sd = 0.0;
};

/// Dickey-Fuller regression of dy_t on y_{t-1}, `lags` lagged differences and
/// deterministic terms, with a response-surface p-value.
AdfResult adf_regression(std::span<const double> series, int lags, Deterministic det);

/// Lag order minimising the Schwarz criterion over 0..max_lag on a common sample.
/// Ties go to the smaller lag.
int select_adf_lag(std::span<const double> series, Deterministic det, int max_lag);

/// ADF with the lag chosen per `lags`.
AdfResult adf_test(std::span<const double> series, Deterministic det, const LagSelection& lags = {});

/// Asymptotic p-value of a Dickey-Fuller tau statistic (MacKinnon 1994 surfaces,
/// one integrated regressor).
double mackinnon_p_value(double tau, Deterministic det);

/// Bartlett-kernel long-run variance sum_{|j|<=m} (1 - |j|/(m+1)) gamma_j.
double bartlett_long_run_variance(std::span<const double> e, int bandwidth);

/// Newey-West (1994) automatic bandwidth for the Bartlett kernel.
int newey_west_bandwidth(std::span<const double> e);

struct PpResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int bandwidth = 0;
};

/// Phillips-Perron adjusted t statistic (Bartlett long-run variance).
PpResult pp_regression(std::span<const double> series, Deterministic det, std::optional<int> bandwidth = std::nullopt);

// ---------------------------------------------------------------------------
// Panel tests
// ---------------------------------------------------------------------------

/// One series per entity; all of equal length.
using SeriesPanel = std::vector<std::vector<double>>;

struct PanelTestResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Levin-Lin-Chu pooled t with mean/variance adjustment, N(0,1) reference.
PanelTestResult llc_test(const SeriesPanel& panel, const UnitRootConfig& config);

/// Breitung pooled statistic on forward-orthogonalised differences, N(0,1).
PanelTestResult breitung_test(const SeriesPanel& panel, const UnitRootConfig& config);

/// Im-Pesaran-Shin standardised t-bar, N(0,1).
PanelTestResult ips_test(const SeriesPanel& panel, const UnitRootConfig& config);

/// P = -2 sum ln p_i against chi-square(2N). Throws if any p_i is outside (0, 1].
PanelTestResult fisher_combine(std::span<const double> p_values);

PanelTestResult adf_fisher_test(const SeriesPanel& panel, const UnitRootConfig& config);
PanelTestResult pp_fisher_test(const SeriesPanel& panel, const UnitRootConfig& config);

/// Hadri LM test; the null hypothesis is stationarity. Upper-tail N(0,1).
PanelTestResult hadri_test(const SeriesPanel& panel, const UnitRootConfig& config);

enum class UnitRootTest { llc, breitung, ips, adf_fisher, pp_fisher, hadri };

inline constexpr std::array<UnitRootTest, 5> kUnitRootTests{UnitRootTest::llc, UnitRootTest::breitung, UnitRootTest::ips,
                                                            UnitRootTest::adf_fisher, UnitRootTest::pp_fisher};

std::string to_string(UnitRootTest t);
UnitRootTest parse_unit_root_test(const std::string& name);

/// Whether the test counts toward the summary window for `det`:
/// intercept {LLC, IPS, ADF-F, PP-F}; trend adds Breitung; none {LLC, ADF-F, PP-F}.
bool counts_in_summary(UnitRootTest t, Deterministic det) noexcept;
int applicable_test_count(Deterministic det) noexcept;

PanelTestResult run_test(UnitRootTest test, const SeriesPanel& panel, const UnitRootConfig& config);

// ---------------------------------------------------------------------------
// Summary window
// ---------------------------------------------------------------------------

enum class Decision { reject, fail_to_reject, not_applicable };

/// reject iff p < alpha. For Hadri "reject" means rejecting stationarity.
Decision decide(double p_value, double alpha) noexcept;

struct SummaryCell {
    UnitRootTest test = UnitRootTest::llc;
    Deterministic deterministic = Deterministic::intercept;
    double statistic = 0.0;
    double p_value = 1.0;
    Decision decision = Decision::not_applicable;
    std::string error;  ///< set when the statistic could not be computed
};

struct SummaryBlock {
    Deterministic deterministic = Deterministic::intercept;
    std::vector<SummaryCell> cells;  ///< applicable tests only
    int rejections = 0;
    int applicable = 0;
};

struct UnitRootSummary {
    std::string variable;
    std::array<SummaryBlock, 3> level;             ///< in kSummaryOrder
    std::array<SummaryBlock, 3> first_difference;  ///< in kSummaryOrder
    SummaryCell hadri_level;
    SummaryCell hadri_difference;

    /// Hadri rejects stationarity at level and does not at first difference.
    bool hadri_footnote() const noexcept;
    const SummaryBlock& block(Deterministic det, bool differenced) const;
};

/// Applicable tests of one summary column on `panel` as given.
SummaryBlock summarize_block(const SeriesPanel& panel, Deterministic det, const UnitRootConfig& config);

/// Runs the test battery on one panel series at level and first difference.
UnitRootSummary summarize_series(const SeriesPanel& levels, const std::string& name, const UnitRootConfig& config);

/// Summary window for each named variable of a (complete) dataset.
std::vector<UnitRootSummary> summary_window(const PanelDataset& ds, const std::vector<std::string>& variables,
                                            const UnitRootConfig& config);

/// Per-entity series of a variable; throws DataError if any cell is missing.
SeriesPanel panel_series(const PanelDataset& ds, const std::string& variable);
SeriesPanel difference(const SeriesPanel& panel);

/// Table layout: variable, then "x of 4 | y of 5 | z of 3" for level and difference,
/// with `*` marking the Hadri footnote.
void render_summary_window(std::ostream& out, const std::vector<UnitRootSummary>& rows, double significance);

// ---------------------------------------------------------------------------
// Null moments used by the panel tests
// ---------------------------------------------------------------------------

struct DfMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Mean and variance of the ADF t statistic with `lags` lagged differences on a
/// Gaussian random walk of `series_length` points. Simulated once per key with
/// a fixed seed and cached.
DfMoments ips_moments(std::size_t series_length, int lags, Deterministic det);

struct LlcAdjustment {
    double mean = 0.0;  ///< mu*
    double sd = 1.0;    ///< sigma*
};

/// LLC mean and standard-deviation adjustments for an effective sample of
/// `t_tilde` differences. Simulated once per key with a fixed seed and cached.
LlcAdjustment llc_adjustment(std::size_t t_tilde, Deterministic det);

/// Mean and variance of the per-entity Hadri LM statistic on Gaussian white
/// noise of `series_length` points. Simulated once per key and cached.
DfMoments hadri_moments(std::size_t series_length, Deterministic det, std::optional<int> bandwidth);

}  // namespace panelecm
