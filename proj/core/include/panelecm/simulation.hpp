#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "panelecm/ecm.hpp"
#include "panelecm/panel.hpp"

namespace panelecm {

enum class DgpKind {
    random_walk_panel,
    stationary_ar1_panel,
    cointegrated_panel,
    common_factor_panel,
    heteroskedastic_regression,
    known_ecm,
};

std::string to_string(DgpKind k);
DgpKind parse_dgp_kind(const std::string& name);

/// True coefficients of the short-run equation generated by known_ecm.
/// Regressor names follow EcmSpec::replication().
struct KnownEcmParameters {
    /// D(dependent(-1)) first, then the other lagged differences.
    std::vector<double> lagged = {0.3, 0.2, -0.3, -0.2, 0.25, 0.15};
    std::vector<double> contemporaneous = {-0.3, -0.2, 0.35};
    double constant = 0.06;
    double adjustment = -0.8;
    /// Long-run coefficients on the level terms and the long-run constant.
    std::vector<double> beta = {0.5, -0.4, 0.3, 0.6, -0.5, 0.2, 0.4, -0.3};
    double beta_constant = 30.0;
    /// Relative drift pattern of the level terms; scaled so the equilibrium
    /// error has zero mean given `constant`.
    std::vector<double> drift_pattern = {1.0, -0.5, 0.5, 1.0, -1.0, 0.5, 1.0, -0.5};
    double regressor_sd = 1.0;
    double error_sd = 0.5;
    int burn_in = 50;

    /// Coefficients in short-run design order: lagged, contemporaneous, C, UT(-1).
    std::vector<double> short_run_vector() const;
};

struct DgpSpec {
    DgpKind kind = DgpKind::random_walk_panel;
    std::size_t n_entities = 15;
    std::size_t n_periods = 20;
    int first_period = 1995;
    std::uint64_t seed = 0;

    double rho = 0.0;          ///< AR coefficient (stationary kinds, cointegrating error)
    double loading = 1.0;      ///< factor loading / cointegrating slope
    double noise_scale = 1.0;
    std::size_t n_regressors = 3;   ///< heteroskedastic_regression
    double heteroskedasticity = 0.0;  ///< error variance proportional to x1^h
    KnownEcmParameters ecm;

    /// Throws std::invalid_argument when |rho| >= 1 for a stationary kind,
    /// n_periods < 10 or a parameter list has the wrong length.
    void validate() const;
};

/// Deterministic sample: identical (spec, seed) gives an identical dataset.
///
/// Variables: y for the univariate kinds; x, y for cointegrated_panel;
/// y, x1..xk for heteroskedastic_regression; the replication names for
/// known_ecm.
PanelDataset generate(const DgpSpec& spec);

/// Rejection count with a Clopper-Pearson interval.
struct RateEstimate {
    std::size_t hits = 0;
    std::size_t replications = 0;
    double rate = 0.0;
    double lower = 0.0;
    double upper = 1.0;
};

RateEstimate binomial_rate(std::size_t hits, std::size_t replications, double confidence = 0.95);

/// Runs body(i) for i in [0, n) across worker threads; results land by index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads = 0);

/// seed_i = base XOR i.
inline std::uint64_t replication_seed(std::uint64_t base, std::size_t i) noexcept { return base ^ static_cast<std::uint64_t>(i); }

/// Fraction of replications where trial(seed_i) is true.
RateEstimate monte_carlo_rate(std::size_t replications, std::uint64_t base_seed,
                              const std::function<bool(std::uint64_t)>& trial, unsigned threads = 0);

/// Rejection rate of a test (given as its p-value on a dataset) on data drawn
/// from `spec` with seeds spec.seed XOR i.
RateEstimate monte_carlo_size(const std::function<double(const PanelDataset&)>& p_value, DgpSpec spec,
                              std::size_t replications, double alpha, unsigned threads = 0);

}  // namespace panelecm
