#include <doctest.h>

#include <atomic>
#include <cmath>

#include "panelecm/ecm.hpp"
#include "panelecm/simulation.hpp"

using namespace panelecm;

namespace {

DgpSpec spec_of(DgpKind kind, std::uint64_t seed) {
    DgpSpec s;
    s.kind = kind;
    s.seed = seed;
    return s;
}

double lag1_autocorrelation(std::span<const double> y) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        den += (y[t] - mean) * (y[t] - mean);
        if (t > 0) num += (y[t] - mean) * (y[t - 1] - mean);
    }
    return num / den;
}

}  // namespace

TEST_SUITE("simulation") {

TEST_CASE("identical spec and seed give identical data") {
    for (auto kind : {DgpKind::random_walk_panel, DgpKind::stationary_ar1_panel, DgpKind::cointegrated_panel,
                      DgpKind::common_factor_panel, DgpKind::heteroskedastic_regression, DgpKind::known_ecm}) {
        const auto a = generate(spec_of(kind, 42));
        const auto b = generate(spec_of(kind, 42));
        const auto c = generate(spec_of(kind, 43));
        CHECK(a == b);
        CHECK_FALSE(a == c);
        CHECK(a.n_entities() == 15);
        CHECK(a.n_periods() == 20);
        CHECK(a.periods().front() == 1995);
        CHECK(parse_dgp_kind(to_string(kind)) == kind);
    }
}

TEST_CASE("variables per kind") {
    CHECK(generate(spec_of(DgpKind::random_walk_panel, 1)).variable_names() == std::vector<std::string>{"y"});
    CHECK(generate(spec_of(DgpKind::cointegrated_panel, 1)).variable_names() == std::vector<std::string>{"x", "y"});
    CHECK(generate(spec_of(DgpKind::heteroskedastic_regression, 1)).variable_names() ==
          std::vector<std::string>{"x1", "x2", "x3", "y"});
    const auto ecm = generate(spec_of(DgpKind::known_ecm, 1));
    for (const auto& v : EcmSpec::replication().variables()) CHECK(ecm.has_variable(v));
}

TEST_CASE("invalid specifications are rejected") {
    auto s = spec_of(DgpKind::stationary_ar1_panel, 1);
    s.rho = 1.0;
    CHECK_THROWS_AS(generate(s), std::invalid_argument);
    s.rho = 0.5;
    s.n_periods = 9;
    CHECK_THROWS_AS(generate(s), std::invalid_argument);
    auto e = spec_of(DgpKind::known_ecm, 1);
    e.ecm.lagged.pop_back();
    CHECK_THROWS_AS(generate(e), std::invalid_argument);
    CHECK_THROWS_AS(parse_dgp_kind("garch"), std::invalid_argument);
}

TEST_CASE("white noise autocorrelation band") {
    std::size_t inside = 0;
    std::size_t total = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto s = spec_of(DgpKind::stationary_ar1_panel, seed);
        s.rho = 0.0;
        s.n_periods = 100;
        const auto ds = generate(s);
        for (std::size_t i = 0; i < ds.n_entities(); ++i) {
            inside += std::abs(lag1_autocorrelation(ds.series("y", i))) <= 3.0 / std::sqrt(100.0) ? 1 : 0;
            ++total;
        }
    }
    CHECK(static_cast<double>(inside) >= 0.99 * static_cast<double>(total));
}

TEST_CASE("stationary panel has the requested autocorrelation") {
    auto s = spec_of(DgpKind::stationary_ar1_panel, 3);
    s.rho = 0.6;
    s.n_periods = 400;
    const auto ds = generate(s);
    double mean = 0.0;
    for (std::size_t i = 0; i < ds.n_entities(); ++i) mean += lag1_autocorrelation(ds.series("y", i));
    mean /= static_cast<double>(ds.n_entities());
    CHECK(std::abs(mean - 0.6) < 0.05);
}

TEST_CASE("known_ecm follows its short-run equation") {
    auto s = spec_of(DgpKind::known_ecm, 5);
    s.n_periods = 80;
    const auto ds = generate(s);
    const auto spec = EcmSpec::replication();
    Eigen::MatrixXd ut = ds.matrix(spec.dependent).array() - s.ecm.beta_constant;
    for (std::size_t k = 0; k < spec.long_run_terms.size(); ++k) ut -= s.ecm.beta[k] * ds.matrix(spec.long_run_terms[k]);
    const auto design = ecm_design(with_residual(ds, spec, ut), spec, 1);
    const auto fit = ols_fit(design);
    const auto truth = s.ecm.short_run_vector();
    REQUIRE(truth.size() == 11);
    for (Eigen::Index j = 0; j < 11; ++j) {
        INFO(design.names[static_cast<std::size_t>(j)]);
        CHECK(std::abs(fit.coefficients(j) - truth[static_cast<std::size_t>(j)]) < 4.0 * fit.standard_errors(j));
    }
    CHECK(fit.se_regression == doctest::Approx(s.ecm.error_sd).epsilon(0.1));
}

TEST_CASE("Clopper-Pearson boundaries") {
    const auto none = binomial_rate(0, 50);
    CHECK(none.rate == 0.0);
    CHECK(none.lower == 0.0);
    CHECK(none.upper == doctest::Approx(1.0 - std::pow(0.025, 1.0 / 50.0)).epsilon(1e-8));
    const auto all = binomial_rate(50, 50);
    CHECK(all.upper == 1.0);
    CHECK(all.lower == doctest::Approx(std::pow(0.025, 1.0 / 50.0)).epsilon(1e-8));
    const auto mid = binomial_rate(30, 100);
    CHECK(mid.lower < 0.3);
    CHECK(mid.upper > 0.3);
    CHECK(mid.hits == 30);
}

TEST_CASE("interval width shrinks as one over root n") {
    const auto a = binomial_rate(200, 400);
    const auto b = binomial_rate(800, 1600);
    const auto c = binomial_rate(3200, 6400);
    const double wa = a.upper - a.lower;
    const double wb = b.upper - b.lower;
    const double wc = c.upper - c.lower;
    CHECK(wa / wb == doctest::Approx(2.0).epsilon(0.03));
    CHECK(wb / wc == doctest::Approx(2.0).epsilon(0.03));
    CHECK(wb == doctest::Approx(2.0 * 1.96 * std::sqrt(0.25 / 1600.0)).epsilon(0.02));
}

TEST_CASE("replication seeds partition by xor") {
    CHECK(replication_seed(0xF0, 0x0F) == 0xFF);
    CHECK(replication_seed(12345, 0) == 12345);
}

TEST_CASE("parallel_for writes every index once") {
    std::vector<int> hits(1000, 0);
    std::atomic<int> calls{0};
    parallel_for(hits.size(), [&](std::size_t i) {
        hits[i] += 1;
        ++calls;
    }, 4);
    CHECK(calls.load() == 1000);
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}

TEST_CASE("Monte Carlo rates are reproducible and thread independent") {
    auto trial = [](std::uint64_t seed) {
        auto s = spec_of(DgpKind::stationary_ar1_panel, seed);
        s.n_entities = 1;
        return generate(s).value("y", 0, 5) > 0.0;
    };
    const auto a = monte_carlo_rate(300, 99, trial, 1);
    const auto b = monte_carlo_rate(300, 99, trial, 3);
    const auto c = monte_carlo_rate(300, 99, trial);
    CHECK(a.hits == b.hits);
    CHECK(a.hits == c.hits);
    CHECK(a.rate == c.rate);
    CHECK(a.lower == c.lower);
}

TEST_CASE("size driver counts p-values below alpha") {
    auto spec = spec_of(DgpKind::stationary_ar1_panel, 7);
    spec.n_entities = 1;
    // p-value is uniform over replications, so the rate estimates alpha.
    const auto r = monte_carlo_size(
        [](const PanelDataset& ds) {
            const double z = ds.value("y", 0, 0);
            return 0.5 * std::erfc(z / std::sqrt(2.0));
        },
        spec, 2000, 0.1);
    CHECK(r.replications == 2000);
    CHECK(r.lower <= 0.1);
    CHECK(r.upper >= 0.1);
}

}
