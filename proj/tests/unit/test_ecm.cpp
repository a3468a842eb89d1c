#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "panelecm/ecm.hpp"
#include "panelecm/error.hpp"
#include "panelecm/random.hpp"
#include "panelecm/simulation.hpp"

using namespace panelecm;

namespace {

DgpSpec known(std::uint64_t seed, std::size_t T = 20) {
    DgpSpec s;
    s.kind = DgpKind::known_ecm;
    s.n_entities = 15;
    s.n_periods = T;
    s.seed = seed;
    return s;
}

EcmOptions forced(std::optional<int> lag = std::nullopt) {
    EcmOptions o;
    o.force_gate = true;
    o.lag = lag;
    return o;
}

EcmSpec bivariate() {
    EcmSpec s;
    s.dependent = "y";
    s.long_run_terms = {"x"};
    s.lagged_difference_terms = {"y"};
    s.contemporaneous_difference_terms = {};
    return s;
}

Eigen::MatrixXd normal_matrix(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols) {
    const RandomStreams rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index t = 0; t < cols; ++t) m(i, t) = rng.normal(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(t));
    return m;
}

Eigen::MatrixXd cumulative(const Eigen::MatrixXd& e) {
    Eigen::MatrixXd out = e;
    for (Eigen::Index t = 1; t < e.cols(); ++t) out.col(t) += out.col(t - 1);
    return out;
}

}  // namespace

TEST_SUITE("ecm") {

TEST_CASE("specification validation") {
    CHECK_NOTHROW(EcmSpec::replication().validate());
    auto s = EcmSpec::replication();
    s.lagged_difference_terms.erase(s.lagged_difference_terms.begin());
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = EcmSpec::replication();
    s.lagged_difference_terms.push_back("gini");
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = EcmSpec::replication();
    s.contemporaneous_difference_terms.push_back("creditp");
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = EcmSpec::replication();
    s.max_lag = 5;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = EcmSpec::replication();
    s.min_lag = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    const auto vars = EcmSpec::replication().variables();
    CHECK(vars.size() == 9);
    CHECK(vars.front() == "gini");
}

TEST_CASE("replication layout on a 15 x 20 panel") {
    const auto r = run_ecm(generate(known(1)), EcmSpec::replication(), forced(1));
    CHECK(r.design.sample.first_period == 1997);
    CHECK(r.design.sample.last_period == 2014);
    CHECK(r.ecm_fit.n_observations == 270);
    CHECK(r.ecm_fit.n_parameters == 11);
    const std::vector<std::string> names{"D(GINI(-1))", "D(CREDITP(-1))", "D(HE(-1))", "D(ED(-1))", "D(UN(-1))", "D(TAX(-1))",
                                         "D(CPI)",      "D(OPENNESS)",    "D(GFCF)",   "C",         "UT(-1)"};
    CHECK(r.ecm_fit.names == names);
    CHECK(r.ecm_fit.dependent == "D(GINI)");
    CHECK(r.speed_of_adjustment == r.ecm_fit.coefficients(10));
}

TEST_CASE("observation count follows the lag") {
    const auto ds = generate(known(2));
    for (int lag = 1; lag <= 4; ++lag) {
        const auto r = run_ecm(ds, EcmSpec::replication(), forced(lag));
        CHECK(r.ecm_fit.n_observations == 15u * static_cast<std::size_t>(20 - 1 - lag));
        CHECK(r.selected_lag == lag);
    }
}

TEST_CASE("lag search table") {
    const auto ds = generate(known(3));
    const auto lr = long_run_fit(ds, EcmSpec::replication());
    const auto sel = select_lag(with_residual(ds, EcmSpec::replication(), lr.ut), EcmSpec::replication());
    REQUIRE(sel.table.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(sel.table[k].lag == static_cast<int>(k) + 1);
        CHECK(sel.table[k].n_observations == 15u * (20u - 1u - 4u));
    }
    const auto best = std::min_element(sel.table.begin(), sel.table.end(),
                                       [](const LagCandidate& a, const LagCandidate& b) { return a.schwarz < b.schwarz; });
    CHECK(sel.selected == best->lag);
}

TEST_CASE("equal criteria select the smaller lag") {
    // D(y) is constant per entity except in the last two periods, so the lag-2
    // and lag-3 columns coincide on the common sample.
    const Eigen::Index N = 3;
    const Eigen::Index T = 12;
    const Eigen::MatrixXd noise = normal_matrix(5, N, T);
    Eigen::MatrixXd y(N, T);
    for (Eigen::Index i = 0; i < N; ++i) {
        y(i, 0) = 1.0;
        for (Eigen::Index t = 1; t < T; ++t) y(i, t) = y(i, t - 1) + (t < T - 2 ? 0.5 + static_cast<double>(i) : noise(i, t));
    }
    const auto ds = fixtures::dataset({{"y", y}, {"x", noise}, {"ut", normal_matrix(6, N, T)}}, 2000);
    EcmSpec spec = bivariate();
    spec.min_lag = 2;
    spec.max_lag = 3;
    const auto sel = select_lag(ds, spec);
    REQUIRE(sel.table.size() == 2);
    CHECK(sel.table[0].schwarz == sel.table[1].schwarz);
    CHECK(sel.selected == 2);
}

TEST_CASE("exact cointegration gives a zero residual") {
    const Eigen::MatrixXd x1 = cumulative(normal_matrix(7, 4, 15));
    const Eigen::MatrixXd x2 = cumulative(normal_matrix(8, 4, 15));
    const Eigen::MatrixXd y = (2.0 + 0.5 * x1.array() - x2.array()).matrix();
    const auto ds = fixtures::dataset({{"y", y}, {"x1", x1}, {"x2", x2}});
    EcmSpec spec = bivariate();
    spec.long_run_terms = {"x1", "x2"};
    const auto lr = long_run_fit(ds, spec);
    CHECK(lr.ut.cwiseAbs().maxCoeff() < 1e-10 * y.cwiseAbs().maxCoeff());
    CHECK(lr.fit.coefficients(0) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(lr.fit.coefficients(1) == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(lr.fit.coefficients(2) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("long-run residual sums to zero over the full range") {
    const auto ds = generate(known(9));
    const auto lr = long_run_fit(ds, EcmSpec::replication());
    CHECK(lr.ut.rows() == 15);
    CHECK(lr.ut.cols() == 20);
    CHECK(std::abs(lr.ut.sum()) < 1e-8 * lr.ut.cwiseAbs().sum());
}

TEST_CASE("gate separates cointegrated from spurious panels") {
    GateConfig cfg;
    int coint_pass = 0;
    int spurious_pass = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        DgpSpec c;
        c.kind = DgpKind::cointegrated_panel;
        c.seed = 1000 + s;
        c.rho = 0.2;
        coint_pass += cointegration_gate(long_run_fit(generate(c), bivariate()).ut, cfg).passed ? 1 : 0;

        const Eigen::MatrixXd x = cumulative(normal_matrix(2000 + s, 15, 20));
        const Eigen::MatrixXd y = cumulative(normal_matrix(3000 + s, 15, 20));
        const auto ds = fixtures::dataset({{"y", y}, {"x", x}});
        spurious_pass += cointegration_gate(long_run_fit(ds, bivariate()).ut, cfg).passed ? 1 : 0;
    }
    CHECK(coint_pass >= 18);
    CHECK(spurious_pass <= 6);
}

TEST_CASE("gate outcome structure") {
    DgpSpec c;
    c.kind = DgpKind::cointegrated_panel;
    c.seed = 4;
    const auto ut = long_run_fit(generate(c), bivariate()).ut;
    GateConfig majority;
    const auto g = cointegration_gate(ut, majority);
    CHECK(g.applicable == 4);
    CHECK(g.passed == (2 * g.rejections > g.applicable));
    GateConfig single;
    single.rule = GateConfig::Rule::single_test;
    single.test = UnitRootTest::adf_fisher;
    const auto s = cointegration_gate(ut, single);
    CHECK(s.applicable == 1);
    const auto& cells = g.block.cells;
    const auto it = std::find_if(cells.begin(), cells.end(), [](const SummaryCell& x) { return x.test == UnitRootTest::adf_fisher; });
    REQUIRE(it != cells.end());
    CHECK(s.passed == (it->decision == Decision::reject));
}

TEST_CASE("failed gate blocks estimation unless forced") {
    const Eigen::MatrixXd x = cumulative(normal_matrix(41, 15, 20));
    const Eigen::MatrixXd y = cumulative(normal_matrix(42, 15, 20));
    const auto ds = fixtures::dataset({{"y", y}, {"x", x}});
    auto lr = long_run_fit(ds, bivariate());
    GateOutcome failed;
    failed.passed = false;
    failed.rejections = 1;
    failed.applicable = 4;
    try {
        estimate_ecm(ds, bivariate(), 1, lr, failed, false);
        FAIL("expected the gate to block estimation");
    } catch (const GateNotPassedError& e) {
        CHECK(std::string(e.what()).find("stationary") != std::string::npos);
    }
    const auto r = estimate_ecm(ds, bivariate(), 1, lr, failed, true);
    CHECK(r.gate_overridden);
    CHECK_FALSE(r.gate.passed);
    CHECK(r.gate.rejections == 1);
}

TEST_CASE("missing variable is named") {
    const auto ds = fixtures::dataset({{"y", normal_matrix(1, 3, 12)}});
    try {
        run_ecm(ds, bivariate(), forced());
        FAIL("expected a data error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("'x'") != std::string::npos);
    }
}

TEST_CASE("entity order does not change the estimates") {
    const auto ds = generate(known(11));
    std::vector<std::size_t> order(15);
    std::iota(order.begin(), order.end(), 0);
    std::reverse(order.begin(), order.end());
    std::swap(order[2], order[9]);
    const auto a = run_ecm(ds, EcmSpec::replication(), forced(1));
    const auto b = run_ecm(ds.permuted(order), EcmSpec::replication(), forced(1));
    CHECK((a.ecm_fit.coefficients - b.ecm_fit.coefficients).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((a.ecm_fit.standard_errors - b.ecm_fit.standard_errors).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pipeline composes from its stages") {
    DgpSpec c;
    c.kind = DgpKind::cointegrated_panel;
    c.seed = 12;
    const auto ds = generate(c);
    const auto spec = bivariate();
    const auto r = run_ecm(ds, spec, forced(1));

    const auto lr = long_run_fit(ds, spec);
    const std::vector<Regressor> regs{Regressor::of({"y", Transform::first_difference, 1}), Regressor::intercept(),
                                      Regressor::of({"ut", Transform::level, 1})};
    const auto design = align_balanced(ds.with_variable("ut", lr.ut), regs, {"y", Transform::first_difference, 0});
    const auto direct = sur_one_step_fit(design, ols_fit(design));
    CHECK((r.ecm_fit.coefficients - direct.coefficients).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(r.speed_of_adjustment == r.ecm_fit.coefficients(2));
}

TEST_CASE("adjustment validation") {
    CHECK(validate_adjustment(-1.1215, 0.00001, 0.05));
    CHECK_FALSE(validate_adjustment(0.3, 0.0, 0.05));
    CHECK_FALSE(validate_adjustment(0.3, 0.9, 0.05));
    CHECK_FALSE(validate_adjustment(-0.5, 0.20, 0.05));
    const auto r = run_ecm(generate(known(13)), EcmSpec::replication(), forced(1));
    CHECK(validate_adjustment(r, 0.05) == (r.speed_of_adjustment < 0 && r.ecm_fit.p_values(10) < 0.05));
}

TEST_CASE("known adjustment speed is roughly recovered") {
    double sum = 0.0;
    const int reps = 20;
    for (int k = 0; k < reps; ++k) sum += run_ecm(generate(known(500 + static_cast<std::uint64_t>(k))), EcmSpec::replication(), forced(1)).speed_of_adjustment;
    CHECK(std::abs(sum / reps - (-0.8)) < 0.1);
}

}
