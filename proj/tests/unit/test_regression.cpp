#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "panelecm/distributions.hpp"
#include "panelecm/error.hpp"
#include "panelecm/random.hpp"
#include "panelecm/regression.hpp"

using namespace panelecm;

namespace {

Eigen::MatrixXd with_intercept(const Eigen::VectorXd& x) {
    Eigen::MatrixXd X(x.size(), 2);
    X.col(0) = x;
    X.col(1).setOnes();
    return X;
}

/// Random well-conditioned design with an intercept in the last column.
PanelDesign random_design(std::uint64_t seed, std::size_t N, std::size_t T, std::size_t k) {
    const RandomStreams rng(seed);
    PanelDesign d;
    const auto n = static_cast<Eigen::Index>(N * T);
    d.X.resize(n, static_cast<Eigen::Index>(k));
    d.y.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index j = 0; j + 1 < d.X.cols(); ++j) d.X(r, j) = rng.normal(static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(r));
        d.X(r, d.X.cols() - 1) = 1.0;
        d.y(r) = 0.3 + d.X.row(r).head(d.X.cols() - 1).sum() * 0.5 + rng.normal(99, static_cast<std::uint64_t>(r));
    }
    for (std::size_t j = 0; j + 1 < k; ++j) d.names.push_back("x" + std::to_string(j));
    d.names.push_back("C");
    d.intercept_column = k - 1;
    d.dependent_label = "Y";
    for (std::size_t i = 0; i < N; ++i) d.sample.entities.push_back("E" + std::to_string(i));
    d.sample.first_period = 2000;
    d.sample.last_period = 2000 + static_cast<int>(T) - 1;
    return d;
}

/// (X' Omega^-1 X)^-1 X' Omega^-1 y with Omega = sigma (x) I_T in entity-major order.
Eigen::VectorXd brute_force_gls(const PanelDesign& d, const Eigen::MatrixXd& sigma) {
    const auto T = static_cast<Eigen::Index>(d.sample.n_periods());
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(T, T);
    Eigen::MatrixXd omega(sigma.rows() * T, sigma.cols() * T);
    for (Eigen::Index i = 0; i < sigma.rows(); ++i)
        for (Eigen::Index j = 0; j < sigma.cols(); ++j) omega.block(i * T, j * T, T, T) = sigma(i, j) * identity;
    const Eigen::MatrixXd oi = omega.inverse();
    const Eigen::MatrixXd a = d.X.transpose() * oi * d.X;
    const Eigen::VectorXd b = d.X.transpose() * oi * d.y;
    return a.inverse() * b;
}

}  // namespace

TEST_SUITE("regression") {

TEST_CASE("perfect fit") {
    const Eigen::Vector3d x(1, 2, 3);
    const auto fit = ols_fit(with_intercept(x), x, true);
    CHECK(fit.coefficients(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(fit.coefficients(1)) < 1e-12);
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hand-solved normal equations") {
    const auto fit = ols_fit(with_intercept(Eigen::Vector3d(1, 2, 3)), Eigen::Vector3d(1, 2, 2), true);
    CHECK(fit.coefficients(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit.coefficients(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(fit.n_observations == 3);
    CHECK(fit.n_parameters == 2);
}

TEST_CASE("intercept-only regression returns the mean") {
    const Eigen::Vector4d y(3, 1, 4, 1.5);
    const auto fit = ols_fit(Eigen::MatrixXd::Ones(4, 1), y, true);
    CHECK(fit.coefficients(0) == doctest::Approx(y.mean()).epsilon(1e-12));
    CHECK(std::abs(fit.r_squared) < 1e-12);
    CHECK(std::isnan(fit.f_statistic));
}

TEST_CASE("agrees with explicit normal equations") {
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const auto d = random_design(s, 1, 40, 4);
        const auto fit = ols_fit(d);
        const Eigen::VectorXd b = (d.X.transpose() * d.X).inverse() * (d.X.transpose() * d.y);
        CHECK((fit.coefficients - b).cwiseAbs().maxCoeff() < 1e-10);
        const Eigen::MatrixXd cov = fit.ssr / 36.0 * (d.X.transpose() * d.X).inverse();
        CHECK((fit.covariance - cov).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("fit invariants") {
    for (std::uint64_t s = 1; s <= 25; ++s) {
        const auto d = random_design(s, 3, 12, 3);
        const auto fit = ols_fit(d);
        const Eigen::VectorXd ortho = d.X.transpose() * fit.residuals;
        const double scale = d.X.cwiseAbs().sum() * fit.residuals.cwiseAbs().maxCoeff();
        CHECK(ortho.cwiseAbs().maxCoeff() <= 1e-8 * scale);
        CHECK(std::abs(fit.residuals.sum()) <= 1e-8 * d.y.cwiseAbs().sum());
        REQUIRE(fit.standard_errors.size() == 3);
        REQUIRE(fit.p_values.size() == 3);
        for (Eigen::Index j = 0; j < 3; ++j) {
            CHECK(fit.standard_errors(j) > 0.0);
            CHECK(fit.t_statistics(j) == doctest::Approx(fit.coefficients(j) / fit.standard_errors(j)));
            CHECK(fit.p_values(j) >= 0.0);
            CHECK(fit.p_values(j) <= 1.0);
        }
        CHECK(fit.r_squared >= 0.0);
        CHECK(fit.r_squared <= 1.0);
        CHECK(fit.adjusted_r_squared <= fit.r_squared);
        CHECK(fit.durbin_watson >= 0.0);
        CHECK(fit.durbin_watson <= 4.0);
        CHECK(fit.f_statistic >= 0.0);
    }
}

TEST_CASE("refitting on fitted values is exact") {
    const auto d = random_design(7, 1, 30, 3);
    const auto fit = ols_fit(d);
    Eigen::MatrixXd Z(fit.fitted.size(), 2);
    Z.col(0) = fit.fitted;
    Z.col(1).setOnes();
    const auto again = ols_fit(Z, fit.fitted, true);
    CHECK(again.coefficients(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(again.r_squared == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("identity weight reproduces OLS bit for bit") {
    for (std::uint64_t s = 100; s < 220; ++s) {
        const auto d = random_design(s, 2 + s % 4, 6 + s % 7, 2 + s % 3);
        const auto a = ols_fit(d);
        const auto b = gls_fit(d, WeightMatrix::identity());
        CHECK(a.coefficients == b.coefficients);
        CHECK(a.standard_errors == b.standard_errors);
        CHECK(a.residuals == b.residuals);
        CHECK(a.r_squared == b.r_squared);
        CHECK(a.durbin_watson == b.durbin_watson);
    }
}

TEST_CASE("scalar covariance leaves coefficients unchanged") {
    const auto d = random_design(5, 3, 8, 3);
    CrossSectionCovariance cov;
    cov.entity_order = d.sample.entities;
    cov.sigma = 2.5 * Eigen::MatrixXd::Identity(3, 3);
    const auto g = gls_fit(d, WeightMatrix::cross_section_sur(cov));
    const auto o = ols_fit(d);
    CHECK((g.coefficients - o.coefficients).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("GLS matches a dense-inverse solve") {
    auto d = random_design(11, 2, 3, 2);
    Eigen::Matrix2d sigma;
    sigma << 1.0, 0.6, 0.6, 2.0;
    CrossSectionCovariance cov{d.sample.entities, sigma};
    const auto g = gls_fit(d, WeightMatrix::cross_section_sur(cov));
    CHECK((g.coefficients - brute_force_gls(d, sigma)).cwiseAbs().maxCoeff() < 1e-10);

    auto d3 = random_design(12, 3, 9, 3);
    Eigen::Matrix3d s3;
    s3 << 2.0, 0.5, -0.3, 0.5, 1.0, 0.2, -0.3, 0.2, 0.7;
    const auto g3 = gls_fit(d3, WeightMatrix::cross_section_sur({d3.sample.entities, s3}));
    CHECK((g3.coefficients - brute_force_gls(d3, s3)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("weight validation") {
    WeightMatrix w;
    w.kind = WeightKind::cross_section_sur;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
    WeightMatrix bad = WeightMatrix::identity();
    bad.sigma = CrossSectionCovariance{{"A"}, Eigen::MatrixXd::Ones(1, 1)};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    Eigen::Matrix2d npd;
    npd << 1, 2, 2, 4;
    const auto d = random_design(3, 2, 5, 2);
    CHECK_THROWS_AS(gls_fit(d, WeightMatrix::cross_section_sur({d.sample.entities, npd})), NotPositiveDefiniteError);
}

TEST_CASE("rank deficiency names the collinear column") {
    Eigen::MatrixXd X(6, 3);
    X << 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8, 1, 5, 10, 1, 6, 12, 1;
    const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(6, 1, 6);
    try {
        solve_least_squares(X, y, {"a", "twice_a", "C"});
        FAIL("expected a rank deficiency");
    } catch (const RankDeficiencyError& e) {
        REQUIRE(e.columns().size() == 1);
        const auto& c = e.columns().front();
        CHECK((c == "a" || c == "twice_a"));
        CHECK(std::string(e.what()).find(c) != std::string::npos);
    }
}

TEST_CASE("more parameters than observations is rejected") {
    CHECK_THROWS_AS(ols_fit(Eigen::MatrixXd::Identity(3, 3), Eigen::Vector3d(1, 2, 3), false), RankDeficiencyError);
}

TEST_CASE("Durbin-Watson") {
    Eigen::MatrixXd alt(1, 4);
    alt << 1, -1, 1, -1;
    CHECK(durbin_watson(alt) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(durbin_watson(Eigen::MatrixXd::Ones(1, 4)) == 0.0);
    Eigen::MatrixXd two(2, 2);
    two << 1, -1, 1, -1;
    CHECK(durbin_watson(two) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(durbin_watson(Eigen::MatrixXd::Zero(2, 3)), std::domain_error);
    CHECK_THROWS_AS(durbin_watson(Eigen::MatrixXd::Ones(3, 1)), std::invalid_argument);
}

TEST_CASE("panel fit Durbin-Watson stays within entities") {
    const auto d = random_design(21, 3, 10, 2);
    const auto fit = ols_fit(d);
    CHECK(fit.durbin_watson == doctest::Approx(durbin_watson(unstack(fit.residuals, d.sample))).epsilon(1e-14));
}

TEST_CASE("Schwarz criterion") {
    CHECK(schwarz_criterion(100.0, 100, 2) == doctest::Approx(0.0921034).epsilon(1e-6));
    CHECK(schwarz_criterion(100.0, 100, 2) == doctest::Approx(2.0 * std::log(100.0) / 100.0).epsilon(1e-15));
    for (std::size_t k = 1; k < 10; ++k) CHECK(schwarz_criterion(5.0, 50, k + 1) > schwarz_criterion(5.0, 50, k));
    CHECK_THROWS_AS(schwarz_criterion(0.0, 10, 2), std::domain_error);
    CHECK_THROWS_AS(schwarz_criterion(1.0, 2, 2), std::invalid_argument);
}

TEST_CASE("p-values decrease in |t|") {
    double last = 1.0;
    for (double t = 0.0; t < 8.0; t += 0.25) {
        const double p = student_t_two_sided_p(t, 25.0);
        CHECK(p <= last);
        CHECK(student_t_two_sided_p(-t, 25.0) == doctest::Approx(p));
        last = p;
    }
}

TEST_CASE("nested F test") {
    const auto full = random_design(31, 1, 50, 4);
    PanelDesign restricted = full;
    restricted.X = full.X.rightCols(2);
    restricted.names = {"x2", "C"};
    restricted.intercept_column = 1;
    const auto r = ols_fit(restricted);
    const auto f = ols_fit(full);
    const auto test = nested_f_test(r, f);
    CHECK(test.f_statistic >= 0.0);
    CHECK(test.df_numerator == 2);
    CHECK(test.df_denominator == 46);
    const double expected = ((r.ssr - f.ssr) / 2.0) / (f.ssr / 46.0);
    CHECK(test.f_statistic == doctest::Approx(expected));
    CHECK_THROWS_AS(nested_f_test(f, f), std::invalid_argument);
    CHECK_THROWS_AS(nested_f_test(f, r), std::invalid_argument);
}

}
