#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "panelecm/error.hpp"
#include "panelecm/panel.hpp"
#include "panelecm/random.hpp"

using namespace panelecm;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

PanelDataset random_panel(std::size_t N, std::size_t T, std::uint64_t seed, const std::vector<std::string>& vars) {
    const RandomStreams rng(seed);
    std::vector<std::pair<std::string, Eigen::MatrixXd>> m;
    for (std::size_t v = 0; v < vars.size(); ++v) {
        Eigen::MatrixXd x(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(T));
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index t = 0; t < x.cols(); ++t)
                x(i, t) = 10.0 + rng.normal(static_cast<std::uint64_t>(v * 100 + static_cast<std::size_t>(i)), static_cast<std::uint64_t>(t));
        m.emplace_back(vars[v], x);
    }
    return fixtures::dataset(m);
}

std::vector<Regressor> replication_terms(int lag) {
    std::vector<Regressor> regs;
    for (const char* v : {"gini", "creditp", "he", "ed", "un", "tax"}) regs.push_back(Regressor::of({v, Transform::first_difference, lag}));
    for (const char* v : {"cpi", "openness", "gfcf"}) regs.push_back(Regressor::of({v, Transform::first_difference, 0}));
    regs.push_back(Regressor::intercept());
    regs.push_back(Regressor::of({"ut", Transform::level, 1}));
    return regs;
}

const std::vector<std::string> kReplicationVars{"gini", "creditp", "he", "ed", "un", "tax", "cpi", "openness", "gfcf", "ut"};

}  // namespace

TEST_SUITE("panel") {

TEST_CASE("complete 15 x 20 panel loads without missing cells") {
    std::vector<PanelRecord> rows;
    const auto ents = fixtures::names(15);
    for (const auto& e : ents)
        for (const char* v : {"gini", "creditp", "he", "ed", "un", "tax", "cpi", "openness", "gfcf"})
            for (int t = 1995; t <= 2014; ++t) rows.push_back({e, t, v, 1.0 * t, 0});
    std::reverse(rows.begin(), rows.end());
    const PanelDataset ds = load_panel(rows);
    CHECK(ds.n_entities() == 15);
    CHECK(ds.n_periods() == 20);
    CHECK(ds.variable_names().size() == 9);
    for (const auto& v : ds.variable_names()) CHECK(ds.missing_count(v) == 0);
    CHECK(ds.entities().front() == "E01");
    CHECK(ds.periods().front() == 1995);
    CHECK(ds.matrix("gini").size() == 300);
}

TEST_CASE("absent record is flagged missing exactly there") {
    std::vector<PanelRecord> rows;
    for (const char* c : {"Austria", "Belgium"})
        for (int t = 1995; t <= 2014; ++t)
            if (!(std::string(c) == "Austria" && t == 2002)) rows.push_back({c, t, "gini", 25.0, 0});
    const PanelDataset ds = load_panel(rows);
    CHECK(ds.missing_count("gini") == 1);
    CHECK(ds.is_missing("gini", ds.entity_index("Austria"), ds.period_index(2002)));
    CHECK(std::isnan(ds.value("gini", 0, 7)));
    CHECK(ds.provenance("gini", 0)[7] == Provenance::missing);
}

TEST_CASE("duplicate key is rejected with the key") {
    std::vector<PanelRecord> rows{{"AT", 2000, "gini", 1.0, 2}, {"AT", 2000, "gini", 2.0, 3}};
    try {
        load_panel(rows);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("AT, 2000, gini") != std::string::npos);
    }
}

TEST_CASE("non-numeric value is rejected with its row number") {
    std::istringstream in("entity,period,variable,value\nAT,1995,gini,25.1\nAT,1996,gini,abc\n");
    try {
        parse_long_table(in);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
}

TEST_CASE("long and wide readers agree; tab delimiter detected") {
    std::istringstream lng("entity\tperiod\tvariable\tvalue\nBE\t1995\tx\t1.5\nBE\t1996\tx\t\nBE\t1995\ty\t2\nBE\t1996\ty\t3\n");
    std::istringstream wide("entity,period,x,y\nBE,1995,1.5,2\nBE,1996,,3\n");
    const auto a = load_panel(parse_long_table(lng));
    const auto b = load_panel(parse_wide_table(wide));
    CHECK(a == b);
    CHECK(a.is_missing("x", 0, 1));
}

TEST_CASE("written long table reads back identically") {
    PanelDataset ds = random_panel(3, 6, 11, {"a", "b"});
    Eigen::MatrixXd with_gap = ds.matrix("a");
    with_gap(1, 2) = kNaN;
    ds = ds.with_variable("a", with_gap);
    std::stringstream io;
    write_long_table(io, ds);
    const PanelDataset back = load_panel(parse_long_table(io));
    CHECK(back == ds);
}

TEST_CASE("midpoint interpolation") {
    const auto rows = fixtures::records("AT", "x", 1995, {10.0, kNaN, 14.0});
    const auto out = interpolate_missing(load_panel(rows), "x");
    CHECK(out.dataset.value("x", 0, 1) == 12.0);
    CHECK(out.dataset.provenance("x", 0)[1] == Provenance::interpolated);
    REQUIRE(out.log.entries.size() == 1);
    const auto& e = out.log.entries[0];
    CHECK(e.left_anchor_period == 1995);
    CHECK(e.right_anchor_period == 1997);
    CHECK(e.filled_value == 12.0);
}

TEST_CASE("published three-year runs have constant steps within rounding") {
    // Two-decimal rounding of a linear run bounds |second difference| by 4 * 0.005.
    const std::vector<std::vector<double>> runs{{97.61, 95.04, 92.46},  {72.01, 69.99, 67.96},   {79.02, 78.23, 77.45},
                                                {86.03, 83.91, 81.77},  {101.47, 104.87, 108.27}, {25.28, 25.55, 25.83}};
    for (const auto& r : runs) CHECK(std::abs(r[2] - 2.0 * r[1] + r[0]) <= 0.02 + 1e-9);
}

TEST_CASE("synthetic gaps are filled exactly on the line through the anchors") {
    // Anchors at 1997 and 2001 bracket a three-year gap, as in the credit series.
    const double v0 = 100.13;
    const double v1 = 89.87;
    const auto rows = fixtures::records("AT", "creditp", 1995, {101.0, 100.6, v0, kNaN, kNaN, kNaN, v1, 88.0});
    const auto out = interpolate_missing(load_panel(rows), "creditp");
    for (int k = 1; k <= 3; ++k) {
        const double expect = v0 + k * (v1 - v0) / 4.0;
        CHECK(std::abs(out.dataset.value("creditp", 0, static_cast<std::size_t>(2 + k)) - expect) <= 1e-12 * std::abs(expect));
    }
    // Second differences of the filled run including anchors are zero.
    std::vector<double> run;
    for (std::size_t t = 2; t <= 6; ++t) run.push_back(out.dataset.value("creditp", 0, t));
    for (std::size_t t = 2; t < run.size(); ++t) CHECK(std::abs(run[t] - 2 * run[t - 1] + run[t - 2]) <= 1e-12 * std::abs(run[t]));
    for (const auto& e : out.log.entries) {
        CHECK(e.filled_value <= std::max(e.left_anchor_value, e.right_anchor_value));
        CHECK(e.filled_value >= std::min(e.left_anchor_value, e.right_anchor_value));
    }
}

TEST_CASE("interpolation is idempotent and leaves observed cells alone") {
    auto rows = fixtures::records("DK", "gini", 1995, {20.0, kNaN, 21.0, kNaN, 22.0, kNaN, kNaN, 23.4, 24.0});
    auto more = fixtures::records("FI", "gini", 1995, {25.0, 25.5, 25.9, 26.0, kNaN, 26.2, 26.4, 26.5, 26.9});
    rows.insert(rows.end(), more.begin(), more.end());
    const PanelDataset ds = load_panel(rows);
    const auto once = interpolate_missing(ds, "gini");
    const auto twice = interpolate_missing(once.dataset, "gini");
    CHECK(twice.dataset == once.dataset);
    CHECK(twice.log.entries.empty());
    CHECK(once.log.entries.size() == 5);
    for (std::size_t i = 0; i < ds.n_entities(); ++i)
        for (std::size_t t = 0; t < ds.n_periods(); ++t)
            if (!ds.is_missing("gini", i, t)) CHECK(once.dataset.value("gini", i, t) == ds.value("gini", i, t));
}

TEST_CASE("boundary gaps are refused with the entity named") {
    const auto lead = load_panel(fixtures::records("LU", "gini", 1995, {kNaN, 27.0, 27.5}));
    const auto trail = load_panel(fixtures::records("LU", "gini", 1995, {27.0, 27.5, kNaN}));
    for (const auto* ds : {&lead, &trail}) {
        try {
            interpolate_missing(*ds, "gini");
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("LU") != std::string::npos);
        }
    }
}

TEST_CASE("interpolation log layout groups runs per entity") {
    auto rows = fixtures::records("Germany", "gini", 2001, {25.0, kNaN, kNaN, kNaN, 26.12});
    const auto out = interpolate_missing(load_panel(rows), "gini");
    std::ostringstream s;
    write_interpolation_log(s, out.log);
    CHECK(s.str() == "entity,variable,years,values\nGermany,gini,\"2002, 2003, 2004\",\"25.28, 25.56, 25.84\"\n");
}

TEST_CASE("first difference and lag by hand") {
    const auto ds = load_panel(fixtures::records("A", "x", 1995, {3.0, 5.0, 4.0}));
    const auto d = apply_transform(ds, {"x", Transform::first_difference, 0});
    CHECK(d.first_period == 1996);
    CHECK(d.values(0, 0) == 2.0);
    CHECK(d.values(0, 1) == -1.0);
    const auto same = apply_transform(ds, {"x", Transform::level, 0});
    CHECK(same.values.row(0) == Eigen::RowVector3d(3.0, 5.0, 4.0));
    const auto dl = apply_transform(ds, {"x", Transform::first_difference, 1});
    CHECK(dl.first_period == 1997);
    CHECK(dl.values(0, 0) == 2.0);
    CHECK_THROWS_AS(apply_transform(ds, {"x", Transform::first_difference, 2}), DataError);
    CHECK(TransformSpec{"gini", Transform::first_difference, 1}.label() == "D(GINI(-1))");
    CHECK(TransformSpec{"ut", Transform::level, 1}.label() == "UT(-1)");
}

TEST_CASE("differences never cross entity boundaries and cumulate back") {
    const PanelDataset ds = random_panel(4, 12, 3, {"x"});
    const auto d = apply_transform(ds, {"x", Transform::first_difference, 0});
    for (std::size_t i = 0; i < ds.n_entities(); ++i) {
        double level = ds.value("x", i, 0);
        for (std::size_t t = 1; t < ds.n_periods(); ++t) {
            CHECK(d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t - 1)) == ds.value("x", i, t) - ds.value("x", i, t - 1));
            level += d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t - 1));
            CHECK(level == doctest::Approx(ds.value("x", i, t)).epsilon(1e-12));
        }
    }
}

TEST_CASE("replication layout gives 1997-2014, 18 periods, 270 rows") {
    const PanelDataset ds = random_panel(15, 20, 1, kReplicationVars);
    const auto regs = replication_terms(1);
    const PanelDesign d = align_balanced(ds, regs, {"gini", Transform::first_difference, 0});
    CHECK(d.sample.first_period == 1997);
    CHECK(d.sample.last_period == 2014);
    CHECK(d.sample.n_periods() == 18);
    CHECK(d.y.size() == 270);
    CHECK(d.X.cols() == 11);
    CHECK(d.names.front() == "D(GINI(-1))");
    CHECK(d.names.back() == "UT(-1)");
    CHECK(d.intercept_column == std::optional<std::size_t>(9));
}

TEST_CASE("row accounting equals entities x (periods - maxloss)") {
    const PanelDataset ds = random_panel(15, 20, 2, kReplicationVars);
    for (int lag = 1; lag <= 4; ++lag) {
        const PanelDesign d = align_balanced(ds, replication_terms(lag), {"gini", Transform::first_difference, 0});
        CHECK(d.y.size() == 15 * (20 - 1 - lag));
        CHECK(d.X.allFinite());
    }
    const PanelDesign d4 = align_balanced(ds, replication_terms(4), {"gini", Transform::first_difference, 0});
    CHECK(d4.y.size() == 225);
    const PanelDataset one = random_panel(1, 20, 4, {"y", "x"});
    const std::vector<Regressor> lv{Regressor::of({"x", Transform::level, 0}), Regressor::intercept()};
    CHECK(align_balanced(one, lv, {"y", Transform::level, 0}).y.size() == 20);
}

TEST_CASE("stacked rows follow entity-major order and match the derived series") {
    const PanelDataset ds = random_panel(3, 8, 5, {"y", "x"});
    const std::vector<Regressor> regs{Regressor::of({"x", Transform::first_difference, 2})};
    const PanelDesign d = align_balanced(ds, regs, {"y", Transform::level, 0});
    CHECK(d.sample.first_period == 1998);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < d.sample.n_periods(); ++k) {
            const std::size_t t = 3 + k;
            CHECK(d.y(static_cast<Eigen::Index>(d.sample.row(i, k))) == ds.value("y", i, t));
            CHECK(d.X(static_cast<Eigen::Index>(d.sample.row(i, k)), 0) == ds.value("x", i, t - 2) - ds.value("x", i, t - 3));
        }
    const Eigen::MatrixXd back = unstack(d.y, d.sample);
    CHECK(back(2, 0) == ds.value("y", 2, 3));
}

TEST_CASE("entity order does not change derived values") {
    const PanelDataset ds = random_panel(5, 10, 6, {"x"});
    const std::vector<std::size_t> order{3, 0, 4, 1, 2};
    const PanelDataset p = ds.permuted(order);
    const auto a = apply_transform(ds, {"x", Transform::first_difference, 1});
    const auto b = apply_transform(p, {"x", Transform::first_difference, 1});
    for (std::size_t k = 0; k < order.size(); ++k)
        CHECK(b.values.row(static_cast<Eigen::Index>(k)) == a.values.row(static_cast<Eigen::Index>(order[k])));
}

TEST_CASE("missing cells block transforms until interpolated") {
    const auto ds = load_panel(fixtures::records("A", "x", 1995, {1.0, kNaN, 3.0, 4.0}));
    CHECK_THROWS_AS(apply_transform(ds, {"x", Transform::first_difference, 0}), DataError);
    CHECK_THROWS_AS(TransformSpec({"x", Transform::level, 5}).validate(), std::invalid_argument);
}

}
