#include <benchmark/benchmark.h>

#include "panelecm/simulation.hpp"
#include "panelecm/unit_root.hpp"

using namespace panelecm;

namespace {

SeriesPanel walks(std::size_t periods) {
    DgpSpec s;
    s.kind = DgpKind::random_walk_panel;
    s.n_periods = periods;
    s.seed = 9;
    return panel_series(generate(s), "y");
}

}  // namespace

static void BM_AdfSchwarz(benchmark::State& state) {
    const auto p = walks(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(adf_test(p.front(), Deterministic::intercept));
}
BENCHMARK(BM_AdfSchwarz)->Arg(20)->Arg(200);

static void BM_PanelTest(benchmark::State& state) {
    const auto test = static_cast<UnitRootTest>(state.range(0));
    const auto p = walks(200);
    UnitRootConfig cfg;
    if (test == UnitRootTest::breitung) cfg.deterministic = Deterministic::intercept_and_trend;
    run_test(test, p, cfg);
    for (auto _ : state) benchmark::DoNotOptimize(run_test(test, p, cfg));
    state.SetLabel(to_string(test));
}
BENCHMARK(BM_PanelTest)->DenseRange(0, 5);

static void BM_SummaryWindow(benchmark::State& state) {
    const auto p = walks(20);
    summarize_series(p, "y", {});
    for (auto _ : state) benchmark::DoNotOptimize(summarize_series(p, "y", {}));
}
BENCHMARK(BM_SummaryWindow)->Unit(benchmark::kMillisecond);
