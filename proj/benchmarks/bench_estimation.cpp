#include <benchmark/benchmark.h>

#include "panelecm/diagnostics.hpp"
#include "panelecm/ecm.hpp"
#include "panelecm/regression.hpp"
#include "panelecm/simulation.hpp"
#include "panelecm/sur.hpp"

using namespace panelecm;

namespace {

PanelDataset known_panel(std::size_t periods) {
    DgpSpec s;
    s.kind = DgpKind::known_ecm;
    s.n_periods = periods;
    s.seed = 3;
    return generate(s);
}

PanelDesign replication_design(std::size_t periods) {
    const auto spec = EcmSpec::replication();
    const auto ds = known_panel(periods);
    const auto lr = long_run_fit(ds, spec);
    return ecm_design(with_residual(ds, spec, lr.ut), spec, 1);
}

}  // namespace

static void BM_OlsFit(benchmark::State& state) {
    const auto d = replication_design(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(ols_fit(d));
    state.SetItemsProcessed(state.iterations() * d.X.rows());
}
BENCHMARK(BM_OlsFit)->Arg(20)->Arg(60)->Arg(200);

static void BM_SurOneStep(benchmark::State& state) {
    const auto d = replication_design(static_cast<std::size_t>(state.range(0)));
    const auto ols = ols_fit(d);
    for (auto _ : state) benchmark::DoNotOptimize(sur_one_step_fit(d, ols));
    state.SetItemsProcessed(state.iterations() * d.X.rows());
}
BENCHMARK(BM_SurOneStep)->Arg(20)->Arg(60)->Arg(200);

static void BM_LagSelection(benchmark::State& state) {
    const auto spec = EcmSpec::replication();
    const auto ds = known_panel(20);
    const auto with_ut = with_residual(ds, spec, long_run_fit(ds, spec).ut);
    for (auto _ : state) benchmark::DoNotOptimize(select_lag(with_ut, spec));
}
BENCHMARK(BM_LagSelection);

static void BM_EcmPipeline(benchmark::State& state) {
    const auto spec = EcmSpec::replication();
    const auto ds = known_panel(20);
    EcmOptions o;
    o.force_gate = true;
    run_ecm(ds, spec, o);
    for (auto _ : state) benchmark::DoNotOptimize(run_ecm(ds, spec, o));
}
BENCHMARK(BM_EcmPipeline)->Unit(benchmark::kMillisecond);

static void BM_Diagnostics(benchmark::State& state) {
    const auto spec = EcmSpec::replication();
    EcmOptions o;
    o.force_gate = true;
    const auto r = run_ecm(known_panel(20), spec, o);
    for (auto _ : state) benchmark::DoNotOptimize(gauss_markov_report(r));
}
BENCHMARK(BM_Diagnostics);
