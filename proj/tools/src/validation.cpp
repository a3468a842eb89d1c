#include "panelecm/cli/validation.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "panelecm/diagnostics.hpp"
#include "panelecm/ecm.hpp"
#include "panelecm/regression.hpp"
#include "panelecm/simulation.hpp"
#include "panelecm/unit_root.hpp"

namespace panelecm::cli {

namespace {

std::string band(double lo, double hi) {
    std::ostringstream s;
    s << "rate in [" << lo << ", " << hi << "]";
    return s.str();
}

OracleResult size_oracle(const std::string& name, const std::function<double(const PanelDataset&)>& p_value,
                         const DgpSpec& spec, std::size_t reps, double lo, double hi) {
    const RateEstimate r = monte_carlo_size(p_value, spec, reps, 0.05);
    return {name, band(lo, hi), reps, r.rate, r.lower, r.upper, r.rate >= lo && r.rate <= hi};
}

std::function<double(const PanelDataset&)> panel_test(UnitRootTest test, Deterministic det) {
    return [test, det](const PanelDataset& ds) {
        UnitRootConfig cfg;
        cfg.deterministic = det;
        return run_test(test, panel_series(ds, "y"), cfg).p_value;
    };
}

OracleResult adjustment_recovery(std::size_t reps, std::uint64_t seed, std::size_t periods) {
    DgpSpec spec;
    spec.kind = DgpKind::known_ecm;
    spec.n_entities = 15;
    spec.n_periods = periods;
    const EcmSpec model = EcmSpec::replication();
    EcmOptions options;
    options.force_gate = true;
    std::vector<double> est(reps, 0.0);
    parallel_for(reps, [&](std::size_t i) {
        DgpSpec s = spec;
        s.seed = replication_seed(seed, i);
        est[i] = run_ecm(generate(s), model, options).speed_of_adjustment;
    });
    double mean = 0.0;
    for (double v : est) mean += v;
    mean /= static_cast<double>(reps);
    double var = 0.0;
    for (double v : est) var += (v - mean) * (v - mean);
    var /= static_cast<double>(reps - 1);
    const double mcse = std::sqrt(var / static_cast<double>(reps));
    const double truth = spec.ecm.adjustment;
    std::ostringstream target;
    target << "mean within 2 MCSE of " << truth;
    return {"known_ecm UT(-1) recovery", target.str(), reps, mean, mean - 1.96 * mcse, mean + 1.96 * mcse,
            std::abs(mean - truth) <= 2.0 * mcse};
}

}  // namespace

std::vector<std::string> oracle_suite_names() { return {"quick", "full"}; }

std::vector<OracleResult> run_oracle_suite(const std::string& suite, std::size_t replications, std::uint64_t seed) {
    bool full = false;
    if (suite == "full") {
        full = true;
    } else if (suite != "quick") {
        throw std::invalid_argument("unknown oracle suite '" + suite + "' (expected quick or full)");
    }
    const std::size_t reps = replications > 0 ? replications : (full ? 2000 : 500);
    const std::size_t T = full ? 200 : 100;
    std::vector<OracleResult> out;

    DgpSpec rw;
    rw.kind = DgpKind::random_walk_panel;
    rw.n_entities = 1;
    rw.n_periods = T;
    rw.seed = seed;
    out.push_back(size_oracle(
        "ADF size", [](const PanelDataset& ds) { return adf_test(ds.series("y", 0), Deterministic::intercept).p_value; },
        rw, reps, 0.035, 0.065));
    out.push_back(size_oracle(
        "PP size", [](const PanelDataset& ds) { return pp_regression(ds.series("y", 0), Deterministic::intercept).p_value; },
        rw, reps, 0.035, 0.065));

    DgpSpec panel = rw;
    panel.n_entities = 15;
    out.push_back(size_oracle("IPS size", panel_test(UnitRootTest::ips, Deterministic::intercept), panel, reps, 0.035, 0.065));
    out.push_back(size_oracle("LLC size", panel_test(UnitRootTest::llc, Deterministic::intercept), panel, reps, 0.035, 0.065));
    out.push_back(
        size_oracle("ADF-Fisher size", panel_test(UnitRootTest::adf_fisher, Deterministic::intercept), panel, reps, 0.035, 0.065));

    DgpSpec noise = panel;
    noise.kind = DgpKind::stationary_ar1_panel;
    noise.rho = 0.0;
    out.push_back(size_oracle("Hadri size", panel_test(UnitRootTest::hadri, Deterministic::intercept), noise, reps, 0.03, 0.07));

    DgpSpec cd = noise;
    cd.n_periods = 18;
    out.push_back(size_oracle(
        "Pesaran CD size", [](const PanelDataset& ds) { return pesaran_cd(ds.matrix("y")).p_value; }, cd, reps, 0.03, 0.07));

    DgpSpec jb = noise;
    jb.n_entities = 15;
    jb.n_periods = 18;
    out.push_back(size_oracle(
        "Jarque-Bera size",
        [](const PanelDataset& ds) {
            const Eigen::MatrixXd y = ds.matrix("y");
            const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
            return jarque_bera(v.array() - v.mean()).p_value;
        },
        jb, reps, 0.03, 0.07));

    DgpSpec ar = noise;
    ar.n_periods = T;
    std::size_t inside = 0;
    std::size_t total = 0;
    const std::size_t ar_reps = std::max<std::size_t>(reps / 20, 10);
    for (std::size_t r = 0; r < ar_reps; ++r) {
        DgpSpec s = ar;
        s.seed = replication_seed(seed, r);
        const PanelDataset ds = generate(s);
        for (std::size_t i = 0; i < ds.n_entities(); ++i) {
            const auto y = ds.series("y", i);
            double mean = 0.0;
            for (double v : y) mean += v;
            mean /= static_cast<double>(y.size());
            double num = 0.0;
            double den = 0.0;
            for (std::size_t t = 0; t < y.size(); ++t) {
                den += (y[t] - mean) * (y[t] - mean);
                if (t > 0) num += (y[t] - mean) * (y[t - 1] - mean);
            }
            inside += std::abs(num / den) <= 3.0 / std::sqrt(static_cast<double>(y.size())) ? 1 : 0;
            ++total;
        }
    }
    const RateEstimate band_rate = binomial_rate(inside, total);
    out.push_back({"AR(1) rho=0 autocorrelation band", "share within 3/sqrt(T) >= 0.99", total, band_rate.rate,
                   band_rate.lower, band_rate.upper, band_rate.rate >= 0.99});

    out.push_back(adjustment_recovery(full ? 500 : 100, seed, 20));
    return out;
}

void render_oracle_table(std::ostream& out, const std::vector<OracleResult>& rows) {
    out << std::left << std::setw(34) << "Oracle" << std::right << std::setw(8) << "Reps" << std::setw(11) << "Estimate"
        << std::setw(22) << "95% interval" << "  " << std::left << std::setw(32) << "Target" << "Result\n";
    for (const auto& r : rows) {
        std::ostringstream iv;
        iv << std::fixed << std::setprecision(4) << '[' << r.lower << ", " << r.upper << ']';
        out << std::left << std::setw(34) << r.name << std::right << std::setw(8) << r.replications << std::setw(11)
            << std::fixed << std::setprecision(4) << r.estimate << std::setw(22) << iv.str() << "  " << std::left
            << std::setw(32) << r.target << (r.passed ? "PASS" : "FAIL") << '\n';
        out << std::defaultfloat;
    }
}

nlohmann::json to_json(const std::vector<OracleResult>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
        out.push_back({{"name", r.name},
                       {"target", r.target},
                       {"replications", r.replications},
                       {"estimate", r.estimate},
                       {"lower", r.lower},
                       {"upper", r.upper},
                       {"passed", r.passed}});
    }
    return out;
}

}  // namespace panelecm::cli
