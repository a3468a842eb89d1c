#include "panelecm/cli/commands.hpp"

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "panelecm/cli/artifacts.hpp"
#include "panelecm/cli/report.hpp"
#include "panelecm/cli/validation.hpp"
#include "panelecm/diagnostics.hpp"
#include "panelecm/error.hpp"
#include "panelecm/sur.hpp"
#include "panelecm/unit_root.hpp"

namespace panelecm::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string coefficients_csv(const FitResult& f) {
    std::ostringstream s;
    s << std::setprecision(17) << "variable,coefficient,std_error,t_statistic,p_value\n";
    for (std::size_t j = 0; j < f.names.size(); ++j) {
        const auto k = static_cast<Eigen::Index>(j);
        s << f.names[j] << ',' << f.coefficients(k) << ',' << f.standard_errors(k) << ',' << f.t_statistics(k) << ','
          << f.p_values(k) << '\n';
    }
    return s.str();
}

std::string matrix_csv(const std::vector<std::string>& names, const Eigen::MatrixXd& m) {
    std::ostringstream s;
    s << std::setprecision(17);
    for (const auto& n : names) s << ',' << n;
    s << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        s << names[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < m.cols(); ++c) s << ',' << m(r, c);
        s << '\n';
    }
    return s.str();
}

json fit_summary(const FitResult& f) {
    json rows = json::array();
    for (std::size_t j = 0; j < f.names.size(); ++j) {
        const auto k = static_cast<Eigen::Index>(j);
        rows.push_back({{"variable", f.names[j]},
                        {"coefficient", f.coefficients(k)},
                        {"std_error", f.standard_errors(k)},
                        {"t_statistic", f.t_statistics(k)},
                        {"p_value", f.p_values(k)}});
    }
    return {{"dependent", f.dependent},
            {"sample", to_json(f.sample)},
            {"n_observations", f.n_observations},
            {"n_parameters", f.n_parameters},
            {"coefficients", rows},
            {"r_squared", f.r_squared},
            {"adjusted_r_squared", f.adjusted_r_squared},
            {"se_regression", f.se_regression},
            {"ssr", f.ssr},
            {"f_statistic", f.f_statistic},
            {"f_probability", f.f_probability},
            {"durbin_watson", f.durbin_watson},
            {"mean_dependent", f.mean_dependent},
            {"sd_dependent", f.sd_dependent}};
}

json estimation_summary(const EcmResult& r, double significance) {
    return {{"gate", {{"passed", r.gate.passed}, {"rejections", r.gate.rejections}, {"applicable", r.gate.applicable}, {"rule", r.gate.rule}}},
            {"gate_overridden", r.gate_overridden},
            {"selected_lag", r.selected_lag},
            {"speed_of_adjustment", r.speed_of_adjustment},
            {"adjustment_valid", validate_adjustment(r, significance)},
            {"sigma_shrinkage", r.sigma.shrinkage},
            {"fit", fit_summary(r.ecm_fit)}};
}

std::string plot_csv(const ResidualPlot& p) {
    std::ostringstream s;
    write_residual_plot(s, p);
    return s.str();
}

void write_estimation_text(std::ostream& out, const EcmResult& r, double significance) {
    render_estimation(out, r);
    out << '\n';
    render_first_stage(out, r);
    out << "\nAdjustment coefficient UT(-1) " << std::fixed << std::setprecision(6) << r.speed_of_adjustment
        << std::defaultfloat << ": " << (validate_adjustment(r, significance) ? "valid" : "NOT valid")
        << " (negative and significant at " << significance << ")\n";
}

}  // namespace

PreparedData prepare_data(const RunConfig& config) {
    config.validate();
    if (config.data_path.empty()) throw std::invalid_argument("no data file given (use --data or data.path in the config)");
    PreparedData p{read_panel_file(config.data_path, config.data_format), {}};
    config.check_dataset(p.dataset);
    for (const auto& v : config.interpolate) {
        auto outcome = interpolate_missing(p.dataset, v);
        p.dataset = std::move(outcome.dataset);
        for (auto& e : outcome.log.entries) p.log.entries.push_back(std::move(e));
    }
    return p;
}

void cmd_ingest(const std::string& path, TableFormat format, OutputFormat fmt, const std::string& out_dir, std::ostream& out) {
    const PanelDataset ds = read_panel_file(path, format);
    const DatasetSummary s = summarize_dataset(ds);
    std::ostringstream text;
    render_dataset_summary(text, s);
    if (fmt == OutputFormat::json) {
        out << dump(to_json(s));
    } else {
        out << text.str();
    }
    if (!out_dir.empty()) {
        StagedDirectory dir(out_dir);
        dir.write("ingest.txt", text.str());
        dir.write_json("ingest.json", to_json(s));
        dir.commit();
    }
}

void cmd_interpolate(const RunConfig& config, OutputFormat fmt, std::ostream& out) {
    const PreparedData p = prepare_data(config);
    std::ostringstream text;
    write_interpolation_log(text, p.log);
    if (fmt == OutputFormat::json) {
        out << dump(to_json(p.log));
    } else {
        out << text.str();
    }
    if (!config.output.directory.empty()) {
        StagedDirectory dir(config.output.directory);
        dir.write("interpolation_log.csv", text.str());
        dir.write_json("interpolation.json", to_json(p.log));
        dir.commit();
    }
}

void cmd_unitroot(const RunConfig& config, OutputFormat fmt, std::ostream& out) {
    const PreparedData p = prepare_data(config);
    const auto rows = summary_window(p.dataset, config.summary_variables(), config.unit_root);
    std::ostringstream text;
    render_summary_window(text, rows, config.unit_root.significance);
    json doc = json::array();
    for (const auto& r : rows) doc.push_back(to_json(r));
    if (fmt == OutputFormat::json) {
        out << dump(doc);
    } else {
        out << text.str();
    }
    if (!config.output.directory.empty()) {
        StagedDirectory dir(config.output.directory);
        dir.write("unitroot.txt", text.str());
        dir.write_json("unitroot.json", doc);
        dir.commit();
    }
}

EcmResult cmd_estimate(const RunConfig& config, OutputFormat fmt, std::ostream& out) {
    const PreparedData p = prepare_data(config);
    const EcmOptions options = config.ecm_options();
    LongRunFit lr = long_run_fit(p.dataset, config.model);
    GateOutcome gate = cointegration_gate(lr.ut, options.gate);
    if (!gate.passed && !options.force_gate) {
        out << "Stationarity gate on the long-run residual (" << gate.rule << "): " << gate.rejections << " of "
            << gate.applicable << " tests reject a unit root\n";
        const auto residual = panel_series(with_residual(p.dataset, config.model, lr.ut), config.model.residual_name);
        render_summary_window(out, {summarize_series(residual, "UT", config.unit_root)}, config.unit_root.significance);
        estimate_ecm(p.dataset, config.model, config.model.min_lag, std::move(lr), std::move(gate), false, options.sigma);
    }
    LagSelectionResult sel;
    if (options.lag) {
        sel.selected = *options.lag;
    } else {
        sel = select_lag(with_residual(p.dataset, config.model, lr.ut), config.model);
    }
    EcmResult r = estimate_ecm(p.dataset, config.model, sel.selected, std::move(lr), std::move(gate), options.force_gate,
                               options.sigma);
    r.lag_selection = std::move(sel);

    std::ostringstream text;
    write_estimation_text(text, r, config.significance);
    const json summary = estimation_summary(r, config.significance);
    if (fmt == OutputFormat::json) {
        out << dump(summary);
    } else {
        out << text.str();
    }
    if (!config.output.directory.empty()) {
        StagedDirectory dir(config.output.directory);
        dir.write("estimate.txt", text.str());
        dir.write_json("estimate.json", summary);
        dir.write_json("run.json", {{"config", to_json(config)}, {"ecm", to_json(r)}});
        dir.write("coefficients.csv", coefficients_csv(r.ecm_fit));
        std::ostringstream sigma;
        write_sigma_csv(sigma, r.sigma.covariance);
        dir.write("sigma.csv", sigma.str());
        if (!p.log.entries.empty()) {
            std::ostringstream log;
            write_interpolation_log(log, p.log);
            dir.write("interpolation_log.csv", log.str());
        }
        dir.commit();
    }
    return r;
}

void cmd_diagnose(const RunConfig& config, const std::optional<std::string>& run_dir, OutputFormat fmt, std::ostream& out) {
    EcmResult ecm;
    if (run_dir) {
        ecm = ecm_from_json(read_json_file(fs::path(*run_dir) / "run.json").at("ecm"));
    } else {
        std::ostringstream discard;
        ecm = cmd_estimate(
            [&] {
                RunConfig c = config;
                c.output.directory.clear();
                return c;
            }(),
            OutputFormat::text, discard);
    }
    DiagnosticsConfig dc = config.diagnostics;
    dc.significance = config.significance;
    const DiagnosticsReport report = gauss_markov_report(ecm, dc);
    std::ostringstream text;
    if (ecm.gate_overridden) text << kGateOverriddenBanner << "\n\n";
    render_diagnostics(text, report);
    const json doc = to_json(report);
    if (fmt == OutputFormat::json) {
        out << dump(doc);
    } else {
        out << text.str();
    }
    if (!config.output.directory.empty()) {
        StagedDirectory dir(config.output.directory);
        dir.write("diagnostics.txt", text.str());
        dir.write_json("diagnostics.json", doc);
        dir.write("residual_plot.csv", plot_csv(report.plot));
        dir.write("regressor_correlation.csv", matrix_csv(report.klein.names, report.klein.correlation));
        std::ostringstream rr;
        rr << std::setprecision(17) << "variable,correlation\n";
        for (std::size_t j = 0; j < report.regressor_residual.names.size(); ++j)
            rr << report.regressor_residual.names[j] << ',' << report.regressor_residual.correlation(static_cast<Eigen::Index>(j))
               << '\n';
        dir.write("regressor_residual_correlation.csv", rr.str());
        dir.commit();
    }
}

void cmd_validate(const std::string& suite, std::size_t replications, std::uint64_t seed, OutputFormat fmt,
                  const std::string& out_dir, std::ostream& out) {
    const auto rows = run_oracle_suite(suite, replications, seed);
    std::ostringstream text;
    render_oracle_table(text, rows);
    if (fmt == OutputFormat::json) {
        out << dump(to_json(rows));
    } else {
        out << text.str();
    }
    if (!out_dir.empty()) {
        StagedDirectory dir(out_dir);
        dir.write("validate.txt", text.str());
        dir.write_json("validate.json", to_json(rows));
        dir.commit();
    }
}

void cmd_simulate(const DgpSpec& spec, const std::string& out_dir, std::ostream& out) {
    const PanelDataset ds = generate(spec);
    if (out_dir.empty()) {
        write_long_table(out, ds);
        return;
    }
    std::ostringstream s;
    write_long_table(s, ds);
    StagedDirectory dir(out_dir);
    dir.write("data.csv", s.str());
    dir.commit();
    out << "wrote " << (fs::path(out_dir) / "data.csv").string() << " (" << ds.n_entities() << " entities, " << ds.n_periods()
        << " periods)\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Panel error-correction workbench"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string profile_name;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool force_gate = false;
    std::string data_path;
    std::string format = "text";
    std::string table_format;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--profile", profile_name, "built-in profile (eu15-replication)");
    app.add_option("--seed", seed, "seed for simulation commands");
    app.add_option("--out", out_dir, "output directory, replaced all-or-nothing");
    app.add_flag("--force-gate", force_gate, "estimate even when the stationarity gate fails");
    app.add_option("--data", data_path, "data file (overrides the configuration)");
    app.add_option("--format", format, "stdout format")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--table", table_format, "data layout: long or wide")->check(CLI::IsMember({"long", "wide"}));

    auto* ingest = app.add_subcommand("ingest", "summarise a data file");
    std::string ingest_path;
    ingest->add_option("path", ingest_path, "data file")->required();
    auto* interpolate = app.add_subcommand("interpolate", "fill interior gaps and print the log");
    auto* unitroot = app.add_subcommand("unitroot", "summary window of panel unit-root tests");
    std::vector<std::string> ur_vars;
    std::string ur_det;
    unitroot->add_option("--variables", ur_vars, "variables to test")->delimiter(',');
    unitroot->add_option("--deterministic", ur_det, "none, intercept or trend");
    auto* estimate = app.add_subcommand("estimate", "long-run fit, gate, lag search and SUR estimation");
    std::optional<int> lag;
    estimate->add_option("--lag", lag, "fix the lag instead of searching")->check(CLI::Range(1, 4));
    auto* diagnose = app.add_subcommand("diagnose", "residual diagnostics of an estimated model");
    std::string run_dir;
    diagnose->add_option("--run", run_dir, "directory written by estimate --out");
    auto* validate = app.add_subcommand("validate", "Monte Carlo oracle suite");
    std::string suite = "quick";
    std::size_t reps = 0;
    validate->add_option("--suite", suite, "quick or full")->check(CLI::IsMember(oracle_suite_names()));
    validate->add_option("--reps", reps, "replications (default per suite)");

    auto* simulate = app.add_subcommand("simulate", "write a synthetic panel in long format");
    DgpSpec dgp;
    std::string dgp_kind = "random_walk_panel";
    simulate->add_option("--kind", dgp_kind, "data-generating process");
    simulate->add_option("--entities", dgp.n_entities, "number of entities");
    simulate->add_option("--periods", dgp.n_periods, "number of periods");
    simulate->add_option("--first-period", dgp.first_period, "first period label");
    simulate->add_option("--rho", dgp.rho, "AR coefficient of the stationary component");
    simulate->add_option("--loading", dgp.loading, "factor loading or cointegrating slope");
    simulate->add_option("--adjustment", dgp.ecm.adjustment, "known_ecm UT(-1) coefficient (0 removes cointegration)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    const OutputFormat fmt = format == "json" ? OutputFormat::json : OutputFormat::text;
    try {
        auto build_config = [&]() {
            RunConfig c;
            if (!config_path.empty()) {
                json doc = read_json_file(config_path);
                if (!profile_name.empty() && doc.is_object() && !doc.contains("profile")) doc["profile"] = profile_name;
                c = parse_run_config(doc);
            } else if (!profile_name.empty()) {
                c = profile(profile_name);
            } else if (!run_dir.empty()) {
                c = parse_run_config(read_json_file(fs::path(run_dir) / "run.json").at("config"));
                c.output.directory.clear();
            }
            if (!data_path.empty()) c.data_path = data_path;
            if (!table_format.empty()) c.data_format = parse_table_format(table_format);
            if (!out_dir.empty()) c.output.directory = out_dir;
            if (force_gate) c.force_gate = true;
            if (seed) c.seed = *seed;
            if (lag) c.lag = lag;
            if (!ur_vars.empty()) c.unit_root_variables = ur_vars;
            if (!ur_det.empty()) c.unit_root.deterministic = parse_deterministic(ur_det);
            c.validate();
            return c;
        };

        if (ingest->parsed()) {
            cmd_ingest(ingest_path, table_format == "wide" ? TableFormat::wide_format : TableFormat::long_format, fmt, out_dir,
                       out);
        } else if (interpolate->parsed()) {
            cmd_interpolate(build_config(), fmt, out);
        } else if (unitroot->parsed()) {
            cmd_unitroot(build_config(), fmt, out);
        } else if (estimate->parsed()) {
            cmd_estimate(build_config(), fmt, out);
        } else if (diagnose->parsed()) {
            const RunConfig c = build_config();
            cmd_diagnose(c, run_dir.empty() ? std::nullopt : std::optional<std::string>(run_dir), fmt, out);
        } else if (simulate->parsed()) {
            dgp.kind = parse_dgp_kind(dgp_kind);
            dgp.seed = seed.value_or(0);
            cmd_simulate(dgp, out_dir, out);
        } else if (validate->parsed()) {
            cmd_validate(suite, reps, seed.value_or(20240601), fmt, out_dir, out);
        }
    } catch (const GateNotPassedError& e) {
        err << "error: " << e.what() << '\n';
        return kGateFailure;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataFailure;
    } catch (const RankDeficiencyError& e) {
        err << "error: " << e.what();
        if (!e.columns().empty()) {
            err << " (columns:";
            for (const auto& c : e.columns()) err << ' ' << c;
            err << ')';
        }
        err << '\n';
        return kDataFailure;
    } catch (const NotPositiveDefiniteError& e) {
        err << "error: " << e.what() << '\n';
        return kDataFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kSuccess;
}

}  // namespace panelecm::cli
