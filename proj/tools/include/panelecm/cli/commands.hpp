#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "panelecm/cli/config.hpp"
#include "panelecm/ecm.hpp"
#include "panelecm/panel.hpp"
#include "panelecm/simulation.hpp"

namespace panelecm::cli {

/// Process exit codes.
enum ExitCode : int {
    kSuccess = 0,
    kFailure = 1,       ///< invalid arguments, configuration or I/O
    kDataFailure = 2,   ///< malformed data or numerical failure
    kGateFailure = 3,   ///< cointegration gate failed without override
};

enum class OutputFormat { text, json };

/// Dataset after the configured interpolation, with the fill log.
struct PreparedData {
    PanelDataset dataset;
    InterpolationLog log;
};

/// Reads config.data_path, validates every referenced variable and fills the
/// `interpolate` variables.
PreparedData prepare_data(const RunConfig& config);

/// Each command prints to `out` and, when config.output.directory is set,
/// writes its artifacts there all-or-nothing. They throw on error.
void cmd_ingest(const std::string& path, TableFormat format, OutputFormat fmt, const std::string& out_dir, std::ostream& out);
void cmd_interpolate(const RunConfig& config, OutputFormat fmt, std::ostream& out);
void cmd_unitroot(const RunConfig& config, OutputFormat fmt, std::ostream& out);

/// Full estimation. Throws GateNotPassedError, after printing the gate
/// outcome, when the gate fails and config.force_gate is off.
EcmResult cmd_estimate(const RunConfig& config, OutputFormat fmt, std::ostream& out);

/// Diagnoses a prior run directory when `run_dir` is set, otherwise estimates
/// from `config` first.
void cmd_diagnose(const RunConfig& config, const std::optional<std::string>& run_dir, OutputFormat fmt, std::ostream& out);

void cmd_validate(const std::string& suite, std::size_t replications, std::uint64_t seed, OutputFormat fmt,
                  const std::string& out_dir, std::ostream& out);

/// Writes a synthetic dataset (long format) to `out`, or to data.csv in
/// `out_dir` when set.
void cmd_simulate(const DgpSpec& spec, const std::string& out_dir, std::ostream& out);

/// Runs the CLI on argv; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace panelecm::cli
