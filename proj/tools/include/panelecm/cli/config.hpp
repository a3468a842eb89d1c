#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "panelecm/diagnostics.hpp"
#include "panelecm/ecm.hpp"
#include "panelecm/panel.hpp"
#include "panelecm/unit_root.hpp"

namespace panelecm::cli {

struct OutputConfig {
    bool text = true;
    bool structured = true;
    std::string directory;  ///< empty: print only
};

/// Everything one pipeline run needs. Loaded from a JSON document; every key
/// is optional and falls back to the defaults below.
struct RunConfig {
    std::string data_path;
    TableFormat data_format = TableFormat::long_format;
    EcmSpec model = EcmSpec::replication();
    std::optional<int> lag;  ///< fixes the ECM lag instead of searching
    double significance = 0.05;
    std::vector<std::string> interpolate;
    UnitRootConfig unit_root;
    std::vector<std::string> unit_root_variables;  ///< empty: model variables
    GateConfig gate;
    SigmaOptions sigma;
    DiagnosticsConfig diagnostics;
    OutputConfig output;
    bool force_gate = false;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument for out-of-range values.
    void validate() const;

    /// Throws DataError naming the first variable the dataset lacks.
    void check_dataset(const PanelDataset& ds) const;

    /// Variables the unit-root command summarises.
    std::vector<std::string> summary_variables() const;

    EcmOptions ecm_options() const;
};

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);
nlohmann::json to_json(const RunConfig& config);

/// Built-in profiles: "eu15-replication".
RunConfig profile(const std::string& name);
std::vector<std::string> profile_names();

Deterministic parse_deterministic(const std::string& name);
TableFormat parse_table_format(const std::string& name);

}  // namespace panelecm::cli
