#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "panelecm/diagnostics.hpp"
#include "panelecm/ecm.hpp"
#include "panelecm/panel.hpp"
#include "panelecm/unit_root.hpp"

namespace panelecm::cli {

// Structured forms of the pipeline results. Doubles are written with 17
// significant digits, so reading a document back gives identical values.

nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json to_json(const Eigen::MatrixXd& m);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SampleDescriptor& s);
SampleDescriptor sample_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PanelDesign& d);
PanelDesign design_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FitResult& f);
FitResult fit_from_json(const nlohmann::json& j);

nlohmann::json to_json(const UnitRootSummary& s);
nlohmann::json to_json(const GateOutcome& g);

/// Everything diagnose needs, the gate with its deciding block.
nlohmann::json to_json(const EcmResult& r);
EcmResult ecm_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DiagnosticsReport& r);
nlohmann::json to_json(const InterpolationLog& log);

/// Output directory written all-or-nothing: files go to a sibling staging
/// directory which replaces the target on commit(). Without commit() the
/// staging directory is removed and the target is left untouched.
class StagedDirectory {
public:
    explicit StagedDirectory(std::filesystem::path target);
    ~StagedDirectory();
    StagedDirectory(const StagedDirectory&) = delete;
    StagedDirectory& operator=(const StagedDirectory&) = delete;

    std::filesystem::path path(const std::string& file) const { return staging_ / file; }
    void write(const std::string& file, const std::string& contents) const;
    void write_json(const std::string& file, const nlohmann::json& doc) const;
    void commit();

private:
    std::filesystem::path target_;
    std::filesystem::path staging_;
    bool committed_ = false;
};

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace panelecm::cli
