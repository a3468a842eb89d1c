#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "panelecm/ecm.hpp"
#include "panelecm/panel.hpp"

namespace panelecm::cli {

struct DatasetSummary {
    std::size_t n_entities = 0;
    std::size_t n_periods = 0;
    int first_period = 0;
    int last_period = 0;
    std::vector<std::string> entities;
    std::vector<std::string> variables;
    std::map<std::string, std::size_t> missing;  ///< missing cells per variable
    std::size_t total_missing = 0;
};

DatasetSummary summarize_dataset(const PanelDataset& ds);
void render_dataset_summary(std::ostream& out, const DatasetSummary& s);
nlohmann::json to_json(const DatasetSummary& s);

/// Header, coefficient table (6 decimals, probability 4) and weighted
/// statistics of the short-run fit, preceded by a banner when the gate was
/// overridden.
void render_estimation(std::ostream& out, const EcmResult& r);

/// Long-run regression, gate verdict and lag search.
void render_first_stage(std::ostream& out, const EcmResult& r);

inline constexpr const char* kGateOverriddenBanner =
    "*** GATE-OVERRIDDEN: the long-run residual did not pass the stationarity gate; "
    "estimates below may be spurious ***";

}  // namespace panelecm::cli
