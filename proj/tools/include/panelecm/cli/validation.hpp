#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace panelecm::cli {

struct OracleResult {
    std::string name;
    std::string target;  ///< human-readable acceptance band
    std::size_t replications = 0;
    double estimate = 0.0;
    double lower = 0.0;  ///< 95% interval of the estimate
    double upper = 0.0;
    bool passed = false;
};

/// Suites: "quick" (short series, a few seconds) and "full" (the sizes used by
/// the acceptance suite). `replications` = 0 picks the suite default.
std::vector<OracleResult> run_oracle_suite(const std::string& suite, std::size_t replications, std::uint64_t seed);
std::vector<std::string> oracle_suite_names();

void render_oracle_table(std::ostream& out, const std::vector<OracleResult>& rows);
nlohmann::json to_json(const std::vector<OracleResult>& rows);

}  // namespace panelecm::cli
