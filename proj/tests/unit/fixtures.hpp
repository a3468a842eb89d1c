#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "panelecm/panel.hpp"

namespace fixtures {

inline std::vector<std::string> names(std::size_t n, const std::string& prefix = "E") {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + (i < 9 ? "0" : "") + std::to_string(i + 1));
    return out;
}

/// Complete dataset from N x T matrices.
inline panelecm::PanelDataset dataset(const std::vector<std::pair<std::string, Eigen::MatrixXd>>& vars, int first_period = 1995) {
    const auto N = static_cast<std::size_t>(vars.front().second.rows());
    const auto T = static_cast<std::size_t>(vars.front().second.cols());
    std::vector<int> periods(T);
    for (std::size_t t = 0; t < T; ++t) periods[t] = first_period + static_cast<int>(t);
    std::map<std::string, panelecm::PanelDataset::Variable> m;
    for (const auto& [name, mat] : vars) {
        panelecm::PanelDataset::Variable v;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t t = 0; t < T; ++t) v.values.push_back(mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)));
        v.provenance.assign(v.values.size(), panelecm::Provenance::observed);
        m.emplace(name, std::move(v));
    }
    return panelecm::PanelDataset(names(N), std::move(periods), std::move(m));
}

/// Long records of one variable for one entity; NaN entries become missing.
inline std::vector<panelecm::PanelRecord> records(const std::string& entity, const std::string& variable, int first_period,
                                                  const std::vector<double>& values) {
    std::vector<panelecm::PanelRecord> out;
    for (std::size_t t = 0; t < values.size(); ++t) {
        panelecm::PanelRecord r;
        r.entity = entity;
        r.period = first_period + static_cast<int>(t);
        r.variable = variable;
        if (values[t] == values[t]) r.value = values[t];
        out.push_back(r);
    }
    return out;
}

}  // namespace fixtures
