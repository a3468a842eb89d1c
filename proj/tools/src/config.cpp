#include "panelecm/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "panelecm/error.hpp"

namespace panelecm::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
    if (!obj.is_object()) throw std::invalid_argument("'" + where + "' must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (!known.count(key)) throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
}

template <class T>
void read(const json& obj, const char* key, T& into) {
    if (obj.contains(key) && !obj.at(key).is_null()) into = obj.at(key).get<T>();
}

template <class T>
void read_optional(const json& obj, const char* key, std::optional<T>& into) {
    if (!obj.contains(key)) return;
    if (obj.at(key).is_null()) {
        into.reset();
    } else {
        into = obj.at(key).get<T>();
    }
}

template <class T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

std::string white_terms_name(WhiteTerms t) {
    return t == WhiteTerms::levels_and_squares ? "levels_and_squares" : "levels_squares_and_cross";
}

WhiteTerms parse_white_terms(const std::string& s) {
    if (s == "levels_and_squares") return WhiteTerms::levels_and_squares;
    if (s == "levels_squares_and_cross") return WhiteTerms::levels_squares_and_cross;
    throw std::invalid_argument("unknown White term set '" + s + "'");
}

}  // namespace

Deterministic parse_deterministic(const std::string& name) {
    if (name == "none") return Deterministic::none;
    if (name == "intercept" || name == "c") return Deterministic::intercept;
    if (name == "intercept_and_trend" || name == "trend" || name == "ct") return Deterministic::intercept_and_trend;
    throw std::invalid_argument("unknown deterministic specification '" + name + "'");
}

TableFormat parse_table_format(const std::string& name) {
    if (name == "long") return TableFormat::long_format;
    if (name == "wide") return TableFormat::wide_format;
    throw std::invalid_argument("unknown table format '" + name + "' (expected long or wide)");
}

void RunConfig::validate() const {
    model.validate();
    if (!(significance > 0.0 && significance <= 0.5)) throw std::invalid_argument("significance must lie in (0, 0.5]");
    if (!(unit_root.significance > 0.0 && unit_root.significance <= 0.5)) {
        throw std::invalid_argument("unit_root.significance must lie in (0, 0.5]");
    }
    if (lag && (*lag < 1 || *lag > kMaxTransformLag)) throw std::invalid_argument("model.lag must lie within 1..4");
    if (!(diagnostics.correlation_threshold > 0.0 && diagnostics.correlation_threshold < 1.0)) {
        throw std::invalid_argument("diagnostics.correlation_threshold must lie in (0, 1)");
    }
}

void RunConfig::check_dataset(const PanelDataset& ds) const {
    std::vector<std::string> needed = model.variables();
    for (const auto& v : interpolate) needed.push_back(v);
    for (const auto& v : unit_root_variables) needed.push_back(v);
    for (const auto& v : needed) {
        if (!ds.has_variable(v)) throw DataError("variable '" + v + "' is not in the dataset");
    }
}

std::vector<std::string> RunConfig::summary_variables() const {
    if (!unit_root_variables.empty()) return unit_root_variables;
    std::vector<std::string> out{model.dependent};
    for (const auto& v : model.long_run_terms)
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return out;
}

EcmOptions RunConfig::ecm_options() const {
    EcmOptions o;
    o.gate = gate;
    o.gate.unit_root = unit_root;
    o.force_gate = force_gate;
    o.lag = lag;
    o.sigma = sigma;
    return o;
}

RunConfig parse_run_config(const json& doc) {
    reject_unknown(doc, {"data", "model", "significance", "interpolate", "unit_root", "gate", "sigma", "diagnostics", "output",
                         "force_gate", "seed", "profile"},
                   "config");
    RunConfig c;
    if (doc.contains("profile")) c = profile(doc.at("profile").get<std::string>());

    if (doc.contains("data")) {
        const auto& d = doc.at("data");
        reject_unknown(d, {"path", "format"}, "data");
        read(d, "path", c.data_path);
        if (d.contains("format")) c.data_format = parse_table_format(d.at("format").get<std::string>());
    }
    if (doc.contains("model")) {
        const auto& m = doc.at("model");
        reject_unknown(m, {"dependent", "long_run_terms", "lagged_difference_terms", "contemporaneous_difference_terms",
                           "include_constant", "min_lag", "max_lag", "lag", "residual_name"},
                       "model");
        read(m, "dependent", c.model.dependent);
        read(m, "long_run_terms", c.model.long_run_terms);
        read(m, "lagged_difference_terms", c.model.lagged_difference_terms);
        read(m, "contemporaneous_difference_terms", c.model.contemporaneous_difference_terms);
        read(m, "include_constant", c.model.include_constant);
        read(m, "min_lag", c.model.min_lag);
        read(m, "max_lag", c.model.max_lag);
        read_optional(m, "lag", c.lag);
        read(m, "residual_name", c.model.residual_name);
    }
    read(doc, "significance", c.significance);
    c.unit_root.significance = c.significance;
    c.diagnostics.significance = c.significance;
    read(doc, "interpolate", c.interpolate);

    if (doc.contains("unit_root")) {
        const auto& u = doc.at("unit_root");
        reject_unknown(u, {"deterministic", "lag_selection", "fixed_lag", "max_lag", "bandwidth", "variables", "significance"},
                       "unit_root");
        if (u.contains("deterministic")) c.unit_root.deterministic = parse_deterministic(u.at("deterministic").get<std::string>());
        if (u.contains("lag_selection")) {
            const auto s = u.at("lag_selection").get<std::string>();
            if (s == "schwarz") {
                c.unit_root.lags.mode = LagSelection::Mode::schwarz;
            } else if (s == "fixed") {
                c.unit_root.lags.mode = LagSelection::Mode::fixed;
            } else {
                throw std::invalid_argument("unit_root.lag_selection must be schwarz or fixed");
            }
        }
        read(u, "fixed_lag", c.unit_root.lags.fixed_lag);
        read_optional(u, "max_lag", c.unit_root.lags.max_lag);
        read_optional(u, "bandwidth", c.unit_root.bandwidth);
        read(u, "variables", c.unit_root_variables);
        read(u, "significance", c.unit_root.significance);
    }
    if (doc.contains("gate")) {
        const auto& g = doc.at("gate");
        reject_unknown(g, {"rule", "test", "deterministic"}, "gate");
        if (g.contains("rule")) {
            const auto r = g.at("rule").get<std::string>();
            if (r == "majority") {
                c.gate.rule = GateConfig::Rule::majority;
            } else if (r == "single_test") {
                c.gate.rule = GateConfig::Rule::single_test;
            } else {
                throw std::invalid_argument("gate.rule must be majority or single_test");
            }
        }
        if (g.contains("test")) c.gate.test = parse_unit_root_test(g.at("test").get<std::string>());
        if (g.contains("deterministic")) c.gate.deterministic = parse_deterministic(g.at("deterministic").get<std::string>());
    }
    if (doc.contains("sigma")) {
        const auto& s = doc.at("sigma");
        reject_unknown(s, {"shrink_to_diagonal"}, "sigma");
        read(s, "shrink_to_diagonal", c.sigma.shrink_to_diagonal);
    }
    if (doc.contains("diagnostics")) {
        const auto& d = doc.at("diagnostics");
        reject_unknown(d, {"correlation_threshold", "white_terms"}, "diagnostics");
        read(d, "correlation_threshold", c.diagnostics.correlation_threshold);
        if (d.contains("white_terms")) c.diagnostics.white_terms = parse_white_terms(d.at("white_terms").get<std::string>());
    }
    if (doc.contains("output")) {
        const auto& o = doc.at("output");
        reject_unknown(o, {"text", "structured", "directory"}, "output");
        read(o, "text", c.output.text);
        read(o, "structured", c.output.structured);
        read(o, "directory", c.output.directory);
    }
    read(doc, "force_gate", c.force_gate);
    read(doc, "seed", c.seed);
    c.validate();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_run_config(doc);
}

json to_json(const RunConfig& c) {
    json lags = c.unit_root.lags.mode == LagSelection::Mode::schwarz ? "schwarz" : "fixed";
    return {
        {"data", {{"path", c.data_path}, {"format", c.data_format == TableFormat::long_format ? "long" : "wide"}}},
        {"model",
         {{"dependent", c.model.dependent},
          {"long_run_terms", c.model.long_run_terms},
          {"lagged_difference_terms", c.model.lagged_difference_terms},
          {"contemporaneous_difference_terms", c.model.contemporaneous_difference_terms},
          {"include_constant", c.model.include_constant},
          {"min_lag", c.model.min_lag},
          {"max_lag", c.model.max_lag},
          {"lag", optional_json(c.lag)},
          {"residual_name", c.model.residual_name}}},
        {"significance", c.significance},
        {"interpolate", c.interpolate},
        {"unit_root",
         {{"deterministic", to_string(c.unit_root.deterministic)},
          {"lag_selection", lags},
          {"fixed_lag", c.unit_root.lags.fixed_lag},
          {"max_lag", optional_json(c.unit_root.lags.max_lag)},
          {"bandwidth", optional_json(c.unit_root.bandwidth)},
          {"variables", c.unit_root_variables},
          {"significance", c.unit_root.significance}}},
        {"gate",
         {{"rule", c.gate.rule == GateConfig::Rule::majority ? "majority" : "single_test"},
          {"test", to_string(c.gate.test)},
          {"deterministic", to_string(c.gate.deterministic)}}},
        {"sigma", {{"shrink_to_diagonal", c.sigma.shrink_to_diagonal}}},
        {"diagnostics",
         {{"correlation_threshold", c.diagnostics.correlation_threshold},
          {"white_terms", white_terms_name(c.diagnostics.white_terms)}}},
        {"output", {{"text", c.output.text}, {"structured", c.output.structured}, {"directory", c.output.directory}}},
        {"force_gate", c.force_gate},
        {"seed", c.seed},
    };
}

std::vector<std::string> profile_names() { return {"eu15-replication"}; }

RunConfig profile(const std::string& name) {
    if (name != "eu15-replication") throw std::invalid_argument("unknown profile '" + name + "'");
    RunConfig c;
    c.data_path = "data/eu15.csv";
    c.data_format = TableFormat::long_format;
    c.model = EcmSpec::replication();
    c.significance = 0.05;
    c.interpolate = {"gini", "creditp"};
    c.unit_root.deterministic = Deterministic::intercept;
    c.unit_root.significance = 0.05;
    c.gate.rule = GateConfig::Rule::majority;
    c.gate.deterministic = Deterministic::intercept;
    c.diagnostics.significance = 0.05;
    return c;
}

}  // namespace panelecm::cli
