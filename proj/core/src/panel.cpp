#include "panelecm/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "panelecm/error.hpp"
#include "text.hpp"

namespace panelecm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// PanelDataset
// ---------------------------------------------------------------------------

PanelDataset::PanelDataset(std::vector<std::string> entities, std::vector<int> periods,
                           std::map<std::string, Variable> variables)
    : entities_(std::move(entities)), periods_(std::move(periods)), variables_(std::move(variables)) {
    if (entities_.empty() || periods_.empty()) {
        throw DataError("panel needs at least one entity and one period");
    }
    for (std::size_t t = 1; t < periods_.size(); ++t) {
        if (periods_[t] != periods_[t - 1] + 1) {
            throw DataError("periods must be consecutive years; gap between " + std::to_string(periods_[t - 1]) +
                            " and " + std::to_string(periods_[t]));
        }
    }
    const std::size_t cells = entities_.size() * periods_.size();
    for (auto& [name, var] : variables_) {
        if (var.values.size() != cells || var.provenance.size() != cells) {
            throw std::invalid_argument("variable '" + name + "' has wrong cell count");
        }
        for (std::size_t c = 0; c < cells; ++c) {
            if (std::isnan(var.values[c])) var.provenance[c] = Provenance::missing;
        }
    }
}

std::vector<std::string> PanelDataset::variable_names() const {
    std::vector<std::string> names;
    names.reserve(variables_.size());
    for (const auto& [name, _] : variables_) names.push_back(name);
    return names;
}

bool PanelDataset::has_variable(const std::string& name) const { return variables_.count(name) != 0; }

const PanelDataset::Variable& PanelDataset::variable(const std::string& name) const {
    auto it = variables_.find(name);
    if (it == variables_.end()) throw DataError("unknown variable '" + name + "'");
    return it->second;
}

std::span<const double> PanelDataset::series(const std::string& name, std::size_t entity) const {
    const auto& v = variable(name);
    return std::span<const double>(v.values).subspan(entity * n_periods(), n_periods());
}

std::span<const Provenance> PanelDataset::provenance(const std::string& name, std::size_t entity) const {
    const auto& v = variable(name);
    return std::span<const Provenance>(v.provenance).subspan(entity * n_periods(), n_periods());
}

double PanelDataset::value(const std::string& name, std::size_t entity, std::size_t period) const {
    return variable(name).values.at(entity * n_periods() + period);
}

bool PanelDataset::is_missing(const std::string& name, std::size_t entity, std::size_t period) const {
    return variable(name).provenance.at(entity * n_periods() + period) == Provenance::missing;
}

std::size_t PanelDataset::missing_count(const std::string& name) const {
    const auto& p = variable(name).provenance;
    return static_cast<std::size_t>(std::count(p.begin(), p.end(), Provenance::missing));
}

std::size_t PanelDataset::entity_index(const std::string& entity) const {
    auto it = std::find(entities_.begin(), entities_.end(), entity);
    if (it == entities_.end()) throw DataError("unknown entity '" + entity + "'");
    return static_cast<std::size_t>(it - entities_.begin());
}

std::size_t PanelDataset::period_index(int period) const {
    if (period < periods_.front() || period > periods_.back()) {
        throw DataError("period " + std::to_string(period) + " outside panel range");
    }
    return static_cast<std::size_t>(period - periods_.front());
}

PanelDataset PanelDataset::with_variable(const std::string& name, const Eigen::MatrixXd& values) const {
    if (static_cast<std::size_t>(values.rows()) != n_entities() ||
        static_cast<std::size_t>(values.cols()) != n_periods()) {
        throw std::invalid_argument("with_variable: expected " + std::to_string(n_entities()) + " x " +
                                    std::to_string(n_periods()) + " values for '" + name + "'");
    }
    auto vars = variables_;
    Variable var;
    var.values.resize(n_entities() * n_periods());
    var.provenance.assign(var.values.size(), Provenance::observed);
    for (std::size_t i = 0; i < n_entities(); ++i) {
        for (std::size_t t = 0; t < n_periods(); ++t) {
            var.values[i * n_periods() + t] = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t));
        }
    }
    vars[name] = std::move(var);
    return PanelDataset(entities_, periods_, std::move(vars));
}

PanelDataset PanelDataset::permuted(std::span<const std::size_t> order) const {
    if (order.size() != n_entities()) throw std::invalid_argument("permuted: order size mismatch");
    std::vector<std::string> ents;
    ents.reserve(order.size());
    for (auto k : order) ents.push_back(entities_.at(k));
    std::map<std::string, Variable> vars;
    const std::size_t T = n_periods();
    for (const auto& [name, var] : variables_) {
        Variable out;
        out.values.resize(var.values.size());
        out.provenance.resize(var.provenance.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            std::copy_n(var.values.begin() + static_cast<std::ptrdiff_t>(order[i] * T), T,
                        out.values.begin() + static_cast<std::ptrdiff_t>(i * T));
            std::copy_n(var.provenance.begin() + static_cast<std::ptrdiff_t>(order[i] * T), T,
                        out.provenance.begin() + static_cast<std::ptrdiff_t>(i * T));
        }
        vars.emplace(name, std::move(out));
    }
    return PanelDataset(std::move(ents), periods_, std::move(vars));
}

Eigen::MatrixXd PanelDataset::matrix(const std::string& name) const {
    const auto& v = variable(name);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n_entities()), static_cast<Eigen::Index>(n_periods()));
    for (std::size_t i = 0; i < n_entities(); ++i)
        for (std::size_t t = 0; t < n_periods(); ++t)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = v.values[i * n_periods() + t];
    return m;
}

bool operator==(const PanelDataset::Variable& a, const PanelDataset::Variable& b) {
    if (a.values.size() != b.values.size() || a.provenance != b.provenance) return false;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double x = a.values[i];
        const double y = b.values[i];
        if (!(x == y || (std::isnan(x) && std::isnan(y)))) return false;
    }
    return true;
}

bool operator==(const PanelDataset& a, const PanelDataset& b) {
    return a.entities_ == b.entities_ && a.periods_ == b.periods_ && a.variables_ == b.variables_;
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

PanelDataset load_panel(std::span<const PanelRecord> rows) {
    if (rows.empty()) throw DataError("no records to load");

    std::set<std::string> entity_set;
    std::set<int> period_set;
    std::set<std::string> variable_set;
    std::map<std::tuple<std::string, int, std::string>, std::size_t> seen;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.entity.empty()) throw DataError("empty entity identifier at row " + std::to_string(row.line ? row.line : r + 1));
        if (row.variable.empty()) throw DataError("empty variable name at row " + std::to_string(row.line ? row.line : r + 1));
        auto key = std::make_tuple(row.entity, row.period, row.variable);
        auto [it, inserted] = seen.emplace(key, r);
        if (!inserted) {
            throw DataError("duplicate key (" + row.entity + ", " + std::to_string(row.period) + ", " + row.variable +
                            ")");
        }
        entity_set.insert(row.entity);
        period_set.insert(row.period);
        variable_set.insert(row.variable);
    }

    std::vector<std::string> entities(entity_set.begin(), entity_set.end());
    const int first = *period_set.begin();
    const int last = *period_set.rbegin();
    std::vector<int> periods(static_cast<std::size_t>(last - first + 1));
    std::iota(periods.begin(), periods.end(), first);
    if (periods.size() != period_set.size()) {
        for (int p = first; p <= last; ++p) {
            if (!period_set.count(p)) throw DataError("no records for period " + std::to_string(p) + " (periods must be consecutive)");
        }
    }

    const std::size_t T = periods.size();
    std::map<std::string, PanelDataset::Variable> vars;
    for (const auto& name : variable_set) {
        PanelDataset::Variable v;
        v.values.assign(entities.size() * T, kNaN);
        v.provenance.assign(entities.size() * T, Provenance::missing);
        vars.emplace(name, std::move(v));
    }
    for (const auto& row : rows) {
        const auto e = static_cast<std::size_t>(std::lower_bound(entities.begin(), entities.end(), row.entity) - entities.begin());
        const auto t = static_cast<std::size_t>(row.period - first);
        if (row.value) {
            if (!std::isfinite(*row.value)) {
                throw DataError("non-finite value at row " + std::to_string(row.line));
            }
            auto& v = vars.at(row.variable);
            v.values[e * T + t] = *row.value;
            v.provenance[e * T + t] = Provenance::observed;
        }
    }
    return PanelDataset(std::move(entities), std::move(periods), std::move(vars));
}

namespace {

int parse_period(const std::string& field, std::size_t line) {
    int out = 0;
    const auto trimmed = detail::trim(field);
    auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), out);
    if (ec != std::errc() || ptr != trimmed.data() + trimmed.size()) {
        throw DataError("non-integer period '" + trimmed + "' at row " + std::to_string(line));
    }
    return out;
}

std::optional<double> parse_value(const std::string& field, std::size_t line) {
    const auto trimmed = detail::trim(field);
    if (trimmed.empty()) return std::nullopt;
    auto v = detail::parse_double(trimmed);
    if (!v) throw DataError("non-numeric value '" + trimmed + "' at row " + std::to_string(line));
    return v;
}

}  // namespace

std::vector<PanelRecord> parse_long_table(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    char delim = ',';
    bool have_header = false;
    std::vector<PanelRecord> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (detail::trim(line).empty()) continue;
        if (!have_header) {
            delim = detail::detect_delimiter(line);
            auto header = detail::split_fields(line, delim);
            for (auto& h : header) h = detail::lower(detail::trim(h));
            if (header != std::vector<std::string>{"entity", "period", "variable", "value"}) {
                throw DataError("expected header 'entity,period,variable,value' at row " + std::to_string(line_no));
            }
            have_header = true;
            continue;
        }
        auto fields = detail::split_fields(line, delim);
        if (fields.size() != 4) {
            throw DataError("expected 4 fields at row " + std::to_string(line_no) + ", found " +
                            std::to_string(fields.size()));
        }
        PanelRecord rec;
        rec.entity = detail::trim(fields[0]);
        rec.period = parse_period(fields[1], line_no);
        rec.variable = detail::trim(fields[2]);
        rec.value = parse_value(fields[3], line_no);
        rec.line = line_no;
        rows.push_back(std::move(rec));
    }
    if (!have_header) throw DataError("empty input: missing header row");
    return rows;
}

std::vector<PanelRecord> parse_wide_table(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    char delim = ',';
    std::vector<std::string> header;
    std::vector<PanelRecord> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (detail::trim(line).empty()) continue;
        if (header.empty()) {
            delim = detail::detect_delimiter(line);
            header = detail::split_fields(line, delim);
            for (auto& h : header) h = detail::trim(h);
            if (header.size() < 3 || detail::lower(header[0]) != "entity" || detail::lower(header[1]) != "period") {
                throw DataError("wide header must start with 'entity,period' and name at least one variable");
            }
            continue;
        }
        auto fields = detail::split_fields(line, delim);
        if (fields.size() != header.size()) {
            throw DataError("expected " + std::to_string(header.size()) + " fields at row " + std::to_string(line_no));
        }
        const auto entity = detail::trim(fields[0]);
        const int period = parse_period(fields[1], line_no);
        for (std::size_t c = 2; c < fields.size(); ++c) {
            rows.push_back(PanelRecord{entity, period, header[c], parse_value(fields[c], line_no), line_no});
        }
    }
    if (header.empty()) throw DataError("empty input: missing header row");
    return rows;
}

PanelDataset read_panel_file(const std::string& path, TableFormat format) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file '" + path + "'");
    auto rows = format == TableFormat::long_format ? parse_long_table(in) : parse_wide_table(in);
    return load_panel(rows);
}

void write_long_table(std::ostream& out, const PanelDataset& ds) {
    const auto precision = out.precision(17);
    out << "entity,period,variable,value\n";
    for (std::size_t i = 0; i < ds.n_entities(); ++i) {
        for (std::size_t t = 0; t < ds.n_periods(); ++t) {
            for (const auto& v : ds.variable_names()) {
                out << detail::quote_field(ds.entities()[i]) << ',' << ds.periods()[t] << ',' << detail::quote_field(v) << ',';
                if (!ds.is_missing(v, i, t)) out << ds.value(v, i, t);
                out << '\n';
            }
        }
    }
    out.precision(precision);
}

// ---------------------------------------------------------------------------
// Interpolation
// ---------------------------------------------------------------------------

InterpolationOutcome interpolate_missing(const PanelDataset& ds, const std::string& variable) {
    const std::size_t N = ds.n_entities();
    const std::size_t T = ds.n_periods();
    const auto& periods = ds.periods();

    Eigen::MatrixXd values = ds.matrix(variable);
    std::vector<std::vector<Provenance>> prov(N);
    InterpolationLog log;

    for (std::size_t i = 0; i < N; ++i) {
        auto p = ds.provenance(variable, i);
        prov[i].assign(p.begin(), p.end());
        const auto ei = static_cast<Eigen::Index>(i);
        std::size_t t = 0;
        while (t < T) {
            if (prov[i][t] != Provenance::missing) {
                ++t;
                continue;
            }
            std::size_t end = t;
            while (end < T && prov[i][end] == Provenance::missing) ++end;
            if (t == 0) {
                throw DataError("cannot interpolate '" + variable + "' for " + ds.entities()[i] +
                                ": missing at series start (" + std::to_string(periods.front()) + ")");
            }
            if (end == T) {
                throw DataError("cannot interpolate '" + variable + "' for " + ds.entities()[i] +
                                ": missing at series end (" + std::to_string(periods.back()) + ")");
            }
            const std::size_t left = t - 1;
            const std::size_t right = end;
            const double v0 = values(ei, static_cast<Eigen::Index>(left));
            const double v1 = values(ei, static_cast<Eigen::Index>(right));
            const int t0 = periods[left];
            const int t1 = periods[right];
            for (std::size_t k = t; k < end; ++k) {
                const int step = periods[k] - t0;
                const double filled = v0 + static_cast<double>(step) * (v1 - v0) / static_cast<double>(t1 - t0);
                values(ei, static_cast<Eigen::Index>(k)) = filled;
                prov[i][k] = Provenance::interpolated;
                log.entries.push_back({ds.entities()[i], variable, periods[k], filled, t0, t1, v0, v1});
            }
            t = end;
        }
    }

    PanelDataset filled = ds.with_variable(variable, values);
    // Restore provenance: with_variable marks every cell observed.
    std::map<std::string, PanelDataset::Variable> vars;
    for (const auto& name : filled.variable_names()) {
        PanelDataset::Variable v;
        v.values.reserve(N * T);
        v.provenance.reserve(N * T);
        for (std::size_t i = 0; i < N; ++i) {
            auto s = filled.series(name, i);
            v.values.insert(v.values.end(), s.begin(), s.end());
            if (name == variable) {
                v.provenance.insert(v.provenance.end(), prov[i].begin(), prov[i].end());
            } else {
                auto pr = filled.provenance(name, i);
                v.provenance.insert(v.provenance.end(), pr.begin(), pr.end());
            }
        }
        vars.emplace(name, std::move(v));
    }
    return {PanelDataset(ds.entities(), ds.periods(), std::move(vars)), std::move(log)};
}

void write_interpolation_log(std::ostream& out, const InterpolationLog& log) {
    out << "entity,variable,years,values\n";
    std::size_t k = 0;
    const auto& e = log.entries;
    while (k < e.size()) {
        std::size_t end = k;
        std::ostringstream years;
        std::ostringstream values;
        values << std::fixed << std::setprecision(2);
        while (end < e.size() && e[end].entity == e[k].entity && e[end].variable == e[k].variable) {
            if (end > k) {
                years << ", ";
                values << ", ";
            }
            years << e[end].period;
            values << e[end].filled_value;
            ++end;
        }
        out << detail::quote_field(e[k].entity) << ',' << detail::quote_field(e[k].variable) << ','
            << detail::quote_field(years.str()) << ',' << detail::quote_field(values.str()) << '\n';
        k = end;
    }
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

std::string TransformSpec::label() const {
    std::string base = upper(variable);
    if (lag > 0) base += "(-" + std::to_string(lag) + ")";
    return transform == Transform::first_difference ? "D(" + base + ")" : base;
}

void TransformSpec::validate() const {
    if (variable.empty()) throw std::invalid_argument("transform spec without variable");
    if (lag < 0 || lag > kMaxTransformLag) {
        throw std::invalid_argument("lag " + std::to_string(lag) + " for '" + variable + "' outside 0.." +
                                    std::to_string(kMaxTransformLag));
    }
}

DerivedSeries apply_transform(const PanelDataset& ds, const TransformSpec& spec) {
    spec.validate();
    if (!ds.has_variable(spec.variable)) throw DataError("unknown variable '" + spec.variable + "'");
    const auto T = static_cast<int>(ds.n_periods());
    const int loss = spec.periods_lost();
    if (loss >= T) {
        throw DataError("transform " + spec.label() + " needs more than " + std::to_string(T) + " periods");
    }
    const int len = T - loss;
    const auto N = static_cast<Eigen::Index>(ds.n_entities());
    DerivedSeries out;
    out.label = spec.label();
    out.first_period = ds.periods().front() + loss;
    out.last_period = ds.periods().back();
    out.values.resize(N, len);
    const bool diff = spec.transform == Transform::first_difference;
    for (Eigen::Index i = 0; i < N; ++i) {
        auto s = ds.series(spec.variable, static_cast<std::size_t>(i));
        for (int k = 0; k < len; ++k) {
            const int t = k + loss;       // index of the output period
            const int src = t - spec.lag;  // source period after lagging
            double v = diff ? s[static_cast<std::size_t>(src)] - s[static_cast<std::size_t>(src - 1)]
                            : s[static_cast<std::size_t>(src)];
            if (std::isnan(v)) {
                throw DataError("missing value in '" + spec.variable + "' for " + ds.entities()[static_cast<std::size_t>(i)] +
                                " near " + std::to_string(ds.periods()[static_cast<std::size_t>(src)]) +
                                " (interpolate first)");
            }
            out.values(i, k) = v;
        }
    }
    return out;
}

PanelDesign align_balanced(const PanelDataset& ds, std::span<const Regressor> regressors,
                           const TransformSpec& dependent, std::optional<int> earliest_period) {
    std::vector<DerivedSeries> cols;
    DerivedSeries dep = apply_transform(ds, dependent);
    int first = dep.first_period;
    const int last = ds.periods().back();
    for (const auto& r : regressors) {
        if (r.kind == Regressor::Kind::series) {
            cols.push_back(apply_transform(ds, r.spec));
            first = std::max(first, cols.back().first_period);
        }
    }
    if (earliest_period) first = std::max(first, *earliest_period);
    if (first > last) throw DataError("no period where the dependent and all regressors are defined");

    PanelDesign d;
    d.sample.entities = ds.entities();
    d.sample.first_period = first;
    d.sample.last_period = last;
    d.dependent_label = dep.label;
    const auto N = static_cast<Eigen::Index>(ds.n_entities());
    const auto Ts = static_cast<Eigen::Index>(last - first + 1);
    const Eigen::Index n = N * Ts;
    d.y.resize(n);
    d.X.resize(n, static_cast<Eigen::Index>(regressors.size()));
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index t = 0; t < Ts; ++t) d.y(i * Ts + t) = dep.values(i, t + (first - dep.first_period));

    std::size_t series_k = 0;
    for (std::size_t c = 0; c < regressors.size(); ++c) {
        const auto col = static_cast<Eigen::Index>(c);
        d.names.push_back(regressors[c].label());
        if (regressors[c].kind == Regressor::Kind::intercept) {
            if (d.intercept_column) throw std::invalid_argument("more than one intercept regressor");
            d.intercept_column = c;
            d.X.col(col).setOnes();
            continue;
        }
        const auto& s = cols[series_k++];
        for (Eigen::Index i = 0; i < N; ++i)
            for (Eigen::Index t = 0; t < Ts; ++t) d.X(i * Ts + t, col) = s.values(i, t + (first - s.first_period));
    }
    return d;
}

Eigen::MatrixXd unstack(const Eigen::VectorXd& stacked, const SampleDescriptor& sample) {
    const auto N = static_cast<Eigen::Index>(sample.n_entities());
    const auto T = static_cast<Eigen::Index>(sample.n_periods());
    if (stacked.size() != N * T) throw std::invalid_argument("unstack: length does not match sample");
    Eigen::MatrixXd m(N, T);
    for (Eigen::Index i = 0; i < N; ++i) m.row(i) = stacked.segment(i * T, T).transpose();
    return m;
}

}  // namespace panelecm
