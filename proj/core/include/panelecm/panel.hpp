#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace panelecm {

/// Largest lag accepted by a TransformSpec.
inline constexpr int kMaxTransformLag = 4;

enum class Provenance : std::uint8_t { observed, interpolated, missing };

/// One long-format input record. An empty optional marks a missing value.
struct PanelRecord {
    std::string entity;
    int period = 0;
    std::string variable;
    std::optional<double> value;
    std::size_t line = 0;  ///< 1-based source line, 0 when not read from text
};

/// Balanced N x T panel of named variables.
///
/// Cells are stored entity-major. Missing cells hold NaN and carry
/// Provenance::missing. Instances are immutable; every transformation returns a
/// new dataset.
class PanelDataset {
public:
    struct Variable {
        std::vector<double> values;
        std::vector<Provenance> provenance;
    };

    PanelDataset() = default;
    PanelDataset(std::vector<std::string> entities, std::vector<int> periods,
                 std::map<std::string, Variable> variables);

    const std::vector<std::string>& entities() const noexcept { return entities_; }
    const std::vector<int>& periods() const noexcept { return periods_; }
    std::size_t n_entities() const noexcept { return entities_.size(); }
    std::size_t n_periods() const noexcept { return periods_.size(); }

    std::vector<std::string> variable_names() const;
    bool has_variable(const std::string& name) const;

    /// Row of `name` for entity index `entity` (length n_periods, NaN if missing).
    std::span<const double> series(const std::string& name, std::size_t entity) const;
    std::span<const Provenance> provenance(const std::string& name, std::size_t entity) const;

    double value(const std::string& name, std::size_t entity, std::size_t period) const;
    bool is_missing(const std::string& name, std::size_t entity, std::size_t period) const;
    std::size_t missing_count(const std::string& name) const;

    std::size_t entity_index(const std::string& entity) const;
    std::size_t period_index(int period) const;

    /// Copy with `name` added or replaced. `values` is N x T; NaN marks missing.
    PanelDataset with_variable(const std::string& name, const Eigen::MatrixXd& values) const;

    /// Copy with entities reordered; `order[k]` is the old index of new entity k.
    PanelDataset permuted(std::span<const std::size_t> order) const;

    /// N x T matrix view of a variable (copy).
    Eigen::MatrixXd matrix(const std::string& name) const;

    friend bool operator==(const PanelDataset&, const PanelDataset&);

private:
    const Variable& variable(const std::string& name) const;

    std::vector<std::string> entities_;
    std::vector<int> periods_;
    std::map<std::string, Variable> variables_;
};

bool operator==(const PanelDataset::Variable& a, const PanelDataset::Variable& b);

/// Builds a dataset from long-format records. Entities and periods are sorted;
/// cells without a record are missing. Periods must be consecutive integers.
PanelDataset load_panel(std::span<const PanelRecord> rows);

/// Parses delimited text with header `entity,period,variable,value`.
/// Comma or tab delimited (detected from the header); empty value = missing.
std::vector<PanelRecord> parse_long_table(std::istream& in);

/// Parses a wide table `entity,period,<var1>,<var2>,...` into long records.
std::vector<PanelRecord> parse_wide_table(std::istream& in);

enum class TableFormat { long_format, wide_format };

PanelDataset read_panel_file(const std::string& path, TableFormat format = TableFormat::long_format);

/// Writes `entity,period,variable,value` rows at full precision; missing cells
/// have an empty value.
void write_long_table(std::ostream& out, const PanelDataset& ds);

// ---------------------------------------------------------------------------
// Interpolation
// ---------------------------------------------------------------------------

struct InterpolationEntry {
    std::string entity;
    std::string variable;
    int period = 0;
    double filled_value = 0.0;
    int left_anchor_period = 0;
    int right_anchor_period = 0;
    double left_anchor_value = 0.0;
    double right_anchor_value = 0.0;
};

struct InterpolationLog {
    std::vector<InterpolationEntry> entries;
};

struct InterpolationOutcome {
    PanelDataset dataset;
    InterpolationLog log;
};

/// Fills interior missing runs of `variable` by linear interpolation between the
/// nearest observed anchors. Leading or trailing gaps are rejected.
InterpolationOutcome interpolate_missing(const PanelDataset& ds, const std::string& variable);

/// Writes the log grouped per (entity, variable): `entity,variable,years,values`.
void write_interpolation_log(std::ostream& out, const InterpolationLog& log);

// ---------------------------------------------------------------------------
// Transforms and balanced alignment
// ---------------------------------------------------------------------------

enum class Transform { level, first_difference };

struct TransformSpec {
    std::string variable;
    Transform transform = Transform::level;
    int lag = 0;

    /// Periods lost at the start of each entity's series.
    int periods_lost() const noexcept { return (transform == Transform::first_difference ? 1 : 0) + lag; }

    /// Display label, e.g. `D(GINI(-1))`, `UT(-1)`, `D(CPI)`.
    std::string label() const;

    void validate() const;
};

/// Transformed series over its defined period range.
struct DerivedSeries {
    std::string label;
    int first_period = 0;
    int last_period = 0;
    Eigen::MatrixXd values;  ///< N x (last_period - first_period + 1)
};

DerivedSeries apply_transform(const PanelDataset& ds, const TransformSpec& spec);

/// Row layout of a stacked balanced panel: rows are entity-major, then period.
struct SampleDescriptor {
    std::vector<std::string> entities;
    int first_period = 0;
    int last_period = 0;

    std::size_t n_entities() const noexcept { return entities.size(); }
    std::size_t n_periods() const noexcept {
        return last_period >= first_period ? static_cast<std::size_t>(last_period - first_period + 1) : 0;
    }
    std::size_t n_observations() const noexcept { return n_entities() * n_periods(); }
    std::size_t row(std::size_t entity, std::size_t period_offset) const noexcept {
        return entity * n_periods() + period_offset;
    }
};

/// A regressor column: a transformed series or the intercept.
struct Regressor {
    enum class Kind { series, intercept };
    Kind kind = Kind::series;
    TransformSpec spec;

    static Regressor of(TransformSpec s) { return {Kind::series, std::move(s)}; }
    static Regressor intercept() { return {Kind::intercept, {}}; }
    std::string label() const { return kind == Kind::intercept ? "C" : spec.label(); }
};

/// Stacked response and design for a balanced panel regression.
struct PanelDesign {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::string dependent_label;
    std::vector<std::string> names;
    std::optional<std::size_t> intercept_column;
    SampleDescriptor sample;
};

/// Aligns dependent and regressors on the periods where all are defined.
/// `earliest_period`, when set, trims the sample to start no earlier.
PanelDesign align_balanced(const PanelDataset& ds, std::span<const Regressor> regressors,
                           const TransformSpec& dependent, std::optional<int> earliest_period = std::nullopt);

/// Reshapes a stacked vector (sample rows) into an N x T matrix.
Eigen::MatrixXd unstack(const Eigen::VectorXd& stacked, const SampleDescriptor& sample);

}  // namespace panelecm
