#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace insightd {

enum class FieldKind { categorical, numerical, temporal };

std::string_view to_string(FieldKind kind) noexcept;

struct Missing {
    bool operator==(const Missing&) const = default;
};

/// Seconds since the Unix epoch (UTC). Dates without a time are midnight.
struct Timestamp {
    std::int64_t seconds = 0;

    int year() const noexcept;
    auto operator<=>(const Timestamp&) const = default;
};

using Value = std::variant<Missing, double, std::string, Timestamp>;

inline bool is_missing(const Value& v) noexcept { return std::holds_alternative<Missing>(v); }

/// Text used when a cell participates in a frequency count. Temporal cells
/// count by year; numbers use their shortest round-trip representation.
std::string category_label(const Value& v);

struct Field {
    std::string name;
    FieldKind kind = FieldKind::categorical;
    std::size_t distinct_count = 0;
    std::size_t missing_count = 0;
};

struct Column {
    std::string name;
    FieldKind kind = FieldKind::categorical;
    std::vector<Value> cells;
};

/// Immutable after construction; safe to share across threads.
class Dataset {
public:
    /// Validates that columns have equal length, unique names, and cells that
    /// agree with the declared kind. Field statistics are derived here.
    Dataset(std::string name, std::vector<Column> columns, std::string id = {});

    const std::string& id() const noexcept { return id_; }
    const std::string& name() const noexcept { return name_; }
    std::size_t row_count() const noexcept { return row_count_; }
    const std::vector<Field>& fields() const noexcept { return fields_; }

    /// Throws UnknownField.
    const Field& field(std::string_view name) const;
    std::size_t field_index(std::string_view name) const;
    std::span<const Value> cells(std::string_view name) const;

private:
    std::string id_;
    std::string name_;
    std::size_t row_count_ = 0;
    std::vector<Field> fields_;
    std::vector<std::vector<Value>> cells_;
};

enum class TableFormat { csv, json };

std::optional<TableFormat> parse_table_format(std::string_view text);

struct InferredColumn {
    FieldKind kind = FieldKind::categorical;
    std::vector<Value> values;
};

/// Share of non-missing cells that must parse for a numerical/temporal verdict.
inline constexpr double kParseRatioThreshold = 0.95;

/// Integer-valued numeric columns with at most this many distinct values, and
/// at least kCodeRowsPerLevel rows per distinct value, are category codes.
inline constexpr std::size_t kMaxCodeLevels = 10;
inline constexpr std::size_t kCodeRowsPerLevel = 20;

bool is_missing_token(std::string_view cell) noexcept;
std::optional<double> parse_number(std::string_view cell) noexcept;
std::optional<Timestamp> parse_timestamp(std::string_view cell) noexcept;

InferredColumn infer_field_kind(std::span<const std::string> raw);

/// Throws MalformedInput, EmptyTable or DuplicateHeader.
Dataset parse_table(std::string_view bytes, TableFormat format, std::string name = "dataset");

/// Non-missing values in row order. Throws KindMismatch unless numerical.
std::vector<double> numeric_column(const Dataset& dataset, std::string_view field);

/// Rows where both numerical fields are present (pairwise deletion).
std::vector<std::pair<double, double>> pair_columns(const Dataset& dataset, std::string_view first,
                                                    std::string_view second);

/// Category labels of non-missing cells. Throws KindMismatch for numerical fields.
std::vector<std::string> category_column(const Dataset& dataset, std::string_view field);

/// Row-aligned category labels, dropping rows where either cell is missing.
std::pair<std::vector<std::string>, std::vector<std::string>> category_pairs(
    const Dataset& dataset, std::string_view first, std::string_view second);

/// FNV-1a, 64 bit. Used for dataset ids and per-task seeds.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

}  // namespace insightd
