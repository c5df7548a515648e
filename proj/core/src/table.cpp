#include "insightd/table.hpp"

#include "insightd/error.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace insightd {

std::string_view to_string(FieldKind kind) noexcept {
    switch (kind) {
        case FieldKind::categorical: return "categorical";
        case FieldKind::numerical: return "numerical";
        case FieldKind::temporal: return "temporal";
    }
    return "categorical";
}

int Timestamp::year() const noexcept {
    using namespace std::chrono;
    const auto days = floor<std::chrono::days>(sys_seconds{std::chrono::seconds{seconds}});
    return static_cast<int>(year_month_day{days}.year());
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis) noexcept {
    std::uint64_t hash = basis;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string category_label(const Value& v) {
    struct Visitor {
        std::string operator()(const Missing&) const { return {}; }
        std::string operator()(double d) const { return fmt::format("{}", d); }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(const Timestamp& t) const { return std::to_string(t.year()); }
    };
    return std::visit(Visitor{}, v);
}

namespace {

std::string_view trim(std::string_view s) noexcept {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool iequals(std::string_view a, std::string_view b) noexcept {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

bool parse_digits(std::string_view s, int& out) noexcept {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() &&
           std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

bool is_missing_token(std::string_view cell) noexcept {
    const auto t = trim(cell);
    return t.empty() || iequals(t, "na") || iequals(t, "null");
}

std::optional<double> parse_number(std::string_view cell) noexcept {
    auto t = trim(cell);
    if (t.empty()) return std::nullopt;
    if (t.front() == '+') t.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::optional<Timestamp> parse_timestamp(std::string_view cell) noexcept {
    using namespace std::chrono;
    const auto t = trim(cell);
    int y = 0;
    if (t.size() == 4) {
        if (!parse_digits(t, y) || y < 1000 || y > 3000) return std::nullopt;
        const sys_days day{year{y} / January / 1};
        return Timestamp{duration_cast<seconds>(day.time_since_epoch()).count()};
    }
    // YYYY-MM-DD with an optional [T ]HH:MM[:SS[.fff]][Z] suffix.
    if (t.size() < 10 || t[4] != '-' || t[7] != '-') return std::nullopt;
    int m = 0, d = 0;
    if (!parse_digits(t.substr(0, 4), y) || !parse_digits(t.substr(5, 2), m) ||
        !parse_digits(t.substr(8, 2), d))
        return std::nullopt;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    std::int64_t secs = duration_cast<seconds>(sys_days{ymd}.time_since_epoch()).count();
    auto rest = t.substr(10);
    if (!rest.empty()) {
        if (rest.front() != 'T' && rest.front() != ' ') return std::nullopt;
        rest.remove_prefix(1);
        if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
        int hh = 0, mm = 0, ss = 0;
        if (rest.size() < 5 || rest[2] != ':' || !parse_digits(rest.substr(0, 2), hh) ||
            !parse_digits(rest.substr(3, 2), mm) || hh > 23 || mm > 59)
            return std::nullopt;
        rest.remove_prefix(5);
        if (!rest.empty()) {
            if (rest.size() < 3 || rest[0] != ':' || !parse_digits(rest.substr(1, 2), ss) || ss > 60)
                return std::nullopt;
            rest.remove_prefix(3);
            if (!rest.empty()) {
                if (rest[0] != '.' || !std::all_of(rest.begin() + 1, rest.end(), [](char c) {
                        return c >= '0' && c <= '9';
                    }))
                    return std::nullopt;
            }
        }
        secs += hh * 3600 + mm * 60 + ss;
    }
    return Timestamp{secs};
}

InferredColumn infer_field_kind(std::span<const std::string> raw) {
    std::size_t present = 0;
    std::size_t numeric = 0;
    std::size_t temporal = 0;
    for (const auto& cell : raw) {
        if (is_missing_token(cell)) continue;
        ++present;
        if (parse_number(cell)) ++numeric;
        if (parse_timestamp(cell)) ++temporal;
    }

    InferredColumn out;
    out.values.reserve(raw.size());
    const auto passes = [&](std::size_t hits) {
        return hits > 0 && static_cast<double>(hits) >= kParseRatioThreshold * static_cast<double>(present);
    };

    if (passes(numeric)) {
        std::set<double> levels;
        bool integral = true;
        for (const auto& cell : raw) {
            if (is_missing_token(cell)) {
                out.values.emplace_back(Missing{});
                continue;
            }
            if (auto v = parse_number(cell)) {
                out.values.emplace_back(*v);
                integral = integral && std::trunc(*v) == *v;
                if (levels.size() <= kMaxCodeLevels) levels.insert(*v);
            } else {
                out.values.emplace_back(Missing{});
            }
        }
        const bool code_like = integral && levels.size() <= kMaxCodeLevels &&
                               numeric >= kCodeRowsPerLevel * levels.size();
        if (!code_like) {
            out.kind = FieldKind::numerical;
            return out;
        }
        out.values.clear();
        for (const auto& cell : raw) {
            if (is_missing_token(cell)) {
                out.values.emplace_back(Missing{});
            } else if (auto v = parse_number(cell)) {
                out.values.emplace_back(fmt::format("{}", *v));
            } else {
                out.values.emplace_back(std::string(trim(cell)));
            }
        }
        out.kind = FieldKind::categorical;
        return out;
    }

    if (passes(temporal)) {
        out.kind = FieldKind::temporal;
        for (const auto& cell : raw) {
            auto ts = is_missing_token(cell) ? std::nullopt : parse_timestamp(cell);
            if (ts)
                out.values.emplace_back(*ts);
            else
                out.values.emplace_back(Missing{});
        }
        return out;
    }

    out.kind = FieldKind::categorical;
    for (const auto& cell : raw) {
        if (is_missing_token(cell))
            out.values.emplace_back(Missing{});
        else
            out.values.emplace_back(std::string(cell));
    }
    return out;
}

Dataset::Dataset(std::string name, std::vector<Column> columns, std::string id)
    : id_(std::move(id)), name_(std::move(name)) {
    row_count_ = columns.empty() ? 0 : columns.front().cells.size();
    std::unordered_set<std::string> seen;
    for (auto& column : columns) {
        if (!seen.insert(column.name).second)
            throw Error(ErrorCode::DuplicateHeader, "field '" + column.name + "' appears twice");
        if (column.cells.size() != row_count_)
            throw Error(ErrorCode::MalformedInput, "column '" + column.name + "' has " +
                                                       std::to_string(column.cells.size()) + " cells, expected " +
                                                       std::to_string(row_count_));
        Field field{column.name, column.kind, 0, 0};
        std::set<std::string> distinct;
        for (const auto& cell : column.cells) {
            if (is_missing(cell)) {
                ++field.missing_count;
                continue;
            }
            const bool ok = (column.kind == FieldKind::numerical && std::holds_alternative<double>(cell)) ||
                            (column.kind == FieldKind::temporal && std::holds_alternative<Timestamp>(cell)) ||
                            (column.kind == FieldKind::categorical && std::holds_alternative<std::string>(cell));
            if (!ok)
                throw Error(ErrorCode::KindMismatch,
                            "cell in '" + column.name + "' does not match kind " + std::string(to_string(column.kind)));
            // Temporal distinctness is by exact instant, not by year.
            if (column.kind == FieldKind::temporal)
                distinct.insert(std::to_string(std::get<Timestamp>(cell).seconds));
            else
                distinct.insert(category_label(cell));
        }
        field.distinct_count = distinct.size();
        fields_.push_back(std::move(field));
        cells_.push_back(std::move(column.cells));
    }
    if (id_.empty()) {
        std::uint64_t h = fnv1a(name_);
        for (const auto& f : fields_) h = fnv1a(f.name, h);
        h = fnv1a(std::to_string(row_count_), h);
        id_ = fmt::format("{:016x}", h);
    }
}

std::size_t Dataset::field_index(std::string_view name) const {
    for (std::size_t i = 0; i < fields_.size(); ++i)
        if (fields_[i].name == name) return i;
    throw Error(ErrorCode::UnknownField, "no field named '" + std::string(name) + "'");
}

const Field& Dataset::field(std::string_view name) const { return fields_[field_index(name)]; }

std::span<const Value> Dataset::cells(std::string_view name) const { return cells_[field_index(name)]; }

std::optional<TableFormat> parse_table_format(std::string_view text) {
    if (iequals(text, "csv")) return TableFormat::csv;
    if (iequals(text, "json")) return TableFormat::json;
    return std::nullopt;
}

namespace {

using Row = std::vector<std::string>;

// RFC 4180 records; accepts LF or CRLF line endings.
std::vector<Row> read_csv_records(std::string_view bytes) {
    std::vector<Row> records;
    Row row;
    std::string cell;
    bool quoted = false;
    bool cell_was_quoted = false;
    std::size_t line = 1;

    const auto end_cell = [&] {
        row.push_back(std::move(cell));
        cell.clear();
        cell_was_quoted = false;
    };
    const auto end_row = [&] {
        end_cell();
        const bool blank = row.size() == 1 && row.front().empty();
        if (!blank) records.push_back(std::move(row));
        row.clear();
    };

    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const char c = bytes[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < bytes.size() && bytes[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                cell.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!cell.empty() || cell_was_quoted)
                    throw Error(ErrorCode::MalformedInput, fmt::format("stray quote on line {}", line));
                quoted = true;
                cell_was_quoted = true;
                break;
            case ',':
                end_cell();
                break;
            case '\r':
                if (i + 1 < bytes.size() && bytes[i + 1] == '\n') break;
                end_row();
                ++line;
                break;
            case '\n':
                end_row();
                ++line;
                break;
            default:
                if (cell_was_quoted)
                    throw Error(ErrorCode::MalformedInput,
                                fmt::format("text after closing quote on line {}", line));
                cell.push_back(c);
        }
    }
    if (quoted) throw Error(ErrorCode::MalformedInput, "unterminated quoted field");
    if (!cell.empty() || !row.empty() || cell_was_quoted) end_row();
    return records;
}

Dataset build_dataset(std::string name, std::string id, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& columns_raw) {
    std::unordered_set<std::string_view> seen;
    for (const auto& h : header)
        if (!seen.insert(h).second) throw Error(ErrorCode::DuplicateHeader, "field '" + h + "' appears twice");

    std::vector<Column> columns;
    columns.reserve(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        auto inferred = infer_field_kind(columns_raw[c]);
        columns.push_back(Column{header[c], inferred.kind, std::move(inferred.values)});
    }
    return Dataset(std::move(name), std::move(columns), std::move(id));
}

Dataset parse_csv(std::string_view bytes, std::string name, std::string id) {
    if (bytes.size() >= 3 && bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);
    auto records = read_csv_records(bytes);
    if (records.empty()) throw Error(ErrorCode::MalformedInput, "no header row");
    const Row header = std::move(records.front());
    for (const auto& h : header)
        if (trim(h).empty()) throw Error(ErrorCode::MalformedInput, "empty column name in header");
    if (records.size() == 1) throw Error(ErrorCode::EmptyTable, "header present but no data rows");

    std::vector<std::vector<std::string>> columns(header.size());
    for (auto& c : columns) c.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        auto& record = records[r];
        if (record.size() != header.size())
            throw Error(ErrorCode::MalformedInput, fmt::format("record {} has {} fields, header has {}", r,
                                                               record.size(), header.size()));
        for (std::size_t c = 0; c < header.size(); ++c) columns[c].push_back(std::move(record[c]));
    }
    return build_dataset(std::move(name), std::move(id), header, columns);
}

std::string json_cell_text(const nlohmann::ordered_json& v) {
    if (v.is_null()) return {};
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean()) return v.dump();
    throw Error(ErrorCode::MalformedInput, "nested values are not supported");
}

Dataset parse_json(std::string_view bytes, std::string name, std::string id) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::MalformedInput, e.what());
    }
    if (!doc.is_array()) throw Error(ErrorCode::MalformedInput, "top-level value must be an array of objects");
    if (doc.empty()) throw Error(ErrorCode::EmptyTable, "array has no rows");

    // Keys in order of first appearance; absent keys are missing cells.
    std::vector<std::string> header;
    std::unordered_map<std::string, std::size_t> slot;
    for (const auto& row : doc) {
        if (!row.is_object()) throw Error(ErrorCode::MalformedInput, "every row must be an object");
        for (const auto& [key, _] : row.items())
            if (slot.emplace(key, header.size()).second) header.push_back(key);
    }
    if (header.empty()) throw Error(ErrorCode::MalformedInput, "rows have no keys");

    std::vector<std::vector<std::string>> columns(header.size(), std::vector<std::string>(doc.size()));
    for (std::size_t r = 0; r < doc.size(); ++r)
        for (const auto& [key, value] : doc[r].items()) columns[slot.at(key)][r] = json_cell_text(value);
    return build_dataset(std::move(name), std::move(id), header, columns);
}

}  // namespace

Dataset parse_table(std::string_view bytes, TableFormat format, std::string name) {
    if (bytes.empty()) throw Error(ErrorCode::MalformedInput, "input is empty");
    const auto id = fmt::format("{:016x}", fnv1a(bytes));
    return format == TableFormat::csv ? parse_csv(bytes, std::move(name), id)
                                      : parse_json(bytes, std::move(name), id);
}

std::vector<double> numeric_column(const Dataset& dataset, std::string_view field) {
    const auto& f = dataset.field(field);
    if (f.kind != FieldKind::numerical)
        throw Error(ErrorCode::KindMismatch, "field '" + f.name + "' is not numerical");
    std::vector<double> out;
    out.reserve(dataset.row_count() - f.missing_count);
    for (const auto& cell : dataset.cells(field))
        if (const auto* v = std::get_if<double>(&cell)) out.push_back(*v);
    return out;
}

std::vector<std::pair<double, double>> pair_columns(const Dataset& dataset, std::string_view first,
                                                    std::string_view second) {
    for (auto name : {first, second})
        if (dataset.field(name).kind != FieldKind::numerical)
            throw Error(ErrorCode::KindMismatch, "field '" + std::string(name) + "' is not numerical");
    const auto xs = dataset.cells(first);
    const auto ys = dataset.cells(second);
    std::vector<std::pair<double, double>> out;
    out.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto* x = std::get_if<double>(&xs[i]);
        const auto* y = std::get_if<double>(&ys[i]);
        if (x && y) out.emplace_back(*x, *y);
    }
    return out;
}

std::vector<std::string> category_column(const Dataset& dataset, std::string_view field) {
    const auto& f = dataset.field(field);
    if (f.kind == FieldKind::numerical)
        throw Error(ErrorCode::KindMismatch, "field '" + f.name + "' is numerical");
    std::vector<std::string> out;
    out.reserve(dataset.row_count() - f.missing_count);
    for (const auto& cell : dataset.cells(field))
        if (!is_missing(cell)) out.push_back(category_label(cell));
    return out;
}

std::pair<std::vector<std::string>, std::vector<std::string>> category_pairs(
    const Dataset& dataset, std::string_view first, std::string_view second) {
    for (auto name : {first, second})
        if (dataset.field(name).kind == FieldKind::numerical)
            throw Error(ErrorCode::KindMismatch, "field '" + std::string(name) + "' is numerical");
    const auto as = dataset.cells(first);
    const auto bs = dataset.cells(second);
    std::pair<std::vector<std::string>, std::vector<std::string>> out;
    for (std::size_t i = 0; i < as.size(); ++i) {
        if (is_missing(as[i]) || is_missing(bs[i])) continue;
        out.first.push_back(category_label(as[i]));
        out.second.push_back(category_label(bs[i]));
    }
    return out;
}

}  // namespace insightd
