#pragma once

#include "insightd/analytics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace insightd {

/// `descriptive` is the merged mean/variance + range item; the separate
/// `mean_variance` and `range` kinds remain renderable on their own.
enum class ModuleKind {
    descriptive,
    mean_variance,
    range,
    freq_counts,
    freq_comb,
    correlation,
    kmeans,
    dbscan,
    linreg,
    polyreg,
    user_pinned,
};

enum class Origin { auto_generated, user };

std::string_view to_string(ModuleKind kind) noexcept;
std::optional<ModuleKind> parse_module_kind(std::string_view text) noexcept;
std::string_view to_string(Origin origin) noexcept;

struct Insight {
    std::string id;
    ModuleKind kind = ModuleKind::descriptive;
    std::vector<std::string> field_names;
    std::string title;
    std::string description;
    double score = 0.0;
    std::string chart_ref;
    std::uint64_t created_at = 0;  // feed sequence number, assigned on add
    Origin origin = Origin::auto_generated;
};

inline constexpr std::size_t kMaxTitleLength = 80;
inline constexpr double kDescriptiveScore = 0.1;

/// Numbers as they appear in feed text: integers above 100, two decimals
/// above 1, two significant digits below; trailing zeros dropped.
std::string format_value(double v);

/// Field name as prose: underscores become spaces.
std::string display_name(std::string_view field);

/// Throws KindMismatch when the result alternative does not fit the kind.
std::string render_title(ModuleKind kind, const std::vector<std::string>& fields, const AnalyticsResult& result);
std::string render_description(ModuleKind kind, const std::vector<std::string>& fields,
                               const AnalyticsResult& result);

struct DatasetMeta {
    std::size_t row_count = 0;
    std::size_t field_count = 0;
};

/// Normalised interestingness in [0, 1].
double score_insight(ModuleKind kind, const AnalyticsResult& result, const DatasetMeta& meta = {});

}  // namespace insightd
