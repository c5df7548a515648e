#pragma once

#include "insightd/analytics.hpp"
#include "insightd/insight.hpp"
#include "insightd/table.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace insightd {

enum class Mark { bar, line, point, rect };
enum class ChannelType { quantitative, nominal, temporal, count };

std::string_view to_string(Mark mark) noexcept;
std::string_view to_string(ChannelType type) noexcept;
std::optional<Mark> parse_mark(std::string_view text) noexcept;
std::optional<ChannelType> parse_channel_type(std::string_view text) noexcept;

/// A count channel has no source field; it reads the data column "count".
struct Encoding {
    std::string field;
    ChannelType type = ChannelType::quantitative;
    bool binned = false;
};

inline constexpr std::string_view kCountColumn = "count";
inline constexpr std::string_view kBinEndColumn = "bin_end";
inline constexpr std::string_view kClusterColumn = "cluster";

struct RegressionLine {
    std::vector<double> coefficients;  // constant term first
};
struct ClusterAssignment {
    std::vector<std::int64_t> labels;  // aligned with data rows; -1 is noise
};
struct MeanRule {
    double value = 0.0;
};
using Overlay = std::variant<RegressionLine, ClusterAssignment, MeanRule>;

using ChartCell = std::variant<double, std::string>;

/// Inline table: named columns, row-major cells.
struct ChartData {
    std::vector<std::string> columns;
    std::vector<std::vector<ChartCell>> rows;

    bool has_column(std::string_view name) const;
};

struct ChartSpec {
    std::string chart_id;
    Mark mark = Mark::point;
    Encoding x;
    Encoding y;
    std::optional<Encoding> color;
    std::vector<Overlay> overlays;
    ChartData data;
};

inline constexpr std::size_t kMaxChartRows = 10'000;
inline constexpr std::size_t kScatterSampleSize = 2'000;
inline constexpr std::size_t kHistogramBins = 10;
inline constexpr std::size_t kMaxHeatmapLevels = 100;

/// Empty when the spec is well formed.
std::vector<std::string> validate(const ChartSpec& spec);

/// Equal-width bin counts over [lo, hi]; the last bin is closed.
std::vector<std::size_t> histogram_counts(std::span<const double> xs, double lo, double hi, std::size_t bins);

/// Sorted row indices of a seeded uniform sample without replacement.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t cap, std::uint64_t seed);

struct ChartRequest {
    ModuleKind kind = ModuleKind::descriptive;
    std::vector<std::string> field_names;
    std::string chart_id;
    std::uint64_t seed = 0;
};

/// Throws KindMismatch or UnrenderableCardinality.
ChartSpec chart_for(const ChartRequest& request, const AnalyticsResult& result, const Dataset& dataset);

}  // namespace insightd
