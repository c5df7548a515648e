#include "insightd/chart.hpp"

#include "insightd/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace insightd {

std::string_view to_string(Mark mark) noexcept {
    switch (mark) {
        case Mark::bar: return "bar";
        case Mark::line: return "line";
        case Mark::point: return "point";
        case Mark::rect: return "rect";
    }
    return "point";
}

std::string_view to_string(ChannelType type) noexcept {
    switch (type) {
        case ChannelType::quantitative: return "quantitative";
        case ChannelType::nominal: return "nominal";
        case ChannelType::temporal: return "temporal";
        case ChannelType::count: return "count";
    }
    return "quantitative";
}

std::optional<Mark> parse_mark(std::string_view text) noexcept {
    for (auto m : {Mark::bar, Mark::line, Mark::point, Mark::rect})
        if (to_string(m) == text) return m;
    return std::nullopt;
}

std::optional<ChannelType> parse_channel_type(std::string_view text) noexcept {
    for (auto t : {ChannelType::quantitative, ChannelType::nominal, ChannelType::temporal, ChannelType::count})
        if (to_string(t) == text) return t;
    return std::nullopt;
}

bool ChartData::has_column(std::string_view name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::vector<std::string> validate(const ChartSpec& spec) {
    std::vector<std::string> out;
    if (spec.chart_id.empty()) out.emplace_back("chart_id is empty");
    if (spec.data.rows.size() > kMaxChartRows)
        out.push_back(fmt::format("data has {} rows, limit is {}", spec.data.rows.size(), kMaxChartRows));

    std::set<std::string_view> unique(spec.data.columns.begin(), spec.data.columns.end());
    if (unique.size() != spec.data.columns.size()) out.emplace_back("data column names are not unique");
    for (std::size_t r = 0; r < spec.data.rows.size(); ++r)
        if (spec.data.rows[r].size() != spec.data.columns.size()) {
            out.push_back(fmt::format("data row {} has {} cells for {} columns", r, spec.data.rows[r].size(),
                                      spec.data.columns.size()));
            break;
        }

    const auto check_encoding = [&](const char* channel, const Encoding& e) {
        if (e.type == ChannelType::count) {
            if (!e.field.empty()) out.push_back(fmt::format("{}: count channel must not name a field", channel));
            if (!spec.data.has_column(kCountColumn)) out.push_back(fmt::format("{}: data has no count column", channel));
        } else if (e.field.empty()) {
            out.push_back(fmt::format("{}: field is empty", channel));
        } else if (!spec.data.has_column(e.field)) {
            out.push_back(fmt::format("{}: field '{}' is not in data", channel, e.field));
        }
        if (e.binned && e.type != ChannelType::quantitative)
            out.push_back(fmt::format("{}: only quantitative channels can be binned", channel));
    };
    check_encoding("x", spec.x);
    check_encoding("y", spec.y);
    if (spec.color) check_encoding("color", *spec.color);

    if (spec.mark == Mark::rect) {
        const auto categorical = [](const Encoding& e) {
            return e.type == ChannelType::nominal || e.type == ChannelType::temporal;
        };
        if (!categorical(spec.x)) out.emplace_back("rect: x must be nominal or temporal");
        if (!categorical(spec.y)) out.emplace_back("rect: y must be nominal or temporal");
        if (!spec.color || spec.color->type != ChannelType::count) out.emplace_back("rect: color must be a count");
    }

    for (const auto& overlay : spec.overlays) {
        if (const auto* line = std::get_if<RegressionLine>(&overlay)) {
            if (line->coefficients.empty()) out.emplace_back("regression_line has no coefficients");
            if (!std::all_of(line->coefficients.begin(), line->coefficients.end(),
                             [](double c) { return std::isfinite(c); }))
                out.emplace_back("regression_line has non-finite coefficients");
        } else if (const auto* clusters = std::get_if<ClusterAssignment>(&overlay)) {
            if (clusters->labels.size() != spec.data.rows.size())
                out.push_back(fmt::format("cluster_assignment has {} labels for {} rows", clusters->labels.size(),
                                          spec.data.rows.size()));
        } else if (const auto* rule = std::get_if<MeanRule>(&overlay)) {
            if (!std::isfinite(rule->value)) out.emplace_back("mean_rule value is not finite");
        }
    }
    return out;
}

std::vector<std::size_t> histogram_counts(std::span<const double> xs, double lo, double hi, std::size_t bins) {
    std::vector<std::size_t> counts(bins, 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (double x : xs) {
        std::size_t b = 0;
        if (width > 0.0) b = std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, (x - lo) / width)));
        ++counts[b];
    }
    return counts;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t cap, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (n <= cap) return idx;
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates; draws via the top 53 bits for portability.
    for (std::size_t i = 0; i < cap; ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const std::size_t j = i + std::min(n - i - 1, static_cast<std::size_t>(u * static_cast<double>(n - i)));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    return idx;
}

namespace {

template <typename T>
const T& expect(ModuleKind kind, const AnalyticsResult& result) {
    if (const auto* v = std::get_if<T>(&result)) return *v;
    throw Error(ErrorCode::KindMismatch, "chart: result does not match " + std::string(to_string(kind)));
}

ChannelType categorical_channel(const Dataset& dataset, const std::string& field) {
    return dataset.field(field).kind == FieldKind::temporal ? ChannelType::temporal : ChannelType::nominal;
}

struct Scatter {
    ChartData data;
    std::vector<std::size_t> kept;
    std::size_t total = 0;
};

Scatter scatter_data(const ChartRequest& req, const Dataset& dataset) {
    const auto pairs = pair_columns(dataset, req.field_names[0], req.field_names[1]);
    Scatter s;
    s.total = pairs.size();
    s.kept = sample_indices(pairs.size(), kScatterSampleSize, req.seed);
    s.data.columns = {req.field_names[0], req.field_names[1]};
    s.data.rows.reserve(s.kept.size());
    for (auto i : s.kept) s.data.rows.push_back({pairs[i].first, pairs[i].second});
    return s;
}

void attach_clusters(ChartSpec& spec, Scatter& scatter, std::span<const std::int64_t> labels) {
    if (labels.size() != scatter.total)
        throw Error(ErrorCode::KindMismatch, "chart: cluster labels do not cover the data");
    ClusterAssignment overlay;
    spec.data.columns.emplace_back(kClusterColumn);
    for (std::size_t r = 0; r < scatter.kept.size(); ++r) {
        const auto label = labels[scatter.kept[r]];
        overlay.labels.push_back(label);
        spec.data.rows[r].emplace_back(label < 0 ? std::string("noise") : std::to_string(label));
    }
    spec.color = Encoding{std::string(kClusterColumn), ChannelType::nominal, false};
    spec.overlays.emplace_back(std::move(overlay));
}

}  // namespace

ChartSpec chart_for(const ChartRequest& req, const AnalyticsResult& result, const Dataset& dataset) {
    const auto kind = req.kind;
    const auto& fields = req.field_names;
    const std::size_t need = (kind == ModuleKind::descriptive || kind == ModuleKind::mean_variance ||
                              kind == ModuleKind::range || kind == ModuleKind::freq_counts)
                                 ? 1
                                 : 2;
    if (kind == ModuleKind::user_pinned || fields.size() != need)
        throw Error(ErrorCode::KindMismatch, "chart: wrong field count for " + std::string(to_string(kind)));

    ChartSpec spec;
    spec.chart_id = req.chart_id;

    switch (kind) {
        case ModuleKind::descriptive:
        case ModuleKind::mean_variance:
        case ModuleKind::range: {
            const auto xs = numeric_column(dataset, fields[0]);
            Range range;
            std::optional<double> mean;
            if (kind == ModuleKind::descriptive) {
                const auto& r = expect<Descriptive>(kind, result);
                range = r.range;
                mean = r.moments.mean;
            } else if (kind == ModuleKind::mean_variance) {
                mean = expect<MeanVariance>(kind, result).mean;
                range = min_max(xs);
            } else {
                range = expect<Range>(kind, result);
            }
            const auto counts = histogram_counts(xs, range.min, range.max, kHistogramBins);
            const double width = (range.max - range.min) / static_cast<double>(kHistogramBins);
            // Min/max alone is drawn as a line over the bins.
            spec.mark = kind == ModuleKind::range ? Mark::line : Mark::bar;
            spec.x = Encoding{fields[0], ChannelType::quantitative, true};
            spec.y = Encoding{"", ChannelType::count, false};
            spec.data.columns = {fields[0], std::string(kBinEndColumn), std::string(kCountColumn)};
            for (std::size_t b = 0; b < counts.size(); ++b) {
                const double lo = range.min + width * static_cast<double>(b);
                const double hi = b + 1 == counts.size() ? range.max : lo + width;
                spec.data.rows.push_back({lo, hi, static_cast<double>(counts[b])});
            }
            if (mean) spec.overlays.emplace_back(MeanRule{*mean});
            break;
        }
        case ModuleKind::freq_counts: {
            const auto& r = expect<FreqCounts>(kind, result);
            spec.mark = Mark::bar;
            spec.x = Encoding{fields[0], categorical_channel(dataset, fields[0]), false};
            spec.y = Encoding{"", ChannelType::count, false};
            spec.data.columns = {fields[0], std::string(kCountColumn)};
            for (const auto& [cat, count] : r.counts) spec.data.rows.push_back({cat, static_cast<double>(count)});
            if (spec.data.rows.size() > kMaxChartRows)
                throw Error(ErrorCode::UnrenderableCardinality, fmt::format("{} has too many categories", fields[0]));
            break;
        }
        case ModuleKind::freq_comb: {
            const auto& r = expect<FreqComb>(kind, result);
            std::set<std::string_view> xs, ys;
            for (const auto& [cell, _] : r.matrix) {
                xs.insert(cell.first);
                ys.insert(cell.second);
            }
            if (xs.size() > kMaxHeatmapLevels || ys.size() > kMaxHeatmapLevels)
                throw Error(ErrorCode::UnrenderableCardinality,
                            fmt::format("heatmap axes have {} and {} levels, limit is {}", xs.size(), ys.size(),
                                        kMaxHeatmapLevels));
            spec.mark = Mark::rect;
            spec.x = Encoding{fields[0], categorical_channel(dataset, fields[0]), false};
            spec.y = Encoding{fields[1], categorical_channel(dataset, fields[1]), false};
            spec.color = Encoding{"", ChannelType::count, false};
            spec.data.columns = {fields[0], fields[1], std::string(kCountColumn)};
            for (const auto& [cell, count] : r.matrix)
                spec.data.rows.push_back({cell.first, cell.second, static_cast<double>(count)});
            break;
        }
        case ModuleKind::correlation:
        case ModuleKind::linreg:
        case ModuleKind::polyreg: {
            std::vector<double> coefficients;
            if (kind == ModuleKind::correlation) {
                expect<Correlation>(kind, result);
                coefficients = linreg(pair_columns(dataset, fields[0], fields[1])).coefficients;
            } else {
                coefficients = expect<Regression>(kind, result).coefficients;
            }
            auto scatter = scatter_data(req, dataset);
            spec.mark = Mark::point;
            spec.x = Encoding{fields[0], ChannelType::quantitative, false};
            spec.y = Encoding{fields[1], ChannelType::quantitative, false};
            spec.data = std::move(scatter.data);
            spec.overlays.emplace_back(RegressionLine{std::move(coefficients)});
            break;
        }
        case ModuleKind::kmeans:
        case ModuleKind::dbscan: {
            std::vector<std::int64_t> labels;
            if (kind == ModuleKind::kmeans) {
                const auto& r = expect<KMeans>(kind, result);
                labels.assign(r.assignment.begin(), r.assignment.end());
            } else {
                labels = expect<Dbscan>(kind, result).assignment;
            }
            auto scatter = scatter_data(req, dataset);
            spec.mark = Mark::point;
            spec.x = Encoding{fields[0], ChannelType::quantitative, false};
            spec.y = Encoding{fields[1], ChannelType::quantitative, false};
            spec.data = std::move(scatter.data);
            attach_clusters(spec, scatter, labels);
            break;
        }
        case ModuleKind::user_pinned: break;
    }
    return spec;
}

}  // namespace insightd
