#include "insightd/insight.hpp"

#include "insightd/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

namespace insightd {

namespace {

constexpr std::array<std::pair<ModuleKind, std::string_view>, 11> kKindNames{{
    {ModuleKind::descriptive, "descriptive"},
    {ModuleKind::mean_variance, "mean_variance"},
    {ModuleKind::range, "range"},
    {ModuleKind::freq_counts, "freq_counts"},
    {ModuleKind::freq_comb, "freq_comb"},
    {ModuleKind::correlation, "correlation"},
    {ModuleKind::kmeans, "kmeans"},
    {ModuleKind::dbscan, "dbscan"},
    {ModuleKind::linreg, "linreg"},
    {ModuleKind::polyreg, "polyreg"},
    {ModuleKind::user_pinned, "user_pinned"},
}};

std::size_t arity(ModuleKind kind) {
    switch (kind) {
        case ModuleKind::descriptive:
        case ModuleKind::mean_variance:
        case ModuleKind::range:
        case ModuleKind::freq_counts: return 1;
        case ModuleKind::user_pinned: return 0;
        default: return 2;
    }
}

template <typename T>
const T& expect(ModuleKind kind, const AnalyticsResult& result) {
    if (const auto* v = std::get_if<T>(&result)) return *v;
    throw Error(ErrorCode::KindMismatch, "result does not match module kind " + std::string(to_string(kind)));
}

void check_fields(ModuleKind kind, const std::vector<std::string>& fields) {
    if (fields.size() != arity(kind))
        throw Error(ErrorCode::KindMismatch, fmt::format("{} takes {} field name(s), got {}", to_string(kind),
                                                         arity(kind), fields.size()));
}

std::size_t utf8_length(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string clip_title(std::string title) {
    if (utf8_length(title) <= kMaxTitleLength) return title;
    std::size_t chars = 0;
    std::size_t cut = 0;
    for (; cut < title.size(); ++cut) {
        if ((static_cast<unsigned char>(title[cut]) & 0xC0) != 0x80) {
            if (chars == kMaxTitleLength - 1) break;
            ++chars;
        }
    }
    title.resize(cut);
    return title + "…";
}

}  // namespace

std::string_view to_string(ModuleKind kind) noexcept {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "descriptive";
}

std::optional<ModuleKind> parse_module_kind(std::string_view text) noexcept {
    for (const auto& [k, name] : kKindNames)
        if (name == text) return k;
    return std::nullopt;
}

std::string_view to_string(Origin origin) noexcept { return origin == Origin::user ? "user" : "auto"; }

std::string format_value(double v) {
    if (!std::isfinite(v)) return fmt::format("{}", v);
    std::string s;
    const double a = std::abs(v);
    if (a >= 100.0)
        s = fmt::format("{:.0f}", v);
    else if (a >= 1.0)
        s = fmt::format("{:.2f}", v);
    else
        s = fmt::format("{:.2g}", v);
    if (s.find('.') != std::string::npos && s.find('e') == std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
}

std::string display_name(std::string_view field) {
    std::string out(field);
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
}

std::string render_title(ModuleKind kind, const std::vector<std::string>& fields, const AnalyticsResult& result) {
    if (kind == ModuleKind::user_pinned)
        throw Error(ErrorCode::KindMismatch, "pinned items carry a user-supplied title");
    check_fields(kind, fields);
    const auto& a = fields[0];
    std::string title;
    switch (kind) {
        case ModuleKind::descriptive: {
            const auto& r = expect<Descriptive>(kind, result);
            title = fmt::format("{}: {}–{} (mean {})", a, format_value(r.range.min), format_value(r.range.max),
                                format_value(r.moments.mean));
            break;
        }
        case ModuleKind::mean_variance: {
            const auto& r = expect<MeanVariance>(kind, result);
            title = fmt::format("{}: mean {}, variance {}", a, format_value(r.mean), format_value(r.variance));
            break;
        }
        case ModuleKind::range: {
            const auto& r = expect<Range>(kind, result);
            title = fmt::format("{}: {}–{}", a, format_value(r.min), format_value(r.max));
            break;
        }
        case ModuleKind::freq_counts: {
            const auto& r = expect<FreqCounts>(kind, result);
            title = fmt::format("{}: most frequent {}", a, r.most);
            break;
        }
        case ModuleKind::freq_comb: {
            const auto& r = expect<FreqComb>(kind, result);
            title = fmt::format("{} × {}: most frequent ({}, {})", a, fields[1], r.argmax.first, r.argmax.second);
            break;
        }
        case ModuleKind::correlation: {
            const auto& r = expect<Correlation>(kind, result);
            title = fmt::format("ρ = {} for {} and {}", format_value(r.rho), a, fields[1]);
            break;
        }
        case ModuleKind::kmeans: {
            const auto& r = expect<KMeans>(kind, result);
            title = fmt::format("{} clusters in {} × {}", r.k, a, fields[1]);
            break;
        }
        case ModuleKind::dbscan: {
            const auto& r = expect<Dbscan>(kind, result);
            title = fmt::format("{} density clusters in {} × {} (minPts {}, {}% noise)", r.cluster_count, a,
                                fields[1], r.min_pts, format_value(100.0 * r.noise_fraction()));
            break;
        }
        case ModuleKind::linreg: {
            const auto& r = expect<Regression>(kind, result);
            title = fmt::format("Linear fit of {} on {}, RMSE {}", fields[1], a, format_value(r.rmse));
            break;
        }
        case ModuleKind::polyreg: {
            const auto& r = expect<Regression>(kind, result);
            title = fmt::format("Degree-{} fit of {} on {}, RMSE {}", r.degree, fields[1], a, format_value(r.rmse));
            break;
        }
        case ModuleKind::user_pinned: break;
    }
    return clip_title(std::move(title));
}

std::string render_description(ModuleKind kind, const std::vector<std::string>& fields,
                               const AnalyticsResult& result) {
    if (kind == ModuleKind::user_pinned)
        throw Error(ErrorCode::KindMismatch, "pinned items carry no computed description");
    check_fields(kind, fields);
    const auto a = display_name(fields[0]);
    const auto b = fields.size() > 1 ? display_name(fields[1]) : std::string{};
    switch (kind) {
        case ModuleKind::descriptive: {
            const auto& r = expect<Descriptive>(kind, result);
            return fmt::format("{} averages {} (range {}–{}).", a, format_value(r.moments.mean),
                               format_value(r.range.min), format_value(r.range.max));
        }
        case ModuleKind::mean_variance: {
            const auto& r = expect<MeanVariance>(kind, result);
            return fmt::format("Attribute {} has mean of {} with variance of {}.", a, format_value(r.mean),
                               format_value(r.variance));
        }
        case ModuleKind::range: {
            const auto& r = expect<Range>(kind, result);
            return fmt::format("Range ({}, {}) was found in attribute {}.", format_value(r.min), format_value(r.max), a);
        }
        case ModuleKind::freq_counts: {
            const auto& r = expect<FreqCounts>(kind, result);
            return fmt::format("{} was the most frequent and {} the least frequent sub-category in {}.", r.most,
                               r.least, a);
        }
        case ModuleKind::freq_comb: {
            const auto& r = expect<FreqComb>(kind, result);
            return fmt::format("Most frequent combination was found between {} in attribute {}, and {} in attribute {}.",
                               r.argmax.first, a, r.argmax.second, b);
        }
        case ModuleKind::correlation: {
            const auto& r = expect<Correlation>(kind, result);
            return fmt::format("Correlation of {} was found between attributes {} and {}.", format_value(r.rho), a, b);
        }
        case ModuleKind::kmeans: {
            const auto& r = expect<KMeans>(kind, result);
            return fmt::format("K-means with {} clusters between {} and {} has average error {}.", r.k, a, b,
                               format_value(r.avg_error));
        }
        case ModuleKind::dbscan: {
            const auto& r = expect<Dbscan>(kind, result);
            return fmt::format("DBSCAN between {} and {} with minPts = {} estimated {} clusters.", a, b, r.min_pts,
                               r.cluster_count);
        }
        case ModuleKind::linreg: {
            const auto& r = expect<Regression>(kind, result);
            return fmt::format("Linear regression between {} and {} has estimate error of {}.", a, b,
                               format_value(r.rmse));
        }
        case ModuleKind::polyreg: {
            const auto& r = expect<Regression>(kind, result);
            return fmt::format("Polynomial regression of degree {} between {} and {} has estimate error of {}.",
                               r.degree, a, b, format_value(r.rmse));
        }
        case ModuleKind::user_pinned: break;
    }
    return {};
}

double score_insight(ModuleKind kind, const AnalyticsResult& result, const DatasetMeta&) {
    const auto unit = [](double v) { return std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0); };
    switch (kind) {
        case ModuleKind::descriptive:
            expect<Descriptive>(kind, result);
            return kDescriptiveScore;
        case ModuleKind::mean_variance:
            expect<MeanVariance>(kind, result);
            return kDescriptiveScore;
        case ModuleKind::range:
            expect<Range>(kind, result);
            return kDescriptiveScore;
        case ModuleKind::freq_counts: {
            const auto& r = expect<FreqCounts>(kind, result);
            if (r.total == 0) return 0.0;
            const double spread = static_cast<double>(r.counts.at(r.most)) - static_cast<double>(r.counts.at(r.least));
            return unit(spread / static_cast<double>(r.total));
        }
        case ModuleKind::freq_comb: {
            const auto& r = expect<FreqComb>(kind, result);
            if (r.total == 0) return 0.0;
            return unit(static_cast<double>(r.matrix.at(r.argmax)) / static_cast<double>(r.total));
        }
        case ModuleKind::correlation: return unit(std::abs(expect<Correlation>(kind, result).rho));
        case ModuleKind::kmeans: {
            const auto& r = expect<KMeans>(kind, result);
            return r.sse_total > 0.0 ? unit(1.0 - r.sse / r.sse_total) : 0.0;
        }
        case ModuleKind::dbscan: {
            const auto& r = expect<Dbscan>(kind, result);
            return r.cluster_count >= 1 ? unit(1.0 - r.noise_fraction()) : 0.0;
        }
        case ModuleKind::linreg:
        case ModuleKind::polyreg: return unit(expect<Regression>(kind, result).r_squared);
        case ModuleKind::user_pinned: return 0.0;
    }
    return 0.0;
}

}  // namespace insightd
