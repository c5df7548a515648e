#include "support.hpp"

#include <insightd/chart.hpp>
#include <insightd/error.hpp>
#include <insightd/json_io.hpp>

#include <doctest.h>

#include <numeric>
#include <set>

using namespace insightd;

namespace {

ChartSpec heatmap() {
    ChartSpec s;
    s.chart_id = "h";
    s.mark = Mark::rect;
    s.x = {"a", ChannelType::nominal, false};
    s.y = {"b", ChannelType::nominal, false};
    s.color = Encoding{"", ChannelType::count, false};
    s.data.columns = {"a", "b", "count"};
    s.data.rows = {{std::string("x"), std::string("p"), 2.0}, {std::string("y"), std::string("p"), 1.0}};
    return s;
}

template <typename T>
const T* overlay(const ChartSpec& s) {
    for (const auto& o : s.overlays)
        if (const auto* v = std::get_if<T>(&o)) return v;
    return nullptr;
}

}  // namespace

TEST_CASE("validate") {
    CHECK(validate(heatmap()).empty());

    auto bad = heatmap();
    bad.x.type = ChannelType::quantitative;
    CHECK_FALSE(validate(bad).empty());

    auto big = heatmap();
    big.data.rows.assign(kMaxChartRows + 1, {std::string("x"), std::string("p"), 1.0});
    CHECK_FALSE(validate(big).empty());

    auto missing = heatmap();
    missing.y.field = "nope";
    CHECK_FALSE(validate(missing).empty());

    auto named_count = heatmap();
    named_count.color->field = "count";
    CHECK_FALSE(validate(named_count).empty());

    auto binned_nominal = heatmap();
    binned_nominal.x.binned = true;
    CHECK_FALSE(validate(binned_nominal).empty());
}

TEST_CASE("histogram counts cover every value") {
    const std::vector<double> xs{0, 0.5, 1, 9.99, 10};
    const auto c = histogram_counts(xs, 0, 10, 10);
    CHECK(c.size() == 10);
    CHECK(std::accumulate(c.begin(), c.end(), std::size_t{0}) == xs.size());
    CHECK(c.front() == 2);
    CHECK(c.back() == 2);
    const std::vector<double> same{3, 3, 3};
    const auto s = histogram_counts(same, 3, 3, 10);
    CHECK(std::accumulate(s.begin(), s.end(), std::size_t{0}) == 3);
}

TEST_CASE("sample_indices") {
    const auto all = sample_indices(10, 20, 1);
    CHECK(all.size() == 10);
    const auto a = sample_indices(10000, 2000, 5);
    CHECK(a.size() == 2000);
    CHECK(std::is_sorted(a.begin(), a.end()));
    CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 2000);
    CHECK(a == sample_indices(10000, 2000, 5));
    CHECK(a != sample_indices(10000, 2000, 6));
}

TEST_CASE("charts for cars insights") {
    const auto cars = test_support::cars();

    SUBCASE("descriptive histogram") {
        const auto xs = numeric_column(*cars, "Weight_in_lbs");
        const auto spec = chart_for({ModuleKind::descriptive, {"Weight_in_lbs"}, "c0", 0}, describe(xs), *cars);
        CHECK(validate(spec).empty());
        CHECK(spec.mark == Mark::bar);
        CHECK(spec.x.binned);
        CHECK(spec.data.rows.size() == kHistogramBins);
        double total = 0;
        for (const auto& row : spec.data.rows) total += std::get<double>(row[2]);
        CHECK(total == static_cast<double>(xs.size()));
        REQUIRE(overlay<MeanRule>(spec));
    }

    SUBCASE("correlation scatter carries a trend line") {
        const auto pairs = pair_columns(*cars, "Displacement", "Miles_per_Gallon");
        const auto spec =
            chart_for({ModuleKind::correlation, {"Displacement", "Miles_per_Gallon"}, "c1", 3}, pearson(pairs), *cars);
        CHECK(validate(spec).empty());
        CHECK(spec.mark == Mark::point);
        const auto* line = overlay<RegressionLine>(spec);
        REQUIRE(line);
        CHECK(line->coefficients == linreg(pairs).coefficients);
        CHECK(spec.data.rows.size() == pairs.size());
    }

    SUBCASE("regression overlay reuses the result coefficients") {
        const auto pairs = pair_columns(*cars, "Horsepower", "Weight_in_lbs");
        const auto fit = polyreg(pairs, 3);
        const auto spec = chart_for({ModuleKind::polyreg, {"Horsepower", "Weight_in_lbs"}, "c2", 0}, fit, *cars);
        REQUIRE(overlay<RegressionLine>(spec));
        CHECK(overlay<RegressionLine>(spec)->coefficients == fit.coefficients);
    }

    SUBCASE("heatmap darkest cell") {
        const auto [o, c] = category_pairs(*cars, "Origin", "Cylinders");
        const auto fc = freq_comb(o, c);
        const auto spec = chart_for({ModuleKind::freq_comb, {"Origin", "Cylinders"}, "c3", 0}, fc, *cars);
        CHECK(validate(spec).empty());
        CHECK(spec.mark == Mark::rect);
        double best = -1;
        std::pair<std::string, std::string> at;
        for (const auto& row : spec.data.rows)
            if (std::get<double>(row[2]) > best)
                best = std::get<double>(row[2]), at = {std::get<std::string>(row[0]), std::get<std::string>(row[1])};
        CHECK(at == std::pair<std::string, std::string>{"USA", "8"});
    }

    SUBCASE("kmeans scatter has k colour classes") {
        const auto pts = to_points(pair_columns(*cars, "Horsepower", "Acceleration"));
        const auto km = kmeans(pts, 3, 17);
        const auto spec = chart_for({ModuleKind::kmeans, {"Horsepower", "Acceleration"}, "c4", 17}, km, *cars);
        CHECK(validate(spec).empty());
        REQUIRE(spec.color);
        const auto* labels = overlay<ClusterAssignment>(spec);
        REQUIRE(labels);
        CHECK(std::set<std::int64_t>(labels->labels.begin(), labels->labels.end()).size() == 3);
    }

    SUBCASE("wrong result type") {
        CHECK_THROWS_AS(chart_for({ModuleKind::kmeans, {"Horsepower", "Acceleration"}, "c", 0}, Range{}, *cars), Error);
    }
}

TEST_CASE("large scatters are subsampled and heatmaps capped") {
    std::string text = "x,y,a,b\n";
    for (int i = 0; i < 5000; ++i)
        text += std::to_string(i) + "," + std::to_string(i % 97) + ",k" + std::to_string(i % 150) + ",m" +
                std::to_string(i % 3) + "\n";
    const auto d = parse_table(text, TableFormat::csv);
    const auto pairs = pair_columns(d, "x", "y");
    const auto pts = to_points(pairs);
    const auto km = kmeans(pts, 3, 1);
    const auto spec = chart_for({ModuleKind::kmeans, {"x", "y"}, "c", 1}, km, d);
    CHECK(spec.data.rows.size() == kScatterSampleSize);
    CHECK(validate(spec).empty());

    const auto [a, b] = category_pairs(d, "a", "b");
    CHECK_THROWS_AS(chart_for({ModuleKind::freq_comb, {"a", "b"}, "h", 0}, freq_comb(a, b), d), Error);
}

TEST_CASE("chart json shape and round trip") {
    auto spec = heatmap();
    spec.overlays.emplace_back(MeanRule{1.5});
    const auto j = to_json(spec);
    std::vector<std::string> keys;
    for (const auto& [k, _] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"chart_id", "mark", "x", "y", "color", "overlays", "data"});
    CHECK(j["color"]["field"].is_null());
    CHECK(j["color"]["type"] == "count");
    CHECK(j["x"]["bin"] == false);
    CHECK(j["data"][0]["a"] == "x");

    const auto back = chart_from_json(nlohmann::json::parse(j.dump()));
    CHECK(to_json(back) == j);

    CHECK_THROWS_AS(chart_from_json(nlohmann::json::parse(R"({"mark":"pie"})")), Error);
    CHECK_THROWS_AS(chart_from_json(nlohmann::json::parse("[]")), Error);
}

TEST_CASE("insight json shape") {
    Insight i;
    i.id = "t1";
    i.kind = ModuleKind::correlation;
    i.field_names = {"A", "B"};
    i.title = "ρ = 0.5 for A and B";
    i.description = "d";
    i.score = 0.5;
    i.chart_ref = "c1";
    i.created_at = 3;
    const auto j = to_json(i);
    std::vector<std::string> keys;
    for (const auto& [k, _] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"id", "kind", "fields", "title", "description", "score", "chart_id",
                                           "created_at", "origin"});
    CHECK(j["origin"] == "auto");
    CHECK(j["kind"] == "correlation");
}
