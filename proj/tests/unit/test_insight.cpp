#include <insightd/error.hpp>
#include <insightd/insight.hpp>

#include <doctest.h>

#include <random>
#include <set>

using namespace insightd;
using doctest::Approx;

namespace {

Dbscan dbscan_result(std::size_t clusters, std::size_t min_pts, std::size_t noise, std::size_t n) {
    Dbscan d;
    d.eps = 0.05;
    d.min_pts = min_pts;
    d.cluster_count = clusters;
    d.assignment.assign(n, 0);
    for (std::size_t i = 0; i < noise; ++i) d.assignment[i] = Dbscan::kNoise;
    return d;
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(format_value(0.5) == "0.5");
    CHECK(format_value(-0.7642) == "-0.76");
    CHECK(format_value(2979.41) == "2979");
    CHECK(format_value(23.514) == "23.51");
    CHECK(format_value(1613) == "1613");
    CHECK(format_value(2.0) == "2");
    CHECK(format_value(0.0) == "0");
    CHECK(format_value(0.0012345) == "0.0012");
    CHECK(format_value(-0.0) == "0");
}

TEST_CASE("titles") {
    CHECK(render_title(ModuleKind::correlation, {"Weight", "MPG"}, Correlation{0.5, 10}) ==
          "ρ = 0.5 for Weight and MPG");
    CHECK(render_title(ModuleKind::range, {"Weight_in_lbs"}, Range{1613, 5140}) == "Weight_in_lbs: 1613–5140");
    KMeans km;
    km.k = 3;
    CHECK(render_title(ModuleKind::kmeans, {"A", "B"}, km) == "3 clusters in A × B");
    CHECK(render_title(ModuleKind::dbscan, {"A", "B"}, dbscan_result(2, 4, 1, 4)) ==
          "2 density clusters in A × B (minPts 4, 25% noise)");
}

TEST_CASE("descriptions") {
    CHECK(render_description(ModuleKind::correlation, {"Weights_in_lbs", "Miles_per_Gallon"}, Correlation{0.5, 10}) ==
          "Correlation of 0.5 was found between attributes Weights in lbs and Miles per Gallon.");
    CHECK(render_description(ModuleKind::dbscan, {"X", "Y"}, dbscan_result(2, 4, 0, 8)) ==
          "DBSCAN between X and Y with minPts = 4 estimated 2 clusters.");
    CHECK(render_description(ModuleKind::descriptive, {"Weight"}, Descriptive{{2979.4, 1.0, 406}, {1613, 5140}}) ==
          "Weight averages 2979 (range 1613–5140).");
    CHECK(render_description(ModuleKind::mean_variance, {"X"}, MeanVariance{2.5, 5.0 / 3.0, 4}) ==
          "Attribute X has mean of 2.5 with variance of 1.67.");
    CHECK(render_description(ModuleKind::range, {"X"}, Range{-1, 3}) == "Range (-1, 3) was found in attribute X.");

    FreqComb fc;
    fc.argmax = {"USA", "8"};
    fc.matrix[fc.argmax] = 108;
    fc.total = 400;
    CHECK(render_description(ModuleKind::freq_comb, {"Origin", "Cylinders"}, fc) ==
          "Most frequent combination was found between USA in attribute Origin, and 8 in attribute Cylinders.");

    Regression r{2, {0, 0, 1}, 0.25, 0.9};
    CHECK(render_description(ModuleKind::polyreg, {"X", "Y"}, r) ==
          "Polynomial regression of degree 2 between X and Y has estimate error of 0.25.");
    r.degree = 1;
    CHECK(render_description(ModuleKind::linreg, {"X", "Y"}, r) ==
          "Linear regression between X and Y has estimate error of 0.25.");
}

TEST_CASE("kind mismatches") {
    CHECK_THROWS_AS(render_title(ModuleKind::correlation, {"A", "B"}, Range{0, 1}), Error);
    CHECK_THROWS_AS(render_title(ModuleKind::correlation, {"A"}, Correlation{0.1, 3}), Error);
    CHECK_THROWS_AS(render_description(ModuleKind::range, {"A"}, Correlation{0.1, 3}), Error);
    CHECK_THROWS_AS(score_insight(ModuleKind::kmeans, Correlation{0.1, 3}), Error);
    try {
        render_title(ModuleKind::kmeans, {"A", "B"}, Range{0, 1});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::KindMismatch);
    }
}

TEST_CASE("titles are capped") {
    const std::string longname(120, 'w');
    const auto t = render_title(ModuleKind::correlation, {longname, "B"}, Correlation{0.5, 10});
    std::size_t points = 0;
    for (unsigned char c : t) points += (c & 0xC0) != 0x80;
    CHECK(points <= kMaxTitleLength);
    CHECK(t.ends_with("…"));
}

TEST_CASE("scores") {
    CHECK(score_insight(ModuleKind::correlation, Correlation{-0.76, 10}) == Approx(0.76));
    KMeans km;
    km.k = 3;
    km.sse = 25;
    km.sse_total = 100;
    CHECK(score_insight(ModuleKind::kmeans, km) == Approx(0.75));

    FreqCounts flat;
    flat.counts = {{"a", 2}, {"b", 2}};
    flat.most = flat.least = "a";
    flat.total = 4;
    CHECK(score_insight(ModuleKind::freq_counts, flat) == 0.0);

    CHECK(score_insight(ModuleKind::descriptive, Descriptive{}) == kDescriptiveScore);
    CHECK(score_insight(ModuleKind::dbscan, dbscan_result(0, 4, 4, 4)) == 0.0);
    CHECK(score_insight(ModuleKind::dbscan, dbscan_result(1, 4, 1, 4)) == Approx(0.75));
    CHECK(score_insight(ModuleKind::linreg, Regression{1, {0, 1}, 0.1, 0.64}) == Approx(0.64));
}

TEST_CASE("correlation scores are strictly monotone and rendering is injective") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    std::set<std::string> titles;
    std::set<std::string> rounded;
    for (int i = 0; i < 500; ++i) {
        const double a = u(rng), b = u(rng);
        const double sa = score_insight(ModuleKind::correlation, Correlation{a, 5});
        const double sb = score_insight(ModuleKind::correlation, Correlation{b, 5});
        if (std::fabs(a) > std::fabs(b)) CHECK(sa > sb);
        CHECK(sa >= 0.0);
        CHECK(sa <= 1.0);
        titles.insert(render_title(ModuleKind::correlation, {"A", "B"}, Correlation{a, 5}));
        rounded.insert(format_value(a));
    }
    CHECK(titles.size() == rounded.size());
}
