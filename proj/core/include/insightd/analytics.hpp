#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace insightd {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

struct MeanVariance {
    double mean = 0.0;
    double variance = 0.0;  // sample variance, n - 1 denominator
    std::size_t n = 0;
};

struct Range {
    double min = 0.0;
    double max = 0.0;
};

/// The merged mean/variance + min/max item emitted once per numerical field.
struct Descriptive {
    MeanVariance moments;
    Range range;
};

struct FreqCounts {
    std::map<std::string, std::size_t> counts;
    std::string most;
    std::string least;
    std::size_t total = 0;
};

struct FreqComb {
    std::map<std::pair<std::string, std::string>, std::size_t> matrix;
    std::pair<std::string, std::string> argmax;
    std::size_t total = 0;
};

struct Correlation {
    double rho = 0.0;
    std::size_t n = 0;
};

struct KMeans {
    std::size_t k = 0;
    std::vector<Point2> centroids;
    std::vector<std::size_t> assignment;
    double avg_error = 0.0;  // mean point-to-centroid distance
    double sse = 0.0;        // sum of squared distances to assigned centroids
    double sse_total = 0.0;  // same, against the single overall mean
    std::size_t iterations = 0;
    std::vector<double> objective_trace;  // sse after every Lloyd step
};

struct Dbscan {
    static constexpr std::int64_t kNoise = -1;

    double eps = 0.0;
    std::size_t min_pts = 0;
    std::size_t cluster_count = 0;
    std::vector<std::int64_t> assignment;  // cluster index or kNoise
    std::vector<bool> core;

    std::size_t noise_count() const noexcept;
    double noise_fraction() const noexcept;
};

struct Regression {
    std::size_t degree = 1;
    std::vector<double> coefficients;  // constant term first
    double rmse = 0.0;
    double r_squared = 0.0;  // 0 when the response is constant
};

using AnalyticsResult =
    std::variant<MeanVariance, Range, Descriptive, FreqCounts, FreqComb, Correlation, KMeans, Dbscan, Regression>;

// All kernels are pure. Degenerate input throws Error with TooFewValues,
// ZeroVariance or SingularSystem, which the engine treats as "no insight".

MeanVariance mean_variance(std::span<const double> xs);
Range min_max(std::span<const double> xs);
Descriptive describe(std::span<const double> xs);

/// Ties on count go to the lexicographically smallest category.
FreqCounts freq_counts(std::span<const std::string> cats);
FreqComb freq_comb(std::span<const std::string> a, std::span<const std::string> b);

Correlation pearson(std::span<const std::pair<double, double>> pairs);

enum class Scaling { min_max, none };

/// Per-axis affine map onto [0, 1]; a constant axis maps to 0.
std::vector<Point2> min_max_scale(std::span<const Point2> points);
std::vector<Point2> to_points(std::span<const std::pair<double, double>> pairs);

inline constexpr std::size_t kKMeansMaxIterations = 100;

/// Lloyd's algorithm with k-means++ seeding. Reported errors are in the
/// space the clustering ran in (scaled unless Scaling::none).
KMeans kmeans(std::span<const Point2> points, std::size_t k, std::uint64_t seed,
              Scaling scaling = Scaling::min_max);

/// Neighborhoods are closed balls (distance <= eps) that include the point
/// itself. Clusters are numbered in scan (input) order; a border point joins
/// the first cluster that reaches it.
Dbscan dbscan(std::span<const Point2> points, double eps, std::size_t min_pts, Scaling scaling = Scaling::min_max);

Regression linreg(std::span<const std::pair<double, double>> pairs);

/// Least squares on a monomial basis via Householder QR on a centred and
/// scaled abscissa; coefficients are mapped back to the raw x basis.
Regression polyreg(std::span<const std::pair<double, double>> pairs, std::size_t degree);

/// Evaluate a constant-first polynomial.
double polyval(std::span<const double> coefficients, double x) noexcept;

}  // namespace insightd
