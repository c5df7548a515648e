#include "insightd/analytics.hpp"

#include "insightd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace insightd {

namespace {

void require_at_least(std::size_t have, std::size_t need, const char* what) {
    if (have < need)
        throw Error(ErrorCode::TooFewValues,
                    std::string(what) + " needs at least " + std::to_string(need) + " values, got " +
                        std::to_string(have));
}

double squared_distance(const Point2& a, const Point2& b) noexcept {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementations.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t index_draw(std::mt19937_64& rng, std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(unit_draw(rng) * static_cast<double>(n)));
}

}  // namespace

std::size_t Dbscan::noise_count() const noexcept {
    return static_cast<std::size_t>(std::count(assignment.begin(), assignment.end(), kNoise));
}

double Dbscan::noise_fraction() const noexcept {
    return assignment.empty() ? 0.0 : static_cast<double>(noise_count()) / static_cast<double>(assignment.size());
}

MeanVariance mean_variance(std::span<const double> xs) {
    require_at_least(xs.size(), 2, "mean/variance");
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, ss / (n - 1.0), xs.size()};
}

Range min_max(std::span<const double> xs) {
    require_at_least(xs.size(), 1, "range");
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    return {*lo, *hi};
}

Descriptive describe(std::span<const double> xs) { return {mean_variance(xs), min_max(xs)}; }

FreqCounts freq_counts(std::span<const std::string> cats) {
    require_at_least(cats.size(), 1, "frequency counts");
    FreqCounts out;
    for (const auto& c : cats) ++out.counts[c];
    out.total = cats.size();
    // std::map iterates lexicographically, so strict comparisons keep the first on ties.
    std::size_t best = 0;
    std::size_t worst = std::numeric_limits<std::size_t>::max();
    for (const auto& [cat, count] : out.counts) {
        if (count > best) {
            best = count;
            out.most = cat;
        }
        if (count < worst) {
            worst = count;
            out.least = cat;
        }
    }
    return out;
}

FreqComb freq_comb(std::span<const std::string> a, std::span<const std::string> b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::LengthMismatch,
                    "columns have " + std::to_string(a.size()) + " and " + std::to_string(b.size()) + " rows");
    require_at_least(a.size(), 1, "frequency combination");
    FreqComb out;
    for (std::size_t i = 0; i < a.size(); ++i) ++out.matrix[{a[i], b[i]}];
    out.total = a.size();
    std::size_t best = 0;
    for (const auto& [cell, count] : out.matrix) {
        if (count > best) {
            best = count;
            out.argmax = cell;
        }
    }
    return out;
}

Correlation pearson(std::span<const std::pair<double, double>> pairs) {
    require_at_least(pairs.size(), 3, "correlation");
    const double n = static_cast<double>(pairs.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : pairs) {
        sx += x;
        sy += y;
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const auto& [x, y] : pairs) {
        const double dx = x - mx;
        const double dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::ZeroVariance, "a coordinate is constant");
    const double rho = sxy / std::sqrt(sxx * syy);
    return {std::clamp(rho, -1.0, 1.0), pairs.size()};
}

std::vector<Point2> to_points(std::span<const std::pair<double, double>> pairs) {
    std::vector<Point2> out;
    out.reserve(pairs.size());
    for (const auto& [x, y] : pairs) out.push_back({x, y});
    return out;
}

std::vector<Point2> min_max_scale(std::span<const Point2> points) {
    std::vector<Point2> out(points.begin(), points.end());
    if (points.empty()) return out;
    double lx = points[0].x, hx = points[0].x, ly = points[0].y, hy = points[0].y;
    for (const auto& p : points) {
        lx = std::min(lx, p.x);
        hx = std::max(hx, p.x);
        ly = std::min(ly, p.y);
        hy = std::max(hy, p.y);
    }
    const double wx = hx - lx;
    const double wy = hy - ly;
    for (auto& p : out) {
        p.x = wx > 0.0 ? (p.x - lx) / wx : 0.0;
        p.y = wy > 0.0 ? (p.y - ly) / wy : 0.0;
    }
    return out;
}

namespace {

struct Assignment {
    std::vector<std::size_t> labels;
    double sse = 0.0;
};

Assignment assign_nearest(std::span<const Point2> points, std::span<const Point2> centroids) {
    Assignment out;
    out.labels.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t best = 0;
        double best_d = squared_distance(points[i], centroids[0]);
        for (std::size_t c = 1; c < centroids.size(); ++c) {
            const double d = squared_distance(points[i], centroids[c]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        out.labels[i] = best;
        out.sse += best_d;
    }
    return out;
}

// Empty clusters keep their previous centroid.
void update_centroids(std::span<const Point2> points, std::span<const std::size_t> labels,
                      std::vector<Point2>& centroids) {
    std::vector<Point2> sums(centroids.size());
    std::vector<std::size_t> counts(centroids.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        sums[labels[i]].x += points[i].x;
        sums[labels[i]].y += points[i].y;
        ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        if (counts[c] == 0) continue;
        centroids[c] = {sums[c].x / static_cast<double>(counts[c]), sums[c].y / static_cast<double>(counts[c])};
    }
}

std::vector<Point2> kmeanspp_seed(std::span<const Point2> points, std::size_t k, std::mt19937_64& rng) {
    std::vector<Point2> centroids;
    centroids.reserve(k);
    centroids.push_back(points[index_draw(rng, points.size())]);
    std::vector<double> nearest(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) nearest[i] = squared_distance(points[i], centroids[0]);

    while (centroids.size() < k) {
        double total = 0.0;
        for (double d : nearest) total += d;
        std::size_t pick = points.size() - 1;
        if (total > 0.0) {
            const double target = unit_draw(rng) * total;
            double cumulative = 0.0;
            for (std::size_t i = 0; i < points.size(); ++i) {
                if (nearest[i] == 0.0) continue;
                cumulative += nearest[i];
                if (cumulative > target) {
                    pick = i;
                    break;
                }
            }
            // Rounding can leave target just above the final cumulative sum.
            if (nearest[pick] == 0.0)
                for (std::size_t i = points.size(); i-- > 0;)
                    if (nearest[i] > 0.0) {
                        pick = i;
                        break;
                    }
        } else {
            pick = index_draw(rng, points.size());
        }
        centroids.push_back(points[pick]);
        for (std::size_t i = 0; i < points.size(); ++i)
            nearest[i] = std::min(nearest[i], squared_distance(points[i], centroids.back()));
    }
    return centroids;
}

}  // namespace

KMeans kmeans(std::span<const Point2> raw, std::size_t k, std::uint64_t seed, Scaling scaling) {
    if (k == 0) throw std::invalid_argument("kmeans: k must be positive");
    require_at_least(raw.size(), k, "k-means");
    const std::vector<Point2> points =
        scaling == Scaling::min_max ? min_max_scale(raw) : std::vector<Point2>(raw.begin(), raw.end());

    std::mt19937_64 rng(seed);
    KMeans out;
    out.k = k;
    out.centroids = kmeanspp_seed(points, k, rng);

    auto current = assign_nearest(points, out.centroids);
    out.objective_trace.push_back(current.sse);
    while (out.iterations < kKMeansMaxIterations) {
        update_centroids(points, current.labels, out.centroids);
        auto next = assign_nearest(points, out.centroids);
        ++out.iterations;
        out.objective_trace.push_back(next.sse);
        const bool stable = next.labels == current.labels;
        current = std::move(next);
        if (stable) break;
    }
    // Report centroids as the means of the final partition.
    update_centroids(points, current.labels, out.centroids);
    out.assignment = std::move(current.labels);

    Point2 mean{};
    for (const auto& p : points) {
        mean.x += p.x;
        mean.y += p.y;
    }
    mean.x /= static_cast<double>(points.size());
    mean.y /= static_cast<double>(points.size());

    double distance_sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d2 = squared_distance(points[i], out.centroids[out.assignment[i]]);
        out.sse += d2;
        distance_sum += std::sqrt(d2);
        out.sse_total += squared_distance(points[i], mean);
    }
    out.avg_error = distance_sum / static_cast<double>(points.size());
    return out;
}

Dbscan dbscan(std::span<const Point2> raw, double eps, std::size_t min_pts, Scaling scaling) {
    if (!(eps > 0.0)) throw std::invalid_argument("dbscan: eps must be positive");
    if (min_pts == 0) throw std::invalid_argument("dbscan: min_pts must be positive");
    require_at_least(raw.size(), min_pts, "DBSCAN");
    const std::vector<Point2> points =
        scaling == Scaling::min_max ? min_max_scale(raw) : std::vector<Point2>(raw.begin(), raw.end());
    const std::size_t n = points.size();
    const double eps2 = eps * eps;

    const auto region = [&](std::size_t i) {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n; ++j)
            if (squared_distance(points[i], points[j]) <= eps2) out.push_back(j);
        return out;
    };

    constexpr std::int64_t kUnvisited = -2;
    Dbscan out;
    out.eps = eps;
    out.min_pts = min_pts;
    out.assignment.assign(n, kUnvisited);
    out.core.assign(n, false);

    for (std::size_t i = 0; i < n; ++i) {
        if (out.assignment[i] != kUnvisited) continue;
        auto seeds = region(i);
        if (seeds.size() < min_pts) {
            out.assignment[i] = Dbscan::kNoise;
            continue;
        }
        const auto cluster = static_cast<std::int64_t>(out.cluster_count++);
        out.assignment[i] = cluster;
        out.core[i] = true;
        for (std::size_t q = 0; q < seeds.size(); ++q) {
            const std::size_t j = seeds[q];
            if (out.assignment[j] == Dbscan::kNoise) out.assignment[j] = cluster;
            if (out.assignment[j] != kUnvisited) continue;
            out.assignment[j] = cluster;
            auto neighbours = region(j);
            if (neighbours.size() >= min_pts) {
                out.core[j] = true;
                seeds.insert(seeds.end(), neighbours.begin(), neighbours.end());
            }
        }
    }
    return out;
}

double polyval(std::span<const double> coefficients, double x) noexcept {
    double acc = 0.0;
    for (std::size_t i = coefficients.size(); i-- > 0;) acc = acc * x + coefficients[i];
    return acc;
}

namespace {

struct FitQuality {
    double rmse = 0.0;
    double r_squared = 0.0;
};

template <typename Predict>
FitQuality fit_quality(std::span<const std::pair<double, double>> pairs, Predict predict) {
    const double n = static_cast<double>(pairs.size());
    double my = 0.0;
    for (const auto& [x, y] : pairs) my += y;
    my /= n;
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& [x, y] : pairs) {
        const double r = y - predict(x);
        ss_res += r * r;
        ss_tot += (y - my) * (y - my);
    }
    FitQuality q;
    q.rmse = std::sqrt(ss_res / n);
    q.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 0.0;
    return q;
}

double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

}  // namespace

Regression linreg(std::span<const std::pair<double, double>> pairs) {
    require_at_least(pairs.size(), 3, "linear regression");
    const double n = static_cast<double>(pairs.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pairs) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pairs) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0) throw Error(ErrorCode::ZeroVariance, "x is constant");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;

    Regression out;
    out.degree = 1;
    out.coefficients = {intercept, slope};
    const auto q = fit_quality(pairs, [&](double x) { return my + slope * (x - mx); });
    out.rmse = q.rmse;
    out.r_squared = q.r_squared;
    return out;
}

Regression polyreg(std::span<const std::pair<double, double>> pairs, std::size_t degree) {
    if (degree == 0 || degree > 6) throw std::invalid_argument("polyreg: degree must be in [1, 6]");
    require_at_least(pairs.size(), degree + 1, "polynomial regression");
    const std::size_t n = pairs.size();
    const std::size_t cols = degree + 1;

    double centre = 0.0;
    for (const auto& [x, y] : pairs) centre += x;
    centre /= static_cast<double>(n);
    double spread = 0.0;
    for (const auto& [x, y] : pairs) spread = std::max(spread, std::abs(x - centre));
    if (spread == 0.0) throw Error(ErrorCode::SingularSystem, "x is constant");

    // Column-major design matrix on t = (x - centre) / spread, plus rhs.
    std::vector<double> a(n * cols);
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (pairs[i].first - centre) / spread;
        double p = 1.0;
        for (std::size_t j = 0; j < cols; ++j) {
            a[j * n + i] = p;
            p *= t;
        }
        rhs[i] = pairs[i].second;
    }
    const auto at = [&](std::size_t row, std::size_t col) -> double& { return a[col * n + row]; };

    // Householder QR, applying each reflector to the rhs as we go.
    std::vector<double> diag(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        double norm = 0.0;
        for (std::size_t i = j; i < n; ++i) norm += at(i, j) * at(i, j);
        norm = std::sqrt(norm);
        const double alpha = at(j, j) > 0.0 ? -norm : norm;
        diag[j] = alpha;
        if (norm == 0.0) continue;
        at(j, j) -= alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = j; i < n; ++i) vnorm2 += at(i, j) * at(i, j);
        if (vnorm2 == 0.0) continue;
        for (std::size_t c = j + 1; c < cols; ++c) {
            double dot = 0.0;
            for (std::size_t i = j; i < n; ++i) dot += at(i, j) * at(i, c);
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t i = j; i < n; ++i) at(i, c) -= f * at(i, j);
        }
        double dot = 0.0;
        for (std::size_t i = j; i < n; ++i) dot += at(i, j) * rhs[i];
        const double f = 2.0 * dot / vnorm2;
        for (std::size_t i = j; i < n; ++i) rhs[i] -= f * at(i, j);
    }

    double largest = 0.0;
    for (double d : diag) largest = std::max(largest, std::abs(d));
    for (double d : diag)
        if (std::abs(d) <= 1e-10 * largest)
            throw Error(ErrorCode::SingularSystem, "too few distinct x values for degree " + std::to_string(degree));

    std::vector<double> beta(cols);
    for (std::size_t j = cols; j-- > 0;) {
        double s = rhs[j];
        for (std::size_t c = j + 1; c < cols; ++c) s -= at(j, c) * beta[c];
        beta[j] = s / diag[j];
    }

    // sum_j beta_j ((x - c)/s)^j expanded into powers of x.
    Regression out;
    out.degree = degree;
    out.coefficients.assign(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
        const double scale = beta[j] / std::pow(spread, static_cast<double>(j));
        for (std::size_t i = 0; i <= j; ++i)
            out.coefficients[i] += scale * binomial(j, i) * std::pow(-centre, static_cast<double>(j - i));
    }
    const auto q = fit_quality(pairs, [&](double x) { return polyval(beta, (x - centre) / spread); });
    out.rmse = q.rmse;
    out.r_squared = q.r_squared;
    return out;
}

}  // namespace insightd
