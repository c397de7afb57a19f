#include "arealk/comparators.hpp"

#include "arealk/hash.hpp"
#include "arealk/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace arealk {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kEnvelopeSalt = 0x656e76ULL;
constexpr std::uint64_t kScanSalt = 0x7363616eULL;

struct WeightedPair {
    double distance = 0.0;
    double weight = 0.0;
};

/// All ordered-pair weights, sorted by distance, plus prefix sums; the K
/// estimate at any radius is then a binary search away.
std::vector<WeightedPair> pair_weights(const PointPattern& pp, EdgeCorrection correction,
                                       int* fallback_points) {
    const int n = pp.n_points();
    std::vector<double> point_weight; // per-point reciprocal arc fraction factors are pairwise
    std::vector<bool> in_window(static_cast<std::size_t>(n), true);
    if (correction == EdgeCorrection::Isotropic) {
        int outside = 0;
        for (int i = 0; i < n; ++i) {
            if (!point_in_polygon(pp.points.col(i), pp.window)) {
                in_window[static_cast<std::size_t>(i)] = false;
                ++outside;
            }
        }
        if (fallback_points) *fallback_points = outside;
    } else if (fallback_points) {
        *fallback_points = 0;
    }

    std::vector<WeightedPair> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = (pp.points.col(i) - pp.points.col(j)).norm();
            double w = 1.0;
            if (correction == EdgeCorrection::Isotropic && in_window[static_cast<std::size_t>(i)]) {
                const double frac = arc_fraction_inside(pp.points.col(i), d, pp.window);
                if (frac > 0.0) w = 1.0 / frac;
            }
            pairs.push_back({d, w});
        }
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const WeightedPair& a, const WeightedPair& b) { return a.distance < b.distance; });
    return pairs;
}

Eigen::ArrayXd k_from_pairs(const std::vector<WeightedPair>& pairs, const PointPattern& pp,
                            const Eigen::ArrayXd& radii) {
    const int n = pp.n_points();
    const double scale = pp.window_area / (static_cast<double>(n) * static_cast<double>(n));
    Eigen::ArrayXd out(radii.size());
    std::size_t idx = 0;
    double acc = 0.0;
    for (Eigen::Index l = 0; l < radii.size(); ++l) {
        // Strict d < r: pairs at exactly the evaluation radius stay out.
        while (idx < pairs.size() && pairs[idx].distance < radii[l]) acc += pairs[idx++].weight;
        out[l] = scale * acc;
    }
    return out;
}

/// Uniform points in the window by bbox rejection.
Eigen::Matrix2Xd uniform_points_in_window(const PolygonSet& window, const Box& bbox, int n,
                                          RngStream& rng) {
    Eigen::Matrix2Xd pts(2, n);
    for (int k = 0; k < n; ++k) {
        Point p;
        do {
            p = {rng.uniform(bbox.lo.x(), bbox.hi.x()), rng.uniform(bbox.lo.y(), bbox.hi.y())};
        } while (!point_in_polygon(p, window));
        pts.col(k) = p;
    }
    return pts;
}

double normal_upper_tail(double z) {
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

double xlogx_ratio(double x, double denom) {
    // x * ln(x / denom) with the 0 * ln(0) == 0 convention.
    if (x <= 0.0) return 0.0;
    return x * std::log(x / denom);
}

} // namespace

PointPattern centroid_pattern(const StudyArea& sa, const Pattern& y) {
    if (y.n < 1) throw UndefinedStatisticError("point pattern needs an observed unit");
    if (y.size() != sa.n_units())
        throw ValidationError("pattern length does not match unit count");
    PointPattern pp;
    pp.points.resize(2, y.n);
    int k = 0;
    for (int i = 0; i < sa.n_units(); ++i)
        if (y.observed(i)) pp.points.col(k++) = sa.centroid_original(i);
    // Footprint back in original coordinates.
    pp.window = sa.footprint();
    for (auto& part : pp.window.parts) {
        part.exterior = (part.exterior * sa.length_scale()).colwise() +
                        Eigen::Vector2d(sa.to_original_point(Point{0.0, 0.0}));
        for (auto& hole : part.holes)
            hole = (hole * sa.length_scale()).colwise() +
                   Eigen::Vector2d(sa.to_original_point(Point{0.0, 0.0}));
    }
    pp.window_area = sa.total_area();
    return pp;
}

double k_hat(const PointPattern& pp, double r, EdgeCorrection correction, int* fallback_points) {
    if (!(r > 0.0)) throw ValidationError("radius must be positive");
    RadiusGrid grid{(Eigen::ArrayXd(1) << r).finished()};
    return k_function(pp, grid, correction, fallback_points)[0];
}

Eigen::ArrayXd k_function(const PointPattern& pp, const RadiusGrid& radii,
                          EdgeCorrection correction, int* fallback_points) {
    if (pp.n_points() < 2)
        throw UndefinedStatisticError("K function needs at least two points");
    const auto pairs = pair_weights(pp, correction, fallback_points);
    return k_from_pairs(pairs, pp, radii.values());
}

KResult k_envelope_test(const PointPattern& pp, const RadiusGrid& radii, int nsim,
                        std::uint64_t seed, Alternative alternative, double alpha,
                        EdgeCorrection correction, int workers) {
    if (nsim < 1) throw ValidationError("envelope test needs at least one simulation");
    const double min_sims = 1.0 / alpha - 1.0;
    if (static_cast<double>(nsim) + 1e-9 < min_sims)
        throw ValidationError("too few simulations for a min/max envelope at this alpha");

    const Eigen::ArrayXd k_obs = k_function(pp, radii, correction);
    const Box bbox = pp.window.bbox();
    const int n = pp.n_points();
    const int nr = radii.count();

    Eigen::ArrayXXd sims(nsim, nr);
    parallel_for(nsim, workers, [&](int s) {
        RngStream rng(seed, mix64({kEnvelopeSalt, static_cast<std::uint64_t>(s)}));
        PointPattern sim;
        sim.points = uniform_points_in_window(pp.window, bbox, n, rng);
        sim.window = pp.window;
        sim.window_area = pp.window_area;
        sims.row(s) = k_function(sim, radii, correction).transpose();
    });

    KResult result;
    result.alternative = alternative;
    result.alpha = alpha;
    result.n_sims = nsim;
    result.rows.resize(static_cast<std::size_t>(nr));
    for (int l = 0; l < nr; ++l) {
        KRadiusRow& row = result.rows[static_cast<std::size_t>(l)];
        row.radius = radii[l];
        row.k_obs = k_obs[l];
        row.l_obs = std::sqrt(k_obs[l] / kPi);
        row.env_lo = sims.col(l).minCoeff();
        row.env_hi = sims.col(l).maxCoeff();
        switch (alternative) {
        case Alternative::Clustering:
            row.reject = row.k_obs > row.env_hi;
            break;
        case Alternative::Dispersion:
            row.reject = row.k_obs < row.env_lo;
            break;
        case Alternative::TwoSided:
            row.reject = row.k_obs > row.env_hi || row.k_obs < row.env_lo;
            break;
        }
    }
    return result;
}

AnnResult ann_test(const PointPattern& pp, double alpha, Alternative alternative,
                   AnnWindow window) {
    const int n = pp.n_points();
    if (n < 2) throw UndefinedStatisticError("nearest-neighbor test needs at least two points");

    double nn_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            best = std::min(best, (pp.points.col(i) - pp.points.col(j)).norm());
        }
        nn_sum += best;
    }
    const double mean_nn = nn_sum / n;

    double area = pp.window_area;
    if (window == AnnWindow::Hull) {
        const double hull = convex_hull_area(pp.points);
        if (hull > 0.0) area = hull;
    }

    AnnResult result;
    result.mean_nn_distance = mean_nn;
    result.expected_distance = 0.5 * std::sqrt(area / n);
    result.ratio = mean_nn / result.expected_distance;
    const double se = 0.26136 / std::sqrt(static_cast<double>(n) * static_cast<double>(n) / area);
    result.z_score = (mean_nn - result.expected_distance) / se;
    switch (alternative) {
    case Alternative::Clustering: // small distances
        result.p_value = 1.0 - normal_upper_tail(result.z_score);
        break;
    case Alternative::Dispersion: // large distances
        result.p_value = normal_upper_tail(result.z_score);
        break;
    case Alternative::TwoSided:
        result.p_value = 2.0 * normal_upper_tail(std::abs(result.z_score));
        break;
    }
    result.reject = result.p_value < alpha;
    return result;
}

ZoneFamily::ZoneFamily(const StudyArea& sa) : n_(sa.n_units()) {
    max_zone_ = n_ / 2;
    order_.resize(static_cast<std::size_t>(n_));
    std::vector<std::pair<double, std::int32_t>> dist(static_cast<std::size_t>(n_));
    for (int c = 0; c < n_; ++c) {
        const Point pc = sa.unit(c).centroid;
        for (int j = 0; j < n_; ++j) {
            dist[static_cast<std::size_t>(j)] = {
                (sa.unit(j).centroid - pc).squaredNorm(), static_cast<std::int32_t>(j)};
        }
        std::sort(dist.begin(), dist.end());
        auto& ord = order_[static_cast<std::size_t>(c)];
        ord.resize(static_cast<std::size_t>(max_zone_));
        for (int k = 0; k < max_zone_; ++k) ord[static_cast<std::size_t>(k)] = dist[static_cast<std::size_t>(k)].second;
    }
}

double scan_statistic(const ZoneFamily& zones, const Pattern& y, ScanZone* best) {
    const int N = zones.n_units();
    const int C = y.n;
    if (C < 1 || C >= N)
        throw UndefinedStatisticError("scan statistic needs 0 < cases < units");

    // ln tables shared across all prefixes.
    static thread_local std::vector<double> ln_cache;
    if (static_cast<int>(ln_cache.size()) < N + 1) {
        ln_cache.resize(static_cast<std::size_t>(N) + 1);
        ln_cache[0] = 0.0;
        for (int v = 1; v <= N; ++v) ln_cache[static_cast<std::size_t>(v)] = std::log(static_cast<double>(v));
    }
    const auto ln = [&](int v) { return ln_cache[static_cast<std::size_t>(v)]; };
    const double base = static_cast<double>(C) * (ln(C) - ln(N));

    double best_llr = 0.0;
    int best_center = -1;
    int best_size = 0;
    for (int c = 0; c < N; ++c) {
        const auto& ord = zones.order(c);
        int cases = 0;
        for (int s = 0; s < static_cast<int>(ord.size()); ++s) {
            cases += y.observed(ord[static_cast<std::size_t>(s)]) ? 1 : 0;
            const int size = s + 1;
            const int out_cases = C - cases;
            const int out_units = N - size;
            // One-sided: only zones with elevated inside rate score.
            if (static_cast<double>(cases) * out_units <= static_cast<double>(out_cases) * size)
                continue;
            double llr = -base;
            if (cases > 0) llr += cases * (ln(cases) - ln(size));
            if (out_cases > 0) llr += out_cases * (ln(out_cases) - ln(out_units));
            if (llr > best_llr) {
                best_llr = llr;
                best_center = c;
                best_size = size;
            }
        }
    }

    if (best && best_center >= 0) {
        best->center = best_center;
        const auto& ord = zones.order(best_center);
        best->members.assign(ord.begin(), ord.begin() + best_size);
    }
    return best_llr;
}

ScanNull make_scan_null(const StudyArea& sa, const ZoneFamily& zones, int n_cases, int nsim,
                        std::uint64_t seed, int workers) {
    if (nsim < 19) throw ValidationError("scan test needs at least 19 null simulations");
    ScanNull null_sample;
    null_sample.fingerprint = sa.fingerprint();
    null_sample.seed = seed;
    null_sample.n_cases = n_cases;
    null_sample.n_sims = nsim;
    null_sample.max_llr.resize(static_cast<std::size_t>(nsim));
    parallel_for(nsim, workers, [&](int s) {
        RngStream rng(seed, mix64({kScanSalt, static_cast<std::uint64_t>(s)}));
        const Pattern sim = swor_uniform(sa.n_units(), n_cases, rng);
        null_sample.max_llr[static_cast<std::size_t>(s)] = scan_statistic(zones, sim);
    });
    std::sort(null_sample.max_llr.begin(), null_sample.max_llr.end());
    return null_sample;
}

ScanResult scan_test(const StudyArea& sa, const Pattern& y, int nsim, std::uint64_t seed,
                     double alpha, const ZoneFamily* zones, const ScanNull* null_sample,
                     int workers) {
    if (y.size() != sa.n_units())
        throw ValidationError("pattern length does not match unit count");
    if (y.n < 1 || y.n >= sa.n_units())
        throw UndefinedStatisticError("scan test undefined when no unit or every unit is a case");

    ZoneFamily local_zones_storage(sa);
    const ZoneFamily& zf = zones ? *zones : local_zones_storage;

    ScanNull local_null;
    if (null_sample == nullptr) {
        local_null = make_scan_null(sa, zf, y.n, nsim, seed, workers);
        null_sample = &local_null;
    } else {
        if (null_sample->fingerprint != sa.fingerprint())
            throw CacheMismatchError("scan null was built for a different study area");
        if (null_sample->n_cases != y.n)
            throw CacheMismatchError("scan null conditions on a different case count");
    }

    ScanResult result;
    result.llr = scan_statistic(zf, y, &result.best_zone);
    if (result.best_zone.center >= 0 && !result.best_zone.members.empty()) {
        const Point pc = sa.unit(result.best_zone.center).centroid;
        const std::int32_t last = result.best_zone.members.back();
        result.best_zone.radius = sa.to_original((sa.unit(last).centroid - pc).norm());
    }

    const auto& samples = null_sample->max_llr;
    const auto ge = samples.end() - std::lower_bound(samples.begin(), samples.end(), result.llr);
    result.p_value = (1.0 + static_cast<double>(ge)) / (1.0 + static_cast<double>(samples.size()));
    result.reject = result.p_value <= alpha;
    return result;
}

} // namespace arealk
