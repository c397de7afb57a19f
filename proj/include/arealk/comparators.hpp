#pragma once

#include "arealk/pattern.hpp"
#include "arealk/radius_grid.hpp"
#include "arealk/rkad.hpp"
#include "arealk/sampling.hpp"
#include "arealk/study_area.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace arealk {

/// Point pattern with its observation window, in original coordinates.
struct PointPattern {
    Eigen::Matrix2Xd points;
    PolygonSet window;
    double window_area = 0.0;

    [[nodiscard]] int n_points() const { return static_cast<int>(points.cols()); }
};

enum class EdgeCorrection { None, Isotropic };

/// Centroids of the observed units as a point pattern; the window is the
/// study-area footprint. Centroids of non-convex units may fall outside
/// their unit (and outside the window).
PointPattern centroid_pattern(const StudyArea& sa, const Pattern& y);

/// K function estimate at radius r. Pairs at distance exactly r do not
/// count: the indicator is d < r, which keeps the estimator faithful for
/// lattice patterns whose minimum spacing coincides with an evaluation
/// radius. Isotropic correction reweights each pair by the inverse fraction
/// of the distance circle inside the window; a point outside the window
/// falls back to weight 1 (counted in fallback_points when provided).
double k_hat(const PointPattern& pp, double r, EdgeCorrection correction,
             int* fallback_points = nullptr);

/// K function at all radii in one pass over the pairwise distances.
Eigen::ArrayXd k_function(const PointPattern& pp, const RadiusGrid& radii,
                          EdgeCorrection correction, int* fallback_points = nullptr);

struct KRadiusRow {
    double radius = 0.0;
    double k_obs = 0.0;
    double l_obs = 0.0;
    double env_lo = 0.0;
    double env_hi = 0.0;
    bool reject = false;
};

struct KResult {
    Alternative alternative = Alternative::TwoSided;
    double alpha = 0.05;
    int n_sims = 0;
    std::vector<KRadiusRow> rows;
};

/// Pointwise min/max envelope test against nsim simulated binomial
/// processes (n uniform points in the window). Clustering rejects strictly
/// above the upper envelope, dispersion strictly below the lower one.
KResult k_envelope_test(const PointPattern& pp, const RadiusGrid& radii, int nsim,
                        std::uint64_t seed, Alternative alternative, double alpha,
                        EdgeCorrection correction = EdgeCorrection::Isotropic, int workers = 1);

enum class AnnWindow {
    Hull,   // convex hull of the points (the common package default)
    Extent, // the pattern's stored window area
};

struct AnnResult {
    double mean_nn_distance = 0.0;
    double expected_distance = 0.0;
    double ratio = 0.0;
    double z_score = 0.0;
    double p_value = 0.0;
    bool reject = false;
};

/// Average nearest neighbor test with the classic constants
/// (expected = 0.5 sqrt(A/n), se = 0.26136 / sqrt(n^2/A)), no edge
/// correction.
AnnResult ann_test(const PointPattern& pp, double alpha, Alternative alternative,
                   AnnWindow window = AnnWindow::Hull);

/// Candidate scan zones: for every center unit, the units ordered by
/// centroid distance; prefixes containing up to half of all units form the
/// zone family.
class ZoneFamily {
public:
    explicit ZoneFamily(const StudyArea& sa);

    [[nodiscard]] int n_units() const { return n_; }
    [[nodiscard]] int max_zone_size() const { return max_zone_; }
    [[nodiscard]] const std::vector<std::int32_t>& order(int center) const {
        return order_[static_cast<std::size_t>(center)];
    }

private:
    int n_ = 0;
    int max_zone_ = 0;
    std::vector<std::vector<std::int32_t>> order_;
};

struct ScanZone {
    std::int32_t center = -1;
    double radius = 0.0; // centroid distance of the farthest member, original units
    std::vector<std::int32_t> members;
};

struct ScanResult {
    ScanZone best_zone;
    double llr = 0.0;
    double p_value = 1.0;
    bool reject = false;
};

/// Cached null sample of max-LLR values for a fixed observation count,
/// reusable across repeated tests on the same study area.
struct ScanNull {
    std::uint64_t fingerprint = 0;
    std::uint64_t seed = 0;
    int n_cases = 0;
    int n_sims = 0;
    std::vector<double> max_llr; // sorted ascending
};

/// Max LLR over the zone family for a pattern; fills `best` when non-null.
double scan_statistic(const ZoneFamily& zones, const Pattern& y, ScanZone* best = nullptr);

ScanNull make_scan_null(const StudyArea& sa, const ZoneFamily& zones, int n_cases, int nsim,
                        std::uint64_t seed, int workers = 1);

/// Circular binomial scan test: zones grow around each unit centroid up to
/// half the units; the one-sided high-rate LLR is maximized over the family
/// and calibrated with a Monte Carlo p-value under equal-probability
/// sampling.
ScanResult scan_test(const StudyArea& sa, const Pattern& y, int nsim, std::uint64_t seed,
                     double alpha, const ZoneFamily* zones = nullptr,
                     const ScanNull* null_sample = nullptr, int workers = 1);

} // namespace arealk
