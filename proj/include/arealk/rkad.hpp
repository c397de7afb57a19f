#pragma once

#include "arealk/coverage.hpp"
#include "arealk/pattern.hpp"
#include "arealk/radius_grid.hpp"
#include "arealk/sampling.hpp"
#include "arealk/study_area.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace arealk {

enum class Alternative { Clustering, Dispersion, TwoSided };

/// Monte Carlo null for the areal coverage statistic at a fixed observation
/// count n: the estimated null mean coverage per radius and the sorted
/// sample of null statistic values.
struct NullDistribution {
    std::uint64_t fingerprint = 0; // study-area content hash
    std::uint64_t seed = 0;
    int n = 0;
    int n_sims = 0;
    Eigen::ArrayXd radii;    // original units
    Eigen::ArrayXd m_hat;    // null mean coverage fraction per radius
    std::vector<std::vector<double>> t_samples; // per radius, sorted ascending
};

struct RadiusDecision {
    double radius = 0.0;
    double m_avg = 0.0;       // observed average coverage fraction
    double t_obs = 0.0;
    double crit_lo = 0.0;     // NaN when the tail is not tested
    double crit_hi = 0.0;     // NaN when the tail is not tested
    double quantile_pos = 0.0; // empirical position of t_obs among null samples
    bool reject = false;
};

struct RkadResult {
    Alternative alternative = Alternative::TwoSided;
    double alpha = 0.05;
    std::vector<RadiusDecision> rows;
};

/// Coverage fraction for observed unit i: the share of the radius-r disc at
/// unit i's centroid lying in observed units. r in original units.
/// Requires y(i) == 1 (the statistic is undefined otherwise).
double m_local(const StudyArea& sa, const Pattern& y, int i, double r);

/// Average of m_local over all observed units.
double m_avg(const StudyArea& sa, const Pattern& y, double r);

/// Mean absolute deviation of the observed local coverages from the null
/// mean m_hat.
double t_statistic(const StudyArea& sa, const Pattern& y, double r, double m_hat);

struct EstimateNullOptions {
    int workers = 1;
    /// Recompute per-simulation locals from their streams in a second pass
    /// instead of storing G x n x radii values.
    bool low_memory = false;
    /// Reuse a coverage table built for the same study area and radii.
    const CoverageTable* table = nullptr;
};

/// Simulates n_sims equal-probability patterns of size n, estimates the null
/// mean coverage per radius, then evaluates the statistic for each simulated
/// pattern against that mean (the two-pass scheme the statistic requires).
NullDistribution estimate_null(const StudyArea& sa, int n, const RadiusGrid& radii, int n_sims,
                               std::uint64_t seed, const EstimateNullOptions& options = {});

/// Exact null mean coverage by enumeration of all C(N, n) equal-probability
/// patterns. Throws BudgetError when C(N, n) > 1e6. Test oracle for the
/// Monte Carlo estimate.
double exact_m_null(const StudyArea& sa, int n, double r);

/// Quantile test against a Monte Carlo null: the clustering alternative
/// rejects when t_obs strictly exceeds the ceil((1-alpha) G)-th order
/// statistic, the dispersion alternative when t_obs falls strictly below the
/// ceil(alpha G)-th, and the two-sided test splits alpha across both tails.
/// Ties fail to reject.
RkadResult rkad_test(const StudyArea& sa, const Pattern& y, const NullDistribution& null_dist,
                     Alternative alternative, double alpha,
                     const CoverageTable* table = nullptr);

/// Order-statistic index (1-based) for the empirical p-quantile of n_sims
/// samples; fp-robust for p*n_sims landing on an integer.
int quantile_order_index(double p, int n_sims);

} // namespace arealk
