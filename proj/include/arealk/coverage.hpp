#pragma once

#include "arealk/pattern.hpp"
#include "arealk/radius_grid.hpp"
#include "arealk/study_area.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace arealk {

/// Precomputed disc-unit intersection areas: for each unit i and radius r_l,
/// the area of disc(centroid_i, r_l) shared with every unit j the disc can
/// reach. All the Monte Carlo machinery reduces to sparse sums over these
/// rows, so the geometry kernel runs once per (study area, radius grid).
class CoverageTable {
public:
    static CoverageTable build(const StudyArea& sa, const RadiusGrid& radii, int workers = 1);

    [[nodiscard]] int n_units() const { return static_cast<int>(rows_.size()); }
    [[nodiscard]] int n_radii() const { return static_cast<int>(inv_disc_area_.size()); }
    [[nodiscard]] const Eigen::ArrayXd& radii_original() const { return radii_original_; }
    [[nodiscard]] std::uint64_t study_fingerprint() const { return study_fingerprint_; }

    /// Coverage fractions m(r_l, i, y) for observed unit i under pattern y,
    /// one entry per radius. Requires y(i) == 1 to be meaningful; callers
    /// enforce that precondition.
    void local_fractions(const Pattern& y, int i, Eigen::ArrayXd& out) const;

    /// Sum of local fractions over all observed units (one entry per
    /// radius); divide by y.n for the pattern average.
    void accumulate_observed(const Pattern& y, Eigen::ArrayXd& sums) const;

private:
    struct Row {
        std::vector<std::int32_t> units;                              // reachable unit ids
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> areas; // units x radii
    };

    std::vector<Row> rows_;
    Eigen::ArrayXd inv_disc_area_;  // 1 / (pi r_l^2), internal units
    Eigen::ArrayXd radii_original_;
    std::uint64_t study_fingerprint_ = 0;
};

} // namespace arealk
