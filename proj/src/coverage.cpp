#include "arealk/coverage.hpp"

#include "arealk/parallel.hpp"

#include <cmath>
#include <numbers>

namespace arealk {

CoverageTable CoverageTable::build(const StudyArea& sa, const RadiusGrid& radii, int workers) {
    const int n = sa.n_units();
    const int nr = radii.count();

    CoverageTable table;
    table.rows_.resize(static_cast<std::size_t>(n));
    table.radii_original_ = radii.values();
    table.study_fingerprint_ = sa.fingerprint();
    table.inv_disc_area_.resize(nr);

    Eigen::ArrayXd r_internal(nr);
    for (int l = 0; l < nr; ++l) {
        r_internal[l] = sa.to_internal(radii[l]);
        table.inv_disc_area_[l] = 1.0 / (std::numbers::pi * r_internal[l] * r_internal[l]);
    }
    const double r_max = r_internal[nr - 1];

    parallel_for(n, workers, [&](int i) {
        const Point c = sa.unit(i).centroid;
        std::vector<std::int32_t> candidates;
        sa.units_near(c, r_max, candidates);
        std::sort(candidates.begin(), candidates.end());

        Row& row = table.rows_[static_cast<std::size_t>(i)];
        row.units.reserve(candidates.size());
        std::vector<Eigen::ArrayXd> kept;
        Eigen::ArrayXd areas(nr);
        for (std::int32_t j : candidates) {
            bool any = false;
            for (int l = 0; l < nr; ++l) {
                areas[l] = disc_polygon_intersection_area(c, r_internal[l], sa.unit(j).geometry);
                if (areas[l] > 0.0) any = true;
            }
            if (!any) continue;
            row.units.push_back(j);
            kept.push_back(areas);
        }
        row.areas.resize(static_cast<Eigen::Index>(kept.size()), nr);
        for (std::size_t k = 0; k < kept.size(); ++k)
            row.areas.row(static_cast<Eigen::Index>(k)) = kept[k].transpose();
    });

    return table;
}

void CoverageTable::local_fractions(const Pattern& y, int i, Eigen::ArrayXd& out) const {
    const Row& row = rows_[static_cast<std::size_t>(i)];
    out.setZero(n_radii());
    for (std::size_t k = 0; k < row.units.size(); ++k) {
        if (y.observed(row.units[k]))
            out += row.areas.row(static_cast<Eigen::Index>(k)).transpose().array();
    }
    out *= inv_disc_area_;
}

void CoverageTable::accumulate_observed(const Pattern& y, Eigen::ArrayXd& sums) const {
    sums.setZero(n_radii());
    Eigen::ArrayXd local(n_radii());
    for (int i = 0; i < n_units(); ++i) {
        if (!y.observed(i)) continue;
        local_fractions(y, i, local);
        sums += local;
    }
}

} // namespace arealk
