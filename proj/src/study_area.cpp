#include "arealk/study_area.hpp"

#include "arealk/error.hpp"
#include "arealk/hash.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace arealk {

namespace {

/// Minimum distance between segments (a0,a1) and (b0,b1).
double segment_distance(const Point& a0, const Point& a1, const Point& b0, const Point& b1) {
    auto cross = [](const Point& u, const Point& v) { return u.x() * v.y() - u.y() * v.x(); };
    const Point da = a1 - a0, db = b1 - b0;
    const double d1 = cross(db, a0 - b0), d2 = cross(db, a1 - b0);
    const double d3 = cross(da, b0 - a0), d4 = cross(da, b1 - a0);
    if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return 0.0; // proper crossing

    auto point_seg = [](const Point& p, const Point& s0, const Point& s1) {
        const Point d = s1 - s0;
        const double len2 = d.squaredNorm();
        const double t = len2 > 0.0 ? std::clamp((p - s0).dot(d) / len2, 0.0, 1.0) : 0.0;
        return (p - (s0 + t * d)).norm();
    };
    return std::min(std::min(point_seg(a0, b0, b1), point_seg(a1, b0, b1)),
                    std::min(point_seg(b0, a0, a1), point_seg(b1, a0, a1)));
}

/// Length of the collinear overlap between two segments, 0 if they are not
/// collinear within tol.
double collinear_overlap(const Point& a0, const Point& a1, const Point& b0, const Point& b1,
                         double tol) {
    const Point da = a1 - a0;
    const double len = da.norm();
    if (len <= 0.0) return 0.0;
    const Point dir = da / len;
    auto offside = [&](const Point& p) {
        const Point rel = p - a0;
        return std::abs(dir.x() * rel.y() - dir.y() * rel.x());
    };
    if (offside(b0) > tol || offside(b1) > tol) return 0.0;
    double s0 = dir.dot(b0 - a0);
    double s1 = dir.dot(b1 - a0);
    if (s0 > s1) std::swap(s0, s1);
    return std::max(0.0, std::min(len, s1) - std::max(0.0, s0));
}

template <class Fn>
void for_each_edge(const PolygonSet& g, Fn&& fn) {
    auto ring_edges = [&](const Ring& ring) {
        const Eigen::Index n = ring.cols();
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index j = (i + 1 == n) ? 0 : i + 1;
            fn(Point(ring.col(i)), Point(ring.col(j)));
        }
    };
    for (const auto& part : g.parts) {
        ring_edges(part.exterior);
        for (const auto& hole : part.holes) ring_edges(hole);
    }
}

PolygonSet rescale(const PolygonSet& g, const Point& offset, double scale) {
    PolygonSet out = g;
    for (auto& part : out.parts) {
        part.exterior = (part.exterior.colwise() - offset) / scale;
        for (auto& hole : part.holes) hole = (hole.colwise() - offset) / scale;
    }
    return out;
}

void hash_polygon(Fnv1a64& h, const PolygonSet& g) {
    h.u64(g.parts.size());
    for (const auto& part : g.parts) {
        h.u64(static_cast<std::uint64_t>(part.exterior.cols()));
        for (Eigen::Index c = 0; c < part.exterior.cols(); ++c) {
            h.f64(part.exterior(0, c));
            h.f64(part.exterior(1, c));
        }
        h.u64(part.holes.size());
        for (const auto& hole : part.holes) {
            h.u64(static_cast<std::uint64_t>(hole.cols()));
            for (Eigen::Index c = 0; c < hole.cols(); ++c) {
                h.f64(hole(0, c));
                h.f64(hole(1, c));
            }
        }
    }
}

/// Sampled Monte Carlo estimate of pairwise interior overlap; rejects unit
/// pairs that overlap by more than a sliver. Cheap stand-in for exact
/// polygon intersection, which this library deliberately does not provide.
void check_disjoint(const std::vector<ArealUnit>& units, const StaticRTree& index) {
    constexpr int kMaxPairs = 256;
    constexpr int kSamplesPerPair = 192;
    std::mt19937_64 rng(0x5eedu); // fixed: validation must be deterministic
    int checked = 0;
    std::vector<std::int32_t> candidates;
    for (std::size_t i = 0; i < units.size() && checked < kMaxPairs; ++i) {
        const Box bi = units[i].geometry.bbox();
        index.query(bi, candidates);
        for (std::int32_t j : candidates) {
            if (j <= static_cast<std::int32_t>(i) || checked >= kMaxPairs) continue;
            const Box bj = units[static_cast<std::size_t>(j)].geometry.bbox();
            Box overlap{bi.lo.cwiseMax(bj.lo), bi.hi.cwiseMin(bj.hi)};
            const double w = overlap.hi.x() - overlap.lo.x();
            const double h = overlap.hi.y() - overlap.lo.y();
            if (w <= 0.0 || h <= 0.0) continue;
            ++checked;
            int hits = 0;
            std::uniform_real_distribution<double> ux(overlap.lo.x(), overlap.hi.x());
            std::uniform_real_distribution<double> uy(overlap.lo.y(), overlap.hi.y());
            for (int s = 0; s < kSamplesPerPair; ++s) {
                const Point p{ux(rng), uy(rng)};
                if (point_in_polygon(p, units[i].geometry) &&
                    point_in_polygon(p, units[static_cast<std::size_t>(j)].geometry))
                    ++hits;
            }
            const double est = static_cast<double>(hits) / kSamplesPerPair * w * h;
            const double tol = 1e-3 * std::min(units[i].area, units[static_cast<std::size_t>(j)].area);
            if (est > tol)
                throw ValidationError("units " + units[i].id + " and " +
                                      units[static_cast<std::size_t>(j)].id +
                                      " overlap beyond tolerance");
        }
    }
}

} // namespace

AdjacencyList build_adjacency(const std::vector<ArealUnit>& units, const StaticRTree& index,
                              Contiguity rule, double tol) {
    const std::size_t n = units.size();
    AdjacencyList adj;
    adj.neighbors.resize(n);
    std::vector<std::int32_t> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        const Box query = units[i].geometry.bbox().expanded(tol);
        index.query(query, candidates);
        for (std::int32_t j : candidates) {
            if (j <= static_cast<std::int32_t>(i)) continue;
            const auto& gj = units[static_cast<std::size_t>(j)].geometry;
            bool linked = false;
            if (rule == Contiguity::Rook) {
                double shared = 0.0;
                for_each_edge(units[i].geometry, [&](const Point& a0, const Point& a1) {
                    if (shared > tol) return;
                    Box eb{a0.cwiseMin(a1), a0.cwiseMax(a1)};
                    eb = eb.expanded(tol);
                    for_each_edge(gj, [&](const Point& b0, const Point& b1) {
                        if (shared > tol) return;
                        if (!eb.contains(b0) && !eb.contains(b1) &&
                            !eb.intersects(Box{b0.cwiseMin(b1), b0.cwiseMax(b1)}))
                            return;
                        shared += collinear_overlap(a0, a1, b0, b1, tol);
                    });
                });
                linked = shared > tol;
            } else {
                for_each_edge(units[i].geometry, [&](const Point& a0, const Point& a1) {
                    if (linked) return;
                    Box eb{a0.cwiseMin(a1), a0.cwiseMax(a1)};
                    eb = eb.expanded(tol);
                    for_each_edge(gj, [&](const Point& b0, const Point& b1) {
                        if (linked) return;
                        if (!eb.intersects(Box{b0.cwiseMin(b1), b0.cwiseMax(b1)})) return;
                        if (segment_distance(a0, a1, b0, b1) <= tol) linked = true;
                    });
                });
            }
            if (linked) {
                adj.neighbors[i].push_back(j);
                adj.neighbors[static_cast<std::size_t>(j)].push_back(static_cast<std::int32_t>(i));
            }
        }
    }
    for (auto& nb : adj.neighbors) std::sort(nb.begin(), nb.end());
    return adj;
}

StudyArea StudyArea::build(std::vector<UnitInput> inputs, const BuildOptions& options) {
    if (inputs.empty()) throw ValidationError("study area needs at least one unit");

    StudyArea sa;

    // Original-frame bbox determines the internal rescaling.
    Box bbox_orig;
    bool first = true;
    for (auto& in : inputs) {
        in.geometry = normalize(std::move(in.geometry));
        const Box b = in.geometry.bbox();
        if (first) {
            bbox_orig = b;
            first = false;
        } else {
            bbox_orig.merge(b);
        }
    }
    const double diag = bbox_orig.diagonal();
    if (!(diag > 0.0)) throw ValidationError("study area has zero extent");
    sa.scale_ = diag;
    sa.offset_ = bbox_orig.lo;

    sa.units_.reserve(inputs.size());
    std::vector<Box> boxes;
    boxes.reserve(inputs.size());
    for (auto& in : inputs) {
        ArealUnit unit;
        unit.id = std::move(in.id);
        unit.geometry = rescale(in.geometry, sa.offset_, sa.scale_);
        unit.area = polygon_area(unit.geometry);
        if (!(unit.area > 0.0))
            throw ValidationError("unit " + unit.id + " has zero area");
        unit.centroid = polygon_centroid(unit.geometry);
        boxes.push_back(unit.geometry.bbox());
        sa.total_area_internal_ += unit.area;
        sa.units_.push_back(std::move(unit));
    }

    sa.bbox_ = {Point{0.0, 0.0}, (bbox_orig.hi - bbox_orig.lo) / sa.scale_};
    sa.index_ = StaticRTree(boxes);

    if (options.footprint) {
        sa.footprint_ = rescale(normalize(*options.footprint), sa.offset_, sa.scale_);
    } else {
        // Units partition the study area, so their parts together are a
        // valid (if redundant) footprint polygon.
        for (const auto& unit : sa.units_)
            for (const auto& part : unit.geometry.parts) sa.footprint_.parts.push_back(part);
    }

    const double tol = options.tol_scale; // internal frame: bbox diagonal == 1
    sa.adjacency_ = build_adjacency(sa.units_, sa.index_, options.contiguity, tol);

    if (options.validate_disjoint) check_disjoint(sa.units_, sa.index_);

    Fnv1a64 h;
    h.u64(sa.units_.size());
    for (const auto& unit : sa.units_) hash_polygon(h, unit.geometry);
    sa.fingerprint_ = h.value();
    return sa;
}

void StudyArea::units_near(const Point& center, double r, std::vector<std::int32_t>& out) const {
    const Box q{center.array() - r, center.array() + r};
    index_.query(q, out);
}

double observed_coverage(const StudyArea& sa, const Pattern& y, const Point& center, double r) {
    if (y.size() != sa.n_units())
        throw ValidationError("pattern length does not match unit count");
    if (!(r > 0.0)) throw ValidationError("radius must be positive");
    const Point c = sa.to_internal_point(center);
    const double ri = sa.to_internal(r);
    std::vector<std::int32_t> candidates;
    sa.units_near(c, ri, candidates);
    double area = 0.0;
    for (std::int32_t j : candidates) {
        if (!y.observed(j)) continue;
        area += disc_polygon_intersection_area(c, ri, sa.unit(j).geometry);
    }
    return area * sa.length_scale() * sa.length_scale();
}

} // namespace arealk
