#pragma once

#include <Eigen/Dense>

#include <vector>

namespace arealk {

using Point = Eigen::Vector2d;

/// Polygon ring stored column-wise (2 x V), open: the closing edge from the
/// last vertex back to the first is implicit. Exterior rings are
/// counterclockwise, hole rings clockwise after normalize().
using Ring = Eigen::Matrix2Xd;

struct Box {
    Point lo{0.0, 0.0};
    Point hi{0.0, 0.0};

    [[nodiscard]] bool intersects(const Box& o) const {
        return lo.x() <= o.hi.x() && o.lo.x() <= hi.x() &&
               lo.y() <= o.hi.y() && o.lo.y() <= hi.y();
    }
    [[nodiscard]] bool contains(const Point& p) const {
        return p.x() >= lo.x() && p.x() <= hi.x() &&
               p.y() >= lo.y() && p.y() <= hi.y();
    }
    [[nodiscard]] Box expanded(double pad) const {
        return {lo.array() - pad, hi.array() + pad};
    }
    [[nodiscard]] double diagonal() const { return (hi - lo).norm(); }
    void merge(const Box& o) {
        lo = lo.cwiseMin(o.lo);
        hi = hi.cwiseMax(o.hi);
    }

    static Box of(const Ring& ring);
};

struct PolygonPart {
    Ring exterior;
    std::vector<Ring> holes;
};

/// A (possibly multi-part) polygonal region with holes. Parts are assumed
/// pairwise interior-disjoint.
struct PolygonSet {
    std::vector<PolygonPart> parts;

    [[nodiscard]] Box bbox() const;
    [[nodiscard]] bool empty() const { return parts.empty(); }
};

/// Shoelace area of a column-wise vertex list; positive for
/// counterclockwise rings.
template <class Derived>
double ring_signed_area(const Eigen::MatrixBase<Derived>& v) {
    const Eigen::Index n = v.cols();
    double a = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index j = (i + 1 == n) ? 0 : i + 1;
        a += v(0, i) * v(1, j) - v(0, j) * v(1, i);
    }
    return 0.5 * a;
}

/// Validates rings (>= 3 distinct finite vertices) and orients exteriors
/// counterclockwise, holes clockwise. Drops a duplicated closing vertex.
/// Throws ValidationError on degenerate input.
PolygonSet normalize(PolygonSet g);

/// Area of exteriors minus holes; >= 0 for normalized input.
double polygon_area(const PolygonSet& g);

/// Area-weighted centroid over all parts; holes subtract.
/// Throws ValidationError when the net area is zero.
Point polygon_centroid(const PolygonSet& g);

/// Even-odd point containment for a single ring (boundary half-open).
bool point_in_ring(const Point& p, const Ring& ring);

/// True when p lies in some part's exterior and in none of that part's holes.
bool point_in_polygon(const Point& p, const PolygonSet& g);

/// Exact area of disc(center, r) intersected with g, via edge clipping:
/// each boundary edge contributes either a chord triangle (inside the disc)
/// or a circular-sector sliver (outside). Holes subtract through their
/// clockwise orientation.
double disc_polygon_intersection_area(const Point& center, double r, const PolygonSet& g);

/// Fraction of the circumference of the radius-r circle around `center`
/// lying inside g. Requires center inside g (throws ValidationError
/// otherwise).
double arc_fraction_inside(const Point& center, double r, const PolygonSet& g);

/// Axis-aligned rectangle as a normalized single-part polygon.
PolygonSet make_rect(const Point& lo, const Point& hi);

/// Convex hull area of a point set (monotone chain); 0 for < 3 points.
double convex_hull_area(const Eigen::Matrix2Xd& points);

} // namespace arealk
