#include "arealk/geometry.hpp"

#include "arealk/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace arealk {

namespace {

constexpr double kPi = std::numbers::pi;

double cross2(const Point& a, const Point& b) {
    return a.x() * b.y() - a.y() * b.x();
}

void check_ring(const Ring& ring) {
    if (ring.cols() < 3)
        throw ValidationError("degenerate ring: fewer than 3 vertices");
    if (!ring.allFinite())
        throw ValidationError("ring has non-finite coordinates");
    // Distinctness of consecutive vertices; a fully collapsed ring shows up
    // as zero area below.
    for (Eigen::Index i = 0; i < ring.cols(); ++i) {
        const Eigen::Index j = (i + 1 == ring.cols()) ? 0 : i + 1;
        if (ring.col(i) == ring.col(j))
            throw ValidationError("degenerate ring: repeated consecutive vertex");
    }
}

Ring drop_closing_vertex(Ring ring) {
    const Eigen::Index n = ring.cols();
    if (n >= 2 && ring.col(0) == ring.col(n - 1))
        return ring.leftCols(n - 1);
    return ring;
}

Ring oriented(Ring ring, bool ccw) {
    const double a = ring_signed_area(ring);
    if ((a > 0.0) != ccw) return ring.rowwise().reverse();
    return ring;
}

/// Contribution of one boundary edge (translated so the disc center is the
/// origin) to the disc-polygon intersection area. The edge is split at its
/// circle crossings; pieces inside the disc contribute the triangle with
/// the center, pieces outside the corresponding circular sector.
double edge_disc_contribution(const Point& a, const Point& b, double r) {
    const Point d = b - a;
    const double len2 = d.squaredNorm();
    if (len2 == 0.0) return 0.0;

    double ts[4];
    int nt = 0;
    ts[nt++] = 0.0;
    // |a + t d|^2 = r^2
    const double qb = 2.0 * a.dot(d);
    const double qc = a.squaredNorm() - r * r;
    const double disc = qb * qb - 4.0 * len2 * qc;
    if (disc > 0.0) {
        const double sq = std::sqrt(disc);
        // Numerically stable root pair.
        const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
        double t1 = q / len2;
        double t2 = (q != 0.0) ? qc / q : std::numeric_limits<double>::infinity();
        if (t1 > t2) std::swap(t1, t2);
        if (t1 > 0.0 && t1 < 1.0) ts[nt++] = t1;
        if (t2 > 0.0 && t2 < 1.0) ts[nt++] = t2;
    }
    ts[nt++] = 1.0;

    const double r2 = r * r;
    double area = 0.0;
    for (int k = 0; k + 1 < nt; ++k) {
        const Point p = a + ts[k] * d;
        const Point q = a + ts[k + 1] * d;
        const Point mid = a + 0.5 * (ts[k] + ts[k + 1]) * d;
        if (mid.squaredNorm() <= r2) {
            area += 0.5 * cross2(p, q);
        } else {
            // Sector subtended at the origin; a piece strictly outside the
            // disc never spans an angle of pi or more.
            area += 0.5 * r2 * std::atan2(cross2(p, q), p.dot(q));
        }
    }
    return area;
}

} // namespace

Box Box::of(const Ring& ring) {
    Box b;
    b.lo = ring.rowwise().minCoeff();
    b.hi = ring.rowwise().maxCoeff();
    return b;
}

Box PolygonSet::bbox() const {
    Box b;
    bool first = true;
    for (const auto& part : parts) {
        Box pb = Box::of(part.exterior);
        if (first) {
            b = pb;
            first = false;
        } else {
            b.merge(pb);
        }
    }
    return b;
}

PolygonSet normalize(PolygonSet g) {
    for (auto& part : g.parts) {
        part.exterior = drop_closing_vertex(std::move(part.exterior));
        check_ring(part.exterior);
        part.exterior = oriented(std::move(part.exterior), /*ccw=*/true);
        for (auto& hole : part.holes) {
            hole = drop_closing_vertex(std::move(hole));
            check_ring(hole);
            hole = oriented(std::move(hole), /*ccw=*/false);
        }
    }
    return g;
}

double polygon_area(const PolygonSet& g) {
    double a = 0.0;
    for (const auto& part : g.parts) {
        check_ring(part.exterior);
        a += ring_signed_area(part.exterior);
        for (const auto& hole : part.holes) {
            check_ring(hole);
            a += ring_signed_area(hole); // holes are clockwise: negative
        }
    }
    return a;
}

Point polygon_centroid(const PolygonSet& g) {
    double total_area = 0.0;
    Point moment{0.0, 0.0};
    auto accumulate = [&](const Ring& ring) {
        const Eigen::Index n = ring.cols();
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index j = (i + 1 == n) ? 0 : i + 1;
            const double c = cross2(ring.col(i), ring.col(j));
            moment += (ring.col(i) + ring.col(j)) * c;
            total_area += 0.5 * c;
        }
    };
    for (const auto& part : g.parts) {
        accumulate(part.exterior);
        for (const auto& hole : part.holes) accumulate(hole);
    }
    if (!(std::abs(total_area) > 0.0))
        throw ValidationError("polygon_centroid: zero-area geometry");
    return moment / (6.0 * total_area);
}

bool point_in_ring(const Point& p, const Ring& ring) {
    // Crossing-number test with the usual half-open edge rule.
    bool inside = false;
    const Eigen::Index n = ring.cols();
    for (Eigen::Index i = 0, j = n - 1; i < n; j = i++) {
        const double xi = ring(0, i), yi = ring(1, i);
        const double xj = ring(0, j), yj = ring(1, j);
        if ((yi > p.y()) != (yj > p.y())) {
            const double x_cross = xi + (p.y() - yi) / (yj - yi) * (xj - xi);
            if (p.x() < x_cross) inside = !inside;
        }
    }
    return inside;
}

bool point_in_polygon(const Point& p, const PolygonSet& g) {
    for (const auto& part : g.parts) {
        if (!point_in_ring(p, part.exterior)) continue;
        bool in_hole = false;
        for (const auto& hole : part.holes) {
            if (point_in_ring(p, hole)) {
                in_hole = true;
                break;
            }
        }
        if (!in_hole) return true;
    }
    return false;
}

double disc_polygon_intersection_area(const Point& center, double r, const PolygonSet& g) {
    if (!(r > 0.0)) throw ValidationError("disc radius must be positive");
    double area = 0.0;
    auto clip_ring = [&](const Ring& ring) {
        const Eigen::Index n = ring.cols();
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index j = (i + 1 == n) ? 0 : i + 1;
            area += edge_disc_contribution(ring.col(i) - center, ring.col(j) - center, r);
        }
    };
    for (const auto& part : g.parts) {
        clip_ring(part.exterior);
        for (const auto& hole : part.holes) clip_ring(hole);
    }
    // Clamp roundoff at the hard bounds.
    return std::clamp(area, 0.0, kPi * r * r);
}

double arc_fraction_inside(const Point& center, double r, const PolygonSet& g) {
    if (!(r > 0.0)) throw ValidationError("arc radius must be positive");
    if (!point_in_polygon(center, g))
        throw ValidationError("arc_fraction_inside: center outside the region");

    std::vector<double> angles;
    auto collect_ring = [&](const Ring& ring) {
        const Eigen::Index n = ring.cols();
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index j = (i + 1 == n) ? 0 : i + 1;
            const Point a = ring.col(i) - center;
            const Point d = ring.col(j) - center - a;
            const double len2 = d.squaredNorm();
            if (len2 == 0.0) continue;
            const double qb = 2.0 * a.dot(d);
            const double qc = a.squaredNorm() - r * r;
            const double disc = qb * qb - 4.0 * len2 * qc;
            if (disc <= 0.0) continue;
            const double sq = std::sqrt(disc);
            const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
            for (double t : {q / len2, (q != 0.0) ? qc / q : -1.0}) {
                if (t >= 0.0 && t < 1.0) { // half-open: shared vertices once
                    const Point x = a + t * d;
                    angles.push_back(std::atan2(x.y(), x.x()));
                }
            }
        }
    };
    for (const auto& part : g.parts) {
        collect_ring(part.exterior);
        for (const auto& hole : part.holes) collect_ring(hole);
    }

    if (angles.empty()) {
        const Point probe = center + Point{r, 0.0};
        return point_in_polygon(probe, g) ? 1.0 : 0.0;
    }

    std::sort(angles.begin(), angles.end());
    double inside_angle = 0.0;
    const std::size_t m = angles.size();
    for (std::size_t k = 0; k < m; ++k) {
        const double a0 = angles[k];
        const double a1 = (k + 1 < m) ? angles[k + 1] : angles[0] + 2.0 * kPi;
        const double span = a1 - a0;
        if (span <= 0.0) continue;
        const double mid = a0 + 0.5 * span;
        const Point probe = center + r * Point{std::cos(mid), std::sin(mid)};
        if (point_in_polygon(probe, g)) inside_angle += span;
    }
    return std::clamp(inside_angle / (2.0 * kPi), 0.0, 1.0);
}

PolygonSet make_rect(const Point& lo, const Point& hi) {
    Ring ring(2, 4);
    ring.col(0) = lo;
    ring.col(1) = Point{hi.x(), lo.y()};
    ring.col(2) = hi;
    ring.col(3) = Point{lo.x(), hi.y()};
    PolygonSet g;
    g.parts.push_back({std::move(ring), {}});
    return normalize(std::move(g));
}

double convex_hull_area(const Eigen::Matrix2Xd& points) {
    const Eigen::Index n = points.cols();
    if (n < 3) return 0.0;
    std::vector<Point> pts(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) pts[static_cast<std::size_t>(i)] = points.col(i);
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Point& a, const Point& b) { return a == b; }),
              pts.end());
    if (pts.size() < 3) return 0.0;

    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (const Point& p : pts) { // lower chain
        while (k >= 2 && cross2(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
        hull[k++] = p;
    }
    const std::size_t lower = k + 1;
    for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) { // upper chain
        while (k >= lower && cross2(hull[k - 1] - hull[k - 2], *it - hull[k - 2]) <= 0.0) --k;
        hull[k++] = *it;
    }
    hull.resize(k - 1);
    if (hull.size() < 3) return 0.0;
    Ring ring(2, static_cast<Eigen::Index>(hull.size()));
    for (std::size_t i = 0; i < hull.size(); ++i) ring.col(static_cast<Eigen::Index>(i)) = hull[i];
    return std::abs(ring_signed_area(ring));
}

} // namespace arealk
