#pragma once

#include "arealk/geometry.hpp"
#include "arealk/pattern.hpp"
#include "arealk/rtree.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace arealk {

/// One polygonal region with its precomputed centroid and area.
/// Coordinates are in the study area's internal (rescaled) frame.
struct ArealUnit {
    std::string id;
    PolygonSet geometry;
    Point centroid;
    double area = 0.0;
};

enum class Contiguity { Rook, Queen };

/// Symmetric, irreflexive neighbor lists.
struct AdjacencyList {
    std::vector<std::vector<std::int32_t>> neighbors;

    [[nodiscard]] bool adjacent(std::int32_t a, std::int32_t b) const {
        const auto& nb = neighbors[static_cast<std::size_t>(a)];
        for (std::int32_t x : nb)
            if (x == b) return true;
        return false;
    }
};

/// Rook adjacency pairs units sharing boundary of length > tol; queen pairs
/// units whose boundaries come within tol of each other anywhere.
AdjacencyList build_adjacency(const std::vector<ArealUnit>& units, const StaticRTree& index,
                              Contiguity rule, double tol);

/// A partition of the study region into areal units, with contiguity graph,
/// footprint polygon, and a spatial index over unit bounding boxes.
///
/// Input coordinates are rescaled internally so the bounding-box diagonal is
/// 1; user-facing lengths and areas are reported in the original units via
/// to_original()/to_internal().
class StudyArea {
public:
    struct UnitInput {
        std::string id;
        PolygonSet geometry; // original coordinates
    };

    struct BuildOptions {
        Contiguity contiguity = Contiguity::Rook;
        double tol_scale = 1e-9;       // contiguity tolerance as a fraction of the bbox diagonal
        const PolygonSet* footprint = nullptr; // original coordinates; defaults to all unit parts
        bool validate_disjoint = true; // sampled pairwise-overlap check
    };

    static StudyArea build(std::vector<UnitInput> inputs);
    static StudyArea build(std::vector<UnitInput> inputs, const BuildOptions& options);

    [[nodiscard]] int n_units() const { return static_cast<int>(units_.size()); }
    [[nodiscard]] const ArealUnit& unit(int i) const { return units_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] const std::vector<ArealUnit>& units() const { return units_; }
    [[nodiscard]] const std::vector<std::int32_t>& neighbors(int i) const {
        return adjacency_.neighbors[static_cast<std::size_t>(i)];
    }
    [[nodiscard]] const AdjacencyList& adjacency() const { return adjacency_; }
    [[nodiscard]] const StaticRTree& index() const { return index_; }
    [[nodiscard]] const PolygonSet& footprint() const { return footprint_; }
    [[nodiscard]] const Box& bbox() const { return bbox_; }

    /// Total area in original units squared.
    [[nodiscard]] double total_area() const { return total_area_internal_ * scale_ * scale_; }
    [[nodiscard]] double total_area_internal() const { return total_area_internal_; }

    [[nodiscard]] double length_scale() const { return scale_; }
    [[nodiscard]] double to_internal(double length) const { return length / scale_; }
    [[nodiscard]] double to_original(double length) const { return length * scale_; }
    [[nodiscard]] Point to_original_point(const Point& p) const { return p * scale_ + offset_; }
    [[nodiscard]] Point to_internal_point(const Point& p) const { return (p - offset_) / scale_; }

    /// Centroid of unit i in original coordinates.
    [[nodiscard]] Point centroid_original(int i) const {
        return to_original_point(units_[static_cast<std::size_t>(i)].centroid);
    }
    [[nodiscard]] double unit_area_original(int i) const {
        return units_[static_cast<std::size_t>(i)].area * scale_ * scale_;
    }

    /// Content hash of the unit geometries (internal coordinates).
    [[nodiscard]] std::uint64_t fingerprint() const { return fingerprint_; }

    /// Ids of units whose bounding box intersects the disc's bounding box.
    /// Center and radius in internal coordinates.
    void units_near(const Point& center, double r, std::vector<std::int32_t>& out) const;

private:
    std::vector<ArealUnit> units_;
    AdjacencyList adjacency_;
    PolygonSet footprint_;
    StaticRTree index_;
    Box bbox_;
    double total_area_internal_ = 0.0;
    double scale_ = 1.0;
    Point offset_{0.0, 0.0};
    std::uint64_t fingerprint_ = 0;
};

/// Area within distance r of `center` covered by observed units, in original
/// units squared. Center and r in original coordinates. Units partition the
/// study area, so the union is a sum of per-unit disc intersections over the
/// spatial-index candidates.
double observed_coverage(const StudyArea& sa, const Pattern& y, const Point& center, double r);

} // namespace arealk
