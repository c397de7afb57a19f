#pragma once

#include "arealk/pattern.hpp"
#include "arealk/study_area.hpp"

#include <string>
#include <vector>

namespace arealk {

struct LoadedStudy {
    StudyArea study;
    Pattern observed;
    std::vector<std::string> warnings;
};

/// Loads a GeoJSON FeatureCollection of Polygon/MultiPolygon features into a
/// study area, reading the binary observation flag from `observed_field` on
/// each feature's properties. Coordinates are treated as already-projected
/// planar values; a bbox that looks like longitude/latitude degrees only
/// produces a warning. Every feature becomes a unit or the load fails with
/// the offending feature index.
LoadedStudy load_study(const std::string& path, const std::string& observed_field,
                       Contiguity contiguity = Contiguity::Rook);

} // namespace arealk
