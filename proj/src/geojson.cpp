#include "arealk/geojson.hpp"

#include "arealk/error.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace arealk {

namespace {

using nlohmann::json;

Ring ring_from_coords(const json& coords, int feature_index) {
    if (!coords.is_array() || coords.size() < 3)
        throw ValidationError("feature " + std::to_string(feature_index) +
                              ": ring needs at least 3 positions");
    Ring ring(2, static_cast<Eigen::Index>(coords.size()));
    Eigen::Index c = 0;
    for (const auto& pos : coords) {
        if (!pos.is_array() || pos.size() < 2)
            throw ValidationError("feature " + std::to_string(feature_index) +
                                  ": position must be [x, y]");
        const double x = pos[0].get<double>();
        const double y = pos[1].get<double>();
        if (!std::isfinite(x) || !std::isfinite(y))
            throw ValidationError("feature " + std::to_string(feature_index) +
                                  ": non-finite coordinate");
        ring(0, c) = x;
        ring(1, c) = y;
        ++c;
    }
    return ring;
}

PolygonPart part_from_polygon(const json& rings, int feature_index) {
    if (!rings.is_array() || rings.empty())
        throw ValidationError("feature " + std::to_string(feature_index) +
                              ": polygon needs an exterior ring");
    PolygonPart part;
    part.exterior = ring_from_coords(rings[0], feature_index);
    for (std::size_t h = 1; h < rings.size(); ++h)
        part.holes.push_back(ring_from_coords(rings[h], feature_index));
    return part;
}

int observed_flag(const json& props, const std::string& field, int feature_index) {
    if (!props.is_object() || !props.contains(field))
        throw ValidationError("feature " + std::to_string(feature_index) +
                              ": missing observed field '" + field + "'");
    const json& v = props.at(field);
    if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
    if (v.is_number()) {
        const double x = v.get<double>();
        if (x == 0.0) return 0;
        if (x == 1.0) return 1;
    }
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "0" || s == "false" || s == "no") return 0;
        if (s == "1" || s == "true" || s == "yes") return 1;
    }
    throw ValidationError("feature " + std::to_string(feature_index) + ": observed field '" +
                          field + "' is not coercible to 0/1");
}

} // namespace

LoadedStudy load_study(const std::string& path, const std::string& observed_field,
                       Contiguity contiguity) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
    }
    if (doc.value("type", "") != "FeatureCollection")
        throw ValidationError("'" + path + "' is not a GeoJSON FeatureCollection");
    const auto features = doc.find("features");
    if (features == doc.end() || !features->is_array() || features->empty())
        throw ValidationError("'" + path + "' has no features");

    std::vector<StudyArea::UnitInput> inputs;
    std::vector<std::uint8_t> flags;
    inputs.reserve(features->size());
    int index = 0;
    for (const auto& feature : *features) {
        if (feature.value("type", "") != "Feature")
            throw ValidationError("feature " + std::to_string(index) + ": not a Feature");
        const auto geom = feature.find("geometry");
        if (geom == feature.end() || geom->is_null())
            throw ValidationError("feature " + std::to_string(index) + ": missing geometry");

        StudyArea::UnitInput unit;
        if (feature.contains("id")) {
            const auto& id = feature.at("id");
            unit.id = id.is_string() ? id.get<std::string>() : id.dump();
        } else {
            unit.id = std::to_string(index);
        }

        const std::string gtype = geom->value("type", "");
        const auto coords = geom->find("coordinates");
        if (coords == geom->end())
            throw ValidationError("feature " + std::to_string(index) + ": missing coordinates");
        try {
            if (gtype == "Polygon") {
                unit.geometry.parts.push_back(part_from_polygon(*coords, index));
            } else if (gtype == "MultiPolygon") {
                for (const auto& poly : *coords)
                    unit.geometry.parts.push_back(part_from_polygon(poly, index));
            } else {
                throw ValidationError("feature " + std::to_string(index) +
                                      ": geometry type '" + gtype +
                                      "' is not Polygon/MultiPolygon");
            }
            unit.geometry = normalize(std::move(unit.geometry));
        } catch (const ValidationError& e) {
            throw ValidationError(std::string(e.what()) + " (feature " + std::to_string(index) +
                                  " of '" + path + "')");
        }

        flags.push_back(static_cast<std::uint8_t>(
            observed_flag(feature.value("properties", json::object()), observed_field, index)));
        inputs.push_back(std::move(unit));
        ++index;
    }

    LoadedStudy loaded{StudyArea::build(std::move(inputs), {.contiguity = contiguity}),
                       Pattern{}, {}};

    Eigen::VectorX<std::uint8_t> y(static_cast<Eigen::Index>(flags.size()));
    for (std::size_t i = 0; i < flags.size(); ++i) y[static_cast<Eigen::Index>(i)] = flags[i];
    loaded.observed = Pattern(std::move(y));

    const Box bbox{loaded.study.to_original_point(loaded.study.bbox().lo),
                   loaded.study.to_original_point(loaded.study.bbox().hi)};
    if (std::abs(bbox.lo.x()) <= 180.0 && std::abs(bbox.hi.x()) <= 180.0 &&
        std::abs(bbox.lo.y()) <= 90.0 && std::abs(bbox.hi.y()) <= 90.0) {
        loaded.warnings.push_back(
            "coordinate range looks like longitude/latitude degrees; distances assume a planar "
            "projection");
    }
    return loaded;
}

} // namespace arealk
