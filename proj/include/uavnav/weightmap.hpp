#pragma once

// Land-use classes, traversal weights, and the geo-anchored weight map with
// its two-file on-disk format (class raster as binary PGM + JSON sidecar).

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "uavnav/error.hpp"
#include "uavnav/geodesy.hpp"
#include "uavnav/raster.hpp"

namespace uavnav::mapbuild {

enum class LandClass : std::uint8_t { Danger = 0, Neutral = 1, Safe = 2 };

struct ClassRaster {
    int width = 0;
    int height = 0;
    std::vector<LandClass> cells;

    ClassRaster() = default;
    ClassRaster(int w, int h, LandClass fill = LandClass::Neutral)
        : width(w), height(h), cells(static_cast<std::size_t>(w) * h, fill) {
        if (w < 1 || h < 1) throw ValidationError("class raster: bad dimensions");
    }
    LandClass at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
    LandClass& at(int x, int y) { return cells[static_cast<std::size_t>(y) * width + x]; }
    bool operator==(const ClassRaster&) const = default;
};

// Per-class traversal weights. Defaults: roads/paths 100, other land 20,
// buildings/water 5.
struct WeightConfig {
    double w_danger = 100.0;
    double w_neutral = 20.0;
    double w_safe = 5.0;

    void validate() const {
        if (!(0.0 < w_safe && w_safe <= w_neutral && w_neutral <= w_danger))
            throw ValidationError("weight config: need 0 < safe <= neutral <= danger");
    }
    double of(LandClass c) const {
        switch (c) {
            case LandClass::Danger: return w_danger;
            case LandClass::Safe: return w_safe;
            default: return w_neutral;
        }
    }
    bool operator==(const WeightConfig&) const = default;
};

// Geo-anchored raster of per-pixel traversal weights. The anchor's GPS
// location corresponds to the raster center pixel ((w-1)/2, (h-1)/2).
struct WeightMap {
    geodesy::GeoAnchor anchor;
    ClassRaster classes;
    std::vector<double> weights;
    WeightConfig config;

    int width() const { return classes.width; }
    int height() const { return classes.height; }
    double gsd() const { return anchor.gsd; }
    double weight(int x, int y) const {
        return weights[static_cast<std::size_t>(y) * classes.width + x];
    }
    // Lower bound over all per-pixel weights; the planner's heuristic scale.
    double min_weight() const { return config.w_safe; }

    double center_px_x() const { return (classes.width - 1) / 2.0; }
    double center_px_y() const { return (classes.height - 1) / 2.0; }

    geodesy::GeoPoint cell_to_gps(double x, double y) const {
        return geodesy::pixel_offset_to_gps(anchor,
                                            {x - center_px_x(), y - center_px_y()});
    }
    // Real-valued raster coordinates; callers round to reach a cell.
    std::pair<double, double> gps_to_cell(const geodesy::GeoPoint& p) const {
        auto off = geodesy::gps_to_pixel_offset(anchor, p);
        return {off.dx + center_px_x(), off.dy + center_px_y()};
    }

    bool operator==(const WeightMap& o) const {
        return anchor.center.lat == o.anchor.center.lat &&
               anchor.center.lon == o.anchor.center.lon && anchor.gsd == o.anchor.gsd &&
               classes == o.classes && weights == o.weights && config == o.config;
    }
};

// ---------------------------------------------------------------------------
// On-disk format: <base>.pgm (class values 0/1/2) + <base>.json metadata
// ---------------------------------------------------------------------------

namespace detail {
inline std::filesystem::path base_path(std::filesystem::path p) {
    if (p.extension() == ".pgm" || p.extension() == ".json") p.replace_extension();
    return p;
}
}  // namespace detail

inline void save_weight_map(const WeightMap& map, const std::filesystem::path& path) {
    const auto base = detail::base_path(path);
    Raster classes(map.classes.width, map.classes.height, 1);
    for (std::size_t i = 0; i < map.classes.cells.size(); ++i)
        classes.data[i] = static_cast<std::uint8_t>(map.classes.cells[i]);
    write_file(base.string() + ".pgm", encode_pgm(classes));

    nlohmann::ordered_json meta;
    meta["center_lat"] = map.anchor.center.lat;
    meta["center_lon"] = map.anchor.center.lon;
    meta["gsd_m_per_px"] = map.anchor.gsd;
    meta["width"] = map.classes.width;
    meta["height"] = map.classes.height;
    meta["weights"] = {{"danger", map.config.w_danger},
                       {"neutral", map.config.w_neutral},
                       {"safe", map.config.w_safe}};
    write_file(base.string() + ".json", meta.dump(2) + "\n");
}

inline WeightMap load_weight_map(const std::filesystem::path& path) {
    const auto base = detail::base_path(path);
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_file(base.string() + ".json"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("weight map: bad metadata JSON: " + std::string(e.what()));
    }

    WeightMap map;
    try {
        map.anchor.center.lat = meta.at("center_lat").get<double>();
        map.anchor.center.lon = meta.at("center_lon").get<double>();
        map.anchor.gsd = meta.at("gsd_m_per_px").get<double>();
        map.config.w_danger = meta.at("weights").at("danger").get<double>();
        map.config.w_neutral = meta.at("weights").at("neutral").get<double>();
        map.config.w_safe = meta.at("weights").at("safe").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError("weight map: missing metadata field: " + std::string(e.what()));
    }
    map.config.validate();
    if (!(map.anchor.gsd > 0.0)) throw ValidationError("weight map: gsd must be positive");

    Raster classes = decode_pgm(read_file(base.string() + ".pgm"));
    if (classes.width != meta.at("width").get<int>() ||
        classes.height != meta.at("height").get<int>())
        throw ValidationError("weight map: PGM dimensions disagree with metadata");

    map.classes = ClassRaster(classes.width, classes.height);
    map.weights.resize(map.classes.cells.size());
    for (std::size_t i = 0; i < map.classes.cells.size(); ++i) {
        if (classes.data[i] > 2)
            throw ValidationError("weight map: class value out of range");
        map.classes.cells[i] = static_cast<LandClass>(classes.data[i]);
        map.weights[i] = map.config.of(map.classes.cells[i]);
    }
    return map;
}

}  // namespace uavnav::mapbuild
