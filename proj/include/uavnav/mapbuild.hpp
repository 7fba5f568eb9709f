#pragma once

// Weight-map construction: tile grid planning, NCC tile alignment, mosaic
// stitching, land-use classification, and the tile provider abstraction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uavnav/error.hpp"
#include "uavnav/geodesy.hpp"
#include "uavnav/raster.hpp"
#include "uavnav/weightmap.hpp"

namespace uavnav::mapbuild {

// ---------------------------------------------------------------------------
// Tile grid
// ---------------------------------------------------------------------------

// Row-major grid of tile-center GPS locations. Rows share latitudes and
// columns share longitudes, so inter-tile motion is a pure translation of
// (tile_px - overlap_px) * gsd meters in exactly one axis (longitude steps
// are sized at the bbox center latitude).
struct TileGrid {
    std::vector<geodesy::GeoPoint> centers;
    int rows = 0;
    int cols = 0;
    int tile_px = 0;
    int overlap_px = 0;
    double gsd = 0.0;

    const geodesy::GeoPoint& center(int row, int col) const {
        return centers[static_cast<std::size_t>(row) * cols + col];
    }
    int stride_px() const { return tile_px - overlap_px; }
};

inline TileGrid plan_tile_grid(const geodesy::GeoPoint& top_left,
                               const geodesy::GeoPoint& bottom_right, double gsd,
                               int tile_px, int overlap_px) {
    if (!(top_left.lat > bottom_right.lat) || !(top_left.lon < bottom_right.lon))
        throw ValidationError("tile grid: bbox is degenerate or not NW/SE ordered");
    if (tile_px < 1 || overlap_px < 0 || overlap_px >= tile_px)
        throw ValidationError("tile grid: need 0 <= overlap_px < tile_px");

    const geodesy::GeoAnchor tl{top_left, gsd};
    const auto span = geodesy::gps_to_pixel_offset(tl, bottom_right);
    const int stride = tile_px - overlap_px;
    // Sub-pixel slack absorbs the geodesy round-trip residue (< 1e-6 px).
    auto count = [&](double span_px) {
        if (span_px <= tile_px + 1e-6) return 1;
        return 1 + static_cast<int>(std::ceil((span_px - tile_px) / stride - 1e-9));
    };

    TileGrid grid;
    grid.cols = count(span.dx);
    grid.rows = count(span.dy);
    grid.tile_px = tile_px;
    grid.overlap_px = overlap_px;
    grid.gsd = gsd;

    // Longitude steps are computed once, at the bbox center latitude.
    const double lat_mid =
        geodesy::pixel_offset_to_gps(tl, {0.0, span.dy / 2.0}).lat;
    const geodesy::GeoAnchor mid_row{{lat_mid, top_left.lon}, gsd};

    std::vector<double> lons(grid.cols), lats(grid.rows);
    for (int c = 0; c < grid.cols; ++c)
        lons[c] = geodesy::pixel_offset_to_gps(
                      mid_row, {tile_px / 2.0 + c * static_cast<double>(stride), 0.0})
                      .lon;
    for (int r = 0; r < grid.rows; ++r)
        lats[r] = geodesy::pixel_offset_to_gps(
                      tl, {0.0, tile_px / 2.0 + r * static_cast<double>(stride)})
                      .lat;

    grid.centers.reserve(static_cast<std::size_t>(grid.rows) * grid.cols);
    for (int r = 0; r < grid.rows; ++r)
        for (int c = 0; c < grid.cols; ++c)
            grid.centers.push_back(geodesy::GeoPoint{lats[r], lons[c]});
    return grid;
}

// ---------------------------------------------------------------------------
// Normalized cross-correlation alignment
// ---------------------------------------------------------------------------

struct NccResult {
    int dx = 0;  // candidate origin relative to reference origin
    int dy = 0;
    double score = -1.0;  // zero-normalized cross-correlation in [-1, 1]
};

inline constexpr int kNccMinOverlapPx = 32;

// Exhaustive integer-shift search maximizing ZNCC over the overlap region.
// Ties break toward the smaller (dy, dx) in scan order, deterministically.
inline NccResult ncc_align(const Raster& reference, const Raster& candidate,
                           int search_radius) {
    if (reference.channels != 1 || candidate.channels != 1)
        throw ValidationError("ncc: rasters must be single-channel");
    if (search_radius < 0) throw ValidationError("ncc: negative search radius");

    std::optional<NccResult> best;
    bool any_defined = false;
    for (int sy = -search_radius; sy <= search_radius; ++sy) {
        for (int sx = -search_radius; sx <= search_radius; ++sx) {
            const int rx0 = std::max(0, sx), ry0 = std::max(0, sy);
            const int rx1 = std::min(reference.width, sx + candidate.width);
            const int ry1 = std::min(reference.height, sy + candidate.height);
            const int w = rx1 - rx0, h = ry1 - ry0;
            if (w < kNccMinOverlapPx || h < kNccMinOverlapPx)
                throw ValidationError("ncc: overlap under 32x32 at a tested shift");

            std::int64_t sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
            for (int y = ry0; y < ry1; ++y) {
                const std::uint8_t* ra = &reference.data[static_cast<std::size_t>(y) * reference.width + rx0];
                const std::uint8_t* rb = &candidate.data[static_cast<std::size_t>(y - sy) * candidate.width + (rx0 - sx)];
                for (int x = 0; x < w; ++x) {
                    const std::int64_t a = ra[x], b = rb[x];
                    sa += a; sb += b;
                    saa += a * a; sbb += b * b;
                    sab += a * b;
                }
            }
            const double n = static_cast<double>(w) * h;
            const double var_a = static_cast<double>(saa) - static_cast<double>(sa) * sa / n;
            const double var_b = static_cast<double>(sbb) - static_cast<double>(sb) * sb / n;
            if (var_a <= 0.0 || var_b <= 0.0) continue;  // NCC undefined here
            any_defined = true;
            const double cov = static_cast<double>(sab) - static_cast<double>(sa) * sb / n;
            const double score = cov / std::sqrt(var_a * var_b);
            if (!best || score > best->score) best = NccResult{sx, sy, score};
        }
    }
    if (!any_defined)
        throw ValidationError("ncc: zero variance in every overlap (flat image)");
    return *best;
}

// ---------------------------------------------------------------------------
// Stitching
// ---------------------------------------------------------------------------

struct Mosaic {
    Raster image;
    geodesy::GeoAnchor anchor;
};

inline constexpr int kStitchSearchRadiusPx = 32;

// Assembles tiles at their nominal grid offsets corrected by per-tile NCC
// residuals against the previously placed neighbor (left, or top for the
// first tile of a row). Overlapping pixels take the later tile.
inline Mosaic stitch(const TileGrid& grid, const std::vector<Raster>& tiles) {
    const std::size_t n = static_cast<std::size_t>(grid.rows) * grid.cols;
    if (tiles.size() != n)
        throw ValidationError("stitch: expected one tile per grid center");
    for (const Raster& t : tiles)
        if (t.width != grid.tile_px || t.height != grid.tile_px ||
            t.channels != tiles[0].channels)
            throw ValidationError("stitch: tile dimensions disagree with the grid");

    const int stride = grid.stride_px();
    // Residual search must keep the NCC overlap precondition satisfied.
    const int radius = std::min(kStitchSearchRadiusPx,
                                std::min(grid.overlap_px - kNccMinOverlapPx,
                                         grid.tile_px - kNccMinOverlapPx));

    std::vector<std::pair<int, int>> pos(n, {0, 0});
    std::vector<Raster> gray(n);
    for (std::size_t i = 0; i < n; ++i) gray[i] = to_gray(tiles[i]);

    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * grid.cols + c;
            if (i == 0) continue;
            const bool from_left = c > 0;
            const std::size_t nb = from_left ? i - 1 : i - grid.cols;
            int dx = from_left ? stride : 0;
            int dy = from_left ? 0 : stride;
            if (radius > 0 && grid.overlap_px > 0) {
                // Nominally coincident overlap strips of neighbor and tile.
                const Raster ref =
                    from_left ? crop(gray[nb], stride, 0, grid.overlap_px, grid.tile_px)
                              : crop(gray[nb], 0, stride, grid.tile_px, grid.overlap_px);
                const Raster cand =
                    from_left ? crop(gray[i], 0, 0, grid.overlap_px, grid.tile_px)
                              : crop(gray[i], 0, 0, grid.tile_px, grid.overlap_px);
                const NccResult res = ncc_align(ref, cand, radius);
                dx += res.dx;
                dy += res.dy;
            }
            pos[i] = {pos[nb].first + dx, pos[nb].second + dy};
        }
    }

    Mosaic out;
    const int width = (grid.cols - 1) * stride + grid.tile_px;
    const int height = (grid.rows - 1) * stride + grid.tile_px;
    out.image = Raster(width, height, tiles[0].channels);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [px, py] = pos[i];
        const int x0 = std::max(0, px), y0 = std::max(0, py);
        const int x1 = std::min(width, px + grid.tile_px);
        const int y1 = std::min(height, py + grid.tile_px);
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x)
                for (int ch = 0; ch < out.image.channels; ++ch)
                    out.image.at(x, y, ch) = tiles[i].at(x - px, y - py, ch);
    }

    // Tile 0's center pixel is the georeference; shift to the mosaic center.
    const geodesy::GeoAnchor first{grid.centers[0], grid.gsd};
    out.anchor.gsd = grid.gsd;
    out.anchor.center = geodesy::pixel_offset_to_gps(
        first, {(width - grid.tile_px) / 2.0, (height - grid.tile_px) / 2.0});
    return out;
}

// ---------------------------------------------------------------------------
// Land-use classification
// ---------------------------------------------------------------------------

inline constexpr int kFeatureLumaThreshold = 128;  // dark-on-light styled layers

inline bool marks_feature(const Raster& layer, int x, int y) {
    return layer.luma(x, y) < kFeatureLumaThreshold;
}

// Danger where the road layer marks a feature; Safe where only the structure
// layer does; Neutral elsewhere. Road precedence is absolute.
inline ClassRaster classify_landuse(const Raster& road_layer,
                                    const Raster& structure_layer) {
    if (road_layer.width != structure_layer.width ||
        road_layer.height != structure_layer.height)
        throw ValidationError("classify: layer dimensions differ");
    ClassRaster out(road_layer.width, road_layer.height);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            if (marks_feature(road_layer, x, y))
                out.at(x, y) = LandClass::Danger;
            else if (marks_feature(structure_layer, x, y))
                out.at(x, y) = LandClass::Safe;
            else
                out.at(x, y) = LandClass::Neutral;
        }
    return out;
}

inline WeightMap class_to_weights(ClassRaster classes, const WeightConfig& config,
                                  const geodesy::GeoAnchor& anchor) {
    config.validate();
    WeightMap map;
    map.anchor = anchor;
    map.classes = std::move(classes);
    map.config = config;
    map.weights.resize(map.classes.cells.size());
    for (std::size_t i = 0; i < map.classes.cells.size(); ++i)
        map.weights[i] = config.of(map.classes.cells[i]);
    return map;
}

// ---------------------------------------------------------------------------
// Tile providers
// ---------------------------------------------------------------------------

enum class MapLayer { Satellite, Roads, Structures };

inline const char* layer_name(MapLayer layer) {
    switch (layer) {
        case MapLayer::Satellite: return "satellite";
        case MapLayer::Roads: return "roads";
        default: return "structures";
    }
}

// Static-map request for the given layer, kept as documentation of the
// upstream interface; nothing in the library performs network I/O.
inline std::string static_map_url(const geodesy::GeoPoint& center, int zoom,
                                  int size_px, int scale, MapLayer layer) {
    char head[160];
    std::snprintf(head, sizeof(head),
                  "http://maps.googleapis.com/maps/api/staticmap?center=%.6f,%.6f"
                  "&zoom=%d&format=png32&sensor=false&size=%dx%d&scale=%d",
                  center.lat, center.lon, zoom, size_px, size_px, scale);
    std::string url(head);
    switch (layer) {
        case MapLayer::Satellite:
            url += "&maptype=satellite&style=feature:poi|visibility:off"
                   "&style=feature:road|element:labels|visibility:off"
                   "&style=feature:transit|visibility:off"
                   "&style=feature:landscape|element:labels|visibility:off"
                   "&style=element:labels|visibility:off";
            break;
        case MapLayer::Roads:
            url += "&maptype=roadmap&style=visibility:off"
                   "&style=feature:road|visibility:on"
                   "&style=element:labels|visibility:off"
                   "&style=element:geometry|color:0x000000";
            break;
        case MapLayer::Structures:
            url += "&maptype=roadmap&style=visibility:off"
                   "&style=feature:landscape|visibility:on"
                   "&style=feature:landscape|element:labels|visibility:off"
                   "&style=feature:water|visibility:on|color:0x000000"
                   "&style=feature:landscape.natural|visibility:off";
            break;
    }
    return url;
}

class TileProvider {
public:
    virtual ~TileProvider() = default;
    virtual std::vector<std::uint8_t> fetch(const geodesy::GeoPoint& center, int zoom,
                                            MapLayer layer) = 0;
};

// Deterministic offline provider: tiles live in a directory, keyed by layer,
// center microdegrees, and zoom, e.g. "roads_28600558_-81197722_z18.png".
class FixtureTileProvider : public TileProvider {
public:
    explicit FixtureTileProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}

    static std::string key(const geodesy::GeoPoint& center, int zoom, MapLayer layer) {
        auto micro = [](double deg) {
            return std::to_string(static_cast<long long>(std::llround(deg * 1e6)));
        };
        return std::string(layer_name(layer)) + "_" + micro(center.lat) + "_" +
               micro(center.lon) + "_z" + std::to_string(zoom);
    }

    std::vector<std::uint8_t> fetch(const geodesy::GeoPoint& center, int zoom,
                                    MapLayer layer) override {
        const std::string stem = key(center, zoom, layer);
        for (const char* ext : {".png", ".pgm"}) {
            const auto path = dir_ / (stem + ext);
            if (std::filesystem::exists(path)) return read_file(path);
        }
        throw IoError("fixture provider: no tile " + stem + " under " + dir_.string());
    }

private:
    std::filesystem::path dir_;
};

inline Raster fetch_tile(TileProvider& provider, const geodesy::GeoPoint& center,
                         int zoom, MapLayer layer) {
    return decode_image(provider.fetch(center, zoom, layer));
}

}  // namespace uavnav::mapbuild
