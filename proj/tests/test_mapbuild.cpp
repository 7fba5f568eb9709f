#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "uavnav/mapbuild.hpp"
#include "uavnav/weightmap.hpp"

using namespace uavnav;
using namespace uavnav::mapbuild;
using geodesy::GeoAnchor;
using geodesy::GeoPoint;
using geodesy::PixelOffset;

namespace {

Raster noise_texture(int w, int h, std::uint32_t seed) {
    Raster r(w, h, 1);
    std::mt19937 rng(seed);
    for (auto& px : r.data) px = static_cast<std::uint8_t>(rng() & 0xFF);
    return r;
}

// Candidate whose correct placement relative to `ref` is (sx, sy); pixels
// with no source are zero padding.
Raster shifted_copy(const Raster& ref, int sx, int sy) {
    Raster out(ref.width, ref.height, 1);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            const int rx = x + sx, ry = y + sy;
            out.at(x, y) = ref.in_bounds(rx, ry) ? ref.at(rx, ry) : 0;
        }
    return out;
}

std::filesystem::path make_temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               (tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

// ---------------------------------------------------------------------------
// plan_tile_grid
// ---------------------------------------------------------------------------

TEST_CASE("plan_tile_grid: bbox of one tile footprint yields its center") {
    const GeoPoint tl{38.0, -77.0};
    const double gsd = 0.0884;
    const int tile = 1280;
    const GeoAnchor a{tl, gsd};
    const GeoPoint br = geodesy::pixel_offset_to_gps(a, {double(tile), double(tile)});

    TileGrid grid = plan_tile_grid(tl, br, gsd, tile, 128);
    REQUIRE(grid.rows == 1);
    REQUIRE(grid.cols == 1);
    const GeoPoint bbox_center =
        geodesy::pixel_offset_to_gps(a, {tile / 2.0, tile / 2.0});
    CHECK_THAT(grid.centers[0].lat, Catch::Matchers::WithinAbs(bbox_center.lat, 1e-7));
    CHECK_THAT(grid.centers[0].lon, Catch::Matchers::WithinAbs(bbox_center.lon, 1e-7));
}

TEST_CASE("plan_tile_grid: two tiles east-west with zero overlap") {
    const GeoPoint tl{45.0, 7.0};
    const double gsd = 0.0884;
    const int tile = 1280;
    const GeoAnchor a{tl, gsd};
    const GeoPoint br = geodesy::pixel_offset_to_gps(a, {2.0 * tile, double(tile)});

    TileGrid grid = plan_tile_grid(tl, br, gsd, tile, 0);
    REQUIRE(grid.rows == 1);
    REQUIRE(grid.cols == 2);
    // Adjacent centers are tile_px * gsd meters apart, due east.
    const GeoAnchor first{grid.center(0, 0), gsd};
    const auto delta = geodesy::gps_to_pixel_offset(first, grid.center(0, 1));
    CHECK_THAT(delta.dx, Catch::Matchers::WithinAbs(tile, 0.5));
    CHECK_THAT(delta.dy, Catch::Matchers::WithinAbs(0.0, 0.5));
}

TEST_CASE("plan_tile_grid: 3x2 grid with overlap reconstructs pure translations") {
    const GeoPoint tl{38.0, -77.0};
    const double gsd = 0.0884;
    const int tile = 1280, overlap = 128, stride = tile - overlap;
    const GeoAnchor a{tl, gsd};
    const GeoPoint br = geodesy::pixel_offset_to_gps(
        a, {double(tile + 2 * stride), double(tile + stride)});

    TileGrid grid = plan_tile_grid(tl, br, gsd, tile, overlap);
    REQUIRE(grid.cols == 3);
    REQUIRE(grid.rows == 2);
    REQUIRE(grid.centers.size() == 6);

    for (int r = 0; r < grid.rows; ++r)
        for (int c = 0; c < grid.cols; ++c) {
            const GeoAnchor here{grid.center(r, c), gsd};
            if (c + 1 < grid.cols) {
                const auto d = geodesy::gps_to_pixel_offset(here, grid.center(r, c + 1));
                REQUIRE_THAT(d.dx, Catch::Matchers::WithinAbs(stride, 0.5));
                REQUIRE_THAT(d.dy, Catch::Matchers::WithinAbs(0.0, 0.5));
            }
            if (r + 1 < grid.rows) {
                const auto d = geodesy::gps_to_pixel_offset(here, grid.center(r + 1, c));
                REQUIRE_THAT(d.dx, Catch::Matchers::WithinAbs(0.0, 0.5));
                REQUIRE_THAT(d.dy, Catch::Matchers::WithinAbs(stride, 0.5));
            }
        }
}

TEST_CASE("plan_tile_grid rejects degenerate input") {
    const GeoPoint tl{38.0, -77.0};
    CHECK_THROWS_AS(plan_tile_grid(tl, tl, 0.1, 640, 64), ValidationError);
    CHECK_THROWS_AS(plan_tile_grid(tl, GeoPoint{37.9, -77.1}, 0.1, 640, 64),
                    ValidationError);
    CHECK_THROWS_AS(plan_tile_grid(tl, GeoPoint{37.9, -76.9}, 0.1, 640, 640),
                    ValidationError);
}

// ---------------------------------------------------------------------------
// ncc_align
// ---------------------------------------------------------------------------

TEST_CASE("ncc_align: self-correlation peaks at zero shift with score 1") {
    Raster ref = noise_texture(128, 128, 11u);
    NccResult res = ncc_align(ref, ref, 16);
    CHECK(res.dx == 0);
    CHECK(res.dy == 0);
    CHECK_THAT(res.score, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("ncc_align recovers a known shift") {
    Raster ref = noise_texture(128, 128, 12u);
    Raster cand = shifted_copy(ref, 13, -7);
    NccResult res = ncc_align(ref, cand, 16);
    CHECK(res.dx == 13);
    CHECK(res.dy == -7);
    CHECK(res.score > 0.99);
}

TEST_CASE("ncc_align recovers the shift under additive noise") {
    Raster ref = noise_texture(128, 128, 13u);
    Raster cand = shifted_copy(ref, 13, -7);
    std::mt19937 rng(14u);
    std::normal_distribution<double> noise(0.0, 5.0);  // sigma = 5/255 in 8-bit units
    for (auto& px : cand.data) {
        const double v = px + noise(rng);
        px = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
    NccResult res = ncc_align(ref, cand, 16);
    CHECK(res.dx == 13);
    CHECK(res.dy == -7);
}

TEST_CASE("ncc_align recovers random shifts exactly (property)") {
    std::mt19937 rng(2024u);
    for (int trial = 0; trial < 25; ++trial) {
        const int radius = 16;
        const int sx = static_cast<int>(rng() % (2 * radius + 1)) - radius;
        const int sy = static_cast<int>(rng() % (2 * radius + 1)) - radius;
        Raster ref = noise_texture(96, 96, static_cast<std::uint32_t>(rng()));
        Raster cand = shifted_copy(ref, sx, sy);
        NccResult res = ncc_align(ref, cand, radius);
        REQUIRE(res.dx == sx);
        REQUIRE(res.dy == sy);
    }
}

TEST_CASE("ncc_align error paths") {
    Raster flat(64, 64, 1, 170);
    CHECK_THROWS_AS(ncc_align(flat, flat, 8), ValidationError);
    Raster small = noise_texture(40, 40, 5u);
    CHECK_THROWS_AS(ncc_align(small, small, 16), ValidationError);  // overlap < 32
}

// ---------------------------------------------------------------------------
// stitch
// ---------------------------------------------------------------------------

namespace {

TileGrid simple_grid(int rows, int cols, int tile, int overlap, double gsd = 0.0884) {
    const GeoPoint tl{40.0, -105.0};
    const GeoAnchor a{tl, gsd};
    const int stride = tile - overlap;
    const GeoPoint br = geodesy::pixel_offset_to_gps(
        a, {double(tile + (cols - 1) * stride), double(tile + (rows - 1) * stride)});
    TileGrid g = plan_tile_grid(tl, br, gsd, tile, overlap);
    REQUIRE(g.rows == rows);
    REQUIRE(g.cols == cols);
    return g;
}

}  // namespace

TEST_CASE("stitch: single tile is the identity") {
    TileGrid grid = simple_grid(1, 1, 128, 64);
    Raster tile = noise_texture(128, 128, 21u);
    Mosaic m = stitch(grid, {tile});
    CHECK(m.image == tile);
    CHECK_THAT(m.anchor.center.lat, Catch::Matchers::WithinAbs(grid.centers[0].lat, 1e-12));
    CHECK_THAT(m.anchor.center.lon, Catch::Matchers::WithinAbs(grid.centers[0].lon, 1e-12));
}

TEST_CASE("stitch: tiles cut from a parent reassemble it bit-for-bit") {
    const int tile = 128, overlap = 64, stride = tile - overlap;
    TileGrid grid = simple_grid(1, 2, tile, overlap);
    Raster parent = noise_texture(stride + tile, tile, 22u);
    std::vector<Raster> tiles = {crop(parent, 0, 0, tile, tile),
                                 crop(parent, stride, 0, tile, tile)};
    Mosaic m = stitch(grid, tiles);
    CHECK(m.image == parent);
}

TEST_CASE("stitch: NCC correction absorbs an injected fetch error") {
    const int tile = 128, overlap = 64, stride = tile - overlap;
    TileGrid grid = simple_grid(1, 2, tile, overlap);
    Raster parent = noise_texture(stride + tile + 8, tile, 23u);
    // Second tile fetched 2 px east of nominal.
    std::vector<Raster> tiles = {crop(parent, 0, 0, tile, tile),
                                 crop(parent, stride + 2, 0, tile, tile)};
    Mosaic m = stitch(grid, tiles);
    REQUIRE(m.image.width == stride + tile);
    Raster expected = crop(parent, 0, 0, stride + tile, tile);
    CHECK(m.image == expected);
}

TEST_CASE("stitch rejects mismatched tiles") {
    TileGrid grid = simple_grid(1, 2, 128, 64);
    CHECK_THROWS_AS(stitch(grid, {noise_texture(128, 128, 1u)}), ValidationError);
    CHECK_THROWS_AS(stitch(grid, {noise_texture(128, 128, 1u), noise_texture(64, 64, 2u)}),
                    ValidationError);
}

// ---------------------------------------------------------------------------
// classify_landuse / class_to_weights
// ---------------------------------------------------------------------------

TEST_CASE("classify_landuse: blank layers give all Neutral") {
    Raster blank(32, 32, 1, 255);
    ClassRaster c = classify_landuse(blank, blank);
    for (LandClass lc : c.cells) REQUIRE(lc == LandClass::Neutral);
}

TEST_CASE("classify_landuse: road precedence over structures") {
    Raster marked(8, 8, 1, 0);  // everything a feature
    ClassRaster c = classify_landuse(marked, marked);
    for (LandClass lc : c.cells) REQUIRE(lc == LandClass::Danger);
}

TEST_CASE("classify_landuse matches a per-pixel rule oracle") {
    Raster roads(64, 64, 1, 255), structures(64, 64, 1, 0);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            if ((x + y) % 2 == 0) roads.at(x, y) = 0;  // checkerboard road mask

    ClassRaster got = classify_landuse(roads, structures);
    int danger = 0, road_marked = 0;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            // Independent restatement of the two-rule decision.
            LandClass want = roads.at(x, y) < 128
                                 ? LandClass::Danger
                                 : (structures.at(x, y) < 128 ? LandClass::Safe
                                                              : LandClass::Neutral);
            REQUIRE(got.at(x, y) == want);
            danger += got.at(x, y) == LandClass::Danger;
            road_marked += roads.at(x, y) < 128;
        }
    CHECK(danger == road_marked);

    // Idempotent given fixed layers.
    CHECK(classify_landuse(roads, structures) == got);

    Raster wrong(32, 64, 1, 255);
    CHECK_THROWS_AS(classify_landuse(roads, wrong), ValidationError);
}

TEST_CASE("class_to_weights maps classes through the config") {
    const GeoAnchor anchor{GeoPoint{28.6, -81.2}, 0.0884};
    SECTION("all Neutral -> 20") {
        WeightMap m = class_to_weights(ClassRaster(16, 16, LandClass::Neutral), {}, anchor);
        for (double w : m.weights) REQUIRE(w == 20.0);
    }
    SECTION("all Safe -> 5") {
        WeightMap m = class_to_weights(ClassRaster(16, 16, LandClass::Safe), {}, anchor);
        for (double w : m.weights) REQUIRE(w == 5.0);
    }
    SECTION("mixed raster: weight histogram equals class histogram") {
        ClassRaster c(32, 32);
        std::mt19937 rng(31u);
        int counts[3] = {0, 0, 0};
        for (auto& cell : c.cells) {
            cell = static_cast<LandClass>(rng() % 3);
            ++counts[static_cast<int>(cell)];
        }
        WeightMap m = class_to_weights(c, {}, anchor);
        REQUIRE(m.width() == 32);
        REQUIRE(m.height() == 32);
        int w_counts[3] = {0, 0, 0};
        for (double w : m.weights) {
            if (w == 100.0) ++w_counts[0];
            else if (w == 20.0) ++w_counts[1];
            else if (w == 5.0) ++w_counts[2];
        }
        CHECK(w_counts[0] == counts[0]);
        CHECK(w_counts[1] == counts[1]);
        CHECK(w_counts[2] == counts[2]);
    }
    SECTION("invalid config rejected") {
        WeightConfig bad;
        bad.w_safe = 50.0;
        bad.w_neutral = 20.0;
        CHECK_THROWS_AS(class_to_weights(ClassRaster(4, 4), bad, anchor), ValidationError);
    }
}

// ---------------------------------------------------------------------------
// Weight map disk format
// ---------------------------------------------------------------------------

TEST_CASE("weight map PGM+JSON round trip is bit-exact") {
    auto dir = make_temp_dir("uavnav_wm");
    ClassRaster classes(33, 17);
    std::mt19937 rng(77u);
    for (auto& c : classes.cells) c = static_cast<LandClass>(rng() % 3);
    WeightMap map = class_to_weights(std::move(classes), {},
                                     GeoAnchor{GeoPoint{28.600558, -81.197722}, 0.0884});

    save_weight_map(map, dir / "map");
    WeightMap loaded = load_weight_map(dir / "map.json");
    CHECK(loaded == map);

    // Same bytes when saved again.
    auto pgm1 = read_file(dir / "map.pgm");
    save_weight_map(loaded, dir / "map");
    CHECK(read_file(dir / "map.pgm") == pgm1);
    std::filesystem::remove_all(dir);
}

// ---------------------------------------------------------------------------
// Tile provider
// ---------------------------------------------------------------------------

TEST_CASE("fixture provider round-trips stored tiles") {
    auto dir = make_temp_dir("uavnav_tiles");
    const GeoPoint c0{28.600558, -81.197722};
    Raster tile = noise_texture(64, 64, 41u);
    write_file(dir / (FixtureTileProvider::key(c0, 18, MapLayer::Roads) + ".png"),
               encode_png(tile));

    FixtureTileProvider provider(dir);
    Raster got = fetch_tile(provider, c0, 18, MapLayer::Roads);
    CHECK(got == tile);

    CHECK_THROWS_AS(fetch_tile(provider, GeoPoint{1.0, 1.0}, 18, MapLayer::Roads),
                    IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("fixture provider serves a 2x2 grid of committed tiles") {
    auto dir = make_temp_dir("uavnav_tiles4");
    TileGrid grid = simple_grid(2, 2, 64, 0, 1.0);
    std::vector<Raster> originals;
    for (int i = 0; i < 4; ++i) {
        originals.push_back(noise_texture(64, 64, 100u + i));
        write_file(dir / (FixtureTileProvider::key(grid.centers[i], 18,
                                                   MapLayer::Structures) + ".png"),
                   encode_png(originals.back()));
    }
    FixtureTileProvider provider(dir);
    for (int i = 0; i < 4; ++i) {
        Raster got = fetch_tile(provider, grid.centers[i], 18, MapLayer::Structures);
        REQUIRE(got == originals[i]);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("static map url carries the documented request parameters") {
    std::string url = static_map_url(GeoPoint{28.600558, -81.197722}, 18, 640, 2,
                                     MapLayer::Roads);
    CHECK(url.find("center=28.600558,-81.197722") != std::string::npos);
    CHECK(url.find("zoom=18") != std::string::npos);
    CHECK(url.find("size=640x640") != std::string::npos);
    CHECK(url.find("scale=2") != std::string::npos);
    CHECK(url.find("maptype=roadmap") != std::string::npos);
    CHECK(url.find("feature:road|visibility:on") != std::string::npos);
}
