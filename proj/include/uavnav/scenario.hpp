#pragma once

// Mission scenarios: the JSON+CSV+PGM bundle the simulator replays, plus the
// deterministic synthetic-city generator that stands in for WAMI datasets.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "uavnav/dynamics.hpp"
#include "uavnav/error.hpp"
#include "uavnav/mapbuild.hpp"
#include "uavnav/planner.hpp"
#include "uavnav/weightmap.hpp"

namespace uavnav::simulator {

enum class Mode { Straight, Static, Dynamic };

inline const char* mode_name(Mode m) {
    switch (m) {
        case Mode::Straight: return "straight";
        case Mode::Static: return "static";
        default: return "dynamic";
    }
}

inline Mode parse_mode(const std::string& s) {
    if (s == "straight") return Mode::Straight;
    if (s == "static") return Mode::Static;
    if (s == "dynamic") return Mode::Dynamic;
    throw ValidationError("scenario: unknown mode '" + s + "'");
}

struct Scenario {
    mapbuild::WeightMap map;
    geodesy::GeoPoint start;
    geodesy::GeoPoint goal;
    double fps = 10.0;  // dataset / replanning frame rate F_d
    std::vector<double> velocities;
    Mode mode = Mode::Dynamic;
    std::vector<dynamics::ObjectTrack> tracks;
    double alpha = 1.0;
    std::uint64_t seed = 0;
};

inline void validate_scenario(const Scenario& s) {
    if (!(s.fps > 0.0)) throw ValidationError("scenario: fps must be positive");
    if (s.start.lat == s.goal.lat && s.start.lon == s.goal.lon)
        throw ValidationError("scenario: start and goal coincide");
    if (s.velocities.empty())
        throw ValidationError("scenario: at least one velocity required");
    for (double v : s.velocities)
        if (!(v > 0.0) || v > 15.0)
            throw ValidationError("scenario: velocities must be in (0, 15] m/s");
    if (s.alpha < 0.0) throw ValidationError("scenario: alpha must be non-negative");
    for (const auto& endpoint : {s.start, s.goal}) {
        const auto [cx, cy] = s.map.gps_to_cell(endpoint);
        const int x = static_cast<int>(std::lround(cx));
        const int y = static_cast<int>(std::lround(cy));
        if (!s.map.classes.cells.size() || x < 0 || y < 0 || x >= s.map.width() ||
            y >= s.map.height())
            throw ValidationError("scenario: endpoint off the map");
    }
    for (const auto& track : s.tracks)
        for (const auto& e : track.entries)
            if (e.x_px < 0.0 || e.y_px < 0.0 || e.x_px > s.map.width() - 1 ||
                e.y_px > s.map.height() - 1)
                throw ValidationError("scenario: track position outside the raster");
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

// Writes <name>.json plus the referenced weight-map pair and tracks CSV next
// to it. map_ref and tracks_csv_path in the JSON are relative to its folder.
inline void save_scenario(const Scenario& s, const std::filesystem::path& dir,
                          const std::string& name) {
    std::filesystem::create_directories(dir);
    mapbuild::save_weight_map(s.map, dir / (name + "_map"));
    write_file(dir / (name + "_tracks.csv"), dynamics::write_tracks_csv(s.tracks));

    nlohmann::ordered_json j;
    j["map_ref"] = name + "_map";
    j["start"] = {{"lat", s.start.lat}, {"lon", s.start.lon}};
    j["goal"] = {{"lat", s.goal.lat}, {"lon", s.goal.lon}};
    j["fps"] = s.fps;
    j["velocities"] = s.velocities;
    j["mode"] = mode_name(s.mode);
    j["tracks_csv_path"] = name + "_tracks.csv";
    j["alpha"] = s.alpha;
    j["seed"] = s.seed;
    write_file(dir / (name + ".json"), j.dump(2) + "\n");
}

inline Scenario load_scenario(const std::filesystem::path& json_path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(json_path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("scenario: bad JSON: " + std::string(e.what()));
    }
    Scenario s;
    try {
        const auto dir = json_path.parent_path();
        s.map = mapbuild::load_weight_map(dir / j.at("map_ref").get<std::string>());
        s.start = {j.at("start").at("lat").get<double>(),
                   j.at("start").at("lon").get<double>()};
        s.goal = {j.at("goal").at("lat").get<double>(),
                  j.at("goal").at("lon").get<double>()};
        s.fps = j.at("fps").get<double>();
        s.velocities = j.at("velocities").get<std::vector<double>>();
        s.mode = parse_mode(j.at("mode").get<std::string>());
        const auto tracks_path = dir / j.at("tracks_csv_path").get<std::string>();
        const auto csv = read_file(tracks_path);
        s.tracks = dynamics::parse_tracks_csv(std::string(csv.begin(), csv.end()));
        s.alpha = j.at("alpha").get<double>();
        s.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError("scenario: missing field: " + std::string(e.what()));
    }
    validate_scenario(s);
    return s;
}

// ---------------------------------------------------------------------------
// Synthetic city scenarios
// ---------------------------------------------------------------------------

struct SynthSpec {
    int size_px = 256;
    int block_px = 64;          // road spacing
    int road_width_px = 5;
    int building_margin_px = 10;
    int n_objects = 12;
    int frames = 4000;          // track horizon
    double gsd = 1.0;           // meters per pixel (desk scale)
    double fps = 10.0;
    double uav_velocity_mps = 8.0;  // traffic is timed against this speed
    double alpha = 1.0;
};

namespace detail {

// mt19937_64 output is standardized, so raw draws keep scenarios identical
// across platforms (std distributions are not).
struct SynthRng {
    std::mt19937_64 gen;
    explicit SynthRng(std::uint64_t seed) : gen(seed) {}
    std::uint64_t next() { return gen(); }
    double uniform() { return (next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int range(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

inline std::vector<int> road_lines(const SynthSpec& spec) {
    std::vector<int> lines;
    for (int c = spec.block_px; c < spec.size_px - spec.road_width_px; c += spec.block_px)
        lines.push_back(c);
    return lines;
}

}  // namespace detail

// Grid-of-roads city: Danger roads every block_px, Safe building rectangles
// inside the blocks, Neutral elsewhere.
inline mapbuild::WeightMap synth_city_map(const SynthSpec& spec) {
    using mapbuild::LandClass;
    if (spec.size_px < 2 * spec.block_px)
        throw ValidationError("synth: map must span at least two blocks");
    mapbuild::ClassRaster classes(spec.size_px, spec.size_px, LandClass::Neutral);
    const auto lines = detail::road_lines(spec);
    const int half_road = spec.road_width_px / 2;

    auto paint_block = [&](int x0, int x1, int y0, int y1) {
        const int m = spec.building_margin_px;
        for (int y = y0 + m; y <= y1 - m; ++y)
            for (int x = x0 + m; x <= x1 - m; ++x)
                if (classes.at(x, y) == LandClass::Neutral)
                    classes.at(x, y) = LandClass::Safe;
    };
    std::vector<int> edges{0};
    for (int c : lines) edges.push_back(c);
    edges.push_back(spec.size_px - 1);
    for (std::size_t i = 1; i < edges.size(); ++i)
        for (std::size_t k = 1; k < edges.size(); ++k)
            paint_block(edges[k - 1] + half_road + 1, edges[k] - half_road - 1,
                        edges[i - 1] + half_road + 1, edges[i] - half_road - 1);

    for (int c : lines)
        for (int d = -half_road; d <= half_road; ++d) {
            for (int t = 0; t < spec.size_px; ++t) {
                classes.at(c + d, t) = LandClass::Danger;  // vertical road
                classes.at(t, c + d) = LandClass::Danger;  // horizontal road
            }
        }

    const geodesy::GeoAnchor anchor{geodesy::GeoPoint{28.600558, -81.197722}, spec.gsd};
    return mapbuild::class_to_weights(std::move(classes), {}, anchor);
}

namespace detail {

// Arc positions (pixels) where the route crosses each road centerline.
struct RoadCrossing {
    double arc_px;
    planner::Vec2 point;
    bool vertical;  // crossing a vertical road (object will travel along y)
    int line;       // road centerline coordinate
};

inline std::vector<RoadCrossing> find_crossings(const planner::PixelPath& path,
                                                const std::vector<int>& lines) {
    std::vector<RoadCrossing> out;
    double arc = 0.0;
    for (std::size_t i = 1; i < path.cells.size(); ++i) {
        const auto a = path.cells[i - 1], b = path.cells[i];
        const double seg = planner::euclid_px(a, b);
        for (int c : lines) {
            // Vertical line x = c crossed by this segment?
            if ((a.x < c && b.x >= c) || (a.x > c && b.x <= c)) {
                const double u = double(c - a.x) / double(b.x - a.x);
                out.push_back({arc + u * seg,
                               planner::Vec2{double(c), a.y + u * double(b.y - a.y)},
                               true, c});
            }
            if ((a.y < c && b.y >= c) || (a.y > c && b.y <= c)) {
                const double u = double(c - a.y) / double(b.y - a.y);
                out.push_back({arc + u * seg,
                               planner::Vec2{a.x + u * double(b.x - a.x), double(c)},
                               false, c});
            }
        }
        arc += seg;
    }
    return out;
}

// Object confined to a road centerline, positioned so it reaches
// `crossing.point` exactly at frame `f_star`.
inline dynamics::ObjectTrack timed_crosser(int id, const RoadCrossing& crossing,
                                           double f_star, double speed_mps,
                                           int direction, const SynthSpec& spec) {
    dynamics::ObjectTrack track;
    track.object_id = id;
    const double v_px = speed_mps / (spec.gsd * spec.fps);  // px per frame
    const double width = 2.0 + (id % 2);                    // 2-3 m vehicles
    for (int f = 0; f < spec.frames; ++f) {
        const double along = (crossing.vertical ? crossing.point.y : crossing.point.x) +
                             direction * v_px * (f - f_star);
        if (along < 1.0 || along > spec.size_px - 2.0) continue;
        const double x = crossing.vertical ? crossing.line : along;
        const double y = crossing.vertical ? along : crossing.line;
        track.entries.push_back(dynamics::TrackEntry{f, x, y, width, width});
    }
    return track;
}

}  // namespace detail

// Deterministic synthetic scenario: crossing traffic timed against the
// straight and static routes at the designated UAV speed, plus untimed road
// cruisers. Fully determined by (seed, spec).
inline Scenario generate_scenario(std::uint64_t seed, const SynthSpec& spec) {
    if (spec.n_objects < 0) throw ValidationError("synth: negative object count");
    Scenario scn;
    scn.map = synth_city_map(spec);
    scn.fps = spec.fps;
    scn.velocities = {spec.uav_velocity_mps};
    scn.mode = Mode::Dynamic;
    scn.alpha = spec.alpha;
    scn.seed = seed;

    const int s0 = spec.block_px / 3;
    const planner::Cell start_cell{s0, s0};
    const planner::Cell goal_cell{spec.size_px - 1 - s0, spec.size_px - 1 - s0};
    scn.start = scn.map.cell_to_gps(start_cell.x, start_cell.y);
    scn.goal = scn.map.cell_to_gps(goal_cell.x, goal_cell.y);

    const auto lines = detail::road_lines(spec);
    if (!lines.empty()) {
        const int road_cells = static_cast<int>(lines.size()) * 2 * spec.size_px;
        if (spec.n_objects > road_cells)
            throw ValidationError("synth: more objects than road cells");
    } else if (spec.n_objects > 0) {
        throw ValidationError("synth: no roads to carry objects");
    }

    detail::SynthRng rng(seed);
    const double dp = spec.uav_velocity_mps / (spec.fps * spec.gsd);

    // Straight segment route and the planned static route, as polylines.
    planner::PixelPath straight;
    straight.cells = {start_cell, goal_cell};
    planner::PixelPath statically = planner::plan_path(scn.map, start_cell, goal_cell);

    auto straight_crossings = detail::find_crossings(straight, lines);
    auto static_crossings = detail::find_crossings(statically, lines);

    int id = 0;
    auto add_crossers = [&](const std::vector<detail::RoadCrossing>& crossings,
                            int quota) {
        for (int k = 0; k < quota && !crossings.empty(); ++k) {
            const auto& cr = crossings[static_cast<std::size_t>(k) % crossings.size()];
            const double speed = rng.uniform(5.0, 12.0);
            const int direction = rng.range(0, 1) ? 1 : -1;
            scn.tracks.push_back(detail::timed_crosser(++id, cr, cr.arc_px / dp, speed,
                                                       direction, spec));
        }
    };
    const int straight_quota = (spec.n_objects * 2 + 2) / 5;  // ~40%
    const int static_quota = (spec.n_objects * 3 + 5) / 10;   // ~30%
    add_crossers(straight_crossings, straight_quota);
    add_crossers(static_crossings, static_quota);

    // The rest cruise with random road, phase, and heading.
    while (id < spec.n_objects && !lines.empty()) {
        const int line = lines[static_cast<std::size_t>(rng.range(0, int(lines.size()) - 1))];
        const bool vertical = rng.range(0, 1) == 1;
        detail::RoadCrossing cruise{0.0,
                                    planner::Vec2{vertical ? double(line)
                                                           : rng.uniform(1.0, spec.size_px - 2.0),
                                                  vertical ? rng.uniform(1.0, spec.size_px - 2.0)
                                                           : double(line)},
                                    vertical, line};
        scn.tracks.push_back(detail::timed_crosser(
            ++id, cruise, rng.uniform(0.0, spec.frames / 2.0), rng.uniform(5.0, 12.0),
            rng.range(0, 1) ? 1 : -1, spec));
    }

    // Tracks that never enter the map would violate the CSV contract.
    std::erase_if(scn.tracks, [](const dynamics::ObjectTrack& t) {
        return t.entries.empty();
    });

    validate_scenario(scn);
    return scn;
}

// ---------------------------------------------------------------------------
// Bundled adversarial suite
// ---------------------------------------------------------------------------

struct BundledEntry {
    std::string name;
    std::uint64_t seed;
    SynthSpec spec;
    bool headline = false;
};

// Four traffic layouts, each flown at 5, 8, and 11 m/s. The 8 m/s flight of
// the densest layout is the headline scenario.
inline std::vector<BundledEntry> bundled_suite() {
    struct Layout {
        std::uint64_t seed;
        int n_objects;
    };
    const Layout layouts[4] = {{101, 16}, {202, 12}, {303, 14}, {404, 10}};
    const double speeds[3] = {5.0, 8.0, 11.0};

    std::vector<BundledEntry> suite;
    for (int li = 0; li < 4; ++li)
        for (int si = 0; si < 3; ++si) {
            BundledEntry e;
            e.seed = layouts[li].seed;
            e.spec.n_objects = layouts[li].n_objects;
            e.spec.uav_velocity_mps = speeds[si];
            e.headline = (li == 0 && si == 1);
            char name[64];
            std::snprintf(name, sizeof(name), "city%d-v%.0f", li, speeds[si]);
            e.name = name;
            suite.push_back(e);
        }
    return suite;
}

}  // namespace uavnav::simulator
