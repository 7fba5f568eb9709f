#pragma once

// In-flight local replanning: object state estimation from ground-truth
// tracks, path collision prediction, oriented Gaussian cost multipliers, and
// the dynamically weighted map they produce.
//
// Bearing convention: an object's bearing a is the image-frame angle whose
// unit motion direction is (sin a, cos a) in pixels. Due north (image -y) is
// a = pi, due east is a = pi/2.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "uavnav/error.hpp"
#include "uavnav/planner.hpp"
#include "uavnav/uav_state.hpp"
#include "uavnav/weightmap.hpp"

namespace uavnav::dynamics {

using planner::Cell;
using planner::PixelPath;
using planner::Vec2;

// ---------------------------------------------------------------------------
// Tracks and object state
// ---------------------------------------------------------------------------

struct TrackEntry {
    int frame = 0;
    double x_px = 0.0;
    double y_px = 0.0;
    double width_px = 0.0;
    double height_px = 0.0;
};

struct ObjectTrack {
    int object_id = 0;
    std::vector<TrackEntry> entries;  // frames strictly increasing

    const TrackEntry* entry_at(int frame) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), frame,
                                   [](const TrackEntry& e, int f) { return e.frame < f; });
        return (it != entries.end() && it->frame == frame) ? &*it : nullptr;
    }
};

struct ObjectState {
    Vec2 position_px;
    double velocity_mps = 0.0;
    double bearing_rad = 0.0;  // [0, 2*pi)
    double width_px = 0.0;
};

inline double normalize_bearing(double a) {
    const double two_pi = 2.0 * geodesy::kPi;
    a = std::fmod(a, two_pi);
    return a < 0.0 ? a + two_pi : a;
}

// Finite-difference state at `frame`: velocity from the displacement since
// the previous entry (or to the next entry when `frame` opens the track),
// bearing from the same displacement. A stationary object keeps the bearing
// of its last motion, or 0 if it never moved.
inline ObjectState estimate_object_state(const ObjectTrack& track, int frame,
                                         double gsd, double dataset_fps) {
    const auto& e = track.entries;
    auto it = std::lower_bound(e.begin(), e.end(), frame,
                               [](const TrackEntry& t, int f) { return t.frame < f; });
    if (it == e.end() || it->frame != frame)
        throw ValidationError("object state: track has no entry for frame " +
                              std::to_string(frame));
    const std::size_t i = static_cast<std::size_t>(it - e.begin());

    ObjectState state;
    state.position_px = Vec2{it->x_px, it->y_px};
    state.width_px = it->width_px;

    auto displacement = [&](std::size_t from, std::size_t to) {
        return Vec2{e[to].x_px - e[from].x_px, e[to].y_px - e[from].y_px};
    };
    Vec2 d{0.0, 0.0};
    int frame_gap = 1;
    if (i > 0) {
        d = displacement(i - 1, i);
        frame_gap = e[i].frame - e[i - 1].frame;
    } else if (e.size() > 1) {
        d = displacement(0, 1);
        frame_gap = e[1].frame - e[0].frame;
    }

    const double step_px = std::hypot(d.x, d.y);
    if (step_px > 0.0) {
        state.velocity_mps = step_px * gsd * dataset_fps / frame_gap;
        state.bearing_rad = normalize_bearing(std::atan2(d.x, d.y));
    } else {
        state.velocity_mps = 0.0;
        state.bearing_rad = 0.0;
        // Walk back to the last frame pair that actually moved.
        for (std::size_t k = std::min(i, e.size() - 1); k > 0; --k) {
            const Vec2 prev = displacement(k - 1, k);
            if (std::hypot(prev.x, prev.y) > 0.0) {
                state.bearing_rad = normalize_bearing(std::atan2(prev.x, prev.y));
                break;
            }
        }
    }
    return state;
}

// ---------------------------------------------------------------------------
// Collision prediction
// ---------------------------------------------------------------------------

struct CollisionPrediction {
    bool collides = false;
    Cell collision_point;  // meaningful only when collides
    double t_obj_s = std::numeric_limits<double>::infinity();
    double t_uav_s = std::numeric_limits<double>::infinity();
};

// Casts the object's motion ray against the path polyline ahead of the UAV.
// Among intersections the one the object reaches first wins. Times are
// ground-speed travel times to that point; a stationary object never
// collides.
inline CollisionPrediction predict_collision(const PixelPath& path,
                                             const simulator::UavState& uav,
                                             const ObjectState& obj, double gsd) {
    CollisionPrediction pred;
    if (obj.velocity_mps <= 0.0 || path.cells.size() < 2) return pred;

    const Vec2 origin = obj.position_px;
    const Vec2 dir{std::sin(obj.bearing_rad), std::cos(obj.bearing_rad)};

    // Remaining polyline: the point at the UAV's arc, then every vertex past it.
    std::vector<Vec2> pts;
    pts.push_back(planner::point_at_arc(path, uav.path_arc_px));
    double acc = 0.0;
    for (std::size_t i = 1; i < path.cells.size(); ++i) {
        acc += planner::euclid_px(path.cells[i - 1], path.cells[i]);
        if (acc > uav.path_arc_px)
            pts.push_back(Vec2{double(path.cells[i].x), double(path.cells[i].y)});
    }

    double best_ray = std::numeric_limits<double>::infinity();
    double best_arc = 0.0;
    Vec2 best_point{};
    double arc_base = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const Vec2 a = pts[i - 1], b = pts[i];
        const double ex = b.x - a.x, ey = b.y - a.y;
        const double seg_len = std::hypot(ex, ey);
        // Solve origin + t*dir = a + u*(b - a).
        const double denom = dir.x * ey - dir.y * ex;
        if (std::abs(denom) > 1e-12) {
            const double ax = a.x - origin.x, ay = a.y - origin.y;
            const double t = (ax * ey - ay * ex) / denom;
            const double u = (dir.y * ax - dir.x * ay) / denom;
            if (t >= 0.0 && u >= 0.0 && u <= 1.0 && t < best_ray) {
                best_ray = t;
                best_arc = arc_base + u * seg_len;
                best_point = Vec2{a.x + u * ex, a.y + u * ey};
            }
        }
        arc_base += seg_len;
    }

    if (!std::isfinite(best_ray)) return pred;
    pred.collides = true;
    pred.collision_point = Cell{static_cast<int>(std::lround(best_point.x)),
                                static_cast<int>(std::lround(best_point.y))};
    pred.t_obj_s = best_ray * gsd / obj.velocity_mps;
    pred.t_uav_s = best_arc * gsd / uav.velocity_mps;
    return pred;
}

// ---------------------------------------------------------------------------
// Multiplier placement
// ---------------------------------------------------------------------------

struct InflationConfig {
    double safety_margin_s = 5.0;   // S
    double delta_s = 5.0;           // collision-time window
    double sigma_x_scale = 1.0;     // sigma_x = scale * object width in px
    double peak_multiplier = 20.0;  // P
    double cutoff_sigmas = 4.0;

    void validate() const {
        if (!(safety_margin_s > 0.0) || !(delta_s > 0.0) || !(sigma_x_scale > 0.0) ||
            !(cutoff_sigmas > 0.0) || !(peak_multiplier > 1.0))
            throw ValidationError("inflation config: all fields positive, peak > 1");
    }
};

// The two cells a prediction inflates: the collision point plus the
// projected location when the collision window is tight, otherwise the
// object's next plus projected locations.
inline std::vector<Cell> placement_locations(const CollisionPrediction& pred,
                                             const ObjectState& obj,
                                             const simulator::UavState& uav,
                                             const InflationConfig& cfg, double gsd,
                                             double fps) {
    cfg.validate();
    if (!(uav.velocity_mps > 0.0))
        throw ValidationError("placement: degenerate UAV state (zero velocity)");
    if (!(fps > 0.0)) throw ValidationError("placement: fps must be positive");

    const Vec2 dir{std::sin(obj.bearing_rad), std::cos(obj.bearing_rad)};
    auto displaced = [&](double distance_m) {
        return Cell{static_cast<int>(std::lround(obj.position_px.x + distance_m * dir.x / gsd)),
                    static_cast<int>(std::lround(obj.position_px.y + distance_m * dir.y / gsd))};
    };

    const double d_uav_obj_m = std::hypot(obj.position_px.x - uav.position_px.x,
                                          obj.position_px.y - uav.position_px.y) * gsd;
    const Cell projected = displaced(obj.velocity_mps * d_uav_obj_m / uav.velocity_mps);

    if (pred.collides && std::abs(pred.t_obj_s - pred.t_uav_s) < cfg.delta_s)
        return {pred.collision_point, projected};
    const Cell next = displaced(obj.velocity_mps / fps);
    return {next, projected};
}

// ---------------------------------------------------------------------------
// Gaussian multiplier fields
// ---------------------------------------------------------------------------

// Anisotropic Gaussian cost multiplier: sigma_y lies along the bearing,
// sigma_x across it, peak rescaled to P, tail clamped to exactly 1 at and
// beyond cutoff_sigmas. Values are stored for a bounded patch; everywhere
// else the multiplier is 1.
struct MultiplierField {
    Vec2 center_px;
    double sigma_x_px = 0.0;
    double sigma_y_px = 0.0;
    double bearing_rad = 0.0;
    double peak = 1.0;
    double cutoff_sigmas = 4.0;

    int x0 = 0, y0 = 0, width = 0, height = 0;
    std::vector<double> values;  // multipliers in [1, peak]

    // Closed-form multiplier at a continuous image point.
    double value_at(double x, double y) const {
        const double dx = x - center_px.x, dy = y - center_px.y;
        const double s = std::sin(bearing_rad), c = std::cos(bearing_rad);
        const double u = dx * c - dy * s;  // across the motion axis
        const double v = dx * s + dy * c;  // along the motion axis
        const double q = (u / sigma_x_px) * (u / sigma_x_px) +
                         (v / sigma_y_px) * (v / sigma_y_px);
        if (q >= cutoff_sigmas * cutoff_sigmas) return 1.0;
        return std::max(1.0, peak * std::exp(-0.5 * q));
    }

    double cell_multiplier(int x, int y) const {
        if (x < x0 || y < y0 || x >= x0 + width || y >= y0 + height) return 1.0;
        return values[static_cast<std::size_t>(y - y0) * width + (x - x0)];
    }
};

inline MultiplierField gaussian_multiplier_field(const ObjectState& obj,
                                                 const Cell& center,
                                                 const InflationConfig& cfg,
                                                 double gsd) {
    cfg.validate();
    if (!(gsd > 0.0)) throw ValidationError("gaussian field: gsd must be positive");
    MultiplierField f;
    f.center_px = Vec2{double(center.x), double(center.y)};
    f.sigma_x_px = cfg.sigma_x_scale * obj.width_px;
    if (!(f.sigma_x_px > 0.0))
        throw ValidationError("gaussian field: object width gives non-positive sigma_x");
    // Eq. for the along-track spread: velocity times the safety margin,
    // floored at one pixel so stationary objects still get a footprint.
    f.sigma_y_px = std::max(1.0, obj.velocity_mps * cfg.safety_margin_s / gsd);
    f.bearing_rad = obj.bearing_rad;
    f.peak = cfg.peak_multiplier;
    f.cutoff_sigmas = cfg.cutoff_sigmas;

    // The multiplier exceeds 1 only where q < 2*ln(peak); beyond the cutoff
    // it is 1 by definition. Size the patch to the tighter of the two.
    const double r_eff =
        std::min(cfg.cutoff_sigmas, std::sqrt(2.0 * std::log(f.peak)));
    const double a = r_eff * f.sigma_x_px, b = r_eff * f.sigma_y_px;
    const double s = std::sin(f.bearing_rad), c = std::cos(f.bearing_rad);
    const double half_x = std::sqrt(a * a * c * c + b * b * s * s);
    const double half_y = std::sqrt(a * a * s * s + b * b * c * c);

    f.x0 = static_cast<int>(std::floor(center.x - half_x));
    f.y0 = static_cast<int>(std::floor(center.y - half_y));
    f.width = static_cast<int>(std::ceil(center.x + half_x)) - f.x0 + 1;
    f.height = static_cast<int>(std::ceil(center.y + half_y)) - f.y0 + 1;
    f.values.resize(static_cast<std::size_t>(f.width) * f.height);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x)
            f.values[static_cast<std::size_t>(y) * f.width + x] =
                f.value_at(f.x0 + x, f.y0 + y);
    return f;
}

// ---------------------------------------------------------------------------
// Dynamic weight map
// ---------------------------------------------------------------------------

// Base map shared and untouched; multipliers compose multiplicatively per
// cell and are exactly 1 outside every field's footprint. Satisfies the
// planner's WeightGrid concept, and min_weight stays valid because all
// multipliers are >= 1.
class DynamicWeightMap {
public:
    explicit DynamicWeightMap(const mapbuild::WeightMap& base) : base_(&base) {}

    int width() const { return base_->width(); }
    int height() const { return base_->height(); }
    double gsd() const { return base_->gsd(); }
    double min_weight() const { return base_->min_weight(); }

    double multiplier(int x, int y) const {
        const auto it = mult_.find(key(x, y));
        return it == mult_.end() ? 1.0 : it->second;
    }
    double weight(int x, int y) const { return base_->weight(x, y) * multiplier(x, y); }

    const mapbuild::WeightMap& base() const { return *base_; }
    std::size_t inflated_cells() const { return mult_.size(); }

    void add_field(const MultiplierField& f) {
        const int x_lo = std::max(f.x0, 0), y_lo = std::max(f.y0, 0);
        const int x_hi = std::min(f.x0 + f.width, width());
        const int y_hi = std::min(f.y0 + f.height, height());
        for (int y = y_lo; y < y_hi; ++y)
            for (int x = x_lo; x < x_hi; ++x) {
                const double m = f.values[static_cast<std::size_t>(y - f.y0) * f.width +
                                          (x - f.x0)];
                if (m > 1.0) mult_.try_emplace(key(x, y), 1.0).first->second *= m;
            }
    }

private:
    static std::int64_t key(int x, int y) {
        return (static_cast<std::int64_t>(y) << 32) | static_cast<std::uint32_t>(x);
    }

    const mapbuild::WeightMap* base_;
    std::unordered_map<std::int64_t, double> mult_;  // absent key = multiplier 1
};

inline DynamicWeightMap apply_dynamic_costs(const mapbuild::WeightMap& base,
                                            const std::vector<MultiplierField>& fields) {
    DynamicWeightMap dyn(base);
    for (const MultiplierField& f : fields) dyn.add_field(f);
    return dyn;
}

// Replans from the UAV's current cell over the effective weights. Multipliers
// >= 1 keep the base heuristic admissible, so the result is cost-optimal on
// the inflated map.
inline PixelPath replan(const DynamicWeightMap& dyn, const simulator::UavState& uav,
                        const Cell& goal) {
    const Cell start{static_cast<int>(std::lround(uav.position_px.x)),
                     static_cast<int>(std::lround(uav.position_px.y))};
    return planner::plan_path(dyn, start, goal);
}

// ---------------------------------------------------------------------------
// Track CSV (frame,object_id,x_px,y_px,width_px,height_px)
// ---------------------------------------------------------------------------

inline constexpr const char* kTrackCsvHeader =
    "frame,object_id,x_px,y_px,width_px,height_px";

inline std::string write_tracks_csv(const std::vector<ObjectTrack>& tracks) {
    // Frame-major order: all objects of frame f before frame f+1.
    struct Row {
        int frame;
        int id;
        const TrackEntry* e;
    };
    std::vector<Row> rows;
    for (const ObjectTrack& t : tracks)
        for (const TrackEntry& e : t.entries) rows.push_back({e.frame, t.object_id, &e});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
    });
    std::string out = std::string(kTrackCsvHeader) + "\n";
    // Shortest round-trip formatting keeps reparsed values bit-identical.
    auto num = [](double v) {
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    };
    for (const Row& r : rows) {
        out += std::to_string(r.frame) + "," + std::to_string(r.id) + "," +
               num(r.e->x_px) + "," + num(r.e->y_px) + "," + num(r.e->width_px) + "," +
               num(r.e->height_px) + "\n";
    }
    return out;
}

inline std::vector<ObjectTrack> parse_tracks_csv(const std::string& content) {
    std::vector<ObjectTrack> tracks;
    std::unordered_map<int, std::size_t> index;
    std::size_t pos = 0;
    bool header = true;
    int line_no = 0;
    while (pos < content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string::npos) eol = content.size();
        std::string line = content.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            if (line != kTrackCsvHeader)
                throw IoError("tracks csv: bad header, want '" +
                              std::string(kTrackCsvHeader) + "'");
            header = false;
            continue;
        }
        std::array<double, 6> fields{};
        std::size_t p = 0;
        for (int i = 0; i < 6; ++i) {
            std::size_t comma = line.find(',', p);
            if (i < 5 && comma == std::string::npos)
                throw IoError("tracks csv: line " + std::to_string(line_no) +
                              ": expected 6 fields");
            const std::string cell =
                line.substr(p, (i == 5 ? line.size() : comma) - p);
            try {
                fields[i] = std::stod(cell);
            } catch (const std::exception&) {
                throw IoError("tracks csv: line " + std::to_string(line_no) +
                              ": non-numeric field '" + cell + "'");
            }
            p = comma + 1;
        }
        const int frame = static_cast<int>(fields[0]);
        const int id = static_cast<int>(fields[1]);
        auto [it, fresh] = index.try_emplace(id, tracks.size());
        if (fresh) {
            tracks.emplace_back();
            tracks.back().object_id = id;
        }
        ObjectTrack& track = tracks[it->second];
        if (!track.entries.empty() && frame <= track.entries.back().frame)
            throw IoError("tracks csv: non-monotone frames for object " +
                          std::to_string(id));
        track.entries.push_back(TrackEntry{frame, fields[2], fields[3], fields[4],
                                           fields[5]});
    }
    return tracks;
}

}  // namespace uavnav::dynamics
