// SPDX-License-Identifier: Apache-2.0
//
// plpred - link-level mmWave path loss prediction toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Ray-based ground-truth path loss over rasterized scenes. Candidate rays are
// the direct path plus single wall reflections found with the image method.
// Free-space loss applies along the 3-D ray, reflections pay a fixed penalty,
// and segments through tree canopies pay a per-meter foliage loss. Of the two
// strongest candidates (by pre-foliage loss), the lower total wins.

#ifndef PLPRED_ORACLE_HPP
#define PLPRED_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plpred/common.hpp"
#include "plpred/dataset.hpp"
#include "plpred/geometry.hpp"
#include "plpred/raycast.hpp"
#include "plpred/rng.hpp"
#include "plpred/scene.hpp"

namespace plpred {

inline constexpr double kSpeedOfLight = 299792458.0;

struct OracleConfig {
    double carrier_hz = 28e9;
    double tx_height_m = 9.0;
    double rx_height_m = 1.5;
    double reflection_loss_db = 6.4;
    double foliage_rate_db_per_m = 2.5;
    double canopy_fraction = 0.75; // loss applies in the top fraction of a tree
    double max_pathloss_db = 160.0;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (carrier_hz <= 0.0 || tx_height_m <= 0.0 || rx_height_m <= 0.0 ||
            reflection_loss_db <= 0.0 || foliage_rate_db_per_m <= 0.0 || max_pathloss_db <= 0.0)
            throw validation_error("oracle config: all parameters must be positive");
        if (canopy_fraction <= 0.0 || canopy_fraction > 1.0)
            throw validation_error("oracle config: canopy_fraction must be in (0, 1]");
    }
};

// One propagation path candidate. vertices has 2 points for the direct ray
// and 3 for a single reflection (the middle one on the wall).
struct Ray {
    std::vector<Point3> vertices;
    double length_m = 0.0;
    bool los = false;
    double base_loss_db = 0.0; // free space plus reflection penalty
    double foliage_loss_db = 0.0;
};

struct PathLossResult {
    bool outage = false;
    double pathloss_db = 0.0;
    bool los = false;
};

inline double fspl_db(double d_m, double f_hz)
{
    if (d_m <= 0.0 || f_hz <= 0.0)
        throw validation_error("fspl_db: distance and frequency must be positive");
    return 20.0 * std::log10(4.0 * M_PI * d_m * f_hz / kSpeedOfLight);
}

namespace detail {

inline void require_in_bounds(const Scene& scene, const Point3& p, const char* what)
{
    if (!scene.in_bounds_m(p.x, p.y))
        throw validation_error(std::string(what) + " (" + format_real(p.x) + ", " +
                               format_real(p.y) + ") outside scene '" + scene.id + "'");
}

} // namespace detail

// True iff the 2-D projection of a-b crosses no building cell interior.
// Buildings block regardless of ray height; generated buildings are taller
// than both endpoint heights.
inline bool los_clear(const Scene& scene, const Point3& a, const Point3& b)
{
    detail::require_in_bounds(scene, a, "los endpoint");
    detail::require_in_bounds(scene, b, "los endpoint");
    const double res = scene.resolution_m;
    const Vec2 pa{a.x / res, a.y / res};
    const Vec2 pb{b.x / res, b.y / res};
    bool clear = true;
    walk_cells(pa, pb, [&](int row, int col, double, double) {
        if (scene.cell_in_bounds(row, col) && scene.building_mask.at(row, col) != 0) {
            clear = false;
            return false;
        }
        return true;
    });
    return clear;
}

// Foliage loss along one 3-D segment: rate times the 3-D length of the parts
// whose 2-D position is over a tree and whose height lies in the canopy zone
// [(1 - canopy_fraction) * h, h]. z is linear along the segment.
inline double foliage_loss_db(const Scene& scene, const Point3& a, const Point3& b,
                              const OracleConfig& cfg)
{
    const double res = scene.resolution_m;
    const Vec2 pa{a.x / res, a.y / res};
    const Vec2 pb{b.x / res, b.y / res};
    const double len3 = distance_3d(a, b);
    if (len3 == 0.0)
        return 0.0;

    const double za = a.z;
    const double dz = b.z - a.z;

    // fraction of [t0, t1] where za + t*dz lies in [lo, hi]
    const auto overlap = [&](double t0, double t1, double lo, double hi) {
        if (dz == 0.0)
            return (za >= lo && za <= hi) ? t1 - t0 : 0.0;
        double ta = (lo - za) / dz;
        double tb = (hi - za) / dz;
        if (ta > tb)
            std::swap(ta, tb);
        const double s0 = std::max(t0, ta);
        const double s1 = std::min(t1, tb);
        return std::max(0.0, s1 - s0);
    };

    double t_in_canopy = 0.0;
    const auto accumulate = [&](int row, int col, double t0, double t1) {
        if (!scene.cell_in_bounds(row, col))
            return true;
        const double h = scene.foliage_height_m.at(row, col);
        if (h > 0.0)
            t_in_canopy += overlap(t0, t1, (1.0 - cfg.canopy_fraction) * h, h);
        return true;
    };

    const double d2 = norm(pb - pa);
    if (d2 < 1e-12) {
        // vertical segment: a single cell, full parameter range
        int row = 0;
        int col = 0;
        scene.cell_of(a.x, a.y, row, col);
        accumulate(row, col, 0.0, 1.0);
    } else {
        walk_cells(pa, pb, accumulate);
    }
    return cfg.foliage_rate_db_per_m * t_in_canopy * len3;
}

// Exterior wall: a maximal axis-aligned run of building boundary on one
// gridline, in meters. `outward` is the sign of the free-space side along the
// perpendicular axis.
struct Wall {
    int axis = 0; // 0: wall on x = coord (normal along x), 1: wall on y = coord
    double coord = 0.0;
    double lo = 0.0; // span along the wall
    double hi = 0.0;
    int outward = 1;
};

inline std::vector<Wall> extract_walls(const Scene& scene)
{
    std::vector<Wall> walls;
    const double res = scene.resolution_m;
    const int w = scene.width_px;
    const int h = scene.height_px;

    const auto mask = [&](int row, int col) {
        return scene.cell_in_bounds(row, col) && scene.building_mask.at(row, col) != 0;
    };

    // vertical gridlines x = k: compare columns k-1 and k
    for (int k = 0; k <= w; ++k) {
        int run_start = -1;
        int run_outward = 0;
        for (int row = 0; row <= h; ++row) {
            int outward = 0;
            if (row < h) {
                const bool left = mask(row, k - 1);
                const bool right = mask(row, k);
                if (left != right)
                    outward = left ? 1 : -1;
            }
            if (outward != run_outward) {
                if (run_outward != 0)
                    walls.push_back({0, k * res, run_start * res, row * res, run_outward});
                run_start = row;
                run_outward = outward;
            }
        }
    }
    // horizontal gridlines y = k: compare rows k-1 and k
    for (int k = 0; k <= h; ++k) {
        int run_start = -1;
        int run_outward = 0;
        for (int col = 0; col <= w; ++col) {
            int outward = 0;
            if (col < w) {
                const bool below = mask(k - 1, col);
                const bool above = mask(k, col);
                if (below != above)
                    outward = below ? 1 : -1;
            }
            if (outward != run_outward) {
                if (run_outward != 0)
                    walls.push_back({1, k * res, run_start * res, col * res, run_outward});
                run_start = col;
                run_outward = outward;
            }
        }
    }
    return walls;
}

namespace detail {

// Image-method construction for one wall: mirror tx across the wall line and
// intersect the mirrored-tx -> rx segment with the wall span. Geometric tests
// only; occlusion of the two legs is checked separately.
struct MirrorHit {
    Vec2 q;          // reflection point, meters
    double len2d;    // unfolded 2-D path length
};

inline std::optional<MirrorHit> mirror_hit(const Wall& wall, const Vec2& tx, const Vec2& rx)
{
    const double t_perp = wall.axis == 0 ? tx.x : tx.y;
    const double r_perp = wall.axis == 0 ? rx.x : rx.y;
    // both endpoints strictly on the wall's free side
    if ((t_perp - wall.coord) * wall.outward <= 0.0 || (r_perp - wall.coord) * wall.outward <= 0.0)
        return std::nullopt;

    const double m_perp = 2.0 * wall.coord - t_perp; // mirrored tx
    const double t_par = wall.axis == 0 ? tx.y : tx.x;
    const double r_par = wall.axis == 0 ? rx.y : rx.x;

    const double denom = r_perp - m_perp;
    if (denom == 0.0)
        return std::nullopt;
    const double t = (wall.coord - m_perp) / denom;
    if (t <= 0.0 || t >= 1.0)
        return std::nullopt;
    const double q_par = t_par + t * (r_par - t_par);
    if (q_par <= wall.lo || q_par >= wall.hi) // strictly inside the span
        return std::nullopt;

    MirrorHit hit;
    hit.q = wall.axis == 0 ? Vec2{wall.coord, q_par} : Vec2{q_par, wall.coord};
    const double dpar = r_par - t_par;
    hit.len2d = std::sqrt(denom * denom + dpar * dpar);
    return hit;
}

inline Ray make_reflected_ray(const Scene& scene, const Point3& tx, const Point3& rx,
                              const MirrorHit& hit, const OracleConfig& cfg)
{
    Ray ray;
    ray.los = false;
    const double dz = rx.z - tx.z;
    ray.length_m = std::sqrt(hit.len2d * hit.len2d + dz * dz);
    ray.base_loss_db = fspl_db(ray.length_m, cfg.carrier_hz) + cfg.reflection_loss_db;
    // z at the reflection point, linear in unfolded arc length
    const double leg1 = norm(hit.q - xy(tx));
    const double zq = tx.z + (hit.len2d > 0.0 ? leg1 / hit.len2d : 0.0) * dz;
    const Point3 qp{hit.q.x, hit.q.y, zq};
    ray.vertices = {tx, qp, rx};
    ray.foliage_loss_db =
        foliage_loss_db(scene, tx, qp, cfg) + foliage_loss_db(scene, qp, rx, cfg);
    return ray;
}

} // namespace detail

// All geometrically valid single reflections whose two legs are unobstructed.
// Order follows the wall extraction order and is deterministic.
inline std::vector<Ray> reflected_rays(const Scene& scene, const Point3& tx, const Point3& rx,
                                       const OracleConfig& cfg = {})
{
    detail::require_in_bounds(scene, tx, "ray endpoint");
    detail::require_in_bounds(scene, rx, "ray endpoint");
    std::vector<Ray> rays;
    const Vec2 t2 = xy(tx);
    const Vec2 r2 = xy(rx);
    for (const Wall& wall : extract_walls(scene)) {
        const auto hit = detail::mirror_hit(wall, t2, r2);
        if (!hit)
            continue;
        const Point3 q{hit->q.x, hit->q.y, 0.0};
        if (!los_clear(scene, tx, q) || !los_clear(scene, q, rx))
            continue;
        rays.push_back(detail::make_reflected_ray(scene, tx, rx, *hit, cfg));
    }
    return rays;
}

// Reported path loss for one link: take the direct ray (if clear) and the
// strongest valid reflections, keep the two lowest base losses, add foliage,
// return the lower total and the winner's LOS flag. Outage when no candidate
// survives or the winner exceeds the cutoff.
inline PathLossResult path_loss(const Scene& scene, const Point3& tx, const Point3& rx,
                                const OracleConfig& cfg, const std::vector<Wall>* walls = nullptr)
{
    detail::require_in_bounds(scene, tx, "link endpoint");
    detail::require_in_bounds(scene, rx, "link endpoint");
    if (scene.is_building_at(tx.x, tx.y) || scene.is_building_at(rx.x, rx.y))
        throw validation_error("link endpoint inside a building in scene '" + scene.id + "'");

    std::vector<Ray> top;
    top.reserve(2);

    const bool direct_clear = los_clear(scene, tx, rx);
    if (direct_clear) {
        Ray ray;
        ray.vertices = {tx, rx};
        ray.length_m = distance_3d(tx, rx);
        ray.los = true;
        ray.base_loss_db = fspl_db(ray.length_m, cfg.carrier_hz);
        ray.foliage_loss_db = foliage_loss_db(scene, tx, rx, cfg);
        top.push_back(std::move(ray));
    }

    // Reflection base loss is monotone in path length, so walk the mirror
    // candidates shortest-first and keep the first ones with clear legs.
    const std::size_t needed = 2 - top.size();
    if (needed > 0) {
        std::vector<Wall> local_walls;
        if (!walls) {
            local_walls = extract_walls(scene);
            walls = &local_walls;
        }
        struct Cand {
            detail::MirrorHit hit;
            std::size_t wall_index;
        };
        std::vector<Cand> cands;
        const Vec2 t2 = xy(tx);
        const Vec2 r2 = xy(rx);
        for (std::size_t i = 0; i < walls->size(); ++i) {
            if (const auto hit = detail::mirror_hit((*walls)[i], t2, r2))
                cands.push_back({*hit, i});
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.hit.len2d != b.hit.len2d)
                return a.hit.len2d < b.hit.len2d;
            return a.wall_index < b.wall_index;
        });
        std::size_t found = 0;
        for (const Cand& cand : cands) {
            if (found == needed)
                break;
            const Point3 q{cand.hit.q.x, cand.hit.q.y, 0.0};
            if (!los_clear(scene, tx, q) || !los_clear(scene, q, rx))
                continue;
            top.push_back(detail::make_reflected_ray(scene, tx, rx, cand.hit, cfg));
            ++found;
        }
    }

    if (top.empty())
        return {true, 0.0, false};

    const Ray* best = nullptr;
    double best_total = 0.0;
    for (const Ray& ray : top) {
        const double total = ray.base_loss_db + ray.foliage_loss_db;
        if (!best || total < best_total) {
            best = &ray;
            best_total = total;
        }
    }
    if (best_total > cfg.max_pathloss_db)
        return {true, 0.0, false};
    return {false, best_total, best->los};
}

// Samples pole and UE locations uniformly over non-building cells (uniform
// cell, then uniform position within it) and labels every pole-UE pair within
// the 2-D radius. Outage links are dropped. Deterministic per seed.
inline std::vector<LinkRecord> generate_dataset(const std::vector<Scene>& scenes,
                                                int n_poles_per_scene, int n_ue_per_scene,
                                                const OracleConfig& cfg, std::uint64_t seed,
                                                double radius_m = 500.0)
{
    cfg.validate();
    if (n_poles_per_scene < 0 || n_ue_per_scene < 0)
        throw validation_error("generate_dataset: negative sample counts");

    std::vector<LinkRecord> records;
    Rng master(seed);
    for (std::size_t si = 0; si < scenes.size(); ++si) {
        const Scene& scene = scenes[si];
        scene.validate();
        Rng rng = master.fork(si);

        std::vector<int> free_cells;
        free_cells.reserve(static_cast<std::size_t>(scene.width_px) * scene.height_px);
        for (int r = 0; r < scene.height_px; ++r)
            for (int c = 0; c < scene.width_px; ++c)
                if (scene.building_mask.at(r, c) == 0)
                    free_cells.push_back(r * scene.width_px + c);
        if (free_cells.empty())
            throw validation_error("scene '" + scene.id + "' has no free cell");

        const auto sample_point = [&](double height) {
            const auto cell = free_cells[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<long long>(free_cells.size()) - 1))];
            const int row = cell / scene.width_px;
            const int col = cell % scene.width_px;
            const double res = scene.resolution_m;
            return Point3{(col + rng.uniform()) * res, (row + rng.uniform()) * res, height};
        };

        std::vector<Point3> poles;
        for (int i = 0; i < n_poles_per_scene; ++i)
            poles.push_back(sample_point(cfg.tx_height_m));
        std::vector<Point3> ues;
        for (int i = 0; i < n_ue_per_scene; ++i)
            ues.push_back(sample_point(cfg.rx_height_m));

        const std::vector<Wall> walls = extract_walls(scene);
        for (const Point3& pole : poles) {
            for (const Point3& ue : ues) {
                if (distance_2d(pole, ue) > radius_m)
                    continue;
                const PathLossResult res = path_loss(scene, pole, ue, cfg, &walls);
                if (res.outage)
                    continue;
                LinkRecord rec;
                rec.scene_id = scene.id;
                rec.tx = pole;
                rec.rx = ue;
                rec.distance_3d_m = distance_3d(pole, ue);
                rec.pathloss_db = res.pathloss_db;
                rec.los = res.los;
                records.push_back(std::move(rec));
            }
        }
    }
    return records;
}

} // namespace plpred

#endif
