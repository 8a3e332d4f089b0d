// SPDX-License-Identifier: Apache-2.0
//
// Test-side reference implementations, written independently of the library
// code they check. Deliberately slow and simple.

#ifndef PLPRED_TESTS_SUPPORT_TEST_ORACLES_HPP
#define PLPRED_TESTS_SUPPORT_TEST_ORACLES_HPP

#include <cmath>
#include <vector>

#include "plpred/scene.hpp"

namespace testsupport {

inline plpred::Scene make_scene(int width_px, int height_px, double resolution_m = 1.0,
                                double foliage_max_m = 30.0)
{
    plpred::Scene s;
    s.id = "fixture";
    s.width_px = width_px;
    s.height_px = height_px;
    s.resolution_m = resolution_m;
    s.foliage_max_m = foliage_max_m;
    s.building_mask = plpred::Grid<unsigned char>(height_px, width_px, 0);
    s.building_height_m = plpred::Grid<double>(height_px, width_px, 0.0);
    s.foliage_height_m = plpred::Grid<double>(height_px, width_px, 0.0);
    return s;
}

// half-open pixel rectangle [r0, r1) x [c0, c1)
inline void add_building(plpred::Scene& s, int r0, int c0, int r1, int c1, double height_m)
{
    for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) {
            s.building_mask.at(r, c) = 1;
            s.building_height_m.at(r, c) = height_m;
            s.foliage_height_m.at(r, c) = 0.0;
        }
    }
}

inline void add_foliage(plpred::Scene& s, int r0, int c0, int r1, int c1, double height_m)
{
    for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c)
            if (s.building_mask.at(r, c) == 0)
                s.foliage_height_m.at(r, c) = height_m;
}

// Brute-force line-of-sight: sample the open segment densely and look up the
// pixel under each sample point.
inline bool sampled_los_clear(const plpred::Scene& s, const plpred::Point3& a,
                              const plpred::Point3& b, int n_samples = 10000)
{
    const double res = s.resolution_m;
    for (int i = 0; i < n_samples; ++i) {
        const double t = (i + 0.5) / n_samples;
        const double x = (a.x + t * (b.x - a.x)) / res;
        const double y = (a.y + t * (b.y - a.y)) / res;
        const int col = static_cast<int>(std::floor(x));
        const int row = static_cast<int>(std::floor(y));
        if (row >= 0 && row < s.height_px && col >= 0 && col < s.width_px &&
            s.building_mask.at(row, col) != 0)
            return false;
    }
    return true;
}

// Brute-force foliage loss: Riemann sum over the 3-D segment with the canopy
// zone rule applied per sample.
inline double sampled_foliage_loss_db(const plpred::Scene& s, const plpred::Point3& a,
                                      const plpred::Point3& b, double rate_db_per_m,
                                      double canopy_fraction, int n_samples = 200000)
{
    const double res = s.resolution_m;
    const double len3 = plpred::distance_3d(a, b);
    double inside = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        const double t = (i + 0.5) / n_samples;
        const double x = (a.x + t * (b.x - a.x)) / res;
        const double y = (a.y + t * (b.y - a.y)) / res;
        const double z = a.z + t * (b.z - a.z);
        const int col = static_cast<int>(std::floor(x));
        const int row = static_cast<int>(std::floor(y));
        if (row < 0 || row >= s.height_px || col < 0 || col >= s.width_px)
            continue;
        const double h = s.foliage_height_m.at(row, col);
        if (h > 0.0 && z >= (1.0 - canopy_fraction) * h && z <= h)
            inside += 1.0;
    }
    return rate_db_per_m * (inside / n_samples) * len3;
}

// Patch-row count by direct pixel enumeration: patch index of a pixel row
// offset p (up positive, tx at 0) is floor((p + (P-1)/2) / P).
inline int enumerated_patch_rows(long long row_gap, int P, int pad)
{
    const auto patch_of = [&](long long p) {
        const long long shifted = p + (P - 1) / 2;
        return shifted >= 0 ? shifted / P : -((-shifted + P - 1) / P);
    };
    return static_cast<int>(patch_of(row_gap) - patch_of(0)) + 1 + 2 * pad;
}

// Analytic scene description used for rotation fixtures: the same shapes can
// be rasterized at any rigid rotation, so two rasterizations differ only by
// aliasing, never by resampling loss.
struct RectShape {
    double cx, cy;     // center, meters
    double hx, hy;     // half extents
    double angle;      // CCW radians
    double height_m;
};

struct CircShape {
    double cx, cy;
    double radius;
    double height_m;
};

inline plpred::Scene rasterize_shapes(int width_px, int height_px,
                                      const std::vector<RectShape>& rects,
                                      const std::vector<CircShape>& circles)
{
    plpred::Scene s = make_scene(width_px, height_px);
    for (int r = 0; r < height_px; ++r) {
        for (int c = 0; c < width_px; ++c) {
            const double px = c + 0.5;
            const double py = r + 0.5;
            for (const RectShape& rect : rects) {
                const double dx = px - rect.cx;
                const double dy = py - rect.cy;
                const double ca = std::cos(rect.angle);
                const double sa = std::sin(rect.angle);
                const double lx = ca * dx + sa * dy;
                const double ly = -sa * dx + ca * dy;
                if (std::abs(lx) <= rect.hx && std::abs(ly) <= rect.hy) {
                    s.building_mask.at(r, c) = 1;
                    s.building_height_m.at(r, c) = rect.height_m;
                    break;
                }
            }
            if (s.building_mask.at(r, c))
                continue;
            for (const CircShape& circ : circles) {
                const double dx = px - circ.cx;
                const double dy = py - circ.cy;
                if (dx * dx + dy * dy <= circ.radius * circ.radius)
                    s.foliage_height_m.at(r, c) =
                        std::max(s.foliage_height_m.at(r, c), circ.height_m);
            }
        }
    }
    return s;
}

inline void rotate_shapes(std::vector<RectShape>& rects, std::vector<CircShape>& circles,
                          double pivot_x, double pivot_y, double theta)
{
    const double ca = std::cos(theta);
    const double sa = std::sin(theta);
    const auto rot = [&](double& x, double& y) {
        const double dx = x - pivot_x;
        const double dy = y - pivot_y;
        x = pivot_x + ca * dx - sa * dy;
        y = pivot_y + sa * dx + ca * dy;
    };
    for (RectShape& r : rects) {
        rot(r.cx, r.cy);
        r.angle += theta;
    }
    for (CircShape& c : circles)
        rot(c.cx, c.cy);
}

// Fermat principle check: the true reflection point on a wall segment
// minimizes |tx-q| + |q-rx| over the span. Ternary search on the unfolded
// 2-D length.
inline double fermat_reflection_param(double span_lo, double span_hi,
                                      const std::vector<double>& tx2,
                                      const std::vector<double>& rx2, int wall_axis,
                                      double wall_coord)
{
    const auto total = [&](double q_par) {
        double qx, qy;
        if (wall_axis == 0) {
            qx = wall_coord;
            qy = q_par;
        } else {
            qx = q_par;
            qy = wall_coord;
        }
        const double l1 = std::hypot(qx - tx2[0], qy - tx2[1]);
        const double l2 = std::hypot(rx2[0] - qx, rx2[1] - qy);
        return l1 + l2;
    };
    double lo = span_lo;
    double hi = span_hi;
    for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (total(m1) <= total(m2))
            hi = m2;
        else
            lo = m1;
    }
    return 0.5 * (lo + hi);
}

} // namespace testsupport

#endif
