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
// Transmitter-aligned map extraction. The scene is rotated around the
// transmitter so the receiver sits straight above it, then cropped to a
// patch-aligned window: the tx lands on the exact center pixel of the
// second-from-bottom patch, the rx falls inside the second-from-top patch
// row (pad_patches = 1), and everything outside the scene reads as open
// space.

#ifndef PLPRED_MAP_EXTRACT_HPP
#define PLPRED_MAP_EXTRACT_HPP

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "plpred/common.hpp"
#include "plpred/geometry.hpp"
#include "plpred/grid.hpp"
#include "plpred/scene.hpp"

namespace plpred {

struct MapExtract {
    int patch_size = 0; // P, odd
    int patch_rows = 0; // R
    int patch_cols = 0; // C, 2*pad+1
    double distance_m = 0.0; // 3-D tx-rx distance
    int tx_patch_row = 0; // top-down patch index
    int tx_patch_col = 0;
    double angle_rad = 0.0; // CCW map rotation that put rx above tx
    Grid<double> mask;    // channel 0, values in {0, 1}
    Grid<double> foliage; // channel 1, heights normalized by foliage_max_m

    int rows_px() const { return patch_rows * patch_size; }
    int cols_px() const { return patch_cols * patch_size; }
};

namespace detail {

// Bilinear read of a scene layer at a metric position. Layer values live at
// cell centers; cells outside the scene contribute 0.
template <typename Get>
inline double sample_layer(const Scene& scene, double x, double y, Get&& get)
{
    const double gx = x / scene.resolution_m - 0.5;
    const double gy = y / scene.resolution_m - 0.5;
    const int c0 = static_cast<int>(std::floor(gx));
    const int r0 = static_cast<int>(std::floor(gy));
    const double fx = gx - c0;
    const double fy = gy - r0;
    double value = 0.0;
    for (int dr = 0; dr < 2; ++dr) {
        for (int dc = 0; dc < 2; ++dc) {
            const int r = r0 + dr;
            const int c = c0 + dc;
            if (!scene.cell_in_bounds(r, c))
                continue;
            const double w = (dr ? fy : 1.0 - fy) * (dc ? fx : 1.0 - fx);
            value += w * static_cast<double>(get(r, c));
        }
    }
    return value;
}

inline double sample_mask(const Scene& scene, double x, double y)
{
    return sample_layer(scene, x, y,
                        [&](int r, int c) { return scene.building_mask.at(r, c); });
}

inline double sample_foliage(const Scene& scene, double x, double y)
{
    return sample_layer(scene, x, y,
                        [&](int r, int c) { return scene.foliage_height_m.at(r, c); });
}

} // namespace detail

inline MapExtract align_and_extract(const Scene& scene, const Point3& tx, const Point3& rx,
                                    int patch_size, int pad_patches = 1)
{
    if (patch_size < 1 || patch_size % 2 == 0)
        throw validation_error("align_and_extract: patch size must be odd and positive");
    if (pad_patches < 0)
        throw validation_error("align_and_extract: pad_patches must be non-negative");
    const double d2d = distance_2d(tx, rx);
    if (d2d < 1e-12)
        throw validation_error("align_and_extract: tx and rx coincide in 2-D");

    const int P = patch_size;
    const int half = (P - 1) / 2;
    const double res = scene.resolution_m;
    const long long row_gap = std::llround(d2d / res);
    const long long over = row_gap - half;
    const int K = over > 0 ? static_cast<int>((over + P - 1) / P) : 0;

    MapExtract ex;
    ex.patch_size = P;
    ex.patch_rows = 2 * pad_patches + 1 + K;
    ex.patch_cols = 2 * pad_patches + 1;
    ex.distance_m = distance_3d(tx, rx);
    ex.tx_patch_row = pad_patches + K;
    ex.tx_patch_col = pad_patches;

    // image axes in scene coordinates: up points tx -> rx, right = (up.y, -up.x)
    const Vec2 up = (xy(rx) - xy(tx)) * (1.0 / d2d);
    const Vec2 right{up.y, -up.x};
    ex.angle_rad = std::remainder(M_PI / 2.0 - std::atan2(up.y, up.x), 2.0 * M_PI);

    const int rows = ex.rows_px();
    const int cols = ex.cols_px();
    const int tx_row_px = ex.tx_patch_row * P + half;
    const int tx_col_px = ex.tx_patch_col * P + half;
    ex.mask = Grid<double>(rows, cols, 0.0);
    ex.foliage = Grid<double>(rows, cols, 0.0);

    const Vec2 t2 = xy(tx);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double dx = static_cast<double>(c - tx_col_px) * res;
            const double dy = static_cast<double>(tx_row_px - r) * res;
            const double sx = t2.x + dx * right.x + dy * up.x;
            const double sy = t2.y + dx * right.y + dy * up.y;
            ex.mask.at(r, c) = detail::sample_mask(scene, sx, sy) >= 0.5 ? 1.0 : 0.0;
            ex.foliage.at(r, c) =
                detail::sample_foliage(scene, sx, sy) / scene.foliage_max_m;
        }
    }
    return ex;
}

struct RotatedMap {
    Grid<unsigned char> mask;
    Grid<double> foliage_height_m;
};

// Resample the whole scene rotated by `angle` (CCW) around `center`, output
// on the same grid. Inverse mapping with bilinear reads; the mask channel is
// thresholded back to {0, 1}; out-of-bounds reads 0.
inline RotatedMap rotate_map(const Scene& scene, const Vec2& center, double angle)
{
    if (!std::isfinite(angle))
        throw validation_error("rotate_map: angle must be finite");
    RotatedMap out;
    out.mask = Grid<unsigned char>(scene.height_px, scene.width_px, 0);
    out.foliage_height_m = Grid<double>(scene.height_px, scene.width_px, 0.0);
    const double ca = std::cos(-angle);
    const double sa = std::sin(-angle);
    const double res = scene.resolution_m;
    for (int r = 0; r < scene.height_px; ++r) {
        for (int c = 0; c < scene.width_px; ++c) {
            const double px = (c + 0.5) * res - center.x;
            const double py = (r + 0.5) * res - center.y;
            const double sx = center.x + ca * px - sa * py;
            const double sy = center.y + sa * px + ca * py;
            out.mask.at(r, c) = detail::sample_mask(scene, sx, sy) >= 0.5 ? 1 : 0;
            out.foliage_height_m.at(r, c) = detail::sample_foliage(scene, sx, sy);
        }
    }
    return out;
}

// Debug dump: the two channels in a scene-like text layout plus a JSON
// sidecar describing the extract geometry.
inline std::string extract_to_string(const MapExtract& ex)
{
    std::string out;
    out += "PLEXTRACT " + std::to_string(kExtractFormatVersion) + "\n";
    out += std::to_string(ex.rows_px()) + " " + std::to_string(ex.cols_px()) + "\n";
    out += "LAYERS mask foliage\n";
    const auto dump = [&](const Grid<double>& g) {
        for (int r = 0; r < g.rows(); ++r) {
            for (int c = 0; c < g.cols(); ++c) {
                if (c)
                    out += ' ';
                out += format_real(g.at(r, c));
            }
            out += '\n';
        }
    };
    dump(ex.mask);
    dump(ex.foliage);
    return out;
}

inline void save_extract_debug(const MapExtract& ex, const std::string& path)
{
    write_text_file(path, extract_to_string(ex));
    nlohmann::ordered_json meta;
    meta["patch_rows"] = ex.patch_rows;
    meta["patch_cols"] = ex.patch_cols;
    meta["patch_size"] = ex.patch_size;
    meta["distance_m"] = ex.distance_m;
    meta["angle_rad"] = ex.angle_rad;
    meta["tx_patch_row"] = ex.tx_patch_row;
    meta["tx_patch_col"] = ex.tx_patch_col;
    write_text_file(path + ".json", meta.dump(2) + "\n");
}

} // namespace plpred

#endif
