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
// Procedural urban scene generator: a street grid of rectangular blocks,
// each block optionally holding one axis-aligned building, plus circular
// foliage blobs stamped on non-building cells.

#ifndef PLPRED_SCENE_GEN_HPP
#define PLPRED_SCENE_GEN_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "plpred/common.hpp"
#include "plpred/rng.hpp"
#include "plpred/scene.hpp"

namespace plpred {

struct SceneGenParams {
    double building_density = 0.7;  // per-block occupancy probability
    double foliage_density = 1.0;   // blobs per 1000 px^2
    int min_block_px = 14;          // block pitch range
    int max_block_px = 40;
    int street_px = 6;              // gap between adjacent blocks
    int margin_px = 3;              // gap between blocks and the scene edge
    double min_fill = 0.55;         // building footprint as a fraction of its block
    double max_fill = 1.0;
    double min_height_m = 12.0;
    double max_height_m = 60.0;
    double min_blob_radius_px = 2.0;
    double max_blob_radius_px = 9.0;
    double min_foliage_height_m = 2.0;
    double max_foliage_height_m = 30.0;
    double resolution_m = 1.0;
    double foliage_max_m = 30.0;

    void validate() const
    {
        if (building_density < 0.0 || building_density > 1.0)
            throw validation_error("scene gen: building_density must be in [0, 1]");
        if (foliage_density < 0.0)
            throw validation_error("scene gen: foliage_density must be non-negative");
        if (min_block_px < 2 || max_block_px < min_block_px)
            throw validation_error("scene gen: invalid block size range");
        if (street_px < 1 || margin_px < 0)
            throw validation_error("scene gen: invalid street/margin widths");
        if (min_fill <= 0.0 || max_fill > 1.0 || max_fill < min_fill)
            throw validation_error("scene gen: fill fractions must satisfy 0 < min <= max <= 1");
        if (min_height_m <= 0.0 || max_height_m < min_height_m)
            throw validation_error("scene gen: invalid building height range");
        if (min_blob_radius_px <= 0.0 || max_blob_radius_px < min_blob_radius_px)
            throw validation_error("scene gen: invalid blob radius range");
        if (min_foliage_height_m <= 0.0 || max_foliage_height_m < min_foliage_height_m ||
            max_foliage_height_m > foliage_max_m)
            throw validation_error("scene gen: invalid foliage height range");
        if (resolution_m <= 0.0)
            throw validation_error("scene gen: non-positive resolution");
    }
};

namespace detail {

// block extents along one axis: margins at both ends, street_px between blocks
inline std::vector<std::pair<int, int>> layout_blocks(int length_px, const SceneGenParams& p,
                                                      Rng& rng)
{
    std::vector<std::pair<int, int>> blocks;
    int cursor = p.margin_px;
    while (true) {
        const int b = static_cast<int>(rng.uniform_int(p.min_block_px, p.max_block_px));
        if (cursor + b + p.margin_px > length_px)
            break;
        blocks.emplace_back(cursor, b);
        cursor += b + p.street_px;
    }
    return blocks;
}

} // namespace detail

inline Scene generate_scene(int width_px, int height_px, const SceneGenParams& params,
                            std::uint64_t seed)
{
    params.validate();
    if (width_px < 64 || height_px < 64)
        throw validation_error("generate_scene: dimensions must be at least 64 px");

    Scene scene;
    scene.id = "scene_" + [&] {
        std::string s = std::to_string(seed);
        while (s.size() < 4)
            s.insert(s.begin(), '0');
        return s;
    }();
    scene.width_px = width_px;
    scene.height_px = height_px;
    scene.resolution_m = params.resolution_m;
    scene.foliage_max_m = params.foliage_max_m;
    scene.building_mask = Grid<unsigned char>(height_px, width_px, 0);
    scene.building_height_m = Grid<double>(height_px, width_px, 0.0);
    scene.foliage_height_m = Grid<double>(height_px, width_px, 0.0);

    Rng rng(seed);
    const auto blocks_x = detail::layout_blocks(width_px, params, rng);
    const auto blocks_y = detail::layout_blocks(height_px, params, rng);
    if (blocks_x.empty() || blocks_y.empty())
        throw validation_error("generate_scene: no room for a single building block");

    for (const auto& [by, bh] : blocks_y) {
        for (const auto& [bx, bw] : blocks_x) {
            if (rng.uniform() >= params.building_density)
                continue;
            const int w = std::max(1, static_cast<int>(std::llround(
                                          rng.uniform(params.min_fill, params.max_fill) * bw)));
            const int h = std::max(1, static_cast<int>(std::llround(
                                          rng.uniform(params.min_fill, params.max_fill) * bh)));
            const int x0 = bx + static_cast<int>(rng.uniform_int(0, bw - w));
            const int y0 = by + static_cast<int>(rng.uniform_int(0, bh - h));
            const double height = rng.uniform(params.min_height_m, params.max_height_m);
            for (int r = y0; r < y0 + h; ++r) {
                for (int c = x0; c < x0 + w; ++c) {
                    scene.building_mask.at(r, c) = 1;
                    scene.building_height_m.at(r, c) = height;
                }
            }
        }
    }

    const long long n_blobs = std::llround(params.foliage_density *
                                           static_cast<double>(width_px) * height_px / 1000.0);
    for (long long i = 0; i < n_blobs; ++i) {
        const double cx = rng.uniform(0.0, static_cast<double>(width_px));
        const double cy = rng.uniform(0.0, static_cast<double>(height_px));
        const double radius = rng.uniform(params.min_blob_radius_px, params.max_blob_radius_px);
        const double height =
            rng.uniform(params.min_foliage_height_m, params.max_foliage_height_m);
        const int r0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
        const int r1 = std::min(height_px - 1, static_cast<int>(std::ceil(cy + radius)));
        const int c0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
        const int c1 = std::min(width_px - 1, static_cast<int>(std::ceil(cx + radius)));
        for (int r = r0; r <= r1; ++r) {
            for (int c = c0; c <= c1; ++c) {
                if (scene.building_mask.at(r, c) != 0)
                    continue;
                const double dx = c + 0.5 - cx;
                const double dy = r + 0.5 - cy;
                if (dx * dx + dy * dy > radius * radius)
                    continue;
                scene.foliage_height_m.at(r, c) =
                    std::max(scene.foliage_height_m.at(r, c), height);
            }
        }
    }

    scene.validate();
    return scene;
}

inline double building_coverage(const Scene& scene)
{
    long long n = 0;
    for (int r = 0; r < scene.height_px; ++r)
        for (int c = 0; c < scene.width_px; ++c)
            if (scene.building_mask.at(r, c) != 0)
                ++n;
    return static_cast<double>(n) /
           (static_cast<double>(scene.width_px) * scene.height_px);
}

} // namespace plpred

#endif
