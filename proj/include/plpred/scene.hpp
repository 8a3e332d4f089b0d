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

#ifndef PLPRED_SCENE_HPP
#define PLPRED_SCENE_HPP

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "plpred/common.hpp"
#include "plpred/geometry.hpp"
#include "plpred/grid.hpp"

namespace plpred {

// Rasterized urban map. All layers share one grid: rows_ = height_px lines of
// width_px cells, row 0 at minimum y, cell (row, col) covering the square
// [col, col+1) x [row, row+1) in pixel units (times resolution_m in meters).
//
// Invariants (checked by validate()):
//   building_height_m > 0  exactly where  building_mask = 1
//   0 <= foliage_height_m <= foliage_max_m
//   foliage and building never occupy the same cell
struct Scene {
    std::string id;
    int width_px = 0;
    int height_px = 0;
    double resolution_m = 1.0;
    double foliage_max_m = 30.0;
    Grid<unsigned char> building_mask;
    Grid<double> building_height_m;
    Grid<double> foliage_height_m;

    double width_m() const { return width_px * resolution_m; }
    double height_m() const { return height_px * resolution_m; }

    bool in_bounds_m(double x, double y) const
    {
        return x >= 0.0 && y >= 0.0 && x <= width_m() && y <= height_m();
    }

    bool cell_in_bounds(int row, int col) const
    {
        return row >= 0 && row < height_px && col >= 0 && col < width_px;
    }

    // cell containing the metric position (x, y); positions exactly on the
    // max edge are clamped into the last cell
    void cell_of(double x, double y, int& row, int& col) const
    {
        col = static_cast<int>(std::floor(x / resolution_m));
        row = static_cast<int>(std::floor(y / resolution_m));
        if (col == width_px)
            --col;
        if (row == height_px)
            --row;
    }

    bool is_building_at(double x, double y) const
    {
        int row = 0;
        int col = 0;
        cell_of(x, y, row, col);
        if (!cell_in_bounds(row, col))
            return false;
        return building_mask.at(row, col) != 0;
    }

    void validate() const
    {
        if (width_px <= 0 || height_px <= 0)
            throw validation_error("scene '" + id + "': non-positive dimensions");
        if (resolution_m <= 0.0)
            throw validation_error("scene '" + id + "': non-positive resolution");
        if (foliage_max_m <= 0.0)
            throw validation_error("scene '" + id + "': non-positive foliage_max_m");
        if (building_mask.rows() != height_px || building_mask.cols() != width_px ||
            building_height_m.rows() != height_px || building_height_m.cols() != width_px ||
            foliage_height_m.rows() != height_px || foliage_height_m.cols() != width_px)
            throw validation_error("scene '" + id + "': layer dimensions do not match header");
        for (int r = 0; r < height_px; ++r) {
            for (int c = 0; c < width_px; ++c) {
                const bool masked = building_mask.at(r, c) != 0;
                const double bh = building_height_m.at(r, c);
                const double fh = foliage_height_m.at(r, c);
                if (!std::isfinite(bh) || !std::isfinite(fh))
                    throw validation_error("scene '" + id + "': non-finite height at row " +
                                           std::to_string(r) + ", col " + std::to_string(c));
                if (masked != (bh > 0.0))
                    throw validation_error("scene '" + id +
                                           "': building mask/height mismatch at row " +
                                           std::to_string(r) + ", col " + std::to_string(c));
                if (fh < 0.0 || fh > foliage_max_m)
                    throw validation_error("scene '" + id + "': foliage height " + format_real(fh) +
                                           " out of range [0, " + format_real(foliage_max_m) +
                                           "] at row " + std::to_string(r) + ", col " +
                                           std::to_string(c));
                if (masked && fh > 0.0)
                    throw validation_error("scene '" + id +
                                           "': building and foliage overlap at row " +
                                           std::to_string(r) + ", col " + std::to_string(c));
            }
        }
    }
};

namespace detail {

inline void split_ws(std::string_view line, std::vector<std::string_view>& out)
{
    out.clear();
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r')
            ++j;
        if (j > i)
            out.push_back(line.substr(i, j - i));
        i = j;
    }
}

[[noreturn]] inline void scene_parse_error(const std::string& path, int line_no,
                                           const std::string& what)
{
    throw validation_error(path + ":" + std::to_string(line_no) + ": " + what);
}

} // namespace detail

// Scene text format, version 1:
//   line 1: PLSCENE 1
//   line 2: <width_px> <height_px> <resolution_m> <foliage_max_m>
//   line 3: LAYERS mask heights foliage
//   then 3 blocks of height_px lines with width_px space-separated cells,
//   row 0 (minimum y) first. Mask cells are 0/1, height cells decimals.
// The scene id is not stored in the file; it is the file name stem.
inline Scene load_scene(const std::string& path)
{
    const std::string text = read_text_file(path);

    Scene scene;
    scene.id = path_stem(path);

    std::vector<std::string_view> lines;
    {
        std::size_t start = 0;
        while (start <= text.size()) {
            const std::size_t nl = text.find('\n', start);
            if (nl == std::string::npos) {
                if (start < text.size())
                    lines.push_back(std::string_view(text).substr(start));
                break;
            }
            lines.push_back(std::string_view(text).substr(start, nl - start));
            start = nl + 1;
        }
    }

    std::vector<std::string_view> tok;
    if (lines.empty())
        detail::scene_parse_error(path, 1, "empty file, expected 'PLSCENE 1' header");
    detail::split_ws(lines[0], tok);
    if (tok.size() != 2 || tok[0] != "PLSCENE" || tok[1] != "1")
        detail::scene_parse_error(path, 1, "malformed header, expected 'PLSCENE 1'");

    if (lines.size() < 2)
        detail::scene_parse_error(path, 2, "missing dimension line");
    detail::split_ws(lines[1], tok);
    if (tok.size() != 4)
        detail::scene_parse_error(path, 2,
                                  "expected '<width> <height> <resolution> <foliage_max>'");
    bool ok1 = false;
    bool ok2 = false;
    bool ok3 = false;
    bool ok4 = false;
    const long long w = parse_int(tok[0], ok1);
    const long long h = parse_int(tok[1], ok2);
    scene.resolution_m = parse_real(tok[2], ok3);
    scene.foliage_max_m = parse_real(tok[3], ok4);
    if (!ok1 || !ok2 || !ok3 || !ok4)
        detail::scene_parse_error(path, 2, "unparsable dimension line");
    if (w <= 0 || h <= 0 || w > 1 << 20 || h > 1 << 20)
        detail::scene_parse_error(path, 2, "dimensions out of range");
    if (scene.resolution_m <= 0.0 || scene.foliage_max_m <= 0.0)
        detail::scene_parse_error(path, 2, "resolution and foliage_max must be positive");
    scene.width_px = static_cast<int>(w);
    scene.height_px = static_cast<int>(h);

    if (lines.size() < 3)
        detail::scene_parse_error(path, 3, "missing layer line");
    detail::split_ws(lines[2], tok);
    if (tok.size() != 4 || tok[0] != "LAYERS" || tok[1] != "mask" || tok[2] != "heights" ||
        tok[3] != "foliage")
        detail::scene_parse_error(path, 3, "expected 'LAYERS mask heights foliage'");

    const std::size_t expected_lines = 3 + 3 * static_cast<std::size_t>(scene.height_px);
    if (lines.size() < expected_lines)
        detail::scene_parse_error(path, static_cast<int>(lines.size()) + 1,
                                  "truncated file, expected " + std::to_string(expected_lines) +
                                      " lines");

    scene.building_mask = Grid<unsigned char>(scene.height_px, scene.width_px, 0);
    scene.building_height_m = Grid<double>(scene.height_px, scene.width_px, 0.0);
    scene.foliage_height_m = Grid<double>(scene.height_px, scene.width_px, 0.0);

    for (int layer = 0; layer < 3; ++layer) {
        for (int row = 0; row < scene.height_px; ++row) {
            const int line_no = 4 + layer * scene.height_px + row;
            detail::split_ws(lines[static_cast<std::size_t>(line_no) - 1], tok);
            if (static_cast<int>(tok.size()) != scene.width_px)
                detail::scene_parse_error(path, line_no,
                                          "expected " + std::to_string(scene.width_px) +
                                              " cells, got " + std::to_string(tok.size()));
            for (int col = 0; col < scene.width_px; ++col) {
                if (layer == 0) {
                    bool ok = false;
                    const long long m = parse_int(tok[static_cast<std::size_t>(col)], ok);
                    if (!ok || (m != 0 && m != 1))
                        detail::scene_parse_error(path, line_no,
                                                  "mask cell must be 0 or 1 at row " +
                                                      std::to_string(row) + ", col " +
                                                      std::to_string(col));
                    scene.building_mask.at(row, col) = static_cast<unsigned char>(m);
                } else {
                    bool ok = false;
                    const double v = parse_real(tok[static_cast<std::size_t>(col)], ok);
                    if (!ok || !std::isfinite(v) || v < 0.0)
                        detail::scene_parse_error(path, line_no,
                                                  "cell must be a non-negative real at row " +
                                                      std::to_string(row) + ", col " +
                                                      std::to_string(col));
                    if (layer == 2 && v > scene.foliage_max_m)
                        detail::scene_parse_error(
                            path, line_no,
                            "foliage height " + format_real(v) + " exceeds foliage_max " +
                                format_real(scene.foliage_max_m) + " at row " +
                                std::to_string(row) + ", col " + std::to_string(col));
                    (layer == 1 ? scene.building_height_m : scene.foliage_height_m).at(row, col) =
                        v;
                }
            }
        }
    }

    scene.validate();
    return scene;
}

inline std::string scene_to_string(const Scene& scene)
{
    scene.validate();
    std::string out;
    out.reserve(static_cast<std::size_t>(scene.width_px) * scene.height_px * 12 + 64);
    out += "PLSCENE 1\n";
    out += std::to_string(scene.width_px) + " " + std::to_string(scene.height_px) + " " +
           format_real(scene.resolution_m) + " " + format_real(scene.foliage_max_m) + "\n";
    out += "LAYERS mask heights foliage\n";
    for (int row = 0; row < scene.height_px; ++row) {
        for (int col = 0; col < scene.width_px; ++col) {
            if (col)
                out += ' ';
            out += scene.building_mask.at(row, col) ? '1' : '0';
        }
        out += '\n';
    }
    for (int layer = 1; layer < 3; ++layer) {
        const Grid<double>& g = layer == 1 ? scene.building_height_m : scene.foliage_height_m;
        for (int row = 0; row < scene.height_px; ++row) {
            for (int col = 0; col < scene.width_px; ++col) {
                if (col)
                    out += ' ';
                out += format_real(g.at(row, col));
            }
            out += '\n';
        }
    }
    return out;
}

inline void save_scene(const Scene& scene, const std::string& path)
{
    write_text_file(path, scene_to_string(scene));
}

} // namespace plpred

#endif
