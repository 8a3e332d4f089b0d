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

#ifndef PLPRED_RENDER_HPP
#define PLPRED_RENDER_HPP

#include <cmath>
#include <ctime>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plpred/model.hpp"
#include "plpred/oracle.hpp"
#include "plpred/scene.hpp"

namespace plpred {

// Per-pixel predictor; returns NaN where no value exists (outage).
using PixelPredictor = std::function<double(const Point3& rx)>;

struct RenderOptions {
    double rx_height_m = 1.5;
    double clamp_lo_db = 60.0;
    double clamp_hi_db = 160.0;
    int threads = 1;
};

// Radio map raster; row 0 is the northern (max-y) edge. Building pixels and
// outages hold NaN in values_db and are flagged in the mask.
struct RadioMap {
    std::string scene_id;
    Point3 tx;
    double extent_m = 0.0;
    double resolution_m = 1.0;
    double rx_height_m = 1.5;
    double clamp_lo_db = 60.0;
    double clamp_hi_db = 160.0;
    int size_px = 0;
    Grid<double> values_db;
    Grid<unsigned char> masked;    // 1 where a building occupies the pixel
    Grid<double> foliage_m;        // sampled foliage height for the overlay
};

namespace detail {

// Copy of the scene enlarged so that the square of side extent_m centered on
// tx lies inside it; out-of-scene area is empty, matching the padding rule
// the extractor uses. Returns the coordinate shift applied to old positions.
inline Scene pad_scene_for_render(const Scene& scene, const Point3& tx, double extent_m,
                                  Vec2& shift_m)
{
    const double res = scene.resolution_m;
    const double half = extent_m / 2.0;
    const int pad_w = std::max(0, static_cast<int>(std::ceil((half - tx.x) / res)));
    const int pad_e = std::max(0, static_cast<int>(std::ceil(
                                      (tx.x + half - scene.width_m()) / res)));
    const int pad_s = std::max(0, static_cast<int>(std::ceil((half - tx.y) / res)));
    const int pad_n = std::max(0, static_cast<int>(std::ceil(
                                      (tx.y + half - scene.height_m()) / res)));
    shift_m = Vec2{pad_w * res, pad_s * res};
    if (pad_w == 0 && pad_e == 0 && pad_s == 0 && pad_n == 0)
        return scene;
    Scene out = scene;
    out.width_px = scene.width_px + pad_w + pad_e;
    out.height_px = scene.height_px + pad_s + pad_n;
    out.building_mask = Grid<unsigned char>(out.height_px, out.width_px, 0);
    out.building_height_m = Grid<double>(out.height_px, out.width_px, 0.0);
    out.foliage_height_m = Grid<double>(out.height_px, out.width_px, 0.0);
    for (int r = 0; r < scene.height_px; ++r) {
        for (int c = 0; c < scene.width_px; ++c) {
            out.building_mask.at(r + pad_s, c + pad_w) = scene.building_mask.at(r, c);
            out.building_height_m.at(r + pad_s, c + pad_w) = scene.building_height_m.at(r, c);
            out.foliage_height_m.at(r + pad_s, c + pad_w) = scene.foliage_height_m.at(r, c);
        }
    }
    return out;
}

} // namespace detail

// Ray-oracle predictor. Pads the scene up front so pixels beyond the scene
// edge are treated as open ground.
inline PixelPredictor make_oracle_predictor(const Scene& scene, const Point3& tx,
                                            double extent_m, const OracleConfig& cfg)
{
    struct State {
        Scene padded;
        Vec2 shift;
        Point3 tx;
        OracleConfig cfg;
        std::vector<Wall> walls;
    };
    auto st = std::make_shared<State>();
    st->padded = detail::pad_scene_for_render(scene, tx, extent_m * 1.5 + 2.0, st->shift);
    st->tx = Point3{tx.x + st->shift.x, tx.y + st->shift.y, tx.z};
    st->cfg = cfg;
    st->walls = extract_walls(st->padded);
    return [st](const Point3& rx) {
        const Point3 prx{rx.x + st->shift.x, rx.y + st->shift.y, rx.z};
        const PathLossResult res = path_loss(st->padded, st->tx, prx, st->cfg, &st->walls);
        return res.outage ? std::numeric_limits<double>::quiet_NaN() : res.pathloss_db;
    };
}

// Surrogate predictor; extraction already pads beyond the scene edge. A rx
// directly over the transmitter has no map orientation, so it is nudged by a
// thousandth of a pixel.
template <typename T>
PixelPredictor make_surrogate_predictor(SurrogateModel<T>& model, const Scene& scene,
                                        const Point3& tx)
{
    auto run = [&model, &scene, tx](const Point3& rx_in) {
        Point3 rx = rx_in;
        if (distance_2d(tx, rx) < 1e-9)
            rx.x += scene.resolution_m * 1e-3;
        const int pad = (model.cfg.patch_cols - 1) / 2;
        const auto ex = align_and_extract(scene, tx, rx, model.cfg.patch_size, pad);
        const auto in = make_model_input(ex, model.cfg, model.distance_scale);
        return model.predict({in})[0];
    };
    return run;
}

inline RadioMap render_radiomap(const Scene& scene, const Point3& tx,
                                const PixelPredictor& predictor, double resolution_m,
                                double extent_m, const RenderOptions& opts = {})
{
    if (!(resolution_m > 0.0) || !(extent_m >= resolution_m))
        throw validation_error("render: extent must cover at least one pixel");
    RadioMap map;
    map.scene_id = scene.id;
    map.tx = tx;
    map.extent_m = extent_m;
    map.resolution_m = resolution_m;
    map.rx_height_m = opts.rx_height_m;
    map.clamp_lo_db = opts.clamp_lo_db;
    map.clamp_hi_db = opts.clamp_hi_db;
    const int n = static_cast<int>(std::llround(extent_m / resolution_m));
    map.size_px = n;
    map.values_db = Grid<double>(n, n, std::numeric_limits<double>::quiet_NaN());
    map.masked = Grid<unsigned char>(n, n, 0);
    map.foliage_m = Grid<double>(n, n, 0.0);

    const double half = extent_m / 2.0;
    parallel_for(static_cast<std::size_t>(n), opts.threads, [&](std::size_t row) {
        const int r = static_cast<int>(row);
        const double y = tx.y + half - (r + 0.5) * resolution_m;
        for (int c = 0; c < n; ++c) {
            const double x = tx.x - half + (c + 0.5) * resolution_m;
            int sr = 0, sc = 0;
            scene.cell_of(x, y, sr, sc);
            if (scene.cell_in_bounds(sr, sc))
                map.foliage_m.at(r, c) = scene.foliage_height_m.at(sr, sc);
            if (scene.is_building_at(x, y)) {
                map.masked.at(r, c) = 1;
                continue;
            }
            map.values_db.at(r, c) = predictor(Point3{x, y, opts.rx_height_m});
        }
    });
    return map;
}

// ---- writers ---------------------------------------------------------------

inline std::string radiomap_csv(const RadioMap& map)
{
    std::string out;
    for (int r = 0; r < map.size_px; ++r) {
        for (int c = 0; c < map.size_px; ++c) {
            if (c)
                out += ',';
            const double v = map.values_db.at(r, c);
            out += std::isfinite(v) ? format_real(v) : std::string("nan");
        }
        out += '\n';
    }
    return out;
}

// 8-bit grayscale, 60 dB -> 0 and 160 dB -> 255 by default; masked or outage
// pixels are 0.
inline std::string radiomap_pgm(const RadioMap& map)
{
    std::string out = "P5\n" + std::to_string(map.size_px) + " " +
                      std::to_string(map.size_px) + "\n255\n";
    const double lo = map.clamp_lo_db;
    const double span = map.clamp_hi_db - map.clamp_lo_db;
    for (int r = 0; r < map.size_px; ++r) {
        for (int c = 0; c < map.size_px; ++c) {
            const double v = map.values_db.at(r, c);
            unsigned char px = 0;
            if (std::isfinite(v)) {
                const double t = std::clamp((v - lo) / span, 0.0, 1.0);
                px = static_cast<unsigned char>(std::lround(t * 255.0));
            }
            out.push_back(static_cast<char>(px));
        }
    }
    return out;
}

// Color overlay: buildings on the red channel, foliage height on green.
inline std::string overlay_ppm(const RadioMap& map, double foliage_max_m)
{
    std::string out = "P6\n" + std::to_string(map.size_px) + " " +
                      std::to_string(map.size_px) + "\n255\n";
    for (int r = 0; r < map.size_px; ++r) {
        for (int c = 0; c < map.size_px; ++c) {
            const unsigned char red = map.masked.at(r, c) ? 255 : 0;
            const double f = std::clamp(map.foliage_m.at(r, c) / foliage_max_m, 0.0, 1.0);
            const unsigned char green = static_cast<unsigned char>(std::lround(f * 255.0));
            out.push_back(static_cast<char>(red));
            out.push_back(static_cast<char>(green));
            out.push_back(static_cast<char>(0));
        }
    }
    return out;
}

inline nlohmann::ordered_json radiomap_sidecar(const RadioMap& map,
                                               const std::string& predictor_name,
                                               bool with_timestamp)
{
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["scene_id"] = map.scene_id;
    j["predictor"] = predictor_name;
    j["tx"] = {map.tx.x, map.tx.y, map.tx.z};
    j["rx_height_m"] = map.rx_height_m;
    j["extent_m"] = map.extent_m;
    j["resolution_m"] = map.resolution_m;
    j["size_px"] = map.size_px;
    j["clamp_db"] = {map.clamp_lo_db, map.clamp_hi_db};
    if (with_timestamp)
        j["generated_at"] = utc_timestamp();
    return j;
}

// Writes PREFIX.csv, PREFIX.pgm, PREFIX_overlay.ppm and PREFIX.json.
inline void save_radiomap(const std::string& prefix, const RadioMap& map,
                          const std::string& predictor_name, double foliage_max_m,
                          bool with_timestamp)
{
    write_text_file(prefix + ".csv", radiomap_csv(map));
    write_text_file(prefix + ".pgm", radiomap_pgm(map));
    write_text_file(prefix + "_overlay.ppm", overlay_ppm(map, foliage_max_m));
    write_text_file(prefix + ".json", radiomap_sidecar(map, predictor_name, with_timestamp)
                                              .dump(2) +
                                          "\n");
}

} // namespace plpred

#endif
