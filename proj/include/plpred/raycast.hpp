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

#ifndef PLPRED_RAYCAST_HPP
#define PLPRED_RAYCAST_HPP

#include <cmath>
#include <limits>

#include "plpred/geometry.hpp"

namespace plpred {

// Exact 2-D grid walk over the segment a + t(b - a), t in [0, 1], in pixel
// units (cell (row, col) = [col, col+1) x [row, row+1)).
//
// The visitor receives every maximal parameter interval (t0, t1) whose points
// lie strictly inside one cell, in ascending t order:
//     visit(row, col, t0, t1) -> bool   (false stops the walk early)
//
// A cell counts as crossed only when the segment meets its open interior, so
// corner touches and runs exactly along a gridline report nothing. Returns
// false if the visitor stopped the walk.
template <typename Visitor>
bool walk_cells(Vec2 a, Vec2 b, Visitor&& visit)
{
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;

    // a segment lying exactly on a gridline touches only cell boundaries
    if (dx == 0.0 && a.x == std::floor(a.x))
        return true;
    if (dy == 0.0 && a.y == std::floor(a.y))
        return true;
    if (dx == 0.0 && dy == 0.0)
        return true;

    const double inf = std::numeric_limits<double>::infinity();

    // next gridline crossing along each axis, as a parameter value
    double kx = 0.0;
    double step_kx = 0.0;
    double next_tx = inf;
    if (dx > 0.0) {
        kx = std::floor(a.x) + 1.0;
        step_kx = 1.0;
    } else if (dx < 0.0) {
        kx = std::ceil(a.x) - 1.0;
        step_kx = -1.0;
    }
    if (dx != 0.0)
        next_tx = (kx - a.x) / dx;

    double ky = 0.0;
    double step_ky = 0.0;
    double next_ty = inf;
    if (dy > 0.0) {
        ky = std::floor(a.y) + 1.0;
        step_ky = 1.0;
    } else if (dy < 0.0) {
        ky = std::ceil(a.y) - 1.0;
        step_ky = -1.0;
    }
    if (dy != 0.0)
        next_ty = (ky - a.y) / dy;

    double t = 0.0;
    while (t < 1.0) {
        double tn = 1.0;
        if (next_tx < tn)
            tn = next_tx;
        if (next_ty < tn)
            tn = next_ty;

        if (tn > t) {
            const double tm = 0.5 * (t + tn);
            const int col = static_cast<int>(std::floor(a.x + tm * dx));
            const int row = static_cast<int>(std::floor(a.y + tm * dy));
            if (!visit(row, col, t, tn))
                return false;
        }

        if (tn >= 1.0)
            break;
        if (next_tx == tn) {
            kx += step_kx;
            next_tx = (kx - a.x) / dx;
        }
        if (next_ty == tn) {
            ky += step_ky;
            next_ty = (ky - a.y) / dy;
        }
        t = tn;
    }
    return true;
}

} // namespace plpred

#endif
