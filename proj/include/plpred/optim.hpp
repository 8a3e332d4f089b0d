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

#ifndef PLPRED_OPTIM_HPP
#define PLPRED_OPTIM_HPP

#include <cmath>
#include <vector>

#include "plpred/tensor.hpp"

namespace plpred {

// Cosine decay from lr0 to zero over total_steps. step counts completed
// steps, so the first step uses lr0.
inline double cosine_lr(double lr0, long step, long total_steps)
{
    if (total_steps <= 0)
        throw validation_error("cosine_lr: total_steps must be positive");
    if (step < 0)
        step = 0;
    if (step >= total_steps)
        return 0.0;
    const double pi = 3.14159265358979323846;
    return lr0 * 0.5 * (1.0 + std::cos(pi * static_cast<double>(step) /
                                       static_cast<double>(total_steps)));
}

// Scales all gradients in place so their global L2 norm does not exceed
// max_norm. Returns the pre-clip norm. Accumulation order is fixed.
template <typename T>
double clip_global_norm(std::vector<Tensor<T>*> grads, double max_norm)
{
    double sq = 0.0;
    for (const Tensor<T>* g : grads)
        for (const T& v : g->data)
            sq += static_cast<double>(v) * static_cast<double>(v);
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const T s = static_cast<T>(max_norm / norm);
        for (Tensor<T>* g : grads)
            for (T& v : g->data)
                v *= s;
    }
    return norm;
}

template <typename T>
struct AdamState {
    std::vector<Tensor<T>> m;
    std::vector<Tensor<T>> v;
    long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void init(const std::vector<Tensor<T>*>& params)
    {
        m.clear();
        v.clear();
        for (const Tensor<T>* p : params) {
            m.emplace_back(p->shape);
            v.emplace_back(p->shape);
        }
        t = 0;
    }
};

// One bias-corrected Adam update. params and grads must line up with the
// state's moment slots.
template <typename T>
void adam_step(std::vector<Tensor<T>*> params, const std::vector<Tensor<T>*>& grads,
               AdamState<T>& state, double lr)
{
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw validation_error("adam_step: parameter/gradient/state count mismatch");
    state.t += 1;
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor<T>& p = *params[i];
        const Tensor<T>& g = *grads[i];
        Tensor<T>& m = state.m[i];
        Tensor<T>& v = state.v[i];
        if (p.shape != g.shape)
            throw validation_error("adam_step: param " + shape_str(p.shape) +
                                   " vs grad " + shape_str(g.shape));
        for (std::size_t j = 0; j < p.numel(); ++j) {
            const double gj = static_cast<double>(g[j]);
            const double mj = b1 * static_cast<double>(m[j]) + (1.0 - b1) * gj;
            const double vj = b2 * static_cast<double>(v[j]) + (1.0 - b2) * gj * gj;
            m[j] = static_cast<T>(mj);
            v[j] = static_cast<T>(vj);
            const double mhat = mj / c1;
            const double vhat = vj / c2;
            p[j] = static_cast<T>(static_cast<double>(p[j]) -
                                  lr * mhat / (std::sqrt(vhat) + state.eps));
        }
    }
}

} // namespace plpred

#endif
