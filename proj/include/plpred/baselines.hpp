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

#ifndef PLPRED_BASELINES_HPP
#define PLPRED_BASELINES_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "plpred/autodiff.hpp"
#include "plpred/dataset.hpp"
#include "plpred/optim.hpp"
#include "plpred/rng.hpp"

namespace plpred {

// TR 38.901 UMi street canyon, deterministic mean path loss (no shadow
// fading). The breakpoint distance uses the standard's 3.0e8 m/s constant
// and the h - 1 m effective environment height.
struct GppConfig {
    double fc_ghz = 28.0;
    double h_bs_m = 9.0;
    double h_ut_m = 1.5;
    double c = 3.0e8;

    void validate() const
    {
        if (!(fc_ghz >= 0.5 && fc_ghz <= 100.0))
            throw validation_error("gpp: fc_ghz must be in [0.5, 100]");
        if (!(h_bs_m > 1.0) || !(h_ut_m > 1.0))
            throw validation_error("gpp: antenna heights must exceed 1 m");
    }

    double breakpoint_m() const
    {
        return 4.0 * (h_bs_m - 1.0) * (h_ut_m - 1.0) * (fc_ghz * 1e9) / c;
    }
};

inline double gpp_umi_pathloss(double d2d_m, double d3d_m, const GppConfig& cfg, bool los)
{
    cfg.validate();
    if (!(d3d_m >= 1.0))
        throw validation_error("gpp: d3d_m must be >= 1 m");
    if (d2d_m > d3d_m + 1e-9)
        throw validation_error("gpp: d2d_m must not exceed d3d_m");

    const double fc = cfg.fc_ghz;
    const double dbp = cfg.breakpoint_m();
    double pl_los;
    if (d2d_m <= dbp) {
        pl_los = 32.4 + 21.0 * std::log10(d3d_m) + 20.0 * std::log10(fc);
    } else {
        const double dh = cfg.h_bs_m - cfg.h_ut_m;
        pl_los = 32.4 + 40.0 * std::log10(d3d_m) + 20.0 * std::log10(fc) -
                 9.5 * std::log10(dbp * dbp + dh * dh);
    }
    if (los)
        return pl_los;
    const double pl_nlos = 22.4 + 35.3 * std::log10(d3d_m) + 21.3 * std::log10(fc) -
                           0.3 * (cfg.h_ut_m - 1.5);
    return std::max(pl_los, pl_nlos);
}

// Batch predictor over link records. Sub-metre links fall outside the model's
// stated domain and are clamped to the 1 m bound instead of rejected.
inline std::vector<double> gpp_predict(const std::vector<LinkRecord>& records,
                                       const GppConfig& cfg)
{
    std::vector<double> out;
    out.reserve(records.size());
    for (const LinkRecord& rec : records) {
        const double d3d = std::max(1.0, distance_3d(rec.tx, rec.rx));
        const double d2d = std::min(distance_2d(rec.tx, rec.rx), d3d);
        out.push_back(gpp_umi_pathloss(d2d, d3d, cfg, rec.los));
    }
    return out;
}

// Distance-only ablation baseline: a 3-layer MLP on (log10 d3D, los flag)
// trained with MSE on standardized targets. Deliberately blind to the map so
// eval deltas isolate the value of geometry input.
struct MlpTrainConfig {
    int hidden = 64;
    long steps = 3000;
    int batch = 256;
    double lr = 1e-2;
    std::uint64_t seed = 1;
};

class DistanceMlp {
  public:
    explicit DistanceMlp(int hidden = 64)
        : hidden_(hidden), w1_({2, hidden}), b1_({hidden}), w2_({hidden, hidden}),
          b2_({hidden}), w3_({hidden, 1}), b3_({1})
    {
        if (hidden < 1)
            throw validation_error("distance mlp: hidden width must be positive");
    }

    void train(const std::vector<LinkRecord>& records, const MlpTrainConfig& cfg)
    {
        if (records.empty())
            throw validation_error("distance mlp: empty training set");
        Rng rng(cfg.seed);
        init_params(rng.fork(0));

        double mean = 0.0;
        for (const auto& r : records)
            mean += r.pathloss_db;
        mean /= static_cast<double>(records.size());
        double var = 0.0;
        for (const auto& r : records)
            var += (r.pathloss_db - mean) * (r.pathloss_db - mean);
        var /= static_cast<double>(records.size());
        t_mean_ = mean;
        t_std_ = std::max(std::sqrt(var), 1e-6);

        std::vector<Tensor<double>*> params = param_list();
        AdamState<double> adam;
        adam.init(params);

        Rng shuffle_rng = rng.fork(1);
        std::vector<std::size_t> order(records.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        std::size_t cursor = order.size(); // forces a shuffle on first use

        for (long step = 0; step < cfg.steps; ++step) {
            const std::size_t bsz =
                std::min<std::size_t>(static_cast<std::size_t>(cfg.batch), records.size());
            Tensor<double> x({static_cast<int>(bsz), 2});
            Tensor<double> y({static_cast<int>(bsz)});
            for (std::size_t i = 0; i < bsz; ++i) {
                if (cursor >= order.size()) {
                    shuffle_rng.shuffle(order);
                    cursor = 0;
                }
                const LinkRecord& r = records[order[cursor++]];
                x[i * 2] = std::log10(distance_3d(r.tx, r.rx));
                x[i * 2 + 1] = r.los ? 1.0 : 0.0;
                y[i] = (r.pathloss_db - t_mean_) / t_std_;
            }
            Tape<double> tape;
            tape.check_values = false;
            std::vector<int> ids;
            for (Tensor<double>* p : params)
                ids.push_back(tape.leaf(*p));
            const int out = forward_graph(tape, ids, tape.leaf(std::move(x)),
                                          static_cast<int>(bsz));
            const int loss = tape.mse_loss(out, tape.leaf(std::move(y)));
            if (!std::isfinite(tape.value(loss)[0]))
                throw validation_error("distance mlp: training diverged at step " +
                                       std::to_string(step));
            tape.backward(loss);
            std::vector<Tensor<double>> grads;
            grads.reserve(ids.size());
            for (int id : ids)
                grads.push_back(tape.grad(id));
            std::vector<Tensor<double>*> gptrs;
            for (auto& g : grads)
                gptrs.push_back(&g);
            adam_step<double>(params, gptrs, adam, cosine_lr(cfg.lr, step, cfg.steps));
        }
    }

    double predict(double d3d_m, bool los) const
    {
        if (!(d3d_m > 0.0))
            throw validation_error("distance mlp: d3d_m must be positive");
        Tape<double> tape;
        std::vector<int> ids;
        for (const Tensor<double>* p : param_list_const())
            ids.push_back(tape.leaf(*p));
        Tensor<double> x({1, 2});
        x[0] = std::log10(d3d_m);
        x[1] = los ? 1.0 : 0.0;
        const int out = forward_graph(tape, ids, tape.leaf(std::move(x)), 1);
        return tape.value(out)[0] * t_std_ + t_mean_;
    }

    std::vector<double> predict(const std::vector<LinkRecord>& records) const
    {
        std::vector<double> out;
        out.reserve(records.size());
        for (const auto& r : records)
            out.push_back(predict(distance_3d(r.tx, r.rx), r.los));
        return out;
    }

    std::vector<Tensor<double>*> param_list()
    {
        return {&w1_, &b1_, &w2_, &b2_, &w3_, &b3_};
    }

  private:
    int hidden_;
    Tensor<double> w1_, b1_, w2_, b2_, w3_, b3_;
    double t_mean_ = 0.0;
    double t_std_ = 1.0;

    std::vector<const Tensor<double>*> param_list_const() const
    {
        return {&w1_, &b1_, &w2_, &b2_, &w3_, &b3_};
    }

    void init_params(Rng rng)
    {
        for (Tensor<double>* w : {&w1_, &w2_, &w3_})
            for (auto& v : w->data)
                v = 0.1 * rng.normal();
        for (Tensor<double>* b : {&b1_, &b2_, &b3_})
            for (auto& v : b->data)
                v = 0.0;
    }

    // ids follow param_list() order.
    int forward_graph(Tape<double>& tape, const std::vector<int>& ids, int x, int batch) const
    {
        const int h1 = tape.relu(tape.linear(x, ids[0], ids[1]));
        const int h2 = tape.relu(tape.linear(h1, ids[2], ids[3]));
        const int y = tape.linear(h2, ids[4], ids[5]);
        return tape.reshape(y, {batch});
    }
};

} // namespace plpred

#endif
