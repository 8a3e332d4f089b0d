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

#ifndef PLPRED_TRAIN_HPP
#define PLPRED_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plpred/dataset.hpp"
#include "plpred/model.hpp"
#include "plpred/optim.hpp"
#include "plpred/scene.hpp"

namespace plpred {

struct TrainConfig {
    double lr = 3e-4;
    int batch = 32;
    long steps = 20000;
    std::uint64_t seed = 1;
    double clip_norm = 1.0; // 0 disables clipping
    long eval_every = 0;    // 0 picks max(steps / 50, 1)
    double distance_scale = 500.0;
    ModelConfig model;

    void validate() const
    {
        if (steps < 1 || batch < 1)
            throw validation_error("train: steps and batch must be positive");
        if (!(lr >= 0.0) || !(clip_norm >= 0.0) || !(distance_scale > 0.0))
            throw validation_error("train: lr, clip_norm and distance_scale out of range");
        model.validate();
    }
};

struct TrainResult {
    double best_val_rmse_db = 0.0;
    long best_step = 0;
    std::string history_jsonl;
};

// Extracts and flattens every link of a record list against its scene.
inline std::vector<ModelInput> build_model_inputs(const std::vector<LinkRecord>& records,
                                                  const std::map<std::string, Scene>& scenes,
                                                  const ModelConfig& cfg,
                                                  double distance_scale, int threads = 1)
{
    const int pad = (cfg.patch_cols - 1) / 2;
    std::vector<ModelInput> out(records.size());
    parallel_for(records.size(), threads, [&](std::size_t i) {
        const LinkRecord& r = records[i];
        const auto it = scenes.find(r.scene_id);
        if (it == scenes.end())
            throw validation_error("inputs: dataset references unknown scene '" + r.scene_id +
                                   "'");
        out[i] = make_model_input(
            align_and_extract(it->second, r.tx, r.rx, cfg.patch_size, pad), cfg,
            distance_scale);
    });
    return out;
}

// Extraction plus prediction in bounded-size chunks, so datasets far larger
// than memory-resident training splits can be scored.
template <typename T>
std::vector<double> predict_records(SurrogateModel<T>& model,
                                    const std::vector<LinkRecord>& records,
                                    const std::map<std::string, Scene>& scenes,
                                    std::size_t batch = 64, int threads = 1,
                                    std::size_t chunk = 1024)
{
    if (chunk == 0)
        throw validation_error("predict: chunk size must be positive");
    std::vector<double> out(records.size(), 0.0);
    for (std::size_t start = 0; start < records.size(); start += chunk) {
        const std::size_t end = std::min(records.size(), start + chunk);
        const std::vector<LinkRecord> window(records.begin() + static_cast<std::ptrdiff_t>(start),
                                             records.begin() + static_cast<std::ptrdiff_t>(end));
        const std::vector<ModelInput> inputs =
            build_model_inputs(window, scenes, model.cfg, model.distance_scale, threads);
        const std::vector<double> values = model.predict(inputs, batch);
        std::copy(values.begin(), values.end(),
                  out.begin() + static_cast<std::ptrdiff_t>(start));
    }
    return out;
}

namespace detail {

// One epoch's batches: within each R group, indices are reshuffled and cut
// into runs of at most batch_size; the resulting batch list is then shuffled
// so R values interleave.
inline std::deque<std::vector<std::size_t>>
epoch_batches(const std::map<int, std::vector<std::size_t>>& groups, int batch_size, Rng& rng)
{
    std::vector<std::vector<std::size_t>> batches;
    for (const auto& [r, idxs] : groups) {
        std::vector<std::size_t> order = idxs;
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(batch_size));
            batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                                 order.begin() + static_cast<std::ptrdiff_t>(end));
        }
    }
    std::vector<std::size_t> batch_order(batches.size());
    for (std::size_t i = 0; i < batch_order.size(); ++i)
        batch_order[i] = i;
    rng.shuffle(batch_order);
    std::deque<std::vector<std::size_t>> out;
    for (std::size_t i : batch_order)
        out.push_back(std::move(batches[i]));
    return out;
}

template <typename T>
double val_rmse_db(SurrogateModel<T>& model, const std::vector<ModelInput>& inputs,
                   const std::vector<LinkRecord>& truth, int batch)
{
    const std::vector<double> preds =
        model.predict(inputs, static_cast<std::size_t>(batch));
    double sq = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double e = preds[i] - truth[i].pathloss_db;
        sq += e * e;
    }
    return std::sqrt(sq / static_cast<double>(truth.size()));
}

} // namespace detail

// Trains in place: initializes the model from cfg.seed, fits target
// statistics on the training split, and leaves the best-validation weights
// in the model when it returns.
template <typename T>
TrainResult train_surrogate(SurrogateModel<T>& model,
                            const std::vector<LinkRecord>& train_links,
                            const std::vector<LinkRecord>& val_links,
                            const std::map<std::string, Scene>& scenes,
                            const TrainConfig& cfg)
{
    cfg.validate();
    if (train_links.empty() || val_links.empty())
        throw validation_error("train: train and val splits must be non-empty");

    model.distance_scale = cfg.distance_scale;
    model.init(cfg.seed);

    double mean = 0.0;
    for (const auto& r : train_links)
        mean += r.pathloss_db;
    mean /= static_cast<double>(train_links.size());
    double var = 0.0;
    for (const auto& r : train_links)
        var += (r.pathloss_db - mean) * (r.pathloss_db - mean);
    var /= static_cast<double>(train_links.size());
    model.target_mean = mean;
    model.target_std = std::max(std::sqrt(var), 1e-6);

    const std::vector<ModelInput> train_in =
        build_model_inputs(train_links, scenes, model.cfg, cfg.distance_scale);
    const std::vector<ModelInput> val_in =
        build_model_inputs(val_links, scenes, model.cfg, cfg.distance_scale);

    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < train_in.size(); ++i)
        groups[train_in[i].patch_rows].push_back(i);

    std::vector<Tensor<T>*> params;
    for (auto& [name, t] : model.named_params())
        params.push_back(t);
    AdamState<T> adam;
    adam.init(params);

    Rng rng(splitmix64(cfg.seed ^ 0x74726169u)); // batch-order stream
    std::deque<std::vector<std::size_t>> batches;

    const long eval_every = cfg.eval_every > 0 ? cfg.eval_every
                                               : std::max<long>(cfg.steps / 50, 1);
    TrainResult result;
    result.best_val_rmse_db = std::numeric_limits<double>::infinity();
    std::vector<Tensor<T>> best_snapshot;

    double window_loss = 0.0;
    long window_count = 0;

    for (long step = 0; step < cfg.steps; ++step) {
        if (batches.empty())
            batches = detail::epoch_batches(groups, cfg.batch, rng);
        const std::vector<std::size_t> batch = std::move(batches.front());
        batches.pop_front();

        std::vector<ModelInput> xs;
        Tensor<T> target({static_cast<int>(batch.size())});
        xs.reserve(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            xs.push_back(train_in[batch[i]]);
            target[i] = static_cast<T>(
                (train_links[batch[i]].pathloss_db - model.target_mean) / model.target_std);
        }

        Tape<T> tape;
        tape.check_values = false;
        const auto gp = model.to_tape(tape);
        const int out = model.batch_forward(tape, gp, xs);
        const int loss = tape.mse_loss(out, tape.leaf(std::move(target)));
        const double loss_v = static_cast<double>(tape.value(loss)[0]);
        if (!std::isfinite(loss_v))
            throw validation_error("train: training diverged at step " + std::to_string(step));
        tape.backward(loss);

        std::vector<Tensor<T>> grads;
        grads.reserve(gp.all.size());
        for (int id : gp.all)
            grads.push_back(tape.grad(id));
        std::vector<Tensor<T>*> gptrs;
        for (auto& g : grads)
            gptrs.push_back(&g);
        if (cfg.clip_norm > 0.0)
            clip_global_norm<T>(gptrs, cfg.clip_norm);
        adam_step<T>(params, gptrs, adam, cosine_lr(cfg.lr, step, cfg.steps));

        window_loss += loss_v;
        window_count += 1;

        if ((step + 1) % eval_every == 0 || step + 1 == cfg.steps) {
            const double rmse = detail::val_rmse_db(model, val_in, val_links, cfg.batch);
            nlohmann::ordered_json line;
            line["step"] = step + 1;
            line["train_loss"] = window_loss / static_cast<double>(window_count);
            line["val_rmse_db"] = rmse;
            result.history_jsonl += line.dump();
            result.history_jsonl += '\n';
            window_loss = 0.0;
            window_count = 0;
            if (rmse < result.best_val_rmse_db) {
                result.best_val_rmse_db = rmse;
                result.best_step = step + 1;
                best_snapshot.clear();
                for (Tensor<T>* p : params)
                    best_snapshot.push_back(*p);
            }
        }
    }

    for (std::size_t i = 0; i < params.size(); ++i)
        *params[i] = best_snapshot[i];
    return result;
}

} // namespace plpred

#endif
