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

#ifndef PLPRED_METRICS_HPP
#define PLPRED_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plpred/dataset.hpp"

namespace plpred {

struct MetricCell {
    double rmse_db = 0.0;
    double mae_db = 0.0;
    long count = 0;
};

struct SplitEval {
    MetricCell all;
    MetricCell los;
    MetricCell nlos;
    double p50 = 0.0;
    double p90 = 0.0;
    double p95 = 0.0;
    std::vector<double> abs_errors_sorted;
};

namespace detail {

inline MetricCell cell_from_errors(const std::vector<double>& errors)
{
    MetricCell c;
    c.count = static_cast<long>(errors.size());
    if (errors.empty())
        return c;
    double sq = 0.0, ab = 0.0;
    for (double e : errors) {
        sq += e * e;
        ab += std::abs(e);
    }
    c.rmse_db = std::sqrt(sq / static_cast<double>(errors.size()));
    c.mae_db = ab / static_cast<double>(errors.size());
    if (c.mae_db > c.rmse_db + 1e-12)
        throw std::logic_error("metrics: MAE exceeded RMSE");
    return c;
}

// Nearest-rank quantile on a sorted ascending vector.
inline double quantile_sorted(const std::vector<double>& sorted, double p)
{
    if (sorted.empty())
        return 0.0;
    const double n = static_cast<double>(sorted.size());
    long k = static_cast<long>(std::ceil(p * n));
    k = std::clamp<long>(k, 1, static_cast<long>(sorted.size()));
    return sorted[static_cast<std::size_t>(k - 1)];
}

} // namespace detail

inline SplitEval evaluate(const std::vector<double>& predictions_db,
                          const std::vector<LinkRecord>& truth)
{
    if (predictions_db.size() != truth.size())
        throw validation_error("evaluate: " + std::to_string(predictions_db.size()) +
                               " predictions for " + std::to_string(truth.size()) +
                               " truth links");
    std::vector<double> err_all, err_los, err_nlos;
    err_all.reserve(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double e = predictions_db[i] - truth[i].pathloss_db;
        err_all.push_back(e);
        (truth[i].los ? err_los : err_nlos).push_back(e);
    }
    SplitEval ev;
    ev.all = detail::cell_from_errors(err_all);
    ev.los = detail::cell_from_errors(err_los);
    ev.nlos = detail::cell_from_errors(err_nlos);
    ev.abs_errors_sorted.reserve(err_all.size());
    for (double e : err_all)
        ev.abs_errors_sorted.push_back(std::abs(e));
    std::sort(ev.abs_errors_sorted.begin(), ev.abs_errors_sorted.end());
    ev.p50 = detail::quantile_sorted(ev.abs_errors_sorted, 0.50);
    ev.p90 = detail::quantile_sorted(ev.abs_errors_sorted, 0.90);
    ev.p95 = detail::quantile_sorted(ev.abs_errors_sorted, 0.95);
    return ev;
}

// ---- prediction files ------------------------------------------------------

struct Prediction {
    long index = 0;
    std::string scene_id;
    double predicted_db = 0.0;
};

inline std::string predictions_to_string(const std::vector<Prediction>& preds)
{
    std::string out;
    for (const auto& p : preds) {
        nlohmann::ordered_json j;
        j["index"] = p.index;
        j["scene_id"] = p.scene_id;
        j["predicted_db"] = p.predicted_db;
        out += j.dump();
        out += '\n';
    }
    return out;
}

inline std::vector<Prediction> predictions_from_string(const std::string& text,
                                                       const std::string& path = "<memory>")
{
    std::vector<Prediction> out;
    std::size_t pos = 0;
    long lineno = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos)
            end = text.size();
        ++lineno;
        const std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.empty())
            continue;
        try {
            const nlohmann::json j = nlohmann::json::parse(line);
            Prediction p;
            p.index = j.at("index").get<long>();
            p.scene_id = j.at("scene_id").get<std::string>();
            p.predicted_db = j.at("predicted_db").get<double>();
            out.push_back(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw io_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline void save_predictions(const std::string& path, const std::vector<Prediction>& preds)
{
    write_text_file(path, predictions_to_string(preds));
}

inline std::vector<Prediction> load_predictions(const std::string& path)
{
    return predictions_from_string(read_text_file(path), path);
}

inline std::vector<Prediction> make_predictions(const std::vector<LinkRecord>& truth,
                                                const std::vector<double>& values_db)
{
    if (truth.size() != values_db.size())
        throw validation_error("predictions: value count does not match record count");
    std::vector<Prediction> out;
    out.reserve(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i)
        out.push_back(Prediction{static_cast<long>(i), truth[i].scene_id, values_db[i]});
    return out;
}

// Checks a prediction file against the truth it claims to cover and returns
// the aligned value vector. The first inconsistency is named.
inline std::vector<double> align_predictions(const std::vector<Prediction>& preds,
                                             const std::vector<LinkRecord>& truth,
                                             const std::string& source = "predictions")
{
    for (std::size_t i = 0; i < std::min(preds.size(), truth.size()); ++i) {
        if (preds[i].index != static_cast<long>(i))
            throw validation_error(source + ": link " + std::to_string(i) +
                                   " has index " + std::to_string(preds[i].index));
        if (preds[i].scene_id != truth[i].scene_id)
            throw validation_error(source + ": link " + std::to_string(i) + " is for scene " +
                                   preds[i].scene_id + ", truth has " + truth[i].scene_id);
    }
    if (preds.size() < truth.size())
        throw validation_error(source + ": missing link " + std::to_string(preds.size()) +
                               " (" + truth[preds.size()].scene_id + ")");
    if (preds.size() > truth.size())
        throw validation_error(source + ": has " + std::to_string(preds.size()) +
                               " links, truth has " + std::to_string(truth.size()));
    std::vector<double> values;
    values.reserve(preds.size());
    for (const auto& p : preds)
        values.push_back(p.predicted_db);
    return values;
}

// ---- report ----------------------------------------------------------------

inline nlohmann::ordered_json cell_json(const MetricCell& c)
{
    return {{"rmse_db", c.rmse_db}, {"mae_db", c.mae_db}, {"count", c.count}};
}

inline nlohmann::ordered_json split_eval_json(const SplitEval& ev)
{
    nlohmann::ordered_json j;
    j["all"] = cell_json(ev.all);
    j["los"] = cell_json(ev.los);
    j["nlos"] = cell_json(ev.nlos);
    j["quantiles"] = {{"p50", ev.p50}, {"p90", ev.p90}, {"p95", ev.p95}};
    return j;
}

// CSV of the empirical |error| CDF: one row per link, cumulative fraction at
// and below that error.
inline std::string cdf_csv(const SplitEval& ev)
{
    std::string out = "abs_error_db,cum_fraction\n";
    const double n = static_cast<double>(ev.abs_errors_sorted.size());
    for (std::size_t i = 0; i < ev.abs_errors_sorted.size(); ++i) {
        out += format_real(ev.abs_errors_sorted[i]);
        out += ',';
        out += format_real(static_cast<double>(i + 1) / n);
        out += '\n';
    }
    return out;
}

} // namespace plpred

#endif
