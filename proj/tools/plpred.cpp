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

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "plpred/baselines.hpp"
#include "plpred/common.hpp"
#include "plpred/map_extract.hpp"
#include "plpred/metrics.hpp"
#include "plpred/model.hpp"
#include "plpred/oracle.hpp"
#include "plpred/pipeline.hpp"
#include "plpred/render.hpp"
#include "plpred/scene_gen.hpp"
#include "plpred/splits.hpp"
#include "plpred/train.hpp"

namespace {

using nlohmann::ordered_json;

int default_threads()
{
    const unsigned n = std::thread::hardware_concurrency();
    return n > 0 ? static_cast<int>(n) : 1;
}

void parse_size(const std::string& text, int& w, int& h)
{
    if (std::sscanf(text.c_str(), "%dx%d", &w, &h) != 2 || w <= 0 || h <= 0)
        throw plpred::validation_error("--size must look like 256x256, got '" + text + "'");
}

void parse_pair(const std::string& text, const char* flag, double& a, double& b)
{
    if (std::sscanf(text.c_str(), "%lf,%lf", &a, &b) != 2)
        throw plpred::validation_error(std::string(flag) + " must look like X,Y, got '" +
                                       text + "'");
}

void parse_fractions(const std::string& text, plpred::SplitPlan& plan)
{
    double a = 0.0, b = 0.0, c = 0.0;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf", &a, &b, &c) != 3)
        throw plpred::validation_error("--fractions must look like 0.16,0.80,0.04, got '" +
                                       text + "'");
    plan.frac_train = a;
    plan.frac_test = b;
    plan.frac_val = c;
}

// Flat `key = value` config file; '#' starts a comment, blank lines skipped.
std::map<std::string, std::string> parse_kv_config(const std::string& path)
{
    const std::string text = plpred::read_text_file(path);
    std::map<std::string, std::string> kv;
    const auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::size_t start = 0;
    int line_no = 0;
    while (start <= text.size()) {
        ++line_no;
        std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos)
            nl = text.size();
        std::string line = text.substr(start, nl - start);
        start = nl + 1;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw plpred::validation_error("config " + path + ":" + std::to_string(line_no) +
                                           ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw plpred::validation_error("config " + path + ":" + std::to_string(line_no) +
                                           ": empty key or value");
        kv[key] = value;
        if (start > text.size())
            break;
    }
    return kv;
}

double kv_real(const std::map<std::string, std::string>& kv, const std::string& key,
               double fallback)
{
    const auto it = kv.find(key);
    if (it == kv.end())
        return fallback;
    bool ok = false;
    const double v = plpred::parse_real(it->second, ok);
    if (!ok)
        throw plpred::validation_error("config key '" + key + "': bad number '" + it->second +
                                       "'");
    return v;
}

long long kv_int(const std::map<std::string, std::string>& kv, const std::string& key,
                 long long fallback)
{
    const auto it = kv.find(key);
    if (it == kv.end())
        return fallback;
    bool ok = false;
    const long long v = plpred::parse_int(it->second, ok);
    if (!ok)
        throw plpred::validation_error("config key '" + key + "': bad integer '" + it->second +
                                       "'");
    return v;
}

// ---- selftest suites -------------------------------------------------------

plpred::Scene empty_scene(int px, double foliage_max = 30.0)
{
    plpred::Scene s;
    s.id = "selftest";
    s.width_px = px;
    s.height_px = px;
    s.resolution_m = 1.0;
    s.foliage_max_m = foliage_max;
    s.building_mask = plpred::Grid<unsigned char>(px, px, 0);
    s.building_height_m = plpred::Grid<double>(px, px, 0.0);
    s.foliage_height_m = plpred::Grid<double>(px, px, 0.0);
    return s;
}

void fill_building(plpred::Scene& s, int c0, int c1, int r0, int r1, double h)
{
    for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) {
            s.building_mask.at(r, c) = 1;
            s.building_height_m.at(r, c) = h;
        }
    }
}

void fill_foliage(plpred::Scene& s, int c0, int c1, int r0, int r1, double h)
{
    for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c)
            s.foliage_height_m.at(r, c) = h;
}

bool report_check(const char* name, bool ok, double metric, const char* unit)
{
    std::printf("  %-34s %-4s (%.3e %s)\n", name, ok ? "ok" : "FAIL", metric, unit);
    return ok;
}

bool suite_gradients()
{
    using plpred::Tape;
    using plpred::Tensor;
    std::printf("gradient-check suite\n");
    bool ok = true;
    plpred::Rng rng(7);
    const auto randn = [&](const std::vector<int>& shape) {
        Tensor<double> t(shape);
        for (auto& v : t.data)
            v = rng.normal() * 0.5;
        return t;
    };

    const auto op = [&](const char* name, auto fn, std::vector<Tensor<double>> inputs) {
        const auto rep = plpred::grad_check(fn, inputs, 1e-5, 1e-6);
        ok &= report_check(name, rep.pass, rep.max_rel_err, "rel err");
    };

    op("matmul",
       [](Tape<double>& t, const std::vector<int>& ids) {
           return t.mean(t.matmul(ids[0], ids[1]));
       },
       {randn({3, 4}), randn({4, 2})});
    op("linear+gelu",
       [](Tape<double>& t, const std::vector<int>& ids) {
           return t.mean(t.gelu(t.linear(ids[0], ids[1], ids[2])));
       },
       {randn({5, 4}), randn({4, 3}), randn({3})});
    op("softmax",
       [](Tape<double>& t, const std::vector<int>& ids) {
           return t.mse_loss(t.softmax(ids[0]), ids[1]);
       },
       {randn({4, 6}), randn({4, 6})});
    op("layer_norm",
       [](Tape<double>& t, const std::vector<int>& ids) {
           return t.mean(t.layer_norm(ids[0], ids[1], ids[2]));
       },
       {randn({3, 8}), randn({8}), randn({8})});
    op("add broadcast",
       [](Tape<double>& t, const std::vector<int>& ids) {
           return t.mean(t.add(ids[0], ids[1]));
       },
       {randn({2, 3, 4}), randn({4})});

    plpred::ModelConfig mc;
    mc.patch_size = 3;
    mc.dim = 8;
    mc.layers = 1;
    mc.heads = 2;
    mc.mlp_dim = 16;
    plpred::SurrogateModel<double> model(mc);
    model.init(11);
    plpred::ModelInput in;
    in.patch_rows = 4;
    in.patch_cols = 3;
    in.patch_size = 3;
    in.distance_norm = 0.3;
    in.patches = randn({4 * 3, mc.feature_len()}).data;
    for (auto& v : in.patches)
        v = std::abs(v);
    auto params = model.named_params();
    std::vector<Tensor<double>> values;
    for (auto& [name, t] : params)
        values.push_back(*t);
    const auto rep = plpred::grad_check(
        [&](Tape<double>& t, const std::vector<int>& ids) {
            const auto gp = model.graph_from_ids(ids);
            return t.mean(model.batch_forward(t, gp, {in}));
        },
        values, 1e-5, 1e-3);
    ok &= report_check("full model (tiny config)", rep.pass, rep.max_rel_err, "rel err");
    return ok;
}

bool suite_geometry()
{
    std::printf("geometry-invariant suite\n");
    bool ok = true;
    plpred::SceneGenParams params;
    const int P = 9;
    const int pad = 1;
    int worst_shape = 0;
    double worst_center = 0.0;
    for (int i = 0; i < 50; ++i) {
        const plpred::Scene scene = plpred::generate_scene(96, 96, params, 9000 + i);
        plpred::Rng rng(100 + i);
        const auto free_point = [&](double z) {
            while (true) {
                const double x = rng.uniform(1.0, scene.width_m() - 1.0);
                const double y = rng.uniform(1.0, scene.height_m() - 1.0);
                if (!scene.is_building_at(x, y))
                    return plpred::Point3{x, y, z};
            }
        };
        const plpred::Point3 tx = free_point(9.0);
        plpred::Point3 rx = free_point(1.5);
        if (plpred::distance_2d(tx, rx) < 1.0)
            rx.x += 2.0;
        const auto ex = plpred::align_and_extract(scene, tx, rx, P, pad);

        const long long gap = std::llround(plpred::distance_2d(tx, rx) / scene.resolution_m);
        const long long half = (P - 1) / 2;
        const long long K =
            std::max<long long>(0, plpred::iceil_div(std::max<long long>(gap - half, 0), P));
        if (ex.patch_cols != 2 * pad + 1 || ex.patch_rows != 2 * pad + 1 + K)
            ++worst_shape;
        if (ex.tx_patch_col != pad || ex.tx_patch_row != ex.patch_rows - 1 - pad)
            ++worst_shape;
        worst_center = std::max(
            worst_center, std::abs(ex.distance_m - plpred::distance_3d(tx, rx)));
    }
    ok &= report_check("shape law + tx anchoring", worst_shape == 0,
                       static_cast<double>(worst_shape), "violations");
    ok &= report_check("stored 3-D distance", worst_center < 1e-9, worst_center, "m");
    return ok;
}

bool suite_oracle()
{
    std::printf("oracle spot-value suite\n");
    bool ok = true;
    plpred::OracleConfig cfg;

    plpred::Scene open = empty_scene(200);
    const plpred::Point3 t0{50.0, 100.0, 9.0};
    const auto near = plpred::path_loss(open, t0, {51.0, 100.0, 9.0}, cfg);
    const auto far = plpred::path_loss(open, t0, {150.0, 100.0, 9.0}, cfg);
    ok &= report_check("fspl at 1 m = 61.39 dB", std::abs(near.pathloss_db - 61.39) < 0.01,
                       near.pathloss_db, "dB");
    ok &= report_check("fspl at 100 m = 101.39 dB", std::abs(far.pathloss_db - 101.39) < 0.01,
                       far.pathloss_db, "dB");

    plpred::Scene canyon = empty_scene(40);
    fill_building(canyon, 0, 40, 0, 10, 20.0);   // reflector band along the south edge
    fill_building(canyon, 18, 22, 18, 22, 20.0); // blocker on the direct path
    const plpred::Point3 ctx{5.0, 20.5, 2.0};
    const plpred::Point3 crx{35.0, 20.5, 2.0};
    const auto refl = plpred::path_loss(canyon, ctx, crx, cfg);
    // image of tx across the wall line y=10 sits at y=-0.5
    const double want_refl =
        plpred::fspl_db(std::sqrt(30.0 * 30.0 + 21.0 * 21.0), cfg.carrier_hz) +
        cfg.reflection_loss_db;
    ok &= report_check("single bounce adds exactly 6.4 dB",
                       !refl.outage && !refl.los &&
                           std::abs(refl.pathloss_db - want_refl) < 1e-9,
                       refl.pathloss_db - (want_refl - cfg.reflection_loss_db), "dB");

    plpred::Scene grove = empty_scene(40);
    fill_foliage(grove, 7, 17, 19, 21, 30.0); // canopy zone spans z in [7.5, 30]
    const auto fol = plpred::path_loss(grove, {2.0, 20.5, 9.0}, {22.0, 20.5, 9.0}, cfg);
    const double want_fol = plpred::fspl_db(20.0, cfg.carrier_hz) + 25.0;
    ok &= report_check("10 m of canopy adds 25.0 dB",
                       std::abs(fol.pathloss_db - want_fol) < 1e-9,
                       fol.pathloss_db - plpred::fspl_db(20.0, cfg.carrier_hz), "dB");
    return ok;
}

// ---- subcommand bodies -----------------------------------------------------

struct GenScenesArgs {
    std::string out;
    int count = 0;
    std::string size = "256x256";
    std::uint64_t seed = 1;
    double density = 0.7;
    double foliage_density = 1.0;
    double resolution = 1.0;
};

void run_gen_scenes(const GenScenesArgs& a)
{
    int w = 0, h = 0;
    parse_size(a.size, w, h);
    if (a.count <= 0)
        throw plpred::validation_error("--count must be positive");
    plpred::SceneGenParams params;
    params.building_density = a.density;
    params.foliage_density = a.foliage_density;
    params.resolution_m = a.resolution;
    std::filesystem::create_directories(a.out);
    for (int i = 0; i < a.count; ++i) {
        const plpred::Scene scene = plpred::generate_scene(w, h, params, a.seed + i);
        plpred::save_scene(scene, a.out + "/" + scene.id + ".plscene");
    }
    std::printf("wrote %d scenes to %s\n", a.count, a.out.c_str());
}

struct GenDatasetArgs {
    std::string scenes;
    std::string out;
    int poles = 0;
    int ues = 0;
    std::uint64_t seed = 1;
    double radius = 500.0;
    plpred::OracleConfig oracle;
    bool no_timestamp = false;
};

void run_gen_dataset(const GenDatasetArgs& a)
{
    const std::vector<plpred::Scene> scenes = plpred::load_scene_dir(a.scenes);
    const auto records =
        plpred::generate_dataset(scenes, a.poles, a.ues, a.oracle, a.seed, a.radius);
    plpred::save_dataset(records, a.out);
    ordered_json meta = plpred::dataset_sidecar_json(a.oracle, a.seed, a.poles, a.ues,
                                                     a.radius, scenes.size(), records.size());
    if (!a.no_timestamp)
        meta["generated_at"] = plpred::utc_timestamp();
    plpred::write_text_file(a.out + ".json", meta.dump(2) + "\n");
    std::printf("wrote %zu links to %s\n", records.size(), a.out.c_str());
}

struct SplitArgs {
    std::string dataset;
    std::string out;
    std::uint64_t seed = 1;
    std::string fractions = "0.16,0.80,0.04";
};

void run_split(const SplitArgs& a)
{
    plpred::SplitPlan plan;
    parse_fractions(a.fractions, plan);
    const auto records = plpred::load_dataset(a.dataset);
    const plpred::SplitSet splits = plpred::make_splits(records, plan, a.seed);
    plpred::save_split_dir(a.out, splits, plan, a.seed);
    std::printf("train=%zu val_known=%zu test_known=%zu val_novel=%zu test_novel=%zu\n",
                splits.train.size(), splits.val_known.size(), splits.test_known.size(),
                splits.val_novel.size(), splits.test_novel.size());
}

struct TrainArgs {
    std::string splits;
    std::string scenes;
    std::string config;
    std::string out;
    std::string history;
    std::string dtype = "f32";
    plpred::TrainConfig cfg;
    int threads = 1;
};

template <typename T>
void train_and_save(const TrainArgs& a, const plpred::SplitSet& splits,
                    const std::map<std::string, plpred::Scene>& scenes)
{
    plpred::SurrogateModel<T> model(a.cfg.model);
    const std::vector<plpred::LinkRecord>& val =
        splits.val_known.empty() ? splits.train : splits.val_known;
    if (splits.val_known.empty())
        std::fprintf(stderr, "note: empty val_known split, validating on training links\n");
    const plpred::TrainResult result =
        plpred::train_surrogate(model, splits.train, val, scenes, a.cfg);
    plpred::save_model(model, a.out);
    const std::string hist = a.history.empty() ? a.out + ".history.jsonl" : a.history;
    plpred::write_text_file(hist, result.history_jsonl);
    std::printf("best val RMSE %.4f dB at step %ld\ncheckpoint: %s\nhistory: %s\n",
                result.best_val_rmse_db, result.best_step, a.out.c_str(), hist.c_str());
}

void run_train(TrainArgs& a, const std::map<std::string, long long>& int_overrides,
               const std::map<std::string, double>& real_overrides)
{
    if (!a.config.empty()) {
        const auto kv = parse_kv_config(a.config);
        static const std::set<std::string> known{
            "lr",    "batch",      "steps",   "seed",     "clip_norm",   "eval_every",
            "dtype", "patch_size", "dim",     "layers",   "heads",       "mlp_dim",
            "patch_cols", "distance_scale"};
        for (const auto& [key, value] : kv)
            if (!known.count(key))
                throw plpred::validation_error("config key '" + key + "' is not recognized");
        a.cfg.lr = kv_real(kv, "lr", a.cfg.lr);
        a.cfg.batch = static_cast<int>(kv_int(kv, "batch", a.cfg.batch));
        a.cfg.steps = kv_int(kv, "steps", a.cfg.steps);
        a.cfg.seed = static_cast<std::uint64_t>(kv_int(kv, "seed", a.cfg.seed));
        a.cfg.clip_norm = kv_real(kv, "clip_norm", a.cfg.clip_norm);
        a.cfg.eval_every = kv_int(kv, "eval_every", a.cfg.eval_every);
        a.cfg.distance_scale = kv_real(kv, "distance_scale", a.cfg.distance_scale);
        a.cfg.model.patch_size = static_cast<int>(kv_int(kv, "patch_size", a.cfg.model.patch_size));
        a.cfg.model.dim = static_cast<int>(kv_int(kv, "dim", a.cfg.model.dim));
        a.cfg.model.layers = static_cast<int>(kv_int(kv, "layers", a.cfg.model.layers));
        a.cfg.model.heads = static_cast<int>(kv_int(kv, "heads", a.cfg.model.heads));
        a.cfg.model.mlp_dim = static_cast<int>(kv_int(kv, "mlp_dim", a.cfg.model.mlp_dim));
        a.cfg.model.patch_cols =
            static_cast<int>(kv_int(kv, "patch_cols", a.cfg.model.patch_cols));
        if (kv.count("dtype"))
            a.dtype = kv.at("dtype");
    }
    // command-line flags override config file values
    for (const auto& [key, value] : real_overrides) {
        if (key == "lr")
            a.cfg.lr = value;
        else if (key == "clip-norm")
            a.cfg.clip_norm = value;
        else if (key == "distance-scale")
            a.cfg.distance_scale = value;
    }
    for (const auto& [key, value] : int_overrides) {
        if (key == "batch")
            a.cfg.batch = static_cast<int>(value);
        else if (key == "steps")
            a.cfg.steps = value;
        else if (key == "seed")
            a.cfg.seed = static_cast<std::uint64_t>(value);
        else if (key == "eval-every")
            a.cfg.eval_every = value;
        else if (key == "patch-size")
            a.cfg.model.patch_size = static_cast<int>(value);
        else if (key == "dim")
            a.cfg.model.dim = static_cast<int>(value);
        else if (key == "layers")
            a.cfg.model.layers = static_cast<int>(value);
        else if (key == "heads")
            a.cfg.model.heads = static_cast<int>(value);
        else if (key == "mlp-dim")
            a.cfg.model.mlp_dim = static_cast<int>(value);
        else if (key == "patch-cols")
            a.cfg.model.patch_cols = static_cast<int>(value);
    }
    a.cfg.validate();
    if (a.dtype != "f32" && a.dtype != "f64")
        throw plpred::validation_error("dtype must be f32 or f64, got '" + a.dtype + "'");

    const plpred::SplitSet splits = plpred::load_split_dir(a.splits);
    if (splits.train.empty())
        throw plpred::validation_error("train: empty train split");
    const auto scenes = plpred::scenes_by_id(plpred::load_scene_dir(a.scenes));
    if (a.dtype == "f64")
        train_and_save<double>(a, splits, scenes);
    else
        train_and_save<float>(a, splits, scenes);
}

struct PredictArgs {
    std::string ckpt;
    std::string dataset;
    std::string scenes;
    std::string out;
    int threads = default_threads();
    int batch = 64;
};

void run_predict(const PredictArgs& a)
{
    plpred::SurrogateModel<float> model = plpred::load_model<float>(a.ckpt);
    const auto records = plpred::load_dataset(a.dataset);
    const auto scenes = plpred::scenes_by_id(plpred::load_scene_dir(a.scenes));
    const std::vector<double> values = plpred::predict_records(
        model, records, scenes, static_cast<std::size_t>(a.batch), a.threads);
    plpred::save_predictions(a.out, plpred::make_predictions(records, values));
    std::printf("wrote %zu predictions to %s\n", values.size(), a.out.c_str());
}

struct Gpp3Args {
    std::string dataset;
    std::string out;
    plpred::GppConfig cfg;
};

void run_baseline_3gpp(const Gpp3Args& a)
{
    const auto records = plpred::load_dataset(a.dataset);
    const std::vector<double> values = plpred::gpp_predict(records, a.cfg);
    plpred::save_predictions(a.out, plpred::make_predictions(records, values));
    std::printf("wrote %zu predictions to %s\n", values.size(), a.out.c_str());
}

struct MlpArgs {
    std::string splits;
    std::string dataset;
    std::string out;
    plpred::MlpTrainConfig cfg;
};

void run_baseline_mlp(const MlpArgs& a)
{
    const plpred::SplitSet splits = plpred::load_split_dir(a.splits);
    if (splits.train.empty())
        throw plpred::validation_error("baseline-mlp: empty train split");
    plpred::DistanceMlp mlp(a.cfg.hidden);
    mlp.train(splits.train, a.cfg);
    const auto records = plpred::load_dataset(a.dataset);
    const std::vector<double> values = mlp.predict(records);
    plpred::save_predictions(a.out, plpred::make_predictions(records, values));
    std::printf("wrote %zu predictions to %s\n", values.size(), a.out.c_str());
}

struct EvalArgs {
    std::vector<std::string> preds;
    std::string truth;
    std::string out;
    std::string cdf_prefix;
};

void run_eval(const EvalArgs& a)
{
    const auto truth = plpred::load_dataset(a.truth);
    ordered_json report;
    report["format_version"] = 1;
    report["truth"] = a.truth;
    report["link_count"] = truth.size();
    report["results"] = ordered_json::object();
    for (const std::string& path : a.preds) {
        const auto preds = plpred::load_predictions(path);
        const std::vector<double> values = plpred::align_predictions(preds, truth, path);
        const plpred::SplitEval ev = plpred::evaluate(values, truth);
        report["results"][path] = plpred::split_eval_json(ev);
        if (!a.cdf_prefix.empty())
            plpred::write_text_file(a.cdf_prefix + plpred::path_stem(path) + "_cdf.csv",
                                    plpred::cdf_csv(ev));
        std::printf("%s: rmse %.4f dB  mae %.4f dB  (los %.4f / nlos %.4f rmse, n=%zu)\n",
                    path.c_str(), ev.all.rmse_db, ev.all.mae_db, ev.los.rmse_db,
                    ev.nlos.rmse_db, ev.all.count);
    }
    plpred::write_text_file(a.out, report.dump(2) + "\n");
    std::printf("report: %s\n", a.out.c_str());
}

struct RenderArgs {
    std::string ckpt;
    bool use_oracle = false;
    std::string scene;
    std::string tx;
    double extent = 0.0;
    double resolution = 1.0;
    double rx_height = 1.5;
    double tx_height = 9.0;
    std::string out;
    plpred::OracleConfig oracle;
    bool no_timestamp = false;
    int threads = default_threads();
};

void run_render(const RenderArgs& a)
{
    const plpred::Scene scene = plpred::load_scene(a.scene);
    double x = 0.0, y = 0.0;
    parse_pair(a.tx, "--tx", x, y);
    const plpred::Point3 tx{x, y, a.tx_height};

    plpred::RenderOptions opts;
    opts.rx_height_m = a.rx_height;
    opts.threads = a.threads;

    plpred::PixelPredictor predictor;
    std::string name;
    plpred::SurrogateModel<float> model; // keep weights alive during render
    if (a.use_oracle) {
        predictor = plpred::make_oracle_predictor(scene, tx, a.extent, a.oracle);
        name = "oracle";
    } else {
        model = plpred::load_model<float>(a.ckpt);
        predictor = plpred::make_surrogate_predictor(model, scene, tx);
        name = "surrogate";
    }
    const plpred::RadioMap map =
        plpred::render_radiomap(scene, tx, predictor, a.resolution, a.extent, opts);
    plpred::save_radiomap(a.out, map, name, scene.foliage_max_m, !a.no_timestamp);
    std::printf("wrote %s.{csv,pgm,json} and %s_overlay.ppm (%d px, %s)\n", a.out.c_str(),
                a.out.c_str(), map.size_px, name.c_str());
}

int run_selftest()
{
    const bool g = suite_gradients();
    const bool geo = suite_geometry();
    const bool orc = suite_oracle();
    const bool ok = g && geo && orc;
    std::printf("selftest: %s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"plpred: link-level mmWave path loss prediction toolkit"};
    app.set_version_flag("--version",
                         std::string("plpred ") + plpred::kToolVersion +
                             "\nscene format: PLSCENE " +
                             std::to_string(plpred::kSceneFormatVersion) +
                             "\ndataset format: jsonl v" +
                             std::to_string(plpred::kDatasetFormatVersion) +
                             "\ncheckpoint format: PLWTS " +
                             std::to_string(plpred::kCheckpointFormatVersion));
    app.require_subcommand(1);
    int exit_code = 0;

    GenScenesArgs gs;
    auto* c_gs = app.add_subcommand("gen-scenes", "generate synthetic urban scenes");
    c_gs->add_option("--out", gs.out, "output directory")->required();
    c_gs->add_option("--count", gs.count, "number of scenes")->required();
    c_gs->add_option("--size", gs.size, "scene size in pixels, WxH");
    c_gs->add_option("--seed", gs.seed, "base seed; scene i uses seed + i");
    c_gs->add_option("--density", gs.density, "per-block building occupancy in [0, 1]");
    c_gs->add_option("--foliage-density", gs.foliage_density, "foliage blobs per 1000 px^2");
    c_gs->add_option("--resolution", gs.resolution, "metres per pixel");
    c_gs->callback([&] { run_gen_scenes(gs); });

    GenDatasetArgs gd;
    auto* c_gd = app.add_subcommand("gen-dataset", "label pole-UE links with the ray oracle");
    c_gd->add_option("--scenes", gd.scenes, "scene directory")->required();
    c_gd->add_option("--out", gd.out, "output dataset (JSON lines)")->required();
    c_gd->add_option("--poles", gd.poles, "poles per scene")->required();
    c_gd->add_option("--ues", gd.ues, "UEs per scene")->required();
    c_gd->add_option("--seed", gd.seed, "sampling seed");
    c_gd->add_option("--radius", gd.radius, "max 2-D link distance in metres");
    c_gd->add_option("--carrier-hz", gd.oracle.carrier_hz, "carrier frequency in Hz");
    c_gd->add_option("--tx-height", gd.oracle.tx_height_m, "pole height in metres");
    c_gd->add_option("--rx-height", gd.oracle.rx_height_m, "UE height in metres");
    c_gd->add_option("--reflection-db", gd.oracle.reflection_loss_db,
                     "per-bounce reflection loss");
    c_gd->add_option("--foliage-rate", gd.oracle.foliage_rate_db_per_m,
                     "foliage loss in dB per metre");
    c_gd->add_option("--canopy-fraction", gd.oracle.canopy_fraction,
                     "top fraction of a tree that attenuates");
    c_gd->add_option("--max-pathloss", gd.oracle.max_pathloss_db, "outage threshold in dB");
    c_gd->add_flag("--no-timestamp", gd.no_timestamp, "omit timestamps from sidecar metadata");
    c_gd->callback([&] { run_gen_dataset(gd); });

    SplitArgs sp;
    auto* c_sp = app.add_subcommand("split", "area-based train/val/test split");
    c_sp->add_option("--dataset", sp.dataset, "input dataset")->required();
    c_sp->add_option("--out", sp.out, "output split directory")->required();
    c_sp->add_option("--seed", sp.seed, "shuffle seed");
    c_sp->add_option("--fractions", sp.fractions, "train,test,val fractions of known links");
    c_sp->callback([&] { run_split(sp); });

    TrainArgs tr;
    std::map<std::string, long long> tr_ints;
    std::map<std::string, double> tr_reals;
    auto* c_tr = app.add_subcommand("train", "train the transformer surrogate");
    c_tr->add_option("--splits", tr.splits, "split directory")->required();
    c_tr->add_option("--scenes", tr.scenes, "scene directory")->required();
    c_tr->add_option("--out", tr.out, "output checkpoint")->required();
    c_tr->add_option("--config", tr.config, "flat key = value config file");
    c_tr->add_option("--history", tr.history, "history JSONL path (default CKPT.history.jsonl)");
    c_tr->add_option("--dtype", tr.dtype, "f32 or f64");
    c_tr->add_option("--threads", tr.threads,
                     "worker threads (the training loop itself is serial)");
    for (const char* key : {"batch", "steps", "seed", "eval-every", "patch-size", "dim",
                            "layers", "heads", "mlp-dim", "patch-cols"})
        c_tr->add_option_function<long long>(
            std::string("--") + key, [&tr_ints, key](long long v) { tr_ints[key] = v; });
    for (const char* key : {"lr", "clip-norm", "distance-scale"})
        c_tr->add_option_function<double>(
            std::string("--") + key, [&tr_reals, key](double v) { tr_reals[key] = v; });
    c_tr->callback([&] { run_train(tr, tr_ints, tr_reals); });

    PredictArgs pr;
    auto* c_pr = app.add_subcommand("predict", "run the surrogate over a dataset");
    c_pr->add_option("--ckpt", pr.ckpt, "checkpoint path")->required();
    c_pr->add_option("--dataset", pr.dataset, "input dataset")->required();
    c_pr->add_option("--scenes", pr.scenes, "scene directory")->required();
    c_pr->add_option("--out", pr.out, "output prediction file")->required();
    c_pr->add_option("--threads", pr.threads, "worker threads for extraction");
    c_pr->add_option("--batch", pr.batch, "prediction batch size");
    c_pr->callback([&] { run_predict(pr); });

    Gpp3Args g3;
    auto* c_g3 = app.add_subcommand("baseline-3gpp", "TR 38.901 UMi analytic baseline");
    c_g3->add_option("--dataset", g3.dataset, "input dataset")->required();
    c_g3->add_option("--out", g3.out, "output prediction file")->required();
    c_g3->add_option("--fc-ghz", g3.cfg.fc_ghz, "carrier frequency in GHz");
    c_g3->add_option("--h-bs", g3.cfg.h_bs_m, "base station height in metres");
    c_g3->add_option("--h-ut", g3.cfg.h_ut_m, "terminal height in metres");
    c_g3->callback([&] { run_baseline_3gpp(g3); });

    MlpArgs ml;
    auto* c_ml = app.add_subcommand("baseline-mlp", "distance-only MLP baseline");
    c_ml->add_option("--splits", ml.splits, "split directory providing the train split")
        ->required();
    c_ml->add_option("--dataset", ml.dataset, "dataset to predict")->required();
    c_ml->add_option("--out", ml.out, "output prediction file")->required();
    c_ml->add_option("--hidden", ml.cfg.hidden, "hidden width");
    c_ml->add_option("--steps", ml.cfg.steps, "training steps");
    c_ml->add_option("--batch", ml.cfg.batch, "batch size");
    c_ml->add_option("--lr", ml.cfg.lr, "learning rate");
    c_ml->add_option("--seed", ml.cfg.seed, "training seed");
    c_ml->callback([&] { run_baseline_mlp(ml); });

    EvalArgs ev;
    auto* c_ev = app.add_subcommand("eval", "score prediction files against ground truth");
    c_ev->add_option("--pred", ev.preds, "prediction file(s), comma separated")
        ->required()
        ->delimiter(',');
    c_ev->add_option("--truth", ev.truth, "ground truth dataset")->required();
    c_ev->add_option("--out", ev.out, "output report JSON")->required();
    c_ev->add_option("--cdf-prefix", ev.cdf_prefix,
                     "also write <prefix><pred-stem>_cdf.csv per prediction file");
    c_ev->callback([&] { run_eval(ev); });

    RenderArgs rd;
    auto* c_rd = app.add_subcommand("render", "render a dense radio map around a transmitter");
    auto* o_ckpt = c_rd->add_option("--ckpt", rd.ckpt, "surrogate checkpoint");
    auto* o_oracle = c_rd->add_flag("--oracle", rd.use_oracle, "use the ray oracle instead");
    o_ckpt->excludes(o_oracle);
    o_oracle->excludes(o_ckpt);
    c_rd->add_option("--scene", rd.scene, "scene file")->required();
    c_rd->add_option("--tx", rd.tx, "transmitter position, X,Y in metres")->required();
    c_rd->add_option("--extent", rd.extent, "map side length in metres")->required();
    c_rd->add_option("--resolution", rd.resolution, "metres per output pixel");
    c_rd->add_option("--rx-height", rd.rx_height, "receiver height in metres");
    c_rd->add_option("--tx-height", rd.tx_height, "transmitter height in metres");
    c_rd->add_option("--out", rd.out, "output path prefix")->required();
    c_rd->add_option("--carrier-hz", rd.oracle.carrier_hz, "oracle carrier frequency in Hz");
    c_rd->add_option("--max-pathloss", rd.oracle.max_pathloss_db, "oracle outage threshold");
    c_rd->add_flag("--no-timestamp", rd.no_timestamp, "omit timestamps from sidecar metadata");
    c_rd->add_option("--threads", rd.threads, "worker threads");
    c_rd->callback([&] {
        if (!rd.use_oracle && rd.ckpt.empty())
            throw plpred::validation_error("render: pass either --ckpt or --oracle");
        run_render(rd);
    });

    auto* c_st = app.add_subcommand("selftest", "run the built-in verification suites");
    c_st->callback([&] { exit_code = run_selftest(); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const plpred::validation_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const plpred::io_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: malformed file: %s\n", e.what());
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return exit_code;
}
