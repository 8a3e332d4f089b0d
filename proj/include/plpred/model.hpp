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

#ifndef PLPRED_MODEL_HPP
#define PLPRED_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "plpred/autodiff.hpp"
#include "plpred/checkpoint.hpp"
#include "plpred/common.hpp"
#include "plpred/map_extract.hpp"
#include "plpred/rng.hpp"

namespace plpred {

struct ModelConfig {
    int patch_size = 9; // P, odd
    int dim = 64;       // token width D
    int layers = 3;
    int heads = 4;
    int mlp_dim = 128;
    int patch_cols = 3; // C, odd (2 * pad + 1)
    int channels = 2;   // building mask, normalized foliage
    double dropout = 0.0;

    void validate() const
    {
        if (patch_size < 3 || patch_size % 2 == 0)
            throw validation_error("model: patch_size must be odd and >= 3");
        if (dim <= 0 || dim % 2 != 0)
            throw validation_error("model: dim must be positive and even");
        if (heads <= 0 || dim % heads != 0)
            throw validation_error("model: dim must be divisible by heads");
        if (layers <= 0 || mlp_dim <= 0)
            throw validation_error("model: layers and mlp_dim must be positive");
        if (patch_cols < 1 || patch_cols % 2 == 0)
            throw validation_error("model: patch_cols must be odd and >= 1");
        if (channels != 2)
            throw validation_error("model: channels must be 2");
        if (dropout != 0.0)
            throw validation_error("model: dropout is fixed at 0");
    }

    int feature_len() const { return patch_size * patch_size * channels; }
};

inline long parameter_count(const ModelConfig& cfg)
{
    const long d = cfg.dim;
    const long f = cfg.feature_len();
    const long m = cfg.mlp_dim;
    long n = f * d + d;          // patch projection
    n += d + d;                  // distance projection (1 x d weight plus bias)
    n += static_cast<long>(cfg.patch_cols) * d; // learned column embedding
    n += cfg.layers * (2 * d + 4 * (d * d + d) + 2 * d + d * m + m + m * d + d);
    n += d + 1;                  // head
    return n;
}

// Sinusoidal vertical embedding; r counts patch rows from the bottom of the
// extracted map starting at zero.
inline std::vector<double> vertical_embedding(int r, int dim)
{
    if (dim <= 0 || dim % 2 != 0)
        throw validation_error("vertical_embedding: dim must be positive and even");
    std::vector<double> v(dim);
    for (int d = 0; d < dim; d += 2) {
        const double freq = std::pow(10000.0, static_cast<double>(d) / dim);
        v[d] = std::sin(r / freq);
        v[d + 1] = std::cos(r / freq);
    }
    return v;
}

// One link prepared for the network: flattened patch features plus the
// normalized 3-D distance scalar. Patch i = pr * C + pc walks the extract
// top-down; within a patch, features are laid out pixel-row, pixel-column,
// then channel (mask, foliage).
struct ModelInput {
    int patch_rows = 0;
    int patch_cols = 0;
    int patch_size = 0;
    std::vector<double> patches; // [patch_rows * patch_cols, P * P * 2]
    double distance_norm = 0.0;
};

inline ModelInput make_model_input(const MapExtract& ex, const ModelConfig& cfg,
                                   double distance_scale)
{
    if (ex.patch_size != cfg.patch_size || ex.patch_cols != cfg.patch_cols)
        throw validation_error("model input: extract geometry P=" +
                               std::to_string(ex.patch_size) + " C=" +
                               std::to_string(ex.patch_cols) + " does not match config P=" +
                               std::to_string(cfg.patch_size) + " C=" +
                               std::to_string(cfg.patch_cols));
    const int P = ex.patch_size;
    ModelInput in;
    in.patch_rows = ex.patch_rows;
    in.patch_cols = ex.patch_cols;
    in.patch_size = P;
    in.patches.resize(static_cast<std::size_t>(ex.patch_rows) * ex.patch_cols * P * P * 2);
    std::size_t o = 0;
    for (int pr = 0; pr < ex.patch_rows; ++pr) {
        for (int pc = 0; pc < ex.patch_cols; ++pc) {
            for (int i = 0; i < P; ++i) {
                for (int j = 0; j < P; ++j) {
                    const int r = pr * P + i;
                    const int c = pc * P + j;
                    in.patches[o++] = ex.mask.at(r, c);
                    in.patches[o++] = ex.foliage.at(r, c);
                }
            }
        }
    }
    in.distance_norm = ex.distance_m / distance_scale;
    return in;
}

template <typename T>
struct SurrogateModel {
    struct LayerParams {
        Tensor<T> ln1_g, ln1_b;
        Tensor<T> wq, bq, wk, bk, wv, bv, wo, bo;
        Tensor<T> ln2_g, ln2_b;
        Tensor<T> mlp_w1, mlp_b1, mlp_w2, mlp_b2;
    };

    ModelConfig cfg;
    double distance_scale = 500.0;
    double target_mean = 0.0;
    double target_std = 1.0;

    Tensor<T> patch_w, patch_b;
    Tensor<T> dist_w, dist_b;
    Tensor<T> col_emb;
    std::vector<LayerParams> layers;
    Tensor<T> head_w, head_b;

    explicit SurrogateModel(const ModelConfig& c = {}) : cfg(c)
    {
        cfg.validate();
        const int d = cfg.dim;
        patch_w = Tensor<T>({cfg.feature_len(), d});
        patch_b = Tensor<T>({d});
        dist_w = Tensor<T>({1, d});
        dist_b = Tensor<T>({d});
        col_emb = Tensor<T>({cfg.patch_cols, d});
        layers.resize(static_cast<std::size_t>(cfg.layers));
        for (auto& l : layers) {
            l.ln1_g = Tensor<T>({d});
            l.ln1_b = Tensor<T>({d});
            l.wq = Tensor<T>({d, d});
            l.bq = Tensor<T>({d});
            l.wk = Tensor<T>({d, d});
            l.bk = Tensor<T>({d});
            l.wv = Tensor<T>({d, d});
            l.bv = Tensor<T>({d});
            l.wo = Tensor<T>({d, d});
            l.bo = Tensor<T>({d});
            l.ln2_g = Tensor<T>({d});
            l.ln2_b = Tensor<T>({d});
            l.mlp_w1 = Tensor<T>({d, cfg.mlp_dim});
            l.mlp_b1 = Tensor<T>({cfg.mlp_dim});
            l.mlp_w2 = Tensor<T>({cfg.mlp_dim, d});
            l.mlp_b2 = Tensor<T>({d});
        }
        head_w = Tensor<T>({d, 1});
        head_b = Tensor<T>({1});
    }

    // Fixed parameter order; this order defines the checkpoint layout and the
    // initialization draw order.
    std::vector<std::pair<std::string, Tensor<T>*>> named_params()
    {
        std::vector<std::pair<std::string, Tensor<T>*>> out;
        out.emplace_back("patch_proj.weight", &patch_w);
        out.emplace_back("patch_proj.bias", &patch_b);
        out.emplace_back("dist_proj.weight", &dist_w);
        out.emplace_back("dist_proj.bias", &dist_b);
        out.emplace_back("col_embed", &col_emb);
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const std::string p = "layers." + std::to_string(l) + ".";
            auto& L = layers[l];
            out.emplace_back(p + "ln1.gain", &L.ln1_g);
            out.emplace_back(p + "ln1.bias", &L.ln1_b);
            out.emplace_back(p + "attn.wq", &L.wq);
            out.emplace_back(p + "attn.bq", &L.bq);
            out.emplace_back(p + "attn.wk", &L.wk);
            out.emplace_back(p + "attn.bk", &L.bk);
            out.emplace_back(p + "attn.wv", &L.wv);
            out.emplace_back(p + "attn.bv", &L.bv);
            out.emplace_back(p + "attn.wo", &L.wo);
            out.emplace_back(p + "attn.bo", &L.bo);
            out.emplace_back(p + "ln2.gain", &L.ln2_g);
            out.emplace_back(p + "ln2.bias", &L.ln2_b);
            out.emplace_back(p + "mlp.w1", &L.mlp_w1);
            out.emplace_back(p + "mlp.b1", &L.mlp_b1);
            out.emplace_back(p + "mlp.w2", &L.mlp_w2);
            out.emplace_back(p + "mlp.b2", &L.mlp_b2);
        }
        out.emplace_back("head.weight", &head_w);
        out.emplace_back("head.bias", &head_b);
        return out;
    }

    long parameter_total()
    {
        long n = 0;
        for (auto& [name, t] : named_params())
            n += static_cast<long>(t->numel());
        return n;
    }

    // Weight matrices get N(0, 0.02^2) entries; biases and the column
    // embedding start at zero, layer norm gains at one.
    void init(std::uint64_t seed)
    {
        Rng rng(seed);
        for (auto& [name, t] : named_params()) {
            const bool is_weight = name.ends_with("weight") || name.ends_with("wq") ||
                                   name.ends_with("wk") || name.ends_with("wv") ||
                                   name.ends_with("wo") || name.ends_with("w1") ||
                                   name.ends_with("w2");
            const bool is_gain = name.ends_with("gain");
            for (auto& v : t->data) {
                if (is_weight)
                    v = static_cast<T>(0.02 * rng.normal());
                else if (is_gain)
                    v = T(1);
                else
                    v = T(0);
            }
        }
    }

    struct GraphLayer {
        int ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo;
        int ln2_g, ln2_b, mlp_w1, mlp_b1, mlp_w2, mlp_b2;
    };

    struct GraphParams {
        int patch_w, patch_b, dist_w, dist_b, col_emb;
        std::vector<GraphLayer> layers;
        int head_w, head_b;
        std::vector<int> all; // same order as named_params()
    };

    GraphParams to_tape(Tape<T>& tape)
    {
        GraphParams g;
        auto put = [&](Tensor<T>* t) {
            const int id = tape.leaf(*t);
            g.all.push_back(id);
            return id;
        };
        g.patch_w = put(&patch_w);
        g.patch_b = put(&patch_b);
        g.dist_w = put(&dist_w);
        g.dist_b = put(&dist_b);
        g.col_emb = put(&col_emb);
        for (auto& L : layers) {
            GraphLayer gl;
            gl.ln1_g = put(&L.ln1_g);
            gl.ln1_b = put(&L.ln1_b);
            gl.wq = put(&L.wq);
            gl.bq = put(&L.bq);
            gl.wk = put(&L.wk);
            gl.bk = put(&L.bk);
            gl.wv = put(&L.wv);
            gl.bv = put(&L.bv);
            gl.wo = put(&L.wo);
            gl.bo = put(&L.bo);
            gl.ln2_g = put(&L.ln2_g);
            gl.ln2_b = put(&L.ln2_b);
            gl.mlp_w1 = put(&L.mlp_w1);
            gl.mlp_b1 = put(&L.mlp_b1);
            gl.mlp_w2 = put(&L.mlp_w2);
            gl.mlp_b2 = put(&L.mlp_b2);
            g.layers.push_back(gl);
        }
        g.head_w = put(&head_w);
        g.head_b = put(&head_b);
        return g;
    }

    // Builds a GraphParams view over leaves someone else already pushed, in
    // named_params() order. Used by gradient checks that own the leaves.
    GraphParams graph_from_ids(const std::vector<int>& ids) const
    {
        const std::size_t expected = 5 + 16 * layers.size() + 2;
        if (ids.size() != expected)
            throw validation_error("graph_from_ids: got " + std::to_string(ids.size()) +
                                   " ids, expected " + std::to_string(expected));
        GraphParams g;
        std::size_t i = 0;
        g.patch_w = ids[i++];
        g.patch_b = ids[i++];
        g.dist_w = ids[i++];
        g.dist_b = ids[i++];
        g.col_emb = ids[i++];
        for (std::size_t l = 0; l < layers.size(); ++l) {
            GraphLayer gl;
            gl.ln1_g = ids[i++];
            gl.ln1_b = ids[i++];
            gl.wq = ids[i++];
            gl.bq = ids[i++];
            gl.wk = ids[i++];
            gl.bk = ids[i++];
            gl.wv = ids[i++];
            gl.bv = ids[i++];
            gl.wo = ids[i++];
            gl.bo = ids[i++];
            gl.ln2_g = ids[i++];
            gl.ln2_b = ids[i++];
            gl.mlp_w1 = ids[i++];
            gl.mlp_b1 = ids[i++];
            gl.mlp_w2 = ids[i++];
            gl.mlp_b2 = ids[i++];
            g.layers.push_back(gl);
        }
        g.head_w = ids[i++];
        g.head_b = ids[i++];
        g.all = ids;
        return g;
    }

    struct ForwardOptions {
        bool use_positional = true;
        std::vector<Tensor<T>>* attn_capture = nullptr; // one [B, H, T, T] per layer
    };

    // All inputs in one call must share the patch grid (same R); the output
    // node holds standardized predictions of shape [B].
    int batch_forward(Tape<T>& tape, const GraphParams& gp,
                      const std::vector<ModelInput>& inputs,
                      const ForwardOptions& opts = {}) const
    {
        if (inputs.empty())
            throw validation_error("batch_forward: empty batch");
        const int R = inputs[0].patch_rows;
        const int C = cfg.patch_cols;
        const int F = cfg.feature_len();
        for (const auto& in : inputs) {
            if (in.patch_rows != R)
                throw validation_error("batch_forward: mixed patch_rows in batch (" +
                                       std::to_string(R) + " vs " +
                                       std::to_string(in.patch_rows) + ")");
            if (in.patch_cols != C || in.patch_size != cfg.patch_size)
                throw validation_error("batch_forward: input patch geometry does not match config");
            if (in.patches.size() != static_cast<std::size_t>(R) * C * F)
                throw validation_error("batch_forward: input feature length mismatch");
        }
        const int B = static_cast<int>(inputs.size());
        const int RC = R * C;
        const int D = cfg.dim;
        const int H = cfg.heads;
        const int hd = D / H;
        const int T_len = 1 + RC;

        Tensor<T> x({B, RC, F});
        Tensor<T> dist({B, 1, 1});
        for (int b = 0; b < B; ++b) {
            for (std::size_t i = 0; i < inputs[b].patches.size(); ++i)
                x[static_cast<std::size_t>(b) * RC * F + i] =
                    static_cast<T>(inputs[b].patches[i]);
            dist[static_cast<std::size_t>(b)] = static_cast<T>(inputs[b].distance_norm);
        }
        const int x_id = tape.leaf(std::move(x));
        const int dist_id = tape.leaf(std::move(dist));

        int patch_tok = tape.linear(x_id, gp.patch_w, gp.patch_b); // [B, RC, D]
        const int dist_tok = tape.linear(dist_id, gp.dist_w, gp.dist_b); // [B, 1, D]

        if (opts.use_positional) {
            Tensor<T> vert({RC, D});
            for (int pr = 0; pr < R; ++pr) {
                const std::vector<double> v = vertical_embedding(R - 1 - pr, D);
                for (int pc = 0; pc < C; ++pc)
                    for (int d = 0; d < D; ++d)
                        vert[static_cast<std::size_t>(pr * C + pc) * D + d] =
                            static_cast<T>(v[static_cast<std::size_t>(d)]);
            }
            Tensor<T> sel({RC, C});
            for (int i = 0; i < RC; ++i)
                sel[static_cast<std::size_t>(i) * C + i % C] = T(1);
            const int vert_id = tape.leaf(std::move(vert));
            const int col_exp = tape.matmul(tape.leaf(std::move(sel)), gp.col_emb);
            const int pos = tape.add(col_exp, vert_id); // [RC, D]
            patch_tok = tape.add(patch_tok, pos);
        }

        int h = tape.concat(dist_tok, patch_tok, 1); // [B, T_len, D]

        const T inv_sqrt_hd = T(1) / std::sqrt(static_cast<T>(hd));
        for (int l = 0; l < cfg.layers; ++l) {
            const GraphLayer& gl = gp.layers[static_cast<std::size_t>(l)];
            const int n1 = tape.layer_norm(h, gl.ln1_g, gl.ln1_b);
            auto split_heads = [&](int t) {
                return tape.permute(tape.reshape(t, {B, T_len, H, hd}), {0, 2, 1, 3});
            };
            const int q = split_heads(tape.linear(n1, gl.wq, gl.bq));
            const int k = split_heads(tape.linear(n1, gl.wk, gl.bk));
            const int v = split_heads(tape.linear(n1, gl.wv, gl.bv));
            const int scores = tape.scale(tape.matmul(q, tape.permute(k, {0, 1, 3, 2})),
                                          inv_sqrt_hd);
            const int attn = tape.softmax(scores); // [B, H, T, T]
            if (opts.attn_capture)
                opts.attn_capture->push_back(tape.value(attn));
            const int ctx = tape.reshape(tape.permute(tape.matmul(attn, v), {0, 2, 1, 3}),
                                         {B, T_len, D});
            const int a = tape.add(h, tape.linear(ctx, gl.wo, gl.bo));
            const int n2 = tape.layer_norm(a, gl.ln2_g, gl.ln2_b);
            const int m = tape.linear(tape.gelu(tape.linear(n2, gl.mlp_w1, gl.mlp_b1)),
                                      gl.mlp_w2, gl.mlp_b2);
            h = tape.add(a, m);
        }

        const int tok0 = tape.slice(h, 1, 0, 1); // [B, 1, D]
        const int y = tape.linear(tok0, gp.head_w, gp.head_b); // [B, 1, 1]
        return tape.reshape(y, {B});
    }

    double denormalize(double standardized) const
    {
        return standardized * target_std + target_mean;
    }

    // Convenience inference over a mixed-R list; groups by R internally and
    // returns predictions in input order, in dB.
    std::vector<double> predict(const std::vector<ModelInput>& inputs,
                                std::size_t max_batch = 64)
    {
        std::vector<double> out(inputs.size(), 0.0);
        std::map<int, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < inputs.size(); ++i)
            groups[inputs[i].patch_rows].push_back(i);
        for (const auto& [r, idxs] : groups) {
            for (std::size_t start = 0; start < idxs.size(); start += max_batch) {
                const std::size_t end = std::min(idxs.size(), start + max_batch);
                std::vector<ModelInput> batch;
                batch.reserve(end - start);
                for (std::size_t i = start; i < end; ++i)
                    batch.push_back(inputs[idxs[i]]);
                Tape<T> tape;
                const GraphParams gp = to_tape(tape);
                const int o = batch_forward(tape, gp, batch);
                const Tensor<T>& v = tape.value(o);
                for (std::size_t i = start; i < end; ++i)
                    out[idxs[i]] = denormalize(static_cast<double>(v[i - start]));
            }
        }
        return out;
    }
};

// ---- checkpoint with JSON sidecar ------------------------------------------

template <typename T>
NamedWeights model_weights(SurrogateModel<T>& model)
{
    NamedWeights w;
    for (auto& [name, t] : model.named_params())
        w.emplace_back(name, t->template cast<float>());
    return w;
}

template <typename T>
nlohmann::ordered_json model_sidecar_json(const SurrogateModel<T>& model)
{
    nlohmann::ordered_json j;
    j["format_version"] = kCheckpointFormatVersion;
    j["kind"] = "surrogate";
    j["model"] = {{"patch_size", model.cfg.patch_size}, {"dim", model.cfg.dim},
                  {"layers", model.cfg.layers},         {"heads", model.cfg.heads},
                  {"mlp_dim", model.cfg.mlp_dim},       {"patch_cols", model.cfg.patch_cols},
                  {"channels", model.cfg.channels},     {"dropout", model.cfg.dropout}};
    j["distance_scale"] = model.distance_scale;
    j["target_mean"] = model.target_mean;
    j["target_std"] = model.target_std;
    return j;
}

template <typename T>
void save_model(SurrogateModel<T>& model, const std::string& path)
{
    save_weights(path, model_weights(model));
    write_text_file(path + ".json", model_sidecar_json(model).dump(2) + "\n");
}

inline ModelConfig model_config_from_json(const nlohmann::json& jm)
{
    ModelConfig cfg;
    cfg.patch_size = jm.at("patch_size").get<int>();
    cfg.dim = jm.at("dim").get<int>();
    cfg.layers = jm.at("layers").get<int>();
    cfg.heads = jm.at("heads").get<int>();
    cfg.mlp_dim = jm.at("mlp_dim").get<int>();
    cfg.patch_cols = jm.at("patch_cols").get<int>();
    cfg.channels = jm.at("channels").get<int>();
    cfg.dropout = jm.at("dropout").get<double>();
    cfg.validate();
    return cfg;
}

template <typename T = float>
SurrogateModel<T> load_model(const std::string& path)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path + ".json"));
    } catch (const nlohmann::json::exception& e) {
        throw io_error(path + ".json: " + e.what());
    }
    if (j.value("kind", "") != std::string("surrogate"))
        throw io_error(path + ".json: checkpoint sidecar is not a surrogate model");
    if (j.at("format_version").get<int>() != kCheckpointFormatVersion)
        throw io_error(path + ".json: unsupported checkpoint format version");
    SurrogateModel<T> model(model_config_from_json(j.at("model")));
    model.distance_scale = j.at("distance_scale").get<double>();
    model.target_mean = j.at("target_mean").get<double>();
    model.target_std = j.at("target_std").get<double>();

    const NamedWeights w = load_weights(path);
    auto params = model.named_params();
    if (w.size() != params.size())
        throw io_error(path + ": checkpoint has " + std::to_string(w.size()) +
                       " parameters, model expects " + std::to_string(params.size()));
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i].first != params[i].first)
            throw io_error(path + ": parameter " + std::to_string(i) + " is '" + w[i].first +
                           "', expected '" + params[i].first + "'");
        if (w[i].second.shape != params[i].second->shape)
            throw io_error(path + ": parameter '" + w[i].first + "' has shape " +
                           shape_str(w[i].second.shape) + ", expected " +
                           shape_str(params[i].second->shape));
        *params[i].second = w[i].second.template cast<T>();
    }
    return model;
}

} // namespace plpred

#endif
