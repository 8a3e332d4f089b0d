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

#ifndef PLPRED_AUTODIFF_HPP
#define PLPRED_AUTODIFF_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "plpred/tensor.hpp"

namespace plpred {

// Eager reverse-mode tape. Every op records its output value and a backward
// closure; node creation order is already topological, so the backward sweep
// is a reverse iteration. Activations are retained for the tape's lifetime.
// Build a fresh tape per training step.
template <typename T>
class Tape {
  public:
    struct Node {
        Tensor<T> value;
        Tensor<T> grad;
        std::function<void(Tape&)> back; // empty for leaves
    };

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Finite-value checking after each op. On by default; training loops may
    // disable it and rely on the loss check only.
    bool check_values = true;

    int size() const { return static_cast<int>(nodes_.size()); }
    const Tensor<T>& value(int id) const { return nodes_[check_id(id)].value; }
    const Tensor<T>& grad(int id) const { return nodes_[check_id(id)].grad; }

    int leaf(Tensor<T> v)
    {
        return push("leaf", std::move(v), {});
    }

    // ---- elementwise and structural ops ------------------------------------

    // b's shape must equal a's shape, or be a trailing suffix of it; the
    // suffix case broadcasts b across the leading axes.
    int add(int a, int b)
    {
        const Tensor<T>& va = value(a);
        const Tensor<T>& vb = value(b);
        if (!is_suffix_shape(vb.shape, va.shape))
            throw validation_error("add: shape " + shape_str(vb.shape) +
                                   " does not broadcast into " + shape_str(va.shape));
        Tensor<T> out = va;
        const std::size_t bn = vb.numel();
        for (std::size_t i = 0; i < out.numel(); ++i)
            out[i] += vb[i % bn];
        return push("add", std::move(out), [a, b, bn](Tape& t) {
            const Tensor<T>& g = t.nodes_[t.out_id_].grad;
            Tensor<T>& ga = t.nodes_[a].grad;
            Tensor<T>& gb = t.nodes_[b].grad;
            for (std::size_t i = 0; i < g.numel(); ++i) {
                ga[i] += g[i];
                gb[i % bn] += g[i];
            }
        });
    }

    int scale(int a, T s)
    {
        Tensor<T> out = value(a);
        for (auto& v : out.data)
            v *= s;
        return push("scale", std::move(out), [a, s](Tape& t) {
            const Tensor<T>& g = t.nodes_[t.out_id_].grad;
            Tensor<T>& ga = t.nodes_[a].grad;
            for (std::size_t i = 0; i < g.numel(); ++i)
                ga[i] += s * g[i];
        });
    }

    int reshape(int a, std::vector<int> shape)
    {
        const Tensor<T>& va = value(a);
        if (shape_numel(shape) != va.numel())
            throw validation_error("reshape: cannot view " + shape_str(va.shape) + " as " +
                                   shape_str(shape));
        Tensor<T> out = va;
        out.shape = std::move(shape);
        return push("reshape", std::move(out), [a](Tape& t) {
            const Tensor<T>& g = t.nodes_[t.out_id_].grad;
            Tensor<T>& ga = t.nodes_[a].grad;
            for (std::size_t i = 0; i < g.numel(); ++i)
                ga[i] += g[i];
        });
    }

    int permute(int a, std::vector<int> axes)
    {
        const Tensor<T>& va = value(a);
        const int nd = va.ndim();
        if (static_cast<int>(axes.size()) != nd)
            throw validation_error("permute: got " + std::to_string(axes.size()) +
                                   " axes for tensor " + shape_str(va.shape));
        std::vector<char> seen(nd, 0);
        for (int ax : axes) {
            if (ax < 0 || ax >= nd || seen[ax])
                throw validation_error("permute: invalid axis list for tensor " +
                                       shape_str(va.shape));
            seen[ax] = 1;
        }
        std::vector<int> oshape(nd);
        for (int i = 0; i < nd; ++i)
            oshape[i] = va.shape[axes[i]];
        Tensor<T> out(oshape);
        permute_copy(va, out, axes, false);
        return push("permute", std::move(out), [a, axes](Tape& t) {
            const Tensor<T>& g = t.nodes_[t.out_id_].grad;
            Tensor<T>& ga = t.nodes_[a].grad;
            permute_copy(g, ga, axes, true);
        });
    }

    int concat(int a, int b, int axis)
    {
        const Tensor<T>& va = value(a);
        const Tensor<T>& vb = value(b);
        const int nd = va.ndim();
        if (vb.ndim() != nd || axis < 0 || axis >= nd)
            throw validation_error("concat: incompatible shapes " + shape_str(va.shape) +
                                   " and " + shape_str(vb.shape));
        for (int i = 0; i < nd; ++i)
            if (i != axis && va.shape[i] != vb.shape[i])
                throw validation_error("concat: incompatible shapes " + shape_str(va.shape) +
                                       " and " + shape_str(vb.shape) + " on axis " +
                                       std::to_string(axis));
        std::vector<int> oshape = va.shape;
        oshape[axis] += vb.shape[axis];
        std::size_t outer = 1, inner = 1;
        for (int i = 0; i < axis; ++i)
            outer *= static_cast<std::size_t>(va.shape[i]);
        for (int i = axis + 1; i < nd; ++i)
            inner *= static_cast<std::size_t>(va.shape[i]);
        const std::size_t sa = static_cast<std::size_t>(va.shape[axis]) * inner;
        const std::size_t sb = static_cast<std::size_t>(vb.shape[axis]) * inner;
        Tensor<T> out(oshape);
        for (std::size_t o = 0; o < outer; ++o) {
            std::copy_n(va.data.data() + o * sa, sa, out.data.data() + o * (sa + sb));
            std::copy_n(vb.data.data() + o * sb, sb, out.data.data() + o * (sa + sb) + sa);
        }
        return push("concat", std::move(out), [a, b, outer, sa, sb](Tape& t) {
            const Tensor<T>& g = t.nodes_[t.out_id_].grad;
            Tensor<T>& ga = t.nodes_[a].grad;
            Tensor<T>& gb = t.nodes_[b].grad;
            for (std::size_t o = 0; o < outer; ++o) {
                const T* gp = g.data.data() + o * (sa + sb);
                for (std::size_t i = 0; i < sa; ++i)
                    ga[o * sa + i] += gp[i];
                for (std::size_t i = 0; i < sb; ++i)
                    gb[o * sb + i] += gp[sa + i];
            }
        });
    }

    int slice(int a, int axis, int start, int len)
    {
        const Tensor<T>& va = value(a);
        const int nd = va.ndim();
        if (axis < 0 || axis >= nd || start < 0 || len <= 0 || start + len > va.shape[axis])
            throw validation_error("slice: range [" + std::to_string(start) + ", " +
                                   std::to_string(start + len) + ") on axis " +
                                   std::to_string(axis) + " invalid for " +
                                   shape_str(va.shape));
        std::vector<int> oshape = va.shape;
        oshape[axis] = len;
        std::size_t outer = 1, inner = 1;
        for (int i = 0; i < axis; ++i)
            outer *= static_cast<std::size_t>(va.shape[i]);
        for (int i = axis + 1; i < nd; ++i)
            inner *= static_cast<std::size_t>(va.shape[i]);
        const std::size_t src_stride = static_cast<std::size_t>(va.shape[axis]) * inner;
        const std::size_t dst_stride = static_cast<std::size_t>(len) * inner;
        const std::size_t off = static_cast<std::size_t>(start) * inner;
        Tensor<T> out(oshape);
        for (std::size_t o = 0; o < outer; ++o)
            std::copy_n(va.data.data() + o * src_stride + off, dst_stride,
                        out.data.data() + o * dst_stride);
        return push("slice", std::move(out), [a, outer, src_stride, dst_stride, off](Tape& t) {
            const Tensor<T>& g = t.nodes_[t.out_id_].grad;
            Tensor<T>& ga = t.nodes_[a].grad;
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t i = 0; i < dst_stride; ++i)
                    ga[o * src_stride + off + i] += g[o * dst_stride + i];
        });
    }

    // ---- nonlinearities ----------------------------------------------------

    int relu(int a)
    {
        Tensor<T> out = value(a);
        for (auto& v : out.data)
            v = v > T(0) ? v : T(0);
        return push("relu", std::move(out), [a](Tape& t) {
            const Tensor<T>& g = t.nodes_[t.out_id_].grad;
            const Tensor<T>& x = t.nodes_[a].value;
            Tensor<T>& ga = t.nodes_[a].grad;
            for (std::size_t i = 0; i < g.numel(); ++i)
                if (x[i] > T(0))
                    ga[i] += g[i];
        });
    }

    // Exact GELU, 0.5 x (1 + erf(x / sqrt(2))).
    int gelu(int a)
    {
        const T inv_sqrt2 = T(0.70710678118654752440);
        const Tensor<T>& va = value(a);
        Tensor<T> out(va.shape);
        for (std::size_t i = 0; i < va.numel(); ++i) {
            const T x = va[i];
            out[i] = T(0.5) * x * (T(1) + std::erf(x * inv_sqrt2));
        }
        return push("gelu", std::move(out), [a, inv_sqrt2](Tape& t) {
            const Tensor<T>& g = t.nodes_[t.out_id_].grad;
            const Tensor<T>& xs = t.nodes_[a].value;
            Tensor<T>& ga = t.nodes_[a].grad;
            const T inv_sqrt_2pi = T(0.3989422804014326779);
            for (std::size_t i = 0; i < g.numel(); ++i) {
                const T x = xs[i];
                const T cdf = T(0.5) * (T(1) + std::erf(x * inv_sqrt2));
                const T pdf = inv_sqrt_2pi * std::exp(T(-0.5) * x * x);
                ga[i] += g[i] * (cdf + x * pdf);
            }
        });
    }

    // Softmax over the last axis.
    int softmax(int a)
    {
        const Tensor<T>& va = value(a);
        const std::size_t n = static_cast<std::size_t>(va.shape.back());
        const std::size_t rows = va.numel() / n;
        Tensor<T> out(va.shape);
        for (std::size_t r = 0; r < rows; ++r) {
            const T* x = va.data.data() + r * n;
            T* y = out.data.data() + r * n;
            T mx = x[0];
            for (std::size_t i = 1; i < n; ++i)
                mx = std::max(mx, x[i]);
            T sum = T(0);
            for (std::size_t i = 0; i < n; ++i) {
                y[i] = std::exp(x[i] - mx);
                sum += y[i];
            }
            const T inv = T(1) / sum;
            for (std::size_t i = 0; i < n; ++i)
                y[i] *= inv;
        }
        return push("softmax", std::move(out), [a, rows, n](Tape& t) {
            const int out_id = t.out_id_;
            const Tensor<T>& g = t.nodes_[out_id].grad;
            const Tensor<T>& y = t.nodes_[out_id].value;
            Tensor<T>& ga = t.nodes_[a].grad;
            for (std::size_t r = 0; r < rows; ++r) {
                const T* gy = g.data.data() + r * n;
                const T* yy = y.data.data() + r * n;
                T dot = T(0);
                for (std::size_t i = 0; i < n; ++i)
                    dot += gy[i] * yy[i];
                T* gx = ga.data.data() + r * n;
                for (std::size_t i = 0; i < n; ++i)
                    gx[i] += yy[i] * (gy[i] - dot);
            }
        });
    }

    // Layer norm over the last axis with learnable gain and bias (shape [N]).
    int layer_norm(int a, int gain, int bias, T eps = T(1e-5))
    {
        const Tensor<T>& va = value(a);
        const Tensor<T>& vg = value(gain);
        const Tensor<T>& vb = value(bias);
        const int n_i = va.shape.back();
        if (vg.ndim() != 1 || vb.ndim() != 1 || vg.shape[0] != n_i || vb.shape[0] != n_i)
            throw validation_error("layer_norm: gain " + shape_str(vg.shape) + " / bias " +
                                   shape_str(vb.shape) + " do not match input " +
                                   shape_str(va.shape));
        const std::size_t n = static_cast<std::size_t>(n_i);
        const std::size_t rows = va.numel() / n;
        Tensor<T> out(va.shape);
        std::vector<T> mean(rows), inv_std(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            const T* x = va.data.data() + r * n;
            T mu = T(0);
            for (std::size_t i = 0; i < n; ++i)
                mu += x[i];
            mu /= T(n);
            T var = T(0);
            for (std::size_t i = 0; i < n; ++i)
                var += (x[i] - mu) * (x[i] - mu);
            var /= T(n);
            const T is = T(1) / std::sqrt(var + eps);
            mean[r] = mu;
            inv_std[r] = is;
            T* y = out.data.data() + r * n;
            for (std::size_t i = 0; i < n; ++i)
                y[i] = (x[i] - mu) * is * vg[i] + vb[i];
        }
        return push("layer_norm", std::move(out),
                    [a, gain, bias, rows, n, mean = std::move(mean),
                     inv_std = std::move(inv_std)](Tape& t) {
            const Tensor<T>& g = t.nodes_[t.out_id_].grad;
            const Tensor<T>& x = t.nodes_[a].value;
            const Tensor<T>& vg = t.nodes_[gain].value;
            Tensor<T>& ga = t.nodes_[a].grad;
            Tensor<T>& gg = t.nodes_[gain].grad;
            Tensor<T>& gb = t.nodes_[bias].grad;
            for (std::size_t r = 0; r < rows; ++r) {
                const T* gy = g.data.data() + r * n;
                const T* xr = x.data.data() + r * n;
                const T mu = mean[r];
                const T is = inv_std[r];
                T sum_dxh = T(0), sum_dxh_xh = T(0);
                for (std::size_t i = 0; i < n; ++i) {
                    const T xh = (xr[i] - mu) * is;
                    const T dxh = gy[i] * vg[i];
                    sum_dxh += dxh;
                    sum_dxh_xh += dxh * xh;
                    gg[i] += gy[i] * xh;
                    gb[i] += gy[i];
                }
                T* gx = ga.data.data() + r * n;
                const T invn = T(1) / T(n);
                for (std::size_t i = 0; i < n; ++i) {
                    const T xh = (xr[i] - mu) * is;
                    const T dxh = gy[i] * vg[i];
                    gx[i] += is * invn * (T(n) * dxh - sum_dxh - xh * sum_dxh_xh);
                }
            }
        });
    }

    // ---- linear algebra ----------------------------------------------------

    // a: [..., M, K]. b: either [K, N] (shared across the batch, gradients
    // summed over batch slices in a fixed order) or [..., K, N] with leading
    // dims equal to a's.
    int matmul(int a, int b)
    {
        const Tensor<T>& va = value(a);
        const Tensor<T>& vb = value(b);
        if (va.ndim() < 2 || vb.ndim() < 2)
            throw validation_error("matmul: need at least 2-D operands, got " +
                                   shape_str(va.shape) + " and " + shape_str(vb.shape));
        const int m = va.shape[va.ndim() - 2];
        const int k = va.shape[va.ndim() - 1];
        const int kb = vb.shape[vb.ndim() - 2];
        const int n = vb.shape[vb.ndim() - 1];
        const bool shared_b = vb.ndim() == 2 && va.ndim() > 2;
        if (k != kb)
            throw validation_error("matmul: inner dims of " + shape_str(va.shape) + " and " +
                                   shape_str(vb.shape) + " do not match");
        if (!shared_b && vb.ndim() != va.ndim())
            throw validation_error("matmul: rank mismatch between " + shape_str(va.shape) +
                                   " and " + shape_str(vb.shape));
        std::size_t batch = 1;
        for (int i = 0; i + 2 < va.ndim(); ++i) {
            if (!shared_b && vb.shape[i] != va.shape[i])
                throw validation_error("matmul: batch dims of " + shape_str(va.shape) +
                                       " and " + shape_str(vb.shape) + " do not match");
            batch *= static_cast<std::size_t>(va.shape[i]);
        }
        std::vector<int> oshape(va.shape.begin(), va.shape.end() - 1);
        oshape.push_back(n);
        Tensor<T> out(oshape);
        const std::size_t as = static_cast<std::size_t>(m) * k;
        const std::size_t bs = static_cast<std::size_t>(k) * n;
        const std::size_t cs = static_cast<std::size_t>(m) * n;
        for (std::size_t i = 0; i < batch; ++i)
            detail::gemm(va.data.data() + i * as, vb.data.data() + (shared_b ? 0 : i * bs),
                         out.data.data() + i * cs, m, k, n);
        return push("matmul", std::move(out),
                    [a, b, batch, shared_b, m, k, n, as, bs, cs](Tape& t) {
            const Tensor<T>& g = t.nodes_[t.out_id_].grad;
            const Tensor<T>& va = t.nodes_[a].value;
            const Tensor<T>& vb = t.nodes_[b].value;
            Tensor<T>& ga = t.nodes_[a].grad;
            Tensor<T>& gb = t.nodes_[b].grad;
            for (std::size_t i = 0; i < batch; ++i) {
                const T* gc = g.data.data() + i * cs;
                const std::size_t bo = shared_b ? 0 : i * bs;
                detail::gemm_acc_a_bt(gc, vb.data.data() + bo, ga.data.data() + i * as,
                                      m, k, n);
                detail::gemm_acc_at_b(va.data.data() + i * as, gc, gb.data.data() + bo,
                                      m, k, n);
            }
        });
    }

    // y = x @ w + bias, w: [in, out], bias: [out].
    int linear(int x, int w, int bias)
    {
        const Tensor<T>& vw = value(w);
        const Tensor<T>& vb = value(bias);
        if (vw.ndim() != 2 || vb.ndim() != 1 || vb.shape[0] != vw.shape[1])
            throw validation_error("linear: weight " + shape_str(vw.shape) +
                                   " and bias " + shape_str(vb.shape) + " are inconsistent");
        return add(matmul(x, w), bias);
    }

    // ---- reductions --------------------------------------------------------

    int mean(int a)
    {
        const Tensor<T>& va = value(a);
        const std::size_t n = va.numel();
        T s = T(0);
        for (std::size_t i = 0; i < n; ++i)
            s += va[i];
        return push("mean", Tensor<T>::scalar(s / T(n)), [a, n](Tape& t) {
            const T g = t.nodes_[t.out_id_].grad[0] / T(n);
            Tensor<T>& ga = t.nodes_[a].grad;
            for (std::size_t i = 0; i < n; ++i)
                ga[i] += g;
        });
    }

    int mse_loss(int a, int b)
    {
        const Tensor<T>& va = value(a);
        const Tensor<T>& vb = value(b);
        if (va.shape != vb.shape)
            throw validation_error("mse_loss: shapes " + shape_str(va.shape) + " and " +
                                   shape_str(vb.shape) + " differ");
        const std::size_t n = va.numel();
        T s = T(0);
        for (std::size_t i = 0; i < n; ++i) {
            const T d = va[i] - vb[i];
            s += d * d;
        }
        return push("mse_loss", Tensor<T>::scalar(s / T(n)), [a, b, n](Tape& t) {
            const T g = t.nodes_[t.out_id_].grad[0] * T(2) / T(n);
            const Tensor<T>& va = t.nodes_[a].value;
            const Tensor<T>& vb = t.nodes_[b].value;
            Tensor<T>& ga = t.nodes_[a].grad;
            Tensor<T>& gb = t.nodes_[b].grad;
            for (std::size_t i = 0; i < n; ++i) {
                const T d = g * (va[i] - vb[i]);
                ga[i] += d;
                gb[i] -= d;
            }
        });
    }

    // ---- backward ----------------------------------------------------------

    void backward(int root)
    {
        Node& r = nodes_[check_id(root)];
        if (r.value.numel() != 1)
            throw validation_error("backward: root must be scalar, got " +
                                   shape_str(r.value.shape));
        r.grad[0] = T(1);
        for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
            if (nodes_[i].back) {
                out_id_ = i;
                nodes_[i].back(*this);
            }
        }
    }

  private:
    std::vector<Node> nodes_;
    int out_id_ = -1; // node whose backward closure is currently running

    int check_id(int id) const
    {
        if (id < 0 || id >= size())
            throw validation_error("tape: node id " + std::to_string(id) + " out of range");
        return id;
    }

    static bool is_suffix_shape(const std::vector<int>& small, const std::vector<int>& big)
    {
        if (small.size() > big.size())
            return false;
        return std::equal(small.rbegin(), small.rend(), big.rbegin());
    }

    static void permute_copy(const Tensor<T>& src, Tensor<T>& dst,
                             const std::vector<int>& axes, bool inverse_accumulate)
    {
        const int nd = static_cast<int>(axes.size());
        std::vector<std::size_t> src_strides(nd, 1);
        for (int i = nd - 2; i >= 0; --i)
            src_strides[i] = src_strides[i + 1] *
                             static_cast<std::size_t>(inverse_accumulate ? dst.shape[i + 1]
                                                                         : src.shape[i + 1]);
        // Walk the permuted tensor in row-major order; idx holds its
        // multi-index, and the source offset follows via permuted strides.
        const Tensor<T>& perm_side = inverse_accumulate ? src : dst;
        std::vector<int> idx(nd, 0);
        const std::size_t total = perm_side.numel();
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t off = 0;
            for (int i = 0; i < nd; ++i)
                off += static_cast<std::size_t>(idx[i]) * src_strides[axes[i]];
            if (inverse_accumulate)
                dst[off] += src[flat];
            else
                dst[flat] = src[off];
            for (int i = nd - 1; i >= 0; --i) {
                if (++idx[i] < perm_side.shape[i])
                    break;
                idx[i] = 0;
            }
        }
    }

    int push(const char* op, Tensor<T> value, std::function<void(Tape&)> back)
    {
        if (check_values) {
            for (const T& v : value.data) {
                if (!std::isfinite(static_cast<double>(v)))
                    throw validation_error(std::string(op) + ": non-finite value in output of shape " +
                                           shape_str(value.shape));
            }
        }
        Node n;
        n.grad = Tensor<T>(value.shape); // zeros
        n.value = std::move(value);
        n.back = std::move(back);
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }
};

// ---- gradient checking -----------------------------------------------------

struct GradCheckReport {
    bool pass = true;
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    std::size_t failures = 0;
    std::string first_failure;
};

// f: (Tape<double>&, const std::vector<int>& leaf_ids) -> scalar node id.
// Central differences with step h; relative error uses max(1, |a|, |n|) as
// the denominator.
template <typename F>
GradCheckReport grad_check(F&& f, const std::vector<Tensor<double>>& inputs,
                           double h = 1e-5, double tol = 1e-4)
{
    auto eval = [&](const std::vector<Tensor<double>>& xs, bool want_grads,
                    std::vector<Tensor<double>>* grads_out) -> double {
        Tape<double> tape;
        std::vector<int> ids;
        ids.reserve(xs.size());
        for (const auto& x : xs)
            ids.push_back(tape.leaf(x));
        const int root = f(tape, ids);
        if (tape.value(root).numel() != 1)
            throw validation_error("grad_check: function output must be scalar, got " +
                                   shape_str(tape.value(root).shape));
        const double y = tape.value(root)[0];
        if (want_grads) {
            tape.backward(root);
            grads_out->clear();
            for (int id : ids)
                grads_out->push_back(tape.grad(id));
        }
        return y;
    };

    std::vector<Tensor<double>> analytic;
    eval(inputs, true, &analytic);

    GradCheckReport rep;
    std::vector<Tensor<double>> work = inputs;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        for (std::size_t i = 0; i < inputs[t].numel(); ++i) {
            const double orig = work[t][i];
            work[t][i] = orig + h;
            const double yp = eval(work, false, nullptr);
            work[t][i] = orig - h;
            const double ym = eval(work, false, nullptr);
            work[t][i] = orig;
            const double numeric = (yp - ym) / (2.0 * h);
            const double a = analytic[t][i];
            const double rel = std::abs(a - numeric) /
                               std::max({1.0, std::abs(a), std::abs(numeric)});
            rep.max_rel_err = std::max(rep.max_rel_err, rel);
            ++rep.checked;
            if (rel > tol) {
                ++rep.failures;
                if (rep.first_failure.empty())
                    rep.first_failure = "input " + std::to_string(t) + " element " +
                                        std::to_string(i) + ": analytic " +
                                        std::to_string(a) + " vs numeric " +
                                        std::to_string(numeric);
            }
        }
    }
    rep.pass = rep.failures == 0;
    return rep;
}

// Sampled variant for large parameter sets: checks up to n_per_tensor
// randomly chosen elements of each input tensor (all elements when the
// tensor is at most that size). element_picks supplies the random element
// indices, one draw per sampled slot.
template <typename F, typename PickFn>
GradCheckReport grad_check_sampled(F&& f, const std::vector<Tensor<double>>& inputs,
                                   std::size_t n_per_tensor, PickFn&& pick,
                                   double h = 1e-5, double tol = 1e-4)
{
    auto eval = [&](const std::vector<Tensor<double>>& xs, bool want_grads,
                    std::vector<Tensor<double>>* grads_out) -> double {
        Tape<double> tape;
        std::vector<int> ids;
        ids.reserve(xs.size());
        for (const auto& x : xs)
            ids.push_back(tape.leaf(x));
        const int root = f(tape, ids);
        const double y = tape.value(root)[0];
        if (want_grads) {
            tape.backward(root);
            grads_out->clear();
            for (int id : ids)
                grads_out->push_back(tape.grad(id));
        }
        return y;
    };

    std::vector<Tensor<double>> analytic;
    eval(inputs, true, &analytic);

    GradCheckReport rep;
    std::vector<Tensor<double>> work = inputs;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        const std::size_t n = inputs[t].numel();
        std::vector<std::size_t> elems;
        if (n <= n_per_tensor) {
            for (std::size_t i = 0; i < n; ++i)
                elems.push_back(i);
        } else {
            for (std::size_t s = 0; s < n_per_tensor; ++s)
                elems.push_back(pick(n));
        }
        for (std::size_t i : elems) {
            const double orig = work[t][i];
            work[t][i] = orig + h;
            const double yp = eval(work, false, nullptr);
            work[t][i] = orig - h;
            const double ym = eval(work, false, nullptr);
            work[t][i] = orig;
            const double numeric = (yp - ym) / (2.0 * h);
            const double a = analytic[t][i];
            const double rel = std::abs(a - numeric) /
                               std::max({1.0, std::abs(a), std::abs(numeric)});
            rep.max_rel_err = std::max(rep.max_rel_err, rel);
            ++rep.checked;
            if (rel > tol) {
                ++rep.failures;
                if (rep.first_failure.empty())
                    rep.first_failure = "input " + std::to_string(t) + " element " +
                                        std::to_string(i) + ": analytic " +
                                        std::to_string(a) + " vs numeric " +
                                        std::to_string(numeric);
            }
        }
    }
    rep.pass = rep.failures == 0;
    return rep;
}

} // namespace plpred

#endif
