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

#ifndef PLPRED_TENSOR_HPP
#define PLPRED_TENSOR_HPP

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plpred/common.hpp"

namespace plpred {

inline std::size_t shape_numel(const std::vector<int>& shape)
{
    std::size_t n = 1;
    for (int d : shape)
        n *= static_cast<std::size_t>(d);
    return n;
}

inline std::string shape_str(const std::vector<int>& shape)
{
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i)
            s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

// Dense row-major tensor. All dims positive; scalars use shape {1}.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(shape_numel(shape), T(0))
    {
        for (int d : shape)
            if (d <= 0)
                throw validation_error("tensor dims must be positive, got " + shape_str(shape));
    }
    Tensor(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d))
    {
        if (data.size() != shape_numel(shape))
            throw validation_error("tensor data length " + std::to_string(data.size()) +
                                   " does not match shape " + shape_str(shape));
    }

    static Tensor scalar(T v) { return Tensor({1}, {v}); }

    std::size_t numel() const { return data.size(); }
    int ndim() const { return static_cast<int>(shape.size()); }

    T& operator[](std::size_t i) { return data[i]; }
    const T& operator[](std::size_t i) const { return data[i]; }

    template <typename U>
    Tensor<U> cast() const
    {
        Tensor<U> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i)
            out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

namespace detail {

// C = A(m x k) * B(k x n), row-major raw pointers. Single-threaded Eigen
// keeps a fixed accumulation order, so results are bit-reproducible.
template <typename T>
inline void gemm(const T* a, const T* b, T* c, int m, int k, int n)
{
    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const Mat> ma(a, m, k);
    Eigen::Map<const Mat> mb(b, k, n);
    Eigen::Map<Mat> mc(c, m, n);
    mc.noalias() = ma * mb;
}

// C += A^T(k x m -> m x k transposed) * B or similar accumulating forms used
// by matmul backward.
template <typename T>
inline void gemm_acc_at_b(const T* a, const T* b, T* c, int m, int k, int n)
{
    // c(k x n) += a(m x k)^T * b(m x n)
    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const Mat> ma(a, m, k);
    Eigen::Map<const Mat> mb(b, m, n);
    Eigen::Map<Mat> mc(c, k, n);
    mc.noalias() += ma.transpose() * mb;
}

template <typename T>
inline void gemm_acc_a_bt(const T* a, const T* b, T* c, int m, int k, int n)
{
    // c(m x k) += a(m x n) * b(k x n)^T
    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const Mat> ma(a, m, n);
    Eigen::Map<const Mat> mb(b, k, n);
    Eigen::Map<Mat> mc(c, m, k);
    mc.noalias() += ma * mb.transpose();
}

} // namespace detail

} // namespace plpred

#endif
