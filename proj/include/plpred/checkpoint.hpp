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

#ifndef PLPRED_CHECKPOINT_HPP
#define PLPRED_CHECKPOINT_HPP

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "plpred/tensor.hpp"

namespace plpred {

using NamedWeights = std::vector<std::pair<std::string, Tensor<float>>>;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v)
{
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_f32(std::string& out, float v)
{
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

struct ByteReader {
    const std::string& buf;
    std::size_t pos = 0;
    std::string path;

    std::uint32_t u32()
    {
        if (pos + 4 > buf.size())
            throw io_error(path + ": truncated checkpoint");
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i)
            v = (v << 8) | static_cast<std::uint8_t>(buf[pos + static_cast<std::size_t>(i)]);
        pos += 4;
        return v;
    }

    float f32() { return std::bit_cast<float>(u32()); }

    std::string bytes(std::size_t n)
    {
        if (pos + n > buf.size())
            throw io_error(path + ": truncated checkpoint");
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

} // namespace detail

// Serializes weights to the PLWTS 1 container: an ASCII magic line, then a
// little-endian u32 parameter count, then per parameter a u32 name length,
// the name bytes, a u32 rank, u32 dims, and the raw 32-bit float data.
inline std::string weights_to_bytes(const NamedWeights& weights)
{
    std::string out = "PLWTS 1\n";
    detail::put_u32(out, static_cast<std::uint32_t>(weights.size()));
    for (const auto& [name, w] : weights) {
        detail::put_u32(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        detail::put_u32(out, static_cast<std::uint32_t>(w.shape.size()));
        for (int d : w.shape)
            detail::put_u32(out, static_cast<std::uint32_t>(d));
        for (float v : w.data)
            detail::put_f32(out, v);
    }
    return out;
}

inline NamedWeights weights_from_bytes(const std::string& buf, const std::string& path = "<memory>")
{
    const std::string magic = "PLWTS 1\n";
    if (buf.size() < magic.size() || buf.compare(0, magic.size(), magic) != 0)
        throw io_error(path + ": not a PLWTS 1 checkpoint");
    detail::ByteReader r{buf, magic.size(), path};
    const std::uint32_t count = r.u32();
    NamedWeights weights;
    weights.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t name_len = r.u32();
        std::string name = r.bytes(name_len);
        const std::uint32_t ndim = r.u32();
        if (ndim == 0 || ndim > 8)
            throw io_error(path + ": parameter '" + name + "' has invalid rank " +
                           std::to_string(ndim));
        std::vector<int> shape(ndim);
        std::size_t numel = 1;
        for (std::uint32_t d = 0; d < ndim; ++d) {
            const std::uint32_t v = r.u32();
            if (v == 0 || v > (1u << 28))
                throw io_error(path + ": parameter '" + name + "' has invalid dim " +
                               std::to_string(v));
            shape[d] = static_cast<int>(v);
            numel *= v;
        }
        Tensor<float> w(shape);
        for (std::size_t j = 0; j < numel; ++j)
            w[j] = r.f32();
        weights.emplace_back(std::move(name), std::move(w));
    }
    if (r.pos != buf.size())
        throw io_error(path + ": trailing bytes after checkpoint payload");
    return weights;
}

inline void save_weights(const std::string& path, const NamedWeights& weights)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw io_error(path + ": cannot open for writing");
    const std::string bytes = weights_to_bytes(weights);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f)
        throw io_error(path + ": write failed");
}

inline NamedWeights load_weights(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw io_error(path + ": cannot open");
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return weights_from_bytes(buf, path);
}

} // namespace plpred

#endif
