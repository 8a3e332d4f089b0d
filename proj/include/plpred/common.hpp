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

#ifndef PLPRED_COMMON_HPP
#define PLPRED_COMMON_HPP

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

namespace plpred {

// File format versions, printed by the CLI and embedded in sidecar metadata.
inline constexpr int kSceneFormatVersion = 1;
inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kCheckpointFormatVersion = 1;
inline constexpr int kExtractFormatVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// Bad arguments, malformed files or broken invariants. CLI exit code 1.
class validation_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Filesystem or OS level failure. CLI exit code 2.
class io_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Shortest decimal representation that parses back to the same double.
// Integral values keep a trailing ".0" so real-valued columns stay visually
// distinct from integer columns in the text formats.
inline std::string format_real(double v)
{
    if (v == 0.0)
        v = 0.0; // normalize -0
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, res.ptr);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

inline double parse_real(std::string_view tok, bool& ok)
{
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    ok = res.ec == std::errc() && res.ptr == tok.data() + tok.size();
    return v;
}

inline long long parse_int(std::string_view tok, bool& ok)
{
    long long v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    ok = res.ec == std::errc() && res.ptr == tok.data() + tok.size();
    return v;
}

// ceil(a / b) for non-negative a, positive b
inline long long iceil_div(long long a, long long b)
{
    return (a + b - 1) / b;
}

inline std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open file for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw io_error("read failure: " + path);
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw io_error("cannot open file for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
        throw io_error("write failure: " + path);
}

inline std::string path_stem(const std::string& path)
{
    return std::filesystem::path(path).stem().string();
}

inline std::string utc_timestamp()
{
    char buf[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Runs fn(i) for i in [0, n). Workers pull indices from a shared counter, so
// callers must write results into index-addressed slots; outputs are then
// independent of the thread count. threads <= 1 runs inline.
template <typename F>
void parallel_for(std::size_t n, int threads, F&& fn)
{
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            try {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                    fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error)
                    error = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace plpred

#endif
