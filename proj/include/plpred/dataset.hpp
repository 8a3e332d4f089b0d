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

#ifndef PLPRED_DATASET_HPP
#define PLPRED_DATASET_HPP

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plpred/common.hpp"
#include "plpred/geometry.hpp"

namespace plpred {

// One transmitter-receiver pair with its ground-truth label.
struct LinkRecord {
    std::string scene_id;
    Point3 tx;
    Point3 rx;
    double distance_3d_m = 0.0;
    double pathloss_db = 0.0;
    bool los = false;
};

enum class SplitName { train, val_known, test_known, val_novel, test_novel };

inline const char* split_name_str(SplitName s)
{
    switch (s) {
    case SplitName::train: return "train";
    case SplitName::val_known: return "val_known";
    case SplitName::test_known: return "test_known";
    case SplitName::val_novel: return "val_novel";
    case SplitName::test_novel: return "test_novel";
    }
    return "?";
}

struct DatasetSplit {
    SplitName name = SplitName::train;
    std::vector<LinkRecord> records;
};

// tolerance 1e-9 relative on the recomputed 3-D distance
inline void validate_link_distance(const LinkRecord& rec)
{
    const double d = distance_3d(rec.tx, rec.rx);
    const double tol = 1e-9 * std::max(1.0, d);
    if (std::abs(d - rec.distance_3d_m) > tol)
        throw validation_error("link in scene '" + rec.scene_id + "': stored distance " +
                               format_real(rec.distance_3d_m) + " != recomputed " +
                               format_real(d));
}

inline nlohmann::ordered_json link_to_json(const LinkRecord& rec)
{
    nlohmann::ordered_json j;
    j["scene_id"] = rec.scene_id;
    j["tx"] = {rec.tx.x, rec.tx.y, rec.tx.z};
    j["rx"] = {rec.rx.x, rec.rx.y, rec.rx.z};
    j["distance_3d_m"] = rec.distance_3d_m;
    j["pathloss_db"] = rec.pathloss_db;
    j["los"] = rec.los;
    return j;
}

inline LinkRecord link_from_json(const nlohmann::json& j)
{
    LinkRecord rec;
    rec.scene_id = j.at("scene_id").get<std::string>();
    const auto& tx = j.at("tx");
    const auto& rx = j.at("rx");
    if (!tx.is_array() || tx.size() != 3 || !rx.is_array() || rx.size() != 3)
        throw validation_error("tx/rx must be 3-element arrays");
    rec.tx = {tx[0].get<double>(), tx[1].get<double>(), tx[2].get<double>()};
    rec.rx = {rx[0].get<double>(), rx[1].get<double>(), rx[2].get<double>()};
    rec.distance_3d_m = j.at("distance_3d_m").get<double>();
    rec.pathloss_db = j.at("pathloss_db").get<double>();
    rec.los = j.at("los").get<bool>();
    if (rec.tx.z < 0.0 || rec.rx.z < 0.0)
        throw validation_error("negative endpoint height");
    return rec;
}

inline std::string dataset_to_string(const std::vector<LinkRecord>& records)
{
    std::string out;
    for (const LinkRecord& rec : records) {
        out += link_to_json(rec).dump();
        out += '\n';
    }
    return out;
}

inline void save_dataset(const std::vector<LinkRecord>& records, const std::string& path)
{
    write_text_file(path, dataset_to_string(records));
}

inline std::vector<LinkRecord> load_dataset(const std::string& path)
{
    const std::string text = read_text_file(path);
    std::vector<LinkRecord> records;
    std::size_t start = 0;
    int line_no = 0;
    while (start < text.size()) {
        ++line_no;
        std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos)
            nl = text.size();
        const std::string_view line = std::string_view(text).substr(start, nl - start);
        start = nl + 1;
        if (line.empty())
            continue;
        try {
            records.push_back(link_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw validation_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const validation_error& e) {
            throw validation_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

} // namespace plpred

#endif
