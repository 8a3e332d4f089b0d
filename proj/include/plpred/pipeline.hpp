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

#ifndef PLPRED_PIPELINE_HPP
#define PLPRED_PIPELINE_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plpred/dataset.hpp"
#include "plpred/oracle.hpp"
#include "plpred/scene.hpp"
#include "plpred/splits.hpp"

namespace plpred {

// ---- scene directories -----------------------------------------------------

inline std::vector<std::filesystem::path> list_scene_files(const std::string& dir)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw io_error("scene directory '" + dir + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".plscene")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw io_error("scene directory '" + dir + "' contains no .plscene files");
    return files;
}

inline std::vector<Scene> load_scene_dir(const std::string& dir)
{
    std::vector<Scene> scenes;
    for (const auto& path : list_scene_files(dir))
        scenes.push_back(load_scene(path.string()));
    return scenes;
}

inline std::map<std::string, Scene> scenes_by_id(const std::vector<Scene>& scenes)
{
    std::map<std::string, Scene> out;
    for (const Scene& s : scenes) {
        if (!out.emplace(s.id, s).second)
            throw validation_error("duplicate scene id '" + s.id + "'");
    }
    return out;
}

// ---- dataset metadata ------------------------------------------------------

inline nlohmann::ordered_json dataset_sidecar_json(const OracleConfig& cfg, std::uint64_t seed,
                                                   int poles, int ues, double radius_m,
                                                   std::size_t scene_count,
                                                   std::size_t link_count)
{
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["seed"] = seed;
    j["poles_per_scene"] = poles;
    j["ues_per_scene"] = ues;
    j["radius_m"] = radius_m;
    j["oracle"]["carrier_hz"] = cfg.carrier_hz;
    j["oracle"]["tx_height_m"] = cfg.tx_height_m;
    j["oracle"]["rx_height_m"] = cfg.rx_height_m;
    j["oracle"]["reflection_loss_db"] = cfg.reflection_loss_db;
    j["oracle"]["foliage_rate_db_per_m"] = cfg.foliage_rate_db_per_m;
    j["oracle"]["canopy_fraction"] = cfg.canopy_fraction;
    j["oracle"]["max_pathloss_db"] = cfg.max_pathloss_db;
    j["scene_count"] = scene_count;
    j["link_count"] = link_count;
    return j;
}

// ---- split directories -----------------------------------------------------

inline nlohmann::ordered_json split_meta_json(const SplitPlan& plan, std::uint64_t seed,
                                              const SplitSet& splits)
{
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["seed"] = seed;
    j["fractions"] = {plan.frac_train, plan.frac_test, plan.frac_val};
    for (const SplitName name : all_split_names()) {
        const auto& records = splits.by_name(name);
        j["counts"][split_name_str(name)] = records.size();
        std::set<std::string> ids;
        for (const LinkRecord& rec : records)
            ids.insert(rec.scene_id);
        j["scenes"][split_name_str(name)] = ids;
    }
    return j;
}

inline void save_split_dir(const std::string& dir, const SplitSet& splits,
                           const SplitPlan& plan, std::uint64_t seed)
{
    std::filesystem::create_directories(dir);
    for (const SplitName name : all_split_names()) {
        const std::string path = dir + "/" + std::string(split_name_str(name)) + ".jsonl";
        save_dataset(splits.by_name(name), path);
    }
    write_text_file(dir + "/split_meta.json", split_meta_json(plan, seed, splits).dump(2) + "\n");
}

inline SplitSet load_split_dir(const std::string& dir)
{
    if (!std::filesystem::is_directory(dir))
        throw io_error("split directory '" + dir + "' does not exist");
    SplitSet splits;
    for (const SplitName name : all_split_names()) {
        const std::string path = dir + "/" + std::string(split_name_str(name)) + ".jsonl";
        if (!std::filesystem::is_regular_file(path))
            throw io_error("split directory '" + dir + "' is missing " +
                           std::string(split_name_str(name)) + ".jsonl");
        splits.by_name(name) = load_dataset(path);
    }
    return splits;
}

} // namespace plpred

#endif
