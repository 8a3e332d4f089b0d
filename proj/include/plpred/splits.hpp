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

#ifndef PLPRED_SPLITS_HPP
#define PLPRED_SPLITS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "plpred/dataset.hpp"
#include "plpred/rng.hpp"

namespace plpred {

// Scenes are assigned to four areas; the last two hold out entire maps so
// the novel splits never share geometry with training. Inside the first two
// (known) areas, links are split at the train/test/val fractions.
struct SplitPlan {
    double frac_train = 0.16;
    double frac_test = 0.80;
    double frac_val = 0.04;
    int n_areas = 4;
    int novel_val_area = 2;
    int novel_test_area = 3;

    void validate() const
    {
        if (frac_train < 0 || frac_test < 0 || frac_val < 0)
            throw validation_error("split: fractions must be non-negative");
        if (std::abs(frac_train + frac_test + frac_val - 1.0) > 1e-9)
            throw validation_error("split: fractions must sum to 1");
        if (n_areas != 4 || novel_val_area != 2 || novel_test_area != 3)
            throw validation_error("split: plan must use 4 areas with areas 2 and 3 held out");
    }
};

struct SplitSet {
    std::vector<LinkRecord> train;
    std::vector<LinkRecord> val_known;
    std::vector<LinkRecord> test_known;
    std::vector<LinkRecord> val_novel;
    std::vector<LinkRecord> test_novel;

    const std::vector<LinkRecord>& by_name(SplitName n) const
    {
        switch (n) {
        case SplitName::train: return train;
        case SplitName::val_known: return val_known;
        case SplitName::test_known: return test_known;
        case SplitName::val_novel: return val_novel;
        case SplitName::test_novel: return test_novel;
        }
        throw validation_error("split: unknown split name");
    }

    std::vector<LinkRecord>& by_name(SplitName n)
    {
        return const_cast<std::vector<LinkRecord>&>(std::as_const(*this).by_name(n));
    }
};

// Deterministic scene -> area map: unique scene ids sorted lexicographically,
// then chunked into n_areas contiguous runs.
inline std::map<std::string, int> assign_areas(const std::vector<LinkRecord>& records,
                                               const SplitPlan& plan)
{
    plan.validate();
    std::set<std::string> ids;
    for (const auto& r : records)
        ids.insert(r.scene_id);
    const long n = static_cast<long>(ids.size());
    if (n < plan.n_areas)
        throw validation_error("split: need at least " + std::to_string(plan.n_areas) +
                               " scenes, got " + std::to_string(n));
    std::map<std::string, int> area;
    long idx = 0;
    for (const auto& id : ids) {
        area[id] = static_cast<int>(idx * plan.n_areas / n);
        ++idx;
    }
    return area;
}

inline SplitSet make_splits(const std::vector<LinkRecord>& records, const SplitPlan& plan,
                            std::uint64_t seed)
{
    const auto area = assign_areas(records, plan);

    SplitSet out;
    std::vector<std::size_t> known_idx;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const int a = area.at(records[i].scene_id);
        if (a == plan.novel_val_area)
            out.val_novel.push_back(records[i]);
        else if (a == plan.novel_test_area)
            out.test_novel.push_back(records[i]);
        else
            known_idx.push_back(i);
    }
    if (known_idx.empty())
        throw validation_error("split: known areas contain no links");

    Rng rng(seed);
    rng.shuffle(known_idx);
    const long n = static_cast<long>(known_idx.size());
    const long n_train = std::llround(plan.frac_train * static_cast<double>(n));
    const long n_val = std::llround(plan.frac_val * static_cast<double>(n));
    if (n_train + n_val > n)
        throw validation_error("split: fractions leave no test links");
    for (long i = 0; i < n; ++i) {
        const LinkRecord& r = records[known_idx[static_cast<std::size_t>(i)]];
        if (i < n_train)
            out.train.push_back(r);
        else if (i < n_train + n_val)
            out.val_known.push_back(r);
        else
            out.test_known.push_back(r);
    }
    return out;
}

inline const std::array<SplitName, 5>& all_split_names()
{
    static const std::array<SplitName, 5> names = {SplitName::train, SplitName::val_known,
                                                   SplitName::test_known, SplitName::val_novel,
                                                   SplitName::test_novel};
    return names;
}

} // namespace plpred

#endif
