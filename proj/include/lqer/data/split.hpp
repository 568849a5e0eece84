// Copyright 2026 The LQER Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lqer/data/sample.hpp"
#include "lqer/errors.hpp"
#include "lqer/rng.hpp"

namespace lqer::data {

struct SplitSpec {
    double train_fraction{0.8};
    std::uint64_t seed{0};
    bool group_by_patient{true};

    void validate() const {
        if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
            throw ConfigError("split: train_fraction must lie in (0, 1)");
        }
    }
};

/// Index partition; samples keep their original relative order.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

namespace detail {
inline std::size_t train_count(std::size_t units, double fraction) {
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(units)));
    return std::clamp<std::size_t>(k, 1, units - 1);
}

template <typename T> void shuffle(std::vector<T> &v, Rng &rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[uniform_index(rng, i)]);
    }
}
} // namespace detail

/**
 * Deterministic train/test partition. With grouping, whole patients are
 * assigned (patients sorted by id, then shuffled by the seed), so the
 * achieved train fraction is within one patient of the target.
 */
[[nodiscard]] inline SplitIndices split_indices(const Dataset &samples,
                                                const SplitSpec &spec) {
    spec.validate();
    Rng rng = make_rng(spec.seed, "split");
    SplitIndices out;
    if (spec.group_by_patient) {
        std::set<std::string> ids;
        for (const auto &s : samples) {
            if (s.patient_id.empty()) {
                throw DataError("split: sample without patient_id");
            }
            ids.insert(s.patient_id);
        }
        if (ids.size() < 2) {
            throw ConfigError("split: grouped split needs at least 2 patients, got " +
                              std::to_string(ids.size()));
        }
        std::vector<std::string> order(ids.begin(), ids.end());
        detail::shuffle(order, rng);
        const std::set<std::string> train_ids(
            order.begin(),
            order.begin() + static_cast<std::ptrdiff_t>(detail::train_count(order.size(), spec.train_fraction)));
        for (std::size_t i = 0; i < samples.size(); ++i) {
            (train_ids.contains(samples[i].patient_id) ? out.train : out.test).push_back(i);
        }
        return out;
    }
    if (samples.size() < 2) {
        throw ConfigError("split: need at least 2 samples");
    }
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    detail::shuffle(order, rng);
    const std::size_t k = detail::train_count(order.size(), spec.train_fraction);
    std::vector<bool> is_train(samples.size(), false);
    for (std::size_t i = 0; i < k; ++i) {
        is_train[order[i]] = true;
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        (is_train[i] ? out.train : out.test).push_back(i);
    }
    return out;
}

[[nodiscard]] inline Dataset select(const Dataset &samples,
                                    const std::vector<std::size_t> &idx) {
    Dataset out;
    out.reserve(idx.size());
    for (auto i : idx) {
        out.push_back(samples.at(i));
    }
    return out;
}

[[nodiscard]] inline std::pair<Dataset, Dataset> split(const Dataset &samples,
                                                       const SplitSpec &spec) {
    const auto idx = split_indices(samples, spec);
    return {select(samples, idx.train), select(samples, idx.test)};
}

} // namespace lqer::data
