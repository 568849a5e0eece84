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

#include <cstddef>
#include <string>
#include <vector>

#include "lqer/data/image.hpp"
#include "lqer/errors.hpp"

namespace lqer::data {

enum class Source { Synthetic, Directory, Patch };

/// One labelled image. Pixels are in [0, 1] before standardization.
struct Sample {
    Image image;
    int label{0}; ///< 0 negative, 1 positive (stenosis)
    std::string patient_id;
    Source source{Source::Synthetic};
};

using Dataset = std::vector<Sample>;

inline void require_binary(int label) {
    if (label != 0 && label != 1) {
        throw DataError("label must be 0 or 1, got " + std::to_string(label));
    }
}

struct ClassCounts {
    std::size_t negative{0};
    std::size_t positive{0};
};

[[nodiscard]] inline ClassCounts count_classes(const Dataset &ds) {
    ClassCounts c;
    for (const auto &s : ds) {
        (s.label == 1 ? c.positive : c.negative) += 1;
    }
    return c;
}

} // namespace lqer::data
