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
/**
 * @file
 * Synthetic stenosis patches.
 *
 * Every patch shows one dark curvilinear band (a vessel) crossing a noisy
 * bright background from left to right. Positive patches add a localized
 * Gaussian constriction that narrows the band by 40-70%; everything else is
 * drawn from the same distributions for both classes.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "lqer/data/sample.hpp"
#include "lqer/errors.hpp"
#include "lqer/rng.hpp"

namespace lqer::data {

/// Samples are grouped into pseudo-patients of this many consecutive items.
inline constexpr std::size_t synthetic_patient_block = 10;

struct SyntheticSample {
    Sample sample;
    Image clean;          ///< noise-free render of the band (1 = background)
    double narrowing{0};  ///< fractional width reduction (0 for negatives)
};

[[nodiscard]] inline std::string synthetic_patient_id(std::size_t index) {
    std::ostringstream os;
    os << "synth" << std::setw(4) << std::setfill('0')
       << index / synthetic_patient_block;
    return os.str();
}

/// Item `index` of the dataset for `seed`; label = index % 2. Pure function
/// of its arguments.
[[nodiscard]] inline SyntheticSample synthesize_sample(std::size_t index,
                                                       std::size_t size,
                                                       std::uint64_t seed) {
    if (size < 8) {
        throw ConfigError("synthetic patch size must be >= 8");
    }
    constexpr double two_pi = 2 * std::numbers::pi;
    Rng rng = make_rng(counter_seed(substream_seed(seed, "synthetic"), index));
    const int label = static_cast<int>(index % 2);
    const double s = static_cast<double>(size);

    // Geometry shared by both classes.
    const double amp = uniform(rng, 0.0, s / 16);
    const double period = uniform(rng, s, 2 * s);
    const double phase = uniform(rng, 0.0, two_pi);
    const double offset = uniform(rng, -s / 10, s / 10);
    const double width0 = uniform(rng, s / 10, s / 6);
    const double contrast = uniform(rng, 0.3, 0.5);
    const double base = uniform(rng, 0.65, 0.85);
    const double grad_x = uniform(rng, -0.08, 0.08);
    const double grad_y = uniform(rng, -0.08, 0.08);
    const double noise_sd = uniform(rng, 0.02, 0.05);
    // Constriction parameters are drawn for both classes so the random
    // stream stays aligned; negatives ignore them.
    const double narrowing_draw = uniform(rng, 0.4, 0.7);
    const double centre_x = uniform(rng, 0.3 * s, 0.7 * s);
    const double sigma = uniform(rng, s / 20, s / 12);
    const double narrowing = label == 1 ? narrowing_draw : 0.0;

    Image clean = make_image(1, size, size, 1.0);
    Image img = make_image(1, size, size);
    auto cd = clean.data();
    auto id = img.data();
    for (std::size_t x = 0; x < size; ++x) {
        const double fx = static_cast<double>(x) + 0.5;
        const double yc = s / 2 + offset + amp * std::sin(two_pi * fx / period + phase);
        const double slope = amp * two_pi / period * std::cos(two_pi * fx / period + phase);
        const double cos_t = 1.0 / std::sqrt(1.0 + slope * slope);
        const double g = std::exp(-(fx - centre_x) * (fx - centre_x) / (2 * sigma * sigma));
        const double half_width = 0.5 * width0 * (1.0 - narrowing * g);
        for (std::size_t y = 0; y < size; ++y) {
            const double fy = static_cast<double>(y) + 0.5;
            const double dist = std::abs(fy - yc) * cos_t;
            // One-pixel linear ramp at the band edge.
            const double alpha = std::clamp(half_width - dist + 0.5, 0.0, 1.0);
            cd[y * size + x] = 1.0 - alpha;
            const double bg = base + grad_x * (fx / s - 0.5) + grad_y * (fy / s - 0.5);
            id[y * size + x] = bg - contrast * alpha;
        }
    }
    for (auto &v : id) {
        v = std::clamp(v + noise_sd * normal01(rng), 0.0, 1.0);
    }

    SyntheticSample out;
    out.sample = Sample{img, label, synthetic_patient_id(index), Source::Synthetic};
    out.clean = std::move(clean);
    out.narrowing = narrowing;
    return out;
}

/// 2 * n_per_class patches, alternating negative/positive, patient ids in
/// blocks of ten consecutive samples.
[[nodiscard]] inline Dataset synthesize_dataset(std::size_t n_per_class,
                                                std::size_t patch_size,
                                                std::uint64_t seed) {
    if (n_per_class < 1) {
        throw ConfigError("synthetic n_per_class must be >= 1");
    }
    Dataset ds;
    ds.reserve(2 * n_per_class);
    for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
        ds.push_back(synthesize_sample(i, patch_size, seed).sample);
    }
    return ds;
}

} // namespace lqer::data
