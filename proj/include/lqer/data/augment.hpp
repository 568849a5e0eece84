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
 * Random augmentation. Steps run in a fixed order:
 * rotate -> flip -> translate -> scale -> brightness -> colour jitter -> crop,
 * then the result is clamped to [0,1]. A step whose range is zero is
 * skipped, so the all-zero policy is the identity.
 */
#pragma once

#include <cmath>
#include <numbers>

#include "lqer/data/sample.hpp"
#include "lqer/errors.hpp"
#include "lqer/rng.hpp"

namespace lqer::data {

struct AugmentPolicy {
    double rotate_max_deg{0};    ///< angle ~ U[-r, r]
    bool flip_h{false};          ///< mirror with probability 1/2
    double translate_max_frac{0};///< shift ~ U[-t, t] * side, per axis
    double scale_range{0};       ///< zoom ~ U[1-s, 1+s]
    double brightness_delta{0};  ///< additive ~ U[-b, b]
    double color_jitter{0};      ///< contrast about the mean ~ U[1-j, 1+j]
    double crop_frac{0};         ///< cut away up to this fraction of each side, then resize back
    bool positives_only{false};

    void validate() const {
        if (rotate_max_deg < 0 || translate_max_frac < 0 || scale_range < 0 ||
            brightness_delta < 0 || color_jitter < 0 || crop_frac < 0) {
            throw ConfigError("augment: ranges must be non-negative");
        }
        if (crop_frac >= 1.0) {
            throw ConfigError("augment: crop_frac must be < 1 (crop would be empty)");
        }
        if (scale_range >= 1.0) {
            throw ConfigError("augment: scale_range must be < 1");
        }
    }

    [[nodiscard]] bool is_identity() const noexcept {
        return rotate_max_deg == 0 && !flip_h && translate_max_frac == 0 &&
               scale_range == 0 && brightness_delta == 0 && color_jitter == 0 &&
               crop_frac == 0;
    }
};

[[nodiscard]] inline Sample augment(const Sample &in, const AugmentPolicy &p,
                                    Rng &rng) {
    p.validate();
    if ((p.positives_only && in.label == 0) || p.is_identity()) {
        return in;
    }
    require_image(in.image);
    Sample out = in;
    Image img = in.image.clone();
    const double h = static_cast<double>(img.dim(1));
    const double w = static_cast<double>(img.dim(2));

    if (p.rotate_max_deg > 0) {
        const double deg = uniform(rng, -p.rotate_max_deg, p.rotate_max_deg);
        img = warp_affine(img, deg * std::numbers::pi / 180.0, 0, 0, 1.0);
    }
    if (p.flip_h && uniform01(rng) < 0.5) {
        img = flip_horizontal(img);
    }
    if (p.translate_max_frac > 0) {
        const double ty = uniform(rng, -p.translate_max_frac, p.translate_max_frac) * h;
        const double tx = uniform(rng, -p.translate_max_frac, p.translate_max_frac) * w;
        img = warp_affine(img, 0, ty, tx, 1.0);
    }
    if (p.scale_range > 0) {
        img = warp_affine(img, 0, 0, 0, uniform(rng, 1 - p.scale_range, 1 + p.scale_range));
    }
    if (p.brightness_delta > 0) {
        const double b = uniform(rng, -p.brightness_delta, p.brightness_delta);
        for (auto &v : img.data()) {
            v += b;
        }
    }
    if (p.color_jitter > 0) {
        const double k = uniform(rng, 1 - p.color_jitter, 1 + p.color_jitter);
        const double m = mean_value(img);
        for (auto &v : img.data()) {
            v = m + k * (v - m);
        }
    }
    if (p.crop_frac > 0) {
        const double keep = 1.0 - uniform(rng, 0.0, p.crop_frac);
        const double ch = keep * h, cw = keep * w;
        const double y0 = uniform(rng, 0.0, h - ch);
        const double x0 = uniform(rng, 0.0, w - cw);
        img = resample_window(img, y0, x0, ch, cw, img.dim(1), img.dim(2));
    }
    clamp_unit(img);
    out.image = std::move(img);
    return out;
}

/**
 * Offline class-balancing expansion: appends `multiplier` augmented copies
 * of every positive sample. Copy k of sample i draws from its own counter
 * seed, so the result does not depend on iteration order.
 */
[[nodiscard]] inline Dataset expand_positives(const Dataset &samples, AugmentPolicy policy,
                                              std::size_t multiplier, std::uint64_t seed) {
    policy.positives_only = true;
    policy.validate();
    Dataset out = samples;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].label != 1) {
            continue;
        }
        for (std::size_t k = 0; k < multiplier; ++k) {
            Rng rng = make_rng(counter_seed(seed, i, k));
            out.push_back(augment(samples[i], policy, rng));
        }
    }
    return out;
}

} // namespace lqer::data
