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
 * Patch extraction around annotated stenosis centres.
 *
 * Positives are windows centred on each annotation. Negatives are windows
 * whose centres fall in the annulus [window, 2*window] around an annotation
 * and whose boxes overlap no positive box. A window whose in-bounds part
 * covers less than `min_inbounds_fraction` of its area is dropped; survivors
 * are cut to their in-bounds part and resampled bilinearly to output_size.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lqer/data/sample.hpp"
#include "lqer/log.hpp"
#include "lqer/rng.hpp"

namespace lqer::data {

struct Point {
    double x{0};
    double y{0};
};

struct PatchOptions {
    std::size_t window{64};       ///< side of the source window, pixels
    std::size_t output_size{64};  ///< side after resampling
    std::size_t negatives_per_annotation{2};
    double min_inbounds_fraction{0.9};
    std::size_t max_attempts{64}; ///< annulus draws per requested negative
};

/// Axis-aligned box [x0, x1) x [y0, y1).
struct Box {
    double x0, y0, x1, y1;

    [[nodiscard]] static Box centred(Point c, double side) {
        return {c.x - side / 2, c.y - side / 2, c.x + side / 2, c.y + side / 2};
    }
    [[nodiscard]] double area() const { return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0); }
    [[nodiscard]] Box intersect(const Box &o) const {
        return {std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
    }
    [[nodiscard]] bool overlaps(const Box &o) const {
        return intersect(o).area() > 0.0;
    }
};

namespace detail {
inline std::optional<Image> cut_window(const Image &img, const Box &box,
                                       const PatchOptions &opt) {
    const Box frame{0, 0, static_cast<double>(img.dim(2)), static_cast<double>(img.dim(1))};
    const Box inside = box.intersect(frame);
    if (inside.area() < opt.min_inbounds_fraction * box.area() || inside.area() <= 0) {
        return std::nullopt;
    }
    return resample_window(img, inside.y0, inside.x0, inside.y1 - inside.y0,
                           inside.x1 - inside.x0, opt.output_size, opt.output_size);
}
} // namespace detail

/// Extracted patches plus the source-image box each one was cut from.
struct ExtractedPatches {
    Dataset samples;
    std::vector<Box> boxes;
};

[[nodiscard]] inline ExtractedPatches extract_patches(const Image &image,
                                             const std::vector<Point> &annotations,
                                             const std::string &patient_id,
                                             Rng &rng,
                                             const PatchOptions &opt = {}) {
    require_image(image);
    if (opt.window == 0 || opt.output_size == 0) {
        throw ConfigError("patch window and output size must be >= 1");
    }
    const double w = static_cast<double>(image.dim(2));
    const double h = static_cast<double>(image.dim(1));
    for (const auto &a : annotations) {
        if (a.x < 0 || a.y < 0 || a.x >= w || a.y >= h) {
            throw StructuralError("annotation outside image bounds");
        }
    }
    ExtractedPatches out;
    if (annotations.empty()) {
        log::warn("extract_patches: no annotations for patient " + patient_id +
                  "; no positive patches produced");
        return out;
    }
    const double side = static_cast<double>(opt.window);
    std::vector<Box> positives;
    positives.reserve(annotations.size());
    for (const auto &a : annotations) {
        positives.push_back(Box::centred(a, side));
    }
    for (const auto &box : positives) {
        if (auto patch = detail::cut_window(image, box, opt)) {
            out.samples.push_back({std::move(*patch), 1, patient_id, Source::Patch});
            out.boxes.push_back(box);
        }
    }
    for (const auto &a : annotations) {
        std::size_t made = 0;
        for (std::size_t t = 0; t < opt.max_attempts * opt.negatives_per_annotation &&
                                made < opt.negatives_per_annotation;
             ++t) {
            const double r = uniform(rng, side, 2 * side);
            const double phi = uniform(rng, 0.0, 2 * std::numbers::pi);
            const Box cand = Box::centred({a.x + r * std::cos(phi), a.y + r * std::sin(phi)}, side);
            const bool clash = std::any_of(positives.begin(), positives.end(),
                                           [&](const Box &p) { return p.overlaps(cand); });
            if (clash) {
                continue;
            }
            if (auto patch = detail::cut_window(image, cand, opt)) {
                out.samples.push_back({std::move(*patch), 0, patient_id, Source::Patch});
                out.boxes.push_back(cand);
                ++made;
            }
        }
    }
    return out;
}

} // namespace lqer::data
