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
 * Image helpers on [C,H,W] tensors: bilinear resampling, geometric warps and
 * per-channel standardization.
 *
 * Resampling uses pixel-centre alignment (src = (dst + 0.5) * in/out - 0.5)
 * and clamps coordinates to the border, so same-size resampling is an exact
 * copy and nothing outside the frame is invented.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>

#include "lqer/ad/tensor.hpp"
#include "lqer/errors.hpp"

namespace lqer::data {

using Image = ad::Tensor;

[[nodiscard]] inline Image make_image(std::size_t c, std::size_t h,
                                      std::size_t w, double fill = 0.0) {
    return ad::Tensor::full({c, h, w}, fill);
}

inline void require_image(const Image &img) {
    if (img.rank() != 3 || img.numel() == 0) {
        throw StructuralError("expected a non-empty [C,H,W] image, got " +
                              ad::shape_str(img.shape()));
    }
}

/// Border-clamped bilinear sample of channel c at (y, x) in pixel units.
[[nodiscard]] inline double sample_bilinear(const Image &img, std::size_t c,
                                            double y, double x) {
    const std::size_t h = img.dim(1), w = img.dim(2);
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    const auto y0 = static_cast<std::size_t>(std::floor(y));
    const auto x0 = static_cast<std::size_t>(std::floor(x));
    const std::size_t y1 = std::min(y0 + 1, h - 1);
    const std::size_t x1 = std::min(x0 + 1, w - 1);
    const double fy = y - static_cast<double>(y0);
    const double fx = x - static_cast<double>(x0);
    auto d = img.data();
    const std::size_t base = c * h * w;
    const double top = d[base + y0 * w + x0] * (1 - fx) + d[base + y0 * w + x1] * fx;
    const double bot = d[base + y1 * w + x0] * (1 - fx) + d[base + y1 * w + x1] * fx;
    return top * (1 - fy) + bot * fy;
}

/// Bilinear resample of the window [y0, y0+hh) x [x0, x0+ww) (pixel units,
/// may be fractional) to out_h x out_w.
[[nodiscard]] inline Image resample_window(const Image &img, double y0,
                                           double x0, double hh, double ww,
                                           std::size_t out_h,
                                           std::size_t out_w) {
    require_image(img);
    if (out_h == 0 || out_w == 0 || hh <= 0 || ww <= 0) {
        throw ConfigError("resample: empty window or output");
    }
    const std::size_t c = img.dim(0);
    Image out = make_image(c, out_h, out_w);
    auto o = out.data();
    const double sy = hh / static_cast<double>(out_h);
    const double sx = ww / static_cast<double>(out_w);
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < out_h; ++y) {
            const double src_y = y0 + (static_cast<double>(y) + 0.5) * sy - 0.5;
            for (std::size_t x = 0; x < out_w; ++x) {
                const double src_x = x0 + (static_cast<double>(x) + 0.5) * sx - 0.5;
                o[(ch * out_h + y) * out_w + x] = sample_bilinear(img, ch, src_y, src_x);
            }
        }
    }
    return out;
}

[[nodiscard]] inline Image resize(const Image &img, std::size_t out_h,
                                  std::size_t out_w) {
    require_image(img);
    if (img.dim(1) == out_h && img.dim(2) == out_w) {
        return img.clone();
    }
    return resample_window(img, 0.0, 0.0, static_cast<double>(img.dim(1)),
                           static_cast<double>(img.dim(2)), out_h, out_w);
}

[[nodiscard]] inline Image flip_horizontal(const Image &img) {
    require_image(img);
    const std::size_t c = img.dim(0), h = img.dim(1), w = img.dim(2);
    Image out = make_image(c, h, w);
    auto s = img.data();
    auto o = out.data();
    for (std::size_t r = 0; r < c * h; ++r) {
        for (std::size_t x = 0; x < w; ++x) {
            o[r * w + x] = s[r * w + (w - 1 - x)];
        }
    }
    return out;
}

/**
 * Inverse-mapped warp about the image centre: output pixel p samples the
 * source at R(-angle) (p - centre - shift) / zoom + centre.
 */
[[nodiscard]] inline Image warp_affine(const Image &img, double angle_rad,
                                       double shift_y, double shift_x,
                                       double zoom) {
    require_image(img);
    if (!(zoom > 0.0)) {
        throw ConfigError("warp: zoom must be positive");
    }
    const std::size_t c = img.dim(0), h = img.dim(1), w = img.dim(2);
    const double cy = (static_cast<double>(h) - 1) / 2;
    const double cx = (static_cast<double>(w) - 1) / 2;
    const double ca = std::cos(angle_rad), sa = std::sin(angle_rad);
    Image out = make_image(c, h, w);
    auto o = out.data();
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const double dy = (static_cast<double>(y) - cy - shift_y) / zoom;
            const double dx = (static_cast<double>(x) - cx - shift_x) / zoom;
            const double sy = cy + ca * dy - sa * dx;
            const double sx = cx + sa * dy + ca * dx;
            for (std::size_t ch = 0; ch < c; ++ch) {
                o[(ch * h + y) * w + x] = sample_bilinear(img, ch, sy, sx);
            }
        }
    }
    return out;
}

inline void clamp_unit(Image &img) {
    for (auto &v : img.data()) {
        v = std::clamp(v, 0.0, 1.0);
    }
}

[[nodiscard]] inline double mean_value(const Image &img) {
    double s = 0.0;
    for (double v : img.data()) {
        s += v;
    }
    return s / static_cast<double>(img.numel());
}

/// Zero-mean, unit-variance per channel. Flat channels map to zero.
[[nodiscard]] inline Image standardize(const Image &img) {
    require_image(img);
    const std::size_t c = img.dim(0), hw = img.dim(1) * img.dim(2);
    Image out = img.clone();
    auto o = out.data();
    for (std::size_t ch = 0; ch < c; ++ch) {
        double mean = 0.0;
        for (std::size_t i = 0; i < hw; ++i) {
            mean += o[ch * hw + i];
        }
        mean /= static_cast<double>(hw);
        double var = 0.0;
        for (std::size_t i = 0; i < hw; ++i) {
            const double d = o[ch * hw + i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(hw);
        const double inv = var > 1e-12 ? 1.0 / std::sqrt(var) : 0.0;
        for (std::size_t i = 0; i < hw; ++i) {
            o[ch * hw + i] = (o[ch * hw + i] - mean) * inv;
        }
    }
    return out;
}

/// Converts between 1 and 3 channels: grey is replicated, RGB is reduced
/// with BT.601 luma weights.
[[nodiscard]] inline Image convert_channels(const Image &img,
                                            std::size_t channels) {
    require_image(img);
    const std::size_t c = img.dim(0);
    if (c == channels) {
        return img;
    }
    const std::size_t h = img.dim(1), w = img.dim(2), hw = h * w;
    Image out = make_image(channels, h, w);
    auto s = img.data();
    auto o = out.data();
    if (c == 1 && channels == 3) {
        for (std::size_t ch = 0; ch < 3; ++ch) {
            std::copy(s.begin(), s.end(), o.begin() + static_cast<std::ptrdiff_t>(ch * hw));
        }
    } else if (c == 3 && channels == 1) {
        for (std::size_t i = 0; i < hw; ++i) {
            o[i] = 0.299 * s[i] + 0.587 * s[hw + i] + 0.114 * s[2 * hw + i];
        }
    } else {
        throw ConfigError("cannot convert " + std::to_string(c) + " channels to " +
                          std::to_string(channels));
    }
    return out;
}

} // namespace lqer::data
