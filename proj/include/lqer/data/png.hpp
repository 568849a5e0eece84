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
 * 8-bit PNG decode/encode through libpng's simplified API.
 */
#pragma once

#include <png.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lqer/data/image.hpp"
#include "lqer/errors.hpp"

namespace lqer::data {

/// Decodes a PNG to [C,H,W] in [0,1]. Grey and grey+alpha give C = 1,
/// anything with colour gives C = 3; alpha is dropped.
[[nodiscard]] inline Image read_png(const std::filesystem::path &path) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_file(&img, path.string().c_str()) == 0) {
        const std::string msg = img.message;
        png_image_free(&img);
        throw IoError("cannot decode " + path.string() + ": " + msg);
    }
    const bool colour = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
    img.format = colour ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const std::size_t c = colour ? 3 : 1;
    const std::size_t h = img.height, w = img.width;
    std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
    if (png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr) == 0) {
        const std::string msg = img.message;
        png_image_free(&img);
        throw IoError("cannot decode " + path.string() + ": " + msg);
    }
    Image out = make_image(c, h, w);
    auto o = out.data();
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                o[(ch * h + y) * w + x] =
                    static_cast<double>(buf[(y * w + x) * c + ch]) / 255.0;
            }
        }
    }
    return out;
}

/// Writes a 1- or 3-channel image in [0,1] as 8-bit PNG (rounded, clamped).
inline void write_png(const std::filesystem::path &path, const Image &image) {
    require_image(image);
    const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
    if (c != 1 && c != 3) {
        throw StructuralError("write_png: only 1 or 3 channels supported");
    }
    std::vector<png_byte> buf(c * h * w);
    auto d = image.data();
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double v = std::clamp(d[(ch * h + y) * w + x], 0.0, 1.0);
                buf[(y * w + x) * c + ch] =
                    static_cast<png_byte>(std::lround(v * 255.0));
            }
        }
    }
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(w);
    img.height = static_cast<png_uint_32>(h);
    img.format = c == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (png_image_write_to_file(&img, path.string().c_str(), 0, buf.data(), 0,
                                nullptr) == 0) {
        const std::string msg = img.message;
        png_image_free(&img);
        throw IoError("cannot write " + path.string() + ": " + msg);
    }
}

} // namespace lqer::data
