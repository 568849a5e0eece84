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
 * Flat binary tensor container.
 *
 * Layout (all integers little-endian):
 *
 *   offset  size  field
 *   0       8     magic "LQERTNS\0"
 *   8       4     format version (u32, currently 1)
 *   12      4     header length H (u32)
 *   16      H     header bytes (UTF-8 JSON, opaque to this layer)
 *   16+H    8     tensor count T (u64)
 *   then T records:
 *           4     name length K (u32)
 *           K     name bytes
 *           4     rank R (u32)
 *           8*R   extents (u64 each)
 *           8*E   payload, IEEE-754 binary64, E = product of extents
 *   end-8   8     FNV-1a 64 checksum of every preceding byte (u64)
 */
#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <utility>
#include <vector>

#include "lqer/ad/tensor.hpp"
#include "lqer/errors.hpp"

namespace lqer::ad {

inline constexpr std::array<char, 8> container_magic{'L', 'Q', 'E', 'R',
                                                     'T', 'N', 'S', '\0'};
inline constexpr std::uint32_t container_version = 1;

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

struct TensorContainer {
    std::string header;
    std::vector<NamedTensor> tensors;

    [[nodiscard]] const Tensor *find(const std::string &name) const {
        for (const auto &t : tensors) {
            if (t.name == name) {
                return &t.tensor;
            }
        }
        return nullptr;
    }
};

namespace detail {
class ByteWriter {
  public:
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    void bytes(const std::string &s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
    void raw(const char *p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
    [[nodiscard]] std::vector<char> &buffer() noexcept { return buf_; }

  private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) {
            buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFU));
        }
    }
    std::vector<char> buf_;
};

class ByteReader {
  public:
    explicit ByteReader(const std::vector<char> &b, std::size_t end)
        : buf_{b}, end_{end} {}
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s(buf_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    [[nodiscard]] std::size_t pos() const noexcept { return pos_; }

  private:
    void need(std::size_t n) const {
        if (n > end_ || pos_ > end_ - n) {
            throw DataError("tensor container truncated");
        }
    }
    std::uint64_t get(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(
                     static_cast<unsigned char>(buf_[pos_ + static_cast<std::size_t>(i)]))
                 << (8 * i);
        }
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    const std::vector<char> &buf_;
    std::size_t end_;
    std::size_t pos_{0};
};

inline std::uint64_t fnv1a(const char *p, std::size_t n) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(p[i]);
        h *= 0x100000001B3ULL;
    }
    return h;
}
} // namespace detail

[[nodiscard]] inline std::vector<char>
encode_container(const TensorContainer &c) {
    detail::ByteWriter w;
    w.raw(container_magic.data(), container_magic.size());
    w.u32(container_version);
    w.u32(static_cast<std::uint32_t>(c.header.size()));
    w.bytes(c.header);
    w.u64(c.tensors.size());
    for (const auto &nt : c.tensors) {
        w.u32(static_cast<std::uint32_t>(nt.name.size()));
        w.bytes(nt.name);
        w.u32(static_cast<std::uint32_t>(nt.tensor.rank()));
        for (std::size_t d : nt.tensor.shape()) {
            w.u64(d);
        }
        for (double v : nt.tensor.data()) {
            w.f64(v);
        }
    }
    auto &buf = w.buffer();
    const std::uint64_t sum = detail::fnv1a(buf.data(), buf.size());
    w.u64(sum);
    return std::move(buf);
}

[[nodiscard]] inline TensorContainer
decode_container(const std::vector<char> &bytes) {
    if (bytes.size() < container_magic.size() + 8 + 8 + 8) {
        throw DataError("tensor container truncated");
    }
    if (std::memcmp(bytes.data(), container_magic.data(),
                    container_magic.size()) != 0) {
        throw DataError("not a tensor container (bad magic)");
    }
    const std::size_t body = bytes.size() - 8;
    {
        detail::ByteReader tail(bytes, bytes.size());
        (void)tail.bytes(body);
        if (tail.u64() != detail::fnv1a(bytes.data(), body)) {
            throw DataError("tensor container checksum mismatch (corrupted file)");
        }
    }
    detail::ByteReader r(bytes, body);
    (void)r.bytes(container_magic.size());
    const std::uint32_t version = r.u32();
    if (version != container_version) {
        throw DataError("unsupported tensor container version " +
                        std::to_string(version));
    }
    TensorContainer c;
    c.header = r.bytes(r.u32());
    const std::uint64_t count = r.u64();
    for (std::uint64_t t = 0; t < count; ++t) {
        NamedTensor nt;
        nt.name = r.bytes(r.u32());
        const std::uint32_t rank = r.u32();
        Shape shape(rank);
        for (auto &d : shape) {
            d = r.u64();
        }
        std::vector<double> values(numel(shape));
        for (auto &v : values) {
            v = r.f64();
        }
        nt.tensor = Tensor::from(std::move(shape), std::move(values));
        c.tensors.push_back(std::move(nt));
    }
    if (r.pos() != body) {
        throw DataError("tensor container has trailing bytes");
    }
    return c;
}

/// Writes through a temporary file and renames, so an existing file at
/// `path` is never left half-written.
inline void save_container(const std::filesystem::path &path,
                           const TensorContainer &c) {
    const auto bytes = encode_container(c);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("cannot move " + tmp.string() + " to " + path.string() +
                      ": " + ec.message());
    }
}

[[nodiscard]] inline TensorContainer
load_container(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    return decode_container(bytes);
}

} // namespace lqer::ad
