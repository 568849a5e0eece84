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
 * Directory-layout datasets and CSV manifests.
 *
 *   root/positive/patient_<id>/<name>.png
 *   root/negative/patient_<id>/<name>.png
 *
 * Manifest columns: path,label,patient_id,split (path relative to root).
 */
#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lqer/data/png.hpp"
#include "lqer/data/sample.hpp"
#include "lqer/log.hpp"

namespace lqer::data {

namespace fs = std::filesystem;

struct LoadOptions {
    std::size_t channels{1};
    std::optional<std::size_t> resize_to{}; ///< square side, if set
    /// When false, a missing or empty class directory is a warning instead
    /// of an error (evaluation on single-class data). At least one image is
    /// always required.
    bool require_both_classes{true};
};

struct LoadReport {
    Dataset samples;
    std::vector<fs::path> paths; ///< source file per sample
    std::size_t warnings{0};
};

[[nodiscard]] inline std::string patient_from_dirname(const std::string &name) {
    const std::string prefix = "patient_";
    return name.rfind(prefix, 0) == 0 ? name.substr(prefix.size()) : name;
}

namespace detail {
inline std::vector<fs::path> sorted_entries(const fs::path &dir, bool dirs) {
    std::vector<fs::path> out;
    for (const auto &e : fs::directory_iterator(dir)) {
        if (dirs ? e.is_directory() : e.is_regular_file()) {
            out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::string lower_ext(const fs::path &p) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e;
}
} // namespace detail

[[nodiscard]] inline LoadReport load_directory(const fs::path &root,
                                               const LoadOptions &opt = {}) {
    if (!fs::is_directory(root)) {
        throw IoError("dataset root " + root.string() + " is not a directory");
    }
    LoadReport report;
    for (const auto &[cls, label] : {std::pair{"negative", 0}, std::pair{"positive", 1}}) {
        const fs::path cdir = root / cls;
        if (!fs::is_directory(cdir)) {
            if (opt.require_both_classes) {
                throw DataError("missing class directory " + cdir.string());
            }
            log::warn("missing class directory " + cdir.string());
            continue;
        }
        std::size_t loaded = 0;
        for (const auto &pdir : detail::sorted_entries(cdir, true)) {
            const std::string pid = patient_from_dirname(pdir.filename().string());
            for (const auto &file : detail::sorted_entries(pdir, false)) {
                if (detail::lower_ext(file) != ".png") {
                    continue;
                }
                try {
                    Image img = convert_channels(read_png(file), opt.channels);
                    if (opt.resize_to) {
                        img = resize(img, *opt.resize_to, *opt.resize_to);
                    }
                    report.samples.push_back({std::move(img), label, pid, Source::Directory});
                    report.paths.push_back(file);
                    ++loaded;
                } catch (const Error &e) {
                    ++report.warnings;
                    log::warn(std::string("skipping unreadable image: ") + e.what());
                }
            }
        }
        if (loaded == 0) {
            if (opt.require_both_classes) {
                throw DataError("class directory " + cdir.string() + " has no readable images");
            }
            log::warn("class directory " + cdir.string() + " has no readable images");
        }
    }
    if (report.samples.empty()) {
        throw DataError("no readable images under " + root.string());
    }
    const auto counts = count_classes(report.samples);
    log::info("loaded " + std::to_string(report.samples.size()) + " images from " +
              root.string() + " (" + std::to_string(counts.positive) + " positive, " +
              std::to_string(counts.negative) + " negative, " +
              std::to_string(report.warnings) + " skipped)");
    return report;
}

struct ManifestRow {
    std::string path;
    int label{0};
    std::string patient_id;
    std::string split;
};

/// Writes samples in directory layout; returns one manifest row per sample
/// (split column left empty).
[[nodiscard]] inline std::vector<ManifestRow>
export_directory(const Dataset &samples, const fs::path &root) {
    std::vector<ManifestRow> rows;
    rows.reserve(samples.size());
    std::error_code ec;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto &s = samples[i];
        const fs::path rel = fs::path(s.label == 1 ? "positive" : "negative") /
                             ("patient_" + s.patient_id);
        fs::create_directories(root / rel, ec);
        if (ec) {
            throw IoError("cannot create " + (root / rel).string() + ": " + ec.message());
        }
        std::ostringstream name;
        name << std::setw(6) << std::setfill('0') << i << ".png";
        write_png(root / rel / name.str(), s.image);
        rows.push_back({(rel / name.str()).generic_string(), s.label, s.patient_id, ""});
    }
    return rows;
}

inline void write_manifest(const fs::path &path, const std::vector<ManifestRow> &rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write manifest " + path.string());
    }
    out << "path,label,patient_id,split\n";
    for (const auto &r : rows) {
        out << r.path << ',' << r.label << ',' << r.patient_id << ',' << r.split << '\n';
    }
}

} // namespace lqer::data
