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
// Data pipeline: synthetic generator, patches, augmentation, splitting and
// directory ingestion.

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "lqer/data.hpp"
#include "lqer/log.hpp"

using namespace lqer;
using namespace lqer::data;
namespace fs = std::filesystem;
using Catch::Matchers::WithinAbs;

namespace {
bool same_pixels(const Image &a, const Image &b) {
    return a.shape() == b.shape() &&
           std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(double)) == 0;
}

bool in_unit_range(const Image &img) {
    return std::all_of(img.data().begin(), img.data().end(),
                       [](double v) { return v >= 0.0 && v <= 1.0; });
}

/// Band thickness per column of a clean render (dark mass = sum of 1 - v),
/// then min / median. Independent of the generator's parameters.
double width_ratio(const Image &clean) {
    const std::size_t h = clean.dim(1), w = clean.dim(2);
    std::vector<double> widths(w, 0.0);
    for (std::size_t x = 0; x < w; ++x) {
        for (std::size_t y = 0; y < h; ++y) {
            widths[x] += 1.0 - clean.data()[y * w + x];
        }
    }
    std::vector<double> sorted = widths;
    std::sort(sorted.begin(), sorted.end());
    return sorted.front() / sorted[w / 2];
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string &name)
        : path(fs::temp_directory_path() / ("lqer_test_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

Image gradient_image(std::size_t c, std::size_t h, std::size_t w) {
    Image img = make_image(c, h, w);
    for (std::size_t i = 0; i < img.numel(); ++i) {
        img.data()[i] = static_cast<double>((i * 37) % 256) / 255.0;
    }
    return img;
}
} // namespace

TEST_CASE("synthetic generator is deterministic", "[data][synthetic]") {
    const auto a = synthesize_dataset(100, 64, 7);
    const auto b = synthesize_dataset(100, 64, 7);
    REQUIRE(a.size() == 200);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(same_pixels(a[i].image, b[i].image));
        CHECK(a[i].label == b[i].label);
        CHECK(a[i].patient_id == b[i].patient_id);
    }
    const auto c = synthesize_dataset(100, 64, 8);
    CHECK_FALSE(same_pixels(a[0].image, c[0].image));
    CHECK_THROWS_AS(synthesize_dataset(0, 64, 7), ConfigError);
}

TEST_CASE("synthetic samples: labels, ids, range", "[data][synthetic]") {
    const auto ds = synthesize_dataset(25, 32, 3);
    const auto counts = count_classes(ds);
    CHECK(counts.positive == 25);
    CHECK(counts.negative == 25);
    std::map<std::string, std::size_t> per_patient;
    for (const auto &s : ds) {
        CHECK(s.image.shape() == ad::Shape{1, 32, 32});
        CHECK(in_unit_range(s.image));
        ++per_patient[s.patient_id];
    }
    CHECK(per_patient.size() == 5);
    for (const auto &[id, n] : per_patient) {
        CHECK(n == synthetic_patient_block);
    }
    CHECK(synthetic_patient_id(0) == "synth0000");
    CHECK(synthetic_patient_id(19) == "synth0001");
}

TEST_CASE("class signal is structural, not global brightness", "[data][synthetic]") {
    const auto ds = synthesize_dataset(500, 64, 11);
    double pos = 0, neg = 0;
    for (const auto &s : ds) {
        (s.label == 1 ? pos : neg) += mean_value(s.image);
    }
    const double diff = std::abs(pos - neg) / 500.0;
    INFO("mean brightness difference " << diff);
    CHECK(diff < 0.02);
}

TEST_CASE("width-profile oracle separates the classes perfectly", "[data][synthetic]") {
    std::size_t correct = 0;
    const std::size_t n = 400;
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = synthesize_sample(i, 64, 21);
        const int predicted = width_ratio(s.clean) < 0.7 ? 1 : 0;
        correct += predicted == s.sample.label ? 1 : 0;
        if (s.sample.label == 1) {
            CHECK(s.narrowing >= 0.4);
            CHECK(s.narrowing <= 0.7);
        } else {
            CHECK(s.narrowing == 0.0);
        }
    }
    CHECK(correct == n);
}

TEST_CASE("patches around a centred annotation", "[data][patches]") {
    const Image img = gradient_image(1, 400, 400);
    Rng rng = make_rng(1, "patches");
    const auto out = extract_patches(img, {{200, 200}}, "p1", rng);
    REQUIRE(out.samples.size() == 1 + PatchOptions{}.negatives_per_annotation);
    CHECK(out.samples[0].label == 1);
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        CHECK(out.samples[i].image.shape() == ad::Shape{1, 64, 64});
        CHECK(out.samples[i].patient_id == "p1");
        CHECK(out.samples[i].label == (i == 0 ? 1 : 0));
    }
    // Negatives come from the annulus [64, 128] around the centre.
    for (std::size_t i = 1; i < out.boxes.size(); ++i) {
        const double cx = (out.boxes[i].x0 + out.boxes[i].x1) / 2 - 200;
        const double cy = (out.boxes[i].y0 + out.boxes[i].y1) / 2 - 200;
        const double r = std::hypot(cx, cy);
        CHECK(r >= 64 - 1e-9);
        CHECK(r <= 128 + 1e-9);
    }
}

TEST_CASE("patches without room are dropped", "[data][patches]") {
    const Image img = gradient_image(1, 400, 400);
    Rng rng = make_rng(2, "patches");
    const auto out = extract_patches(img, {{0, 0}}, "p", rng);
    for (const auto &s : out.samples) {
        CHECK(s.label == 0);
    }
    CHECK(std::none_of(out.samples.begin(), out.samples.end(),
                       [](const Sample &s) { return s.label == 1; }));
}

TEST_CASE("negatives never overlap a positive box", "[data][patches][oracle]") {
    const Image img = gradient_image(1, 600, 600);
    const std::vector<Point> ann{{150, 150}, {420, 380}};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng = make_rng(seed, "overlap");
        PatchOptions opt;
        opt.negatives_per_annotation = 4;
        const auto out = extract_patches(img, ann, "p", rng, opt);
        std::size_t positives = 0;
        for (std::size_t i = 0; i < out.samples.size(); ++i) {
            if (out.samples[i].label == 1) {
                ++positives;
                continue;
            }
            const auto &b = out.boxes[i];
            for (const auto &a : ann) {
                // Independent check: two equal squares of side 64 overlap
                // iff both centre offsets are below 64.
                const double dx = std::abs((b.x0 + b.x1) / 2 - a.x);
                const double dy = std::abs((b.y0 + b.y1) / 2 - a.y);
                CHECK_FALSE((dx < 64 && dy < 64));
            }
        }
        CHECK(positives == 2);
    }
}

TEST_CASE("annotation edge cases", "[data][patches]") {
    const Image img = gradient_image(1, 100, 100);
    Rng rng = make_rng(3, "edge");
    const auto before = log::warning_count();
    log::set_quiet(true);
    const auto none = extract_patches(img, {}, "p", rng);
    CHECK(none.samples.empty());
    CHECK(log::warning_count() == before + 1);
    CHECK_THROWS_AS(extract_patches(img, {{100, 5}}, "p", rng), StructuralError);
}

TEST_CASE("identity augmentation policy", "[data][augment]") {
    const auto s = synthesize_sample(1, 32, 4).sample;
    Rng rng = make_rng(4, "aug");
    const auto out = augment(s, AugmentPolicy{}, rng);
    CHECK(same_pixels(out.image, s.image));
}

TEST_CASE("horizontal flip is an involution", "[data][augment]") {
    const auto img = gradient_image(3, 7, 9);
    CHECK(same_pixels(flip_horizontal(flip_horizontal(img)), img));
    CHECK_FALSE(same_pixels(flip_horizontal(img), img));
}

TEST_CASE("positives-only policies leave negatives untouched", "[data][augment]") {
    AugmentPolicy p{20, true, 0.1, 0.1, 0.2, 0.2, 0.2, true};
    const auto neg = synthesize_sample(0, 32, 5).sample;
    const auto pos = synthesize_sample(1, 32, 5).sample;
    Rng rng = make_rng(5, "aug");
    CHECK(same_pixels(augment(neg, p, rng).image, neg.image));
    CHECK_FALSE(same_pixels(augment(pos, p, rng).image, pos.image));
}

TEST_CASE("augmentation preserves labels and range", "[data][augment][property]") {
    const AugmentPolicy p{30, true, 0.2, 0.2, 0.3, 0.3, 0.3, false};
    const auto ds = synthesize_dataset(20, 32, 6);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        Rng rng = make_rng(counter_seed(6, i));
        const auto out = augment(ds[i], p, rng);
        CHECK(out.label == ds[i].label);
        CHECK(out.patient_id == ds[i].patient_id);
        CHECK(out.image.shape() == ds[i].image.shape());
        CHECK(in_unit_range(out.image));
        const auto z = standardize(out.image);
        CHECK(std::all_of(z.data().begin(), z.data().end(), [](double v) { return std::isfinite(v); }));
    }
}

TEST_CASE("degenerate augmentation ranges are configuration errors", "[data][augment]") {
    Rng rng = make_rng(7, "aug");
    const auto s = synthesize_sample(1, 16, 7).sample;
    AugmentPolicy p;
    p.crop_frac = 1.0;
    CHECK_THROWS_AS(augment(s, p, rng), ConfigError);
    p = {};
    p.scale_range = 1.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.rotate_max_deg = -1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("offline positive expansion", "[data][augment]") {
    const auto ds = synthesize_dataset(10, 16, 8);
    const AugmentPolicy p{15, true, 0.05, 0.1, 0.1, 0, 0, false};
    const auto a = expand_positives(ds, p, 2, 99);
    const auto b = expand_positives(ds, p, 2, 99);
    REQUIRE(a.size() == ds.size() + 2 * 10);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(same_pixels(a[i].image, ds[i].image));
    }
    for (std::size_t i = ds.size(); i < a.size(); ++i) {
        CHECK(a[i].label == 1);
        CHECK(same_pixels(a[i].image, b[i].image));
    }
    CHECK(count_classes(a).positive == 30);
}

TEST_CASE("image helpers", "[data][image]") {
    const auto img = gradient_image(1, 8, 8);
    CHECK(same_pixels(resize(img, 8, 8), img));
    const auto big = resize(img, 16, 12);
    CHECK(big.shape() == ad::Shape{1, 16, 12});
    const auto flat = make_image(1, 4, 4, 0.3);
    CHECK_THAT(resize(flat, 9, 7).data()[10], WithinAbs(0.3, 1e-15));

    const auto z = standardize(gradient_image(2, 6, 6));
    for (std::size_t c = 0; c < 2; ++c) {
        double m = 0, v = 0;
        for (std::size_t i = 0; i < 36; ++i) {
            m += z.data()[c * 36 + i];
        }
        m /= 36;
        for (std::size_t i = 0; i < 36; ++i) {
            v += (z.data()[c * 36 + i] - m) * (z.data()[c * 36 + i] - m);
        }
        CHECK_THAT(m, WithinAbs(0.0, 1e-12));
        CHECK_THAT(v / 36, WithinAbs(1.0, 1e-12));
    }
    const auto zf = standardize(flat);
    for (double v : zf.data()) {
        CHECK(v == 0.0);
    }

    const auto rgb = convert_channels(img, 3);
    REQUIRE(rgb.dim(0) == 3);
    CHECK(std::equal(img.data().begin(), img.data().end(), rgb.data().begin() + 64));
    const auto back = convert_channels(rgb, 1);
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK_THAT(back.data()[i], WithinAbs(img.data()[i], 1e-12));
    }
}

TEST_CASE("ten patients split 8:2", "[data][split]") {
    const auto ds = synthesize_dataset(50, 8, 9); // 100 samples, 10 patients
    const SplitSpec spec{0.8, 123, true};
    const auto [train, test] = split(ds, spec);
    std::set<std::string> tr, te;
    for (const auto &s : train) {
        tr.insert(s.patient_id);
    }
    for (const auto &s : test) {
        te.insert(s.patient_id);
    }
    CHECK(tr.size() == 8);
    CHECK(te.size() == 2);
    CHECK(train.size() + test.size() == ds.size());

    const auto again = split_indices(ds, spec);
    const auto first = split_indices(ds, spec);
    CHECK(again.train == first.train);
    CHECK(again.test == first.test);
}

TEST_CASE("a dominant patient stays on one side", "[data][split][oracle]") {
    Dataset ds;
    for (int i = 0; i < 50; ++i) {
        ds.push_back({make_image(1, 2, 2), i % 2, "big", Source::Synthetic});
    }
    for (int i = 0; i < 50; ++i) {
        ds.push_back({make_image(1, 2, 2), i % 2, "p" + std::to_string(i / 5), Source::Synthetic});
    }
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto idx = split_indices(ds, {0.8, seed, true});
        std::set<std::string> tr, te;
        for (auto i : idx.train) {
            tr.insert(ds[i].patient_id);
        }
        for (auto i : idx.test) {
            te.insert(ds[i].patient_id);
        }
        std::vector<std::string> both;
        std::set_intersection(tr.begin(), tr.end(), te.begin(), te.end(), std::back_inserter(both));
        CHECK(both.empty());
        // 11 patients: round(8.8) = 9 go to train.
        CHECK(tr.size() == 9);
    }
}

TEST_CASE("split preconditions and ungrouped mode", "[data][split]") {
    Dataset one;
    for (int i = 0; i < 4; ++i) {
        one.push_back({make_image(1, 2, 2), i % 2, "only", Source::Synthetic});
    }
    CHECK_THROWS_AS(split_indices(one, {0.8, 0, true}), ConfigError);
    const auto idx = split_indices(one, {0.5, 0, false});
    CHECK(idx.train.size() == 2);
    CHECK_THROWS_AS(split_indices(one, {1.0, 0, false}), ConfigError);
    Dataset anon = one;
    anon[0].patient_id.clear();
    CHECK_THROWS_AS(split_indices(anon, {0.8, 0, true}), DataError);
}

TEST_CASE("PNG round trip", "[data][png]") {
    TempDir dir("png");
    const auto grey = gradient_image(1, 5, 7);
    write_png(dir.path / "g.png", grey);
    const auto g = read_png(dir.path / "g.png");
    REQUIRE(g.shape() == grey.shape());
    for (std::size_t i = 0; i < g.numel(); ++i) {
        CHECK_THAT(g.data()[i], WithinAbs(grey.data()[i], 0.5 / 255 + 1e-12));
    }
    const auto rgb = gradient_image(3, 4, 4);
    write_png(dir.path / "c.png", rgb);
    CHECK(read_png(dir.path / "c.png").dim(0) == 3);
    CHECK_THROWS_AS(read_png(dir.path / "missing.png"), IoError);
}

TEST_CASE("directory ingestion", "[data][directory]") {
    TempDir dir("dir");
    log::set_quiet(true);
    for (const char *cls : {"negative", "positive"}) {
        const fs::path p = dir.path / cls / "patient_007";
        fs::create_directories(p);
        for (int i = 0; i < 3; ++i) {
            write_png(p / ("img" + std::to_string(i) + ".png"),
                      i == 2 ? gradient_image(3, 10, 10) : gradient_image(1, 12, 12));
        }
    }
    auto r = load_directory(dir.path, {1, 8});
    REQUIRE(r.samples.size() == 6);
    CHECK(r.warnings == 0);
    CHECK(count_classes(r.samples).positive == 3);
    for (const auto &s : r.samples) {
        CHECK(s.patient_id == "007");
        CHECK(s.image.shape() == ad::Shape{1, 8, 8});
        CHECK(s.source == Source::Directory);
    }
    const auto rgb = load_directory(dir.path, {3, std::nullopt});
    for (const auto &s : rgb.samples) {
        CHECK(s.image.dim(0) == 3);
    }

    // A truncated file is skipped with a warning.
    const fs::path victim = dir.path / "positive" / "patient_007" / "img0.png";
    const auto size = fs::file_size(victim);
    fs::resize_file(victim, size / 2);
    const auto before = log::warning_count();
    r = load_directory(dir.path, {1, 8});
    CHECK(r.samples.size() == 5);
    CHECK(r.warnings == 1);
    CHECK(log::warning_count() == before + 1);

    fs::remove_all(dir.path / "positive");
    fs::create_directories(dir.path / "positive" / "patient_1");
    CHECK_THROWS_AS(load_directory(dir.path), DataError);
    CHECK_THROWS_AS(load_directory(dir.path / "nope"), IoError);
}

TEST_CASE("export and manifest", "[data][directory]") {
    TempDir dir("export");
    const auto ds = synthesize_dataset(6, 16, 10);
    auto rows = export_directory(ds, dir.path / "set");
    REQUIRE(rows.size() == ds.size());
    rows[0].split = "train";
    write_manifest(dir.path / "m.csv", rows);
    std::ifstream in(dir.path / "m.csv");
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    CHECK(header == "path,label,patient_id,split");
    CHECK(first == "negative/patient_synth0000/000000.png,0,synth0000,train");
    const auto back = load_directory(dir.path / "set", {1, std::nullopt});
    CHECK(back.samples.size() == ds.size());
    CHECK(count_classes(back.samples).positive == 6);
}
