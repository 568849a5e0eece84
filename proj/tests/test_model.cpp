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
// Hybrid model: backbone contracts, projection, angle squashing, ablation
// equivalence, freeze contract, registry and end-to-end gradients.

#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <numbers>
#include <set>

#include "lqer/model.hpp"
#include "lqer/oracles.hpp"
#include "lqer/selfcheck.hpp"

using namespace lqer;
using namespace lqer::model;
using Catch::Matchers::WithinAbs;

namespace {
ad::Tensor random_input(std::uint64_t seed, ad::Shape shape) {
    Rng rng = make_rng(seed, "input");
    auto x = ad::Tensor::zeros(std::move(shape));
    for (auto &v : x.data()) {
        v = normal01(rng);
    }
    return x;
}

ModelConfig small_config(Mode mode = Mode::Hybrid) {
    ModelConfig c;
    c.backbone.input_size = 16;
    c.backbone.stem_channels = 4;
    c.backbone.stage_widths = {4, 6};
    c.backbone.blocks_per_stage = {1, 1};
    c.mode = mode;
    return c;
}

void fill(ad::Tensor t, double v) {
    for (auto &x : t.data()) {
        x = v;
    }
}

bool bitwise_equal(const ad::Tensor &a, const ad::Tensor &b) {
    return a.shape() == b.shape() &&
           std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(double)) == 0;
}
} // namespace

TEST_CASE("configuration defaults and validation", "[model]") {
    const ModelConfig c;
    CHECK(c.backbone.input_size == 64);
    CHECK(c.backbone.feature_dim() == 64);
    CHECK(c.pqc.n_qubits == 4);
    CHECK(c.mode == Mode::Hybrid);
    BackboneConfig b;
    b.stage_widths = {8, 0};
    b.blocks_per_stage = {1, 1};
    CHECK_THROWS_AS(b.validate(), ConfigError);
    b.stage_widths = {8};
    CHECK_THROWS_AS(b.validate(), ConfigError);
    CHECK(mode_from_string("classical-only") == Mode::ClassicalOnly);
    CHECK_THROWS_AS(mode_from_string("quantum"), ConfigError);
}

TEST_CASE("parameter registry", "[model]") {
    HybridModel m(ModelConfig{}, 1);
    std::set<std::string> names;
    std::size_t total = 0;
    for (const auto &p : m.parameters()) {
        CHECK(names.insert(p.name).second);
        CHECK(p.tensor.requires_grad());
        total += p.tensor.numel();
    }
    CHECK(total == m.parameter_count());
    CHECK(m.parameter_count(ParamGroup::Backbone) + m.parameter_count(ParamGroup::QuantumAndHead) ==
          m.parameter_count());
    CHECK(m.parameter("pqc.theta").numel() == 24);
    CHECK(m.parameter("projection.weight").shape() == ad::Shape{4, 64});
    CHECK(m.parameter("head.weight").shape() == ad::Shape{1, 68});
    CHECK_THROWS_AS(m.parameter("nope"), UsageError);
    // Shortcut projections exist exactly where the shape changes.
    CHECK(names.contains("stage1.block0.shortcut"));
    CHECK_FALSE(names.contains("stage0.block0.shortcut"));

    HybridModel c(ModelConfig{{}, {}, Mode::ClassicalOnly}, 1);
    CHECK(c.parameter_count() == m.parameter_count() - 4 * 64 - 4 - 24 - 4);
}

TEST_CASE("initialization is seeded", "[model]") {
    HybridModel a(small_config(), 7), b(small_config(), 7), c(small_config(), 8);
    bool differs = false;
    for (std::size_t i = 0; i < a.parameters().size(); ++i) {
        CHECK(bitwise_equal(a.parameters()[i].tensor, b.parameters()[i].tensor));
        differs = differs || !bitwise_equal(a.parameters()[i].tensor, c.parameters()[i].tensor);
    }
    CHECK(differs);
    for (double t : a.parameter("pqc.theta").data()) {
        CHECK(std::abs(t) < std::numbers::pi);
    }
}

TEST_CASE("backbone output shape and input geometry", "[model]") {
    HybridModel m(small_config(), 2);
    ad::Tape tape;
    const auto f = m.backbone_forward(tape, random_input(1, {3, 1, 16, 16}));
    CHECK(f.shape() == ad::Shape{3, 6});
    CHECK_THROWS_AS(m.backbone_forward(tape, random_input(1, {3, 1, 15, 16})), StructuralError);
    CHECK_THROWS_AS(m.backbone_forward(tape, random_input(1, {3, 3, 16, 16})), StructuralError);
}

TEST_CASE("all-zero convolutions give zero features", "[model]") {
    HybridModel m(small_config(), 3);
    for (const auto &p : m.parameters()) {
        if (p.name.find("conv") != std::string::npos || p.name.find("shortcut") != std::string::npos) {
            fill(p.tensor, 0.0);
        }
    }
    ad::Tape tape;
    for (double v : m.backbone_forward(tape, random_input(2, {2, 1, 16, 16})).data()) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("a zeroed residual block passes its shortcut exactly", "[model]") {
    ModelConfig cfg = small_config();
    cfg.backbone.stage_widths = {4};
    cfg.backbone.blocks_per_stage = {1};
    HybridModel m(cfg, 4);
    fill(m.parameter("stage0.block0.conv1"), 0.0);
    fill(m.parameter("stage0.block0.conv2"), 0.0);
    const auto x = random_input(3, {2, 1, 16, 16});
    ad::Tape tape;
    const auto f = m.backbone_forward(tape, x);
    // Reference: GAP of the stem alone (identity shortcut).
    auto h = ad::conv2d(tape, x, m.parameter("stem.conv"), {2, 1});
    h = ad::relu(tape, ad::channel_affine(tape, h, m.parameter("stem.scale"),
                                          m.parameter("stem.bias")));
    CHECK(bitwise_equal(f, ad::global_avg_pool(tape, h)));
}

TEST_CASE("projection", "[model]") {
    HybridModel m(small_config(), 5);
    fill(m.parameter("projection.weight"), 0.0);
    auto b = m.parameter("projection.bias");
    for (std::size_t i = 0; i < 4; ++i) {
        b.data()[i] = 0.1 * static_cast<double>(i + 1);
    }
    ad::Tape tape;
    const auto z = m.project(tape, random_input(4, {3, 6}));
    REQUIRE(z.shape() == ad::Shape{3, 4});
    for (std::size_t s = 0; s < 3; ++s) {
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(z.data()[s * 4 + i] == b.data()[i]);
        }
    }

    ModelConfig id = small_config();
    id.backbone.stage_widths = {4, 4};
    HybridModel mi(id, 5);
    auto w = mi.parameter("projection.weight");
    fill(w, 0.0);
    fill(mi.parameter("projection.bias"), 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
        w.data()[i * 4 + i] = 1.0;
    }
    const auto f = random_input(5, {2, 4});
    CHECK(bitwise_equal(mi.project(tape, f), f));
    CHECK_THROWS_AS(mi.project(tape, random_input(5, {2, 5})), StructuralError);
}

TEST_CASE("angle squashing", "[model]") {
    ad::Tape tape;
    CHECK(squash_angles(tape, ad::Tensor::from({1}, {0.0})).data()[0] == 0.0);
    const auto big = squash_angles(tape, ad::Tensor::from({3}, {50.0, -50.0, 1e300}));
    CHECK(big.data()[0] < std::numbers::pi);
    CHECK(big.data()[0] > 3.14159);
    CHECK(big.data()[1] > -std::numbers::pi);
    CHECK(big.data()[2] < std::numbers::pi);
    const auto mono = squash_angles(tape, ad::Tensor::from({4}, {-2, -0.5, 0.5, 2}));
    for (std::size_t i = 1; i < 4; ++i) {
        CHECK(mono.data()[i] > mono.data()[i - 1]);
    }

    Rng rng = make_rng(6, "squash");
    for (int i = 0; i < 20; ++i) {
        const double z = 3 * normal01(rng);
        auto t = ad::Tensor::from({1}, {z}, true);
        ad::Tape tp;
        tp.backward(ad::sum(tp, squash_angles(tp, t)));
        const auto f = [](std::span<const double> v) {
            return std::numbers::pi * std::tanh(v[0]);
        };
        CHECK_THAT(t.grad()[0], WithinAbs(oracle::central_difference(f, {z}, 0), 1e-8));
    }
}

TEST_CASE("hybrid forward produces one finite logit per sample", "[model]") {
    HybridModel m(small_config(), 7);
    ad::Tape tape;
    const auto r = m.forward(tape, random_input(6, {2, 1, 16, 16}));
    CHECK(r.logits.shape() == ad::Shape{2});
    for (double v : r.logits.data()) {
        CHECK(std::isfinite(v));
    }
    CHECK(r.quantum.shape() == ad::Shape{2, 4});
    CHECK(m.angle_monitor().count == 8);
    CHECK(m.angle_monitor().within_open_period());
}

TEST_CASE("zero q-columns in the head reproduce the classical-only model bitwise",
          "[model][ablation]") {
    HybridModel h(small_config(), 8);
    HybridModel c(small_config(Mode::ClassicalOnly), 99);
    const std::size_t d = 6;
    for (const auto &p : c.parameters()) {
        const auto &src = h.parameter(p.name);
        ad::Tensor dst = p.tensor; // shared handle
        if (p.name == "head.weight") {
            std::copy_n(src.data().begin(), d, dst.data().begin());
        } else {
            std::copy(src.data().begin(), src.data().end(), dst.data().begin());
        }
    }
    auto hw = h.parameter("head.weight");
    for (std::size_t i = d; i < d + 4; ++i) {
        hw.data()[i] = 0.0;
    }
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto x = random_input(100 + seed, {3, 1, 16, 16});
        ad::Tape t1, t2;
        CHECK(bitwise_equal(h.hybrid_forward(t1, x), c.hybrid_forward(t2, x)));
    }
}

TEST_CASE("zero q-columns give an exactly zero circuit gradient", "[model]") {
    HybridModel m(small_config(), 9);
    auto hw = m.parameter("head.weight");
    for (std::size_t i = 6; i < 10; ++i) {
        hw.data()[i] = 0.0;
    }
    ad::Tape tape;
    const auto loss = ad::bce_with_logits(tape, m.hybrid_forward(tape, random_input(7, {2, 1, 16, 16})),
                                          ad::Tensor::from({2}, {0, 1}));
    m.hybrid_backward(tape, loss);
    for (double g : m.parameter("pqc.theta").grad()) {
        CHECK(g == 0.0);
    }
}

TEST_CASE("frozen backbone receives no gradient", "[model]") {
    HybridModel m(small_config(), 10);
    m.set_backbone_trainable(false);
    ad::Tape tape;
    const auto loss = ad::bce_with_logits(tape, m.hybrid_forward(tape, random_input(8, {2, 1, 16, 16})),
                                          ad::Tensor::from({2}, {1, 0}));
    m.hybrid_backward(tape, loss);
    for (const auto &p : m.parameters()) {
        if (p.group == ParamGroup::Backbone) {
            CHECK_FALSE(p.tensor.has_grad());
        } else {
            double norm = 0;
            for (double g : p.tensor.grad()) {
                norm += g * g;
            }
            INFO(p.name);
            CHECK(norm > 0);
        }
    }
    m.set_backbone_trainable(true);
    CHECK(m.parameter("stem.conv").has_grad());
}

TEST_CASE("backward before forward is a usage error", "[model]") {
    HybridModel m(small_config(), 11);
    ad::Tape tape;
    CHECK_THROWS_AS(m.hybrid_backward(tape, ad::Tensor::scalar(1.0, true)), UsageError);
}

TEST_CASE("backbone gradient matches finite differences", "[model][gradient]") {
    ModelConfig cfg = selfcheck::tiny_model_config();
    HybridModel m(cfg, 12);
    const auto x = random_input(9, {1, 1, 8, 8});
    const auto r = random_input(10, {1, 8});
    const auto loss_of = [&](ad::Tape &t) {
        return ad::sum(t, ad::mul(t, m.backbone_forward(t, x), r));
    };
    m.zero_grad();
    ad::Tape tape;
    tape.backward(loss_of(tape));
    for (const auto &p : m.parameters()) {
        if (p.group != ParamGroup::Backbone) {
            continue;
        }
        ad::Tensor w = p.tensor;
        for (std::size_t k = 0; k < w.numel(); ++k) {
            const double w0 = w.data()[k];
            const auto eval = [&](double v) {
                w.data()[k] = v;
                ad::NoGradGuard ng;
                ad::Tape t;
                return loss_of(t).item();
            };
            const double h = 1e-6;
            const double num = (eval(w0 + h) - eval(w0 - h)) / (2 * h);
            w.data()[k] = w0;
            INFO(p.name << "[" << k << "] analytic " << w.grad()[k] << " numeric " << num);
            CHECK(selfcheck::relative_error(w.grad()[k], num) < 1e-5);
        }
    }
}

TEST_CASE("end-to-end gradient matches finite differences for every group",
          "[model][gradient]") {
    HybridModel m(selfcheck::tiny_model_config(), 13);
    const auto [x, y] = selfcheck::tiny_batch(13);
    std::set<std::string> seen;
    for (const auto &d : selfcheck::model_fd_deviations(m, x, y)) {
        INFO(d.name << " max relative error " << d.max_relative_error);
        CHECK(d.max_relative_error < 1e-4);
        seen.insert(d.name.substr(0, d.name.find('.')));
    }
    CHECK(seen == std::set<std::string>{"stem", "stage0", "stage1", "projection", "pqc", "head"});
}

TEST_CASE("threaded quantum layer matches the serial one bitwise", "[model]") {
    HybridModel a(small_config(), 14), b(small_config(), 14);
    b.set_quantum_options({3, pqc::half_pi});
    const auto x = random_input(11, {5, 1, 16, 16});
    const auto lab = ad::Tensor::from({5}, {0, 1, 1, 0, 1});
    for (auto *m : {&a, &b}) {
        ad::Tape t;
        m->hybrid_backward(t, ad::bce_with_logits(t, m->hybrid_forward(t, x), lab));
    }
    for (std::size_t i = 0; i < a.parameters().size(); ++i) {
        const auto &ga = a.parameters()[i].tensor.grad();
        const auto &gb = b.parameters()[i].tensor.grad();
        CHECK(std::memcmp(ga.data(), gb.data(), ga.size() * sizeof(double)) == 0);
    }
}

TEST_CASE("checkpoint round trip and architecture checks", "[model][serialize]") {
    HybridModel a(small_config(), 15), b(small_config(), 16);
    b.load_container(ad::decode_container(ad::encode_container(a.to_container({{"epoch", 3}}))));
    for (std::size_t i = 0; i < a.parameters().size(); ++i) {
        CHECK(bitwise_equal(a.parameters()[i].tensor, b.parameters()[i].tensor));
    }

    ModelConfig other = small_config();
    other.pqc.depth = 3;
    HybridModel c(other, 1);
    try {
        c.load_container(a.to_container());
        FAIL("expected an incompatibility error");
    } catch (const ConfigError &e) {
        CHECK(std::string(e.what()).find("model.depth") != std::string::npos);
    }
    HybridModel d(small_config(Mode::ClassicalOnly), 1);
    CHECK_THROWS_AS(d.load_container(a.to_container()), ConfigError);
}
