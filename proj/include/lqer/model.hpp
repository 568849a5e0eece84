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
 * Hybrid classifier: residual CNN backbone -> linear projection to qubit
 * angles -> data re-uploading circuit -> fusion head over [f, q].
 */
#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lqer/autodiff.hpp"
#include "lqer/errors.hpp"
#include "lqer/parallel.hpp"
#include "lqer/pqc.hpp"
#include "lqer/rng.hpp"

namespace lqer::model {

struct BackboneConfig {
    std::size_t input_size{64};
    std::size_t channels{1};
    std::size_t stem_channels{16};
    std::size_t stem_stride{2};
    std::vector<std::size_t> stage_widths{16, 32, 64};
    std::vector<std::size_t> blocks_per_stage{1, 1, 1};

    /// d: width of the pooled feature vector.
    [[nodiscard]] std::size_t feature_dim() const {
        return stage_widths.empty() ? stem_channels : stage_widths.back();
    }

    void validate() const {
        if (input_size < 1 || channels < 1 || stem_channels < 1 ||
            stem_stride < 1) {
            throw ConfigError("backbone: sizes must be >= 1");
        }
        if (stage_widths.empty() || stage_widths.size() != blocks_per_stage.size()) {
            throw ConfigError("backbone: stage_widths and blocks_per_stage "
                              "must be non-empty and equally long");
        }
        for (std::size_t i = 0; i < stage_widths.size(); ++i) {
            if (stage_widths[i] < 1 || blocks_per_stage[i] < 1) {
                throw ConfigError("backbone: stage widths and block counts "
                                  "must be >= 1");
            }
        }
    }
};

enum class Mode { Hybrid, ClassicalOnly };

[[nodiscard]] inline std::string to_string(Mode m) {
    return m == Mode::Hybrid ? "hybrid" : "classical_only";
}

[[nodiscard]] inline Mode mode_from_string(const std::string &s) {
    if (s == "hybrid") {
        return Mode::Hybrid;
    }
    if (s == "classical_only" || s == "classical-only") {
        return Mode::ClassicalOnly;
    }
    throw ConfigError("unknown model mode '" + s + "'");
}

struct ModelConfig {
    BackboneConfig backbone{};
    pqc::PqcConfig pqc{};
    Mode mode{Mode::Hybrid};

    void validate() const {
        backbone.validate();
        pqc.validate();
    }
};

inline void to_json(nlohmann::json &j, const ModelConfig &c) {
    j = nlohmann::json{
        {"mode", to_string(c.mode)},
        {"input_size", c.backbone.input_size},
        {"channels", c.backbone.channels},
        {"stem_channels", c.backbone.stem_channels},
        {"stem_stride", c.backbone.stem_stride},
        {"stage_widths", c.backbone.stage_widths},
        {"blocks_per_stage", c.backbone.blocks_per_stage},
        {"n_qubits", c.pqc.n_qubits},
        {"depth", c.pqc.depth},
        {"entangler", pqc::to_string(c.pqc.entangler)},
        {"reupload", c.pqc.reupload},
    };
}

/// Optimizer learning-rate group a parameter belongs to.
enum class ParamGroup { Backbone, QuantumAndHead };

struct Parameter {
    std::string name;
    ad::Tensor tensor;
    ParamGroup group;
};

/// Running min/max of every angle fed to the circuit.
struct AngleMonitor {
    double min{std::numeric_limits<double>::infinity()};
    double max{-std::numeric_limits<double>::infinity()};
    std::size_t count{0};

    void observe(std::span<const double> v) {
        for (double a : v) {
            min = std::min(min, a);
            max = std::max(max, a);
        }
        count += v.size();
    }
    [[nodiscard]] bool within_open_period() const noexcept {
        return count == 0 ||
               (min > -std::numbers::pi && max < std::numbers::pi);
    }
};

/// a = pi*tanh(z), held strictly inside (-pi, pi) even where tanh rounds
/// to +-1.
inline ad::Tensor squash_angles(ad::Tape &tape, const ad::Tensor &z) {
    constexpr double pi = std::numbers::pi;
    static const double limit = std::nextafter(pi, 0.0);
    return ad::detail::unary(
        tape, z,
        [](double v) { return std::clamp(pi * std::tanh(v), -limit, limit); },
        [](double v, double) {
            const double t = std::tanh(v);
            return pi * (1.0 - t * t);
        });
}

struct QuantumLayerOptions {
    std::size_t threads{1};
    double shift{pqc::half_pi};
};

/**
 * Batched circuit readout as a tape op: angles [N,n], theta [3nL] -> q [N,n].
 * Backward applies the parameter-shift VJP per sample; theta gradients are
 * reduced in sample order so the result does not depend on thread timing.
 */
inline ad::Tensor quantum_layer(ad::Tape &tape, const ad::Tensor &angles,
                                const ad::Tensor &theta,
                                const pqc::PqcConfig &cfg,
                                QuantumLayerOptions opt = {}) {
    ad::detail::require_rank(angles, 2, "quantum_layer");
    const std::size_t n = angles.dim(0), nq = cfg.n_qubits;
    if (angles.dim(1) != nq || theta.numel() != cfg.param_count()) {
        throw StructuralError("quantum_layer: angles " +
                              ad::shape_str(angles.shape()) + " / theta " +
                              ad::shape_str(theta.shape()) +
                              " inconsistent with circuit config");
    }
    ad::Tensor q = ad::Tensor::zeros({n, nq}, ad::detail::any_tracks(angles, theta));
    auto A = angles.data();
    auto T = theta.data();
    auto Q = q.data();
    parallel_for(n, opt.threads, [&](std::size_t s) {
        const auto out = pqc::forward(A.subspan(s * nq, nq), T, cfg);
        std::copy(out.begin(), out.end(), Q.begin() + static_cast<std::ptrdiff_t>(s * nq));
    });
    if (q.requires_grad()) {
        tape.record(q, [angles, theta, q, cfg, opt, n, nq]() mutable {
            auto dQ = q.grad();
            auto Av = angles.data();
            auto Tv = theta.data();
            std::vector<pqc::Vjp> per_sample(n);
            parallel_for(n, opt.threads, [&](std::size_t s) {
                per_sample[s] = pqc::vjp(Av.subspan(s * nq, nq), Tv, cfg,
                                         dQ.subspan(s * nq, nq), opt.shift);
            });
            for (std::size_t s = 0; s < n; ++s) {
                if (angles.requires_grad()) {
                    auto dA = angles.grad();
                    for (std::size_t i = 0; i < nq; ++i) {
                        dA[s * nq + i] += per_sample[s].inputs[i];
                    }
                }
                if (theta.requires_grad()) {
                    auto dT = theta.grad();
                    for (std::size_t k = 0; k < dT.size(); ++k) {
                        dT[k] += per_sample[s].params[k];
                    }
                }
            }
        });
    }
    return q;
}

struct ResidualBlock {
    ad::Tensor conv1, scale1, bias1;
    ad::Tensor conv2, scale2, bias2;
    std::optional<ad::Tensor> shortcut; ///< 1x1 projection when shape changes
    std::size_t stride{1};
};

/// Everything hybrid_forward produces for one batch.
struct ForwardResult {
    ad::Tensor logits;   ///< [N]
    ad::Tensor features; ///< f, [N,d]
    ad::Tensor angles;   ///< circuit inputs, [N,n] (empty when classical-only)
    ad::Tensor quantum;  ///< q, [N,n] (empty when classical-only)
};

class HybridModel {
  public:
    explicit HybridModel(ModelConfig cfg, std::uint64_t init_seed = 0)
        : cfg_{std::move(cfg)} {
        cfg_.validate();
        build();
        initialize(init_seed);
    }

    // Parameters are shared handles; a copy would alias the original.
    HybridModel(const HybridModel &) = delete;
    HybridModel &operator=(const HybridModel &) = delete;
    HybridModel(HybridModel &&) noexcept = default;
    HybridModel &operator=(HybridModel &&) noexcept = default;

    [[nodiscard]] const ModelConfig &config() const noexcept { return cfg_; }
    [[nodiscard]] bool hybrid() const noexcept { return cfg_.mode == Mode::Hybrid; }

    /// Registry of every trainable tensor, each listed exactly once.
    [[nodiscard]] const std::vector<Parameter> &parameters() const noexcept {
        return params_;
    }

    [[nodiscard]] const ad::Tensor &parameter(const std::string &name) const {
        for (const auto &p : params_) {
            if (p.name == name) {
                return p.tensor;
            }
        }
        throw UsageError("no parameter named '" + name + "'");
    }
    [[nodiscard]] ad::Tensor &parameter(const std::string &name) {
        return const_cast<ad::Tensor &>(std::as_const(*this).parameter(name));
    }

    [[nodiscard]] std::size_t parameter_count() const noexcept {
        std::size_t n = 0;
        for (const auto &p : params_) {
            n += p.tensor.numel();
        }
        return n;
    }

    [[nodiscard]] std::size_t parameter_count(ParamGroup g) const noexcept {
        std::size_t n = 0;
        for (const auto &p : params_) {
            n += p.group == g ? p.tensor.numel() : 0;
        }
        return n;
    }

    void zero_grad() {
        for (auto &p : params_) {
            p.tensor.zero_grad();
        }
    }

    /// Frozen backbone tensors stop tracking gradients; their grad buffers
    /// are dropped.
    void set_backbone_trainable(bool on) {
        for (auto &p : params_) {
            if (p.group == ParamGroup::Backbone) {
                p.tensor.set_requires_grad(on);
            }
        }
    }

    void set_quantum_options(QuantumLayerOptions opt) noexcept { qopt_ = opt; }
    [[nodiscard]] AngleMonitor &angle_monitor() noexcept { return monitor_; }
    [[nodiscard]] const AngleMonitor &angle_monitor() const noexcept {
        return monitor_;
    }

    /// f = GAP(stages(stem(x))). Input [N,C,H,W], standardized per channel.
    [[nodiscard]] ad::Tensor backbone_forward(ad::Tape &tape,
                                              const ad::Tensor &x) const {
        check_input(x);
        ad::Tensor h = ad::conv2d(tape, x, stem_conv_, {cfg_.backbone.stem_stride, 1});
        h = ad::relu(tape, ad::channel_affine(tape, h, stem_scale_, stem_bias_));
        for (const auto &b : blocks_) {
            h = block_forward(tape, b, h);
        }
        return ad::global_avg_pool(tape, h);
    }

    /// z = f W^T + b with W stored [n, d].
    [[nodiscard]] ad::Tensor project(ad::Tape &tape, const ad::Tensor &f) const {
        require_hybrid("project");
        return ad::linear(tape, f, proj_w_, proj_b_);
    }

    [[nodiscard]] ForwardResult forward(ad::Tape &tape, const ad::Tensor &x) {
        ForwardResult r;
        r.features = backbone_forward(tape, x);
        const std::size_t n = x.dim(0);
        ad::Tensor fused = r.features;
        if (hybrid()) {
            r.angles = squash_angles(tape, project(tape, r.features));
            monitor_.observe(r.angles.data());
            r.quantum = quantum_layer(tape, r.angles, theta_, cfg_.pqc, qopt_);
            fused = ad::concat(tape, r.features, r.quantum);
        }
        r.logits = ad::reshape(tape, ad::linear(tape, fused, head_w_, head_b_), {n});
        return r;
    }

    [[nodiscard]] ad::Tensor hybrid_forward(ad::Tape &tape, const ad::Tensor &x) {
        return forward(tape, x).logits;
    }

    /// Runs the tape backward from `loss`; the model's parameters receive
    /// gradients, including the circuit parameters via the shift rule.
    void hybrid_backward(ad::Tape &tape, const ad::Tensor &loss) const {
        if (tape.empty()) {
            throw UsageError("hybrid_backward: no forward pass recorded on this tape");
        }
        tape.backward(loss);
    }

    /// Checkpoint header JSON for this architecture.
    [[nodiscard]] nlohmann::json architecture_json() const { return cfg_; }

    [[nodiscard]] ad::TensorContainer to_container(nlohmann::json meta = {}) const {
        ad::TensorContainer c;
        nlohmann::json header{{"format", "lqer-checkpoint"},
                              {"model", architecture_json()}};
        if (!meta.is_null()) {
            header["meta"] = std::move(meta);
        }
        c.header = header.dump();
        for (const auto &p : params_) {
            c.tensors.push_back({p.name, p.tensor});
        }
        return c;
    }

    /// Copies values from a container; the architecture must match exactly.
    void load_container(const ad::TensorContainer &c) {
        nlohmann::json header;
        try {
            header = nlohmann::json::parse(c.header);
        } catch (const nlohmann::json::exception &e) {
            throw DataError(std::string("checkpoint header is not valid JSON: ") + e.what());
        }
        if (!header.contains("model")) {
            throw DataError("checkpoint header lacks a model section");
        }
        const nlohmann::json mine = architecture_json();
        for (const auto &[key, value] : mine.items()) {
            const auto &theirs = header.at("model");
            if (!theirs.contains(key) || theirs.at(key) != value) {
                throw ConfigError(
                    "checkpoint architecture incompatible: model." + key +
                    " is " +
                    (theirs.contains(key) ? theirs.at(key).dump() : "<missing>") +
                    " in checkpoint but " + value.dump() + " in config");
            }
        }
        for (auto &p : params_) {
            const ad::Tensor *src = c.find(p.name);
            if (src == nullptr || src->shape() != p.tensor.shape()) {
                throw DataError("checkpoint tensor '" + p.name +
                                "' missing or mis-shaped");
            }
            std::copy(src->data().begin(), src->data().end(), p.tensor.data().begin());
        }
    }

  private:
    void check_input(const ad::Tensor &x) const {
        const auto &b = cfg_.backbone;
        if (x.rank() != 4 || x.dim(1) != b.channels || x.dim(2) != b.input_size ||
            x.dim(3) != b.input_size) {
            throw StructuralError(
                "backbone: expected input (N," + std::to_string(b.channels) + "," +
                std::to_string(b.input_size) + "," + std::to_string(b.input_size) +
                "), got " + ad::shape_str(x.shape()));
        }
    }

    void require_hybrid(const char *what) const {
        if (!hybrid()) {
            throw UsageError(std::string(what) + ": model is classical-only");
        }
    }

    static ad::Tensor block_forward(ad::Tape &tape, const ResidualBlock &b,
                                    const ad::Tensor &x) {
        ad::Tensor m = ad::conv2d(tape, x, b.conv1, {b.stride, 1});
        m = ad::relu(tape, ad::channel_affine(tape, m, b.scale1, b.bias1));
        m = ad::conv2d(tape, m, b.conv2, {1, 1});
        m = ad::channel_affine(tape, m, b.scale2, b.bias2);
        const ad::Tensor sc =
            b.shortcut ? ad::conv2d(tape, x, *b.shortcut, {b.stride, 0}) : x;
        return ad::add(tape, m, sc);
    }

    void add_param(std::string name, ad::Tensor &t, ParamGroup g) {
        t.set_requires_grad(true);
        params_.push_back({std::move(name), t, g});
    }

    void build() {
        const auto &b = cfg_.backbone;
        constexpr auto BB = ParamGroup::Backbone;
        constexpr auto QH = ParamGroup::QuantumAndHead;
        stem_conv_ = ad::Tensor::zeros({b.stem_channels, b.channels, 3, 3});
        stem_scale_ = ad::Tensor::full({b.stem_channels}, 1.0);
        stem_bias_ = ad::Tensor::zeros({b.stem_channels});
        add_param("stem.conv", stem_conv_, BB);
        add_param("stem.scale", stem_scale_, BB);
        add_param("stem.bias", stem_bias_, BB);

        std::size_t in = b.stem_channels;
        blocks_.clear();
        blocks_.reserve([&] {
            std::size_t k = 0;
            for (auto c : b.blocks_per_stage) {
                k += c;
            }
            return k;
        }());
        for (std::size_t s = 0; s < b.stage_widths.size(); ++s) {
            const std::size_t out = b.stage_widths[s];
            for (std::size_t k = 0; k < b.blocks_per_stage[s]; ++k) {
                ResidualBlock blk;
                blk.stride = (s > 0 && k == 0) ? 2 : 1;
                blk.conv1 = ad::Tensor::zeros({out, in, 3, 3});
                blk.scale1 = ad::Tensor::full({out}, 1.0);
                blk.bias1 = ad::Tensor::zeros({out});
                blk.conv2 = ad::Tensor::zeros({out, out, 3, 3});
                blk.scale2 = ad::Tensor::full({out}, 1.0);
                blk.bias2 = ad::Tensor::zeros({out});
                if (in != out || blk.stride != 1) {
                    blk.shortcut = ad::Tensor::zeros({out, in, 1, 1});
                }
                blocks_.push_back(std::move(blk));
                auto &r = blocks_.back();
                const std::string p =
                    "stage" + std::to_string(s) + ".block" + std::to_string(k) + ".";
                add_param(p + "conv1", r.conv1, BB);
                add_param(p + "scale1", r.scale1, BB);
                add_param(p + "bias1", r.bias1, BB);
                add_param(p + "conv2", r.conv2, BB);
                add_param(p + "scale2", r.scale2, BB);
                add_param(p + "bias2", r.bias2, BB);
                if (r.shortcut) {
                    add_param(p + "shortcut", *r.shortcut, BB);
                }
                in = out;
            }
        }

        const std::size_t d = b.feature_dim();
        const std::size_t nq = cfg_.pqc.n_qubits;
        if (hybrid()) {
            proj_w_ = ad::Tensor::zeros({nq, d});
            proj_b_ = ad::Tensor::zeros({nq});
            theta_ = ad::Tensor::zeros({cfg_.pqc.depth, nq, 3});
            add_param("projection.weight", proj_w_, QH);
            add_param("projection.bias", proj_b_, QH);
            add_param("pqc.theta", theta_, QH);
        }
        head_w_ = ad::Tensor::zeros({1, hybrid() ? d + nq : d});
        head_b_ = ad::Tensor::zeros({1});
        add_param("head.weight", head_w_, QH);
        add_param("head.bias", head_b_, QH);
    }

    /// He-normal convolutions, uniform(+-1/sqrt(fan_in)) linear layers,
    /// uniform(-pi, pi) circuit angles; affine scales 1, biases 0.
    void initialize(std::uint64_t seed) {
        Rng rng = make_rng(seed, "init");
        const auto he = [&rng](ad::Tensor &t) {
            const double fan_in = static_cast<double>(t.numel() / t.dim(0));
            const double sd = std::sqrt(2.0 / fan_in);
            for (auto &v : t.data()) {
                v = sd * normal01(rng);
            }
        };
        const auto lin = [&rng](ad::Tensor &t) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(t.dim(1)));
            for (auto &v : t.data()) {
                v = uniform(rng, -bound, bound);
            }
        };
        he(stem_conv_);
        for (auto &b : blocks_) {
            he(b.conv1);
            he(b.conv2);
            if (b.shortcut) {
                he(*b.shortcut);
            }
        }
        if (hybrid()) {
            lin(proj_w_);
            for (auto &v : theta_.data()) {
                v = uniform(rng, -std::numbers::pi, std::numbers::pi);
            }
        }
        lin(head_w_);
    }

    ModelConfig cfg_;
    ad::Tensor stem_conv_, stem_scale_, stem_bias_;
    std::vector<ResidualBlock> blocks_;
    ad::Tensor proj_w_, proj_b_, theta_;
    ad::Tensor head_w_, head_b_;
    std::vector<Parameter> params_;
    QuantumLayerOptions qopt_{};
    AngleMonitor monitor_{};
};

} // namespace lqer::model
