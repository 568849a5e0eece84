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
 * Run configuration: a JSON tree with validated defaults.
 *
 * Every key is optional; unknown keys are rejected with their full path.
 * Precedence: command-line overrides > LQER_OUTPUT_DIR (output_dir only) >
 * file > defaults.
 */
#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lqer/data.hpp"
#include "lqer/errors.hpp"
#include "lqer/model.hpp"
#include "lqer/train.hpp"

namespace lqer {

using nlohmann::json;

struct SyntheticConfig {
    std::size_t n_per_class{500};
    std::size_t patch_size{64};
};

struct OfflineExpansion {
    bool enabled{false};
    std::size_t multiplier{2}; ///< augmented copies per training positive
    data::AugmentPolicy policy{15.0, true, 0.05, 0.1, 0.1, 0.0, 0.0, true};
};

struct DataConfig {
    std::string source{"synthetic"}; ///< "synthetic" or "directory"
    std::string path{};              ///< dataset root for "directory"
    SyntheticConfig synthetic{};
    double train_fraction{0.8};
    bool group_by_patient{true};
    double val_fraction{0.125}; ///< of the training portion, patient-grouped
    data::AugmentPolicy augment{0.0, true, 0.0, 0.0, 0.05, 0.05, 0.1, false};
    OfflineExpansion offline_expansion{};
};

struct RunSettings {
    std::size_t epochs{14};
    std::size_t batch_size{16};
    std::uint64_t seed{42};
    std::size_t threads{1};
    std::string output_dir{"runs/default"};
    double threshold{0.5};
};

struct RunConfig {
    model::ModelConfig model{};
    train::OptimConfig optim{};
    DataConfig data{};
    RunSettings run{};

    void validate() const {
        model.validate();
        optim.validate();
        if (data.source != "synthetic" && data.source != "directory") {
            throw ConfigError("data.source must be 'synthetic' or 'directory'");
        }
        if (data.source == "directory" && data.path.empty()) {
            throw ConfigError("data.path is required when data.source is 'directory'");
        }
        if (data.synthetic.n_per_class < 1) {
            throw ConfigError("data.synthetic.n_per_class must be >= 1");
        }
        if (data.synthetic.patch_size < 8) {
            throw ConfigError("data.synthetic.patch_size must be >= 8");
        }
        data::SplitSpec{data.train_fraction, 0, data.group_by_patient}.validate();
        if (!(data.val_fraction > 0 && data.val_fraction < 1)) {
            throw ConfigError("data.val_fraction must lie in (0, 1)");
        }
        data.augment.validate();
        data.offline_expansion.policy.validate();
        if (run.batch_size < 1 || run.threads < 1) {
            throw ConfigError("run.batch_size and run.threads must be >= 1");
        }
        if (!(run.threshold > 0 && run.threshold < 1)) {
            throw ConfigError("run.threshold must lie in (0, 1)");
        }
        if (run.output_dir.empty()) {
            throw ConfigError("run.output_dir must not be empty");
        }
    }

    [[nodiscard]] data::SplitSpec split_spec() const {
        return {data.train_fraction, run.seed, data.group_by_patient};
    }
    [[nodiscard]] data::SplitSpec val_split_spec() const {
        return {1.0 - data.val_fraction, substream_seed(run.seed, "validation"),
                data.group_by_patient};
    }
    [[nodiscard]] std::uint64_t data_seed() const { return substream_seed(run.seed, "data"); }
};

namespace detail {
/// Strict reader: remembers which keys were consumed, rejects the rest.
class ObjectReader {
  public:
    ObjectReader(const json &j, std::string path) : j_{j}, path_{std::move(path)} {
        if (!j_.is_object()) {
            throw ConfigError(where() + " must be an object");
        }
    }

    template <typename T> void get(const char *key, T &out) {
        seen_.insert(key);
        if (!j_.contains(key)) {
            return;
        }
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception &) {
            throw ConfigError(where(key) + ": wrong type (" + j_.at(key).dump() + ")");
        }
    }

    [[nodiscard]] bool has(const char *key) const { return j_.contains(key); }

    [[nodiscard]] ObjectReader child(const char *key) {
        seen_.insert(key);
        static const json empty = json::object();
        return ObjectReader{j_.contains(key) ? j_.at(key) : empty, where(key)};
    }

    void finish() const {
        for (const auto &[k, v] : j_.items()) {
            if (!seen_.contains(k)) {
                throw ConfigError("unknown config key '" + where(k) + "'");
            }
        }
    }

  private:
    [[nodiscard]] std::string where(const std::string &key = "") const {
        if (key.empty()) {
            return path_.empty() ? "<root>" : path_;
        }
        return path_.empty() ? key : path_ + "." + key;
    }
    const json &j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline void read_policy(ObjectReader r, data::AugmentPolicy &p) {
    r.get("rotate_max_deg", p.rotate_max_deg);
    r.get("flip_h", p.flip_h);
    r.get("translate_max_frac", p.translate_max_frac);
    r.get("scale_range", p.scale_range);
    r.get("brightness_delta", p.brightness_delta);
    r.get("color_jitter", p.color_jitter);
    r.get("crop_frac", p.crop_frac);
    r.get("positives_only", p.positives_only);
    r.finish();
}

inline json policy_json(const data::AugmentPolicy &p) {
    return {{"rotate_max_deg", p.rotate_max_deg}, {"flip_h", p.flip_h},
            {"translate_max_frac", p.translate_max_frac}, {"scale_range", p.scale_range},
            {"brightness_delta", p.brightness_delta}, {"color_jitter", p.color_jitter},
            {"crop_frac", p.crop_frac}, {"positives_only", p.positives_only}};
}
} // namespace detail

/// Reads a model section (also the checkpoint header format).
[[nodiscard]] inline model::ModelConfig model_config_from_json(const json &j,
                                                               const std::string &path = "model") {
    model::ModelConfig m;
    detail::ObjectReader r{j, path};
    std::string mode = model::to_string(m.mode);
    std::string ent = pqc::to_string(m.pqc.entangler);
    r.get("mode", mode);
    r.get("input_size", m.backbone.input_size);
    r.get("channels", m.backbone.channels);
    r.get("stem_channels", m.backbone.stem_channels);
    r.get("stem_stride", m.backbone.stem_stride);
    r.get("stage_widths", m.backbone.stage_widths);
    r.get("blocks_per_stage", m.backbone.blocks_per_stage);
    r.get("n_qubits", m.pqc.n_qubits);
    r.get("depth", m.pqc.depth);
    r.get("entangler", ent);
    r.get("reupload", m.pqc.reupload);
    r.finish();
    m.mode = model::mode_from_string(mode);
    m.pqc.entangler = pqc::entangler_from_string(ent);
    return m;
}

[[nodiscard]] inline RunConfig config_from_json(const json &j) {
    RunConfig c;
    detail::ObjectReader root{j, ""};
    if (root.has("model")) {
        c.model = model_config_from_json(j.at("model"));
    }
    (void)root.child("model");
    {
        auto o = root.child("optim");
        o.get("lr_backbone", c.optim.lr_backbone);
        o.get("lr_quantum_and_head", c.optim.lr_quantum_and_head);
        o.get("beta1", c.optim.beta1);
        o.get("beta2", c.optim.beta2);
        o.get("eps", c.optim.eps);
        o.get("weight_decay", c.optim.weight_decay);
        auto p = o.child("plateau");
        p.get("factor", c.optim.plateau.factor);
        p.get("patience", c.optim.plateau.patience);
        p.get("threshold", c.optim.plateau.threshold);
        p.get("monitor", c.optim.plateau.monitor);
        p.finish();
        o.finish();
    }
    {
        auto d = root.child("data");
        d.get("source", c.data.source);
        d.get("path", c.data.path);
        auto s = d.child("synthetic");
        s.get("n_per_class", c.data.synthetic.n_per_class);
        s.get("patch_size", c.data.synthetic.patch_size);
        s.finish();
        d.get("train_fraction", c.data.train_fraction);
        d.get("group_by_patient", c.data.group_by_patient);
        d.get("val_fraction", c.data.val_fraction);
        detail::read_policy(d.child("augment"), c.data.augment);
        auto x = d.child("offline_expansion");
        x.get("enabled", c.data.offline_expansion.enabled);
        x.get("multiplier", c.data.offline_expansion.multiplier);
        detail::read_policy(x.child("policy"), c.data.offline_expansion.policy);
        x.finish();
        d.finish();
    }
    {
        auto r = root.child("run");
        r.get("epochs", c.run.epochs);
        r.get("batch_size", c.run.batch_size);
        r.get("seed", c.run.seed);
        r.get("threads", c.run.threads);
        r.get("output_dir", c.run.output_dir);
        r.get("threshold", c.run.threshold);
        r.finish();
    }
    root.finish();
    c.validate();
    return c;
}

[[nodiscard]] inline json to_json(const RunConfig &c) {
    const auto &o = c.optim;
    return {
        {"model", json(c.model)},
        {"optim",
         {{"lr_backbone", o.lr_backbone},
          {"lr_quantum_and_head", o.lr_quantum_and_head},
          {"beta1", o.beta1},
          {"beta2", o.beta2},
          {"eps", o.eps},
          {"weight_decay", o.weight_decay},
          {"plateau",
           {{"factor", o.plateau.factor},
            {"patience", o.plateau.patience},
            {"threshold", o.plateau.threshold},
            {"monitor", o.plateau.monitor}}}}},
        {"data",
         {{"source", c.data.source},
          {"path", c.data.path},
          {"synthetic",
           {{"n_per_class", c.data.synthetic.n_per_class},
            {"patch_size", c.data.synthetic.patch_size}}},
          {"train_fraction", c.data.train_fraction},
          {"group_by_patient", c.data.group_by_patient},
          {"val_fraction", c.data.val_fraction},
          {"augment", detail::policy_json(c.data.augment)},
          {"offline_expansion",
           {{"enabled", c.data.offline_expansion.enabled},
            {"multiplier", c.data.offline_expansion.multiplier},
            {"policy", detail::policy_json(c.data.offline_expansion.policy)}}}}},
        {"run",
         {{"epochs", c.run.epochs},
          {"batch_size", c.run.batch_size},
          {"seed", c.run.seed},
          {"threads", c.run.threads},
          {"output_dir", c.run.output_dir},
          {"threshold", c.run.threshold}}},
    };
}

/// Applies "a.b.c=value" to a JSON tree. The value is parsed as JSON when
/// possible and taken as a plain string otherwise.
inline void apply_override(json &j, const std::string &assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "' is not of the form key.path=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception &) {
        value = raw;
    }
    json *node = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot - start);
        if (part.empty()) {
            throw ConfigError("override key '" + key + "' has an empty component");
        }
        if (!node->is_object()) {
            *node = json::object();
        }
        if (dot == std::string::npos) {
            (*node)[part] = value;
            break;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

[[nodiscard]] inline json read_json_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
}

/// Resolves file (optional) + environment + overrides into a validated
/// config.
[[nodiscard]] inline RunConfig resolve_config(const std::optional<std::filesystem::path> &file,
                                              const std::vector<std::string> &overrides) {
    json j = file ? read_json_file(*file) : json::object();
    if (const char *env = std::getenv("LQER_OUTPUT_DIR"); env != nullptr && *env != '\0') {
        apply_override(j, std::string("run.output_dir=\"") + env + "\"");
    }
    for (const auto &o : overrides) {
        apply_override(j, o);
    }
    return config_from_json(j);
}

} // namespace lqer
