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
 * Subcommand implementations behind the `lqer` executable.
 *
 * Each command takes a resolved RunConfig, writes it to output_dir before
 * doing anything else, and reports failures as lqer::Error subclasses; the
 * executable maps those to exit codes (see errors.hpp).
 */
#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lqer/config.hpp"
#include "lqer/data.hpp"
#include "lqer/log.hpp"
#include "lqer/model.hpp"
#include "lqer/selfcheck.hpp"
#include "lqer/train.hpp"

namespace lqer::app {

namespace fs = std::filesystem;

inline constexpr const char *resolved_config_name = "config.resolved.json";

inline void write_text(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out || !(out << text)) {
        throw IoError("cannot write " + path.string());
    }
}

inline fs::path prepare_output_dir(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string() +
                      (ec ? ": " + ec.message() : std::string{}));
    }
    return dir;
}

/// Writes config.resolved.json; returns the output directory.
inline fs::path write_resolved_config(const RunConfig &cfg) {
    const fs::path dir = prepare_output_dir(cfg.run.output_dir);
    write_text(dir / resolved_config_name, to_json(cfg).dump(2) + "\n");
    return dir;
}

/// The dataset named by the data section, already at the model's input
/// geometry for directory sources.
[[nodiscard]] inline data::Dataset load_dataset(const RunConfig &cfg,
                                                bool require_both_classes = true) {
    if (cfg.data.source == "synthetic") {
        return data::synthesize_dataset(cfg.data.synthetic.n_per_class,
                                        cfg.data.synthetic.patch_size, cfg.data_seed());
    }
    data::LoadOptions opt;
    opt.channels = cfg.model.backbone.channels;
    opt.resize_to = cfg.model.backbone.input_size;
    opt.require_both_classes = require_both_classes;
    return data::load_directory(cfg.data.path, opt).samples;
}

/// Train / validation / test indices into one dataset. Validation is carved
/// from the training portion with its own seed, grouped the same way.
struct Partition {
    std::vector<std::size_t> train, val, test;
};

[[nodiscard]] inline Partition partition(const data::Dataset &ds, const RunConfig &cfg) {
    const auto outer = data::split_indices(ds, cfg.split_spec());
    const auto inner = data::split_indices(data::select(ds, outer.train), cfg.val_split_spec());
    Partition p;
    p.test = outer.test;
    for (auto i : inner.train) {
        p.train.push_back(outer.train[i]);
    }
    for (auto i : inner.test) {
        p.val.push_back(outer.train[i]);
    }
    return p;
}

// ---------------------------------------------------------------- synth

struct SynthResult {
    fs::path dataset_dir;
    fs::path manifest;
    std::size_t rows{0};
    data::ClassCounts counts{};
};

/// Synthesizes the configured dataset, exports it in directory layout under
/// output_dir/dataset and writes manifest.csv with the split each sample
/// falls into under this config.
inline SynthResult cmd_synth(const RunConfig &cfg, std::ostream &out = std::cout) {
    cfg.validate();
    const fs::path dir = write_resolved_config(cfg);
    const auto ds = data::synthesize_dataset(cfg.data.synthetic.n_per_class,
                                             cfg.data.synthetic.patch_size, cfg.data_seed());
    SynthResult r;
    r.dataset_dir = dir / "dataset";
    auto rows = data::export_directory(ds, r.dataset_dir);
    const auto parts = partition(ds, cfg);
    for (const auto &[name, idx] : {std::pair{"train", &parts.train},
                                    std::pair{"val", &parts.val},
                                    std::pair{"test", &parts.test}}) {
        for (auto i : *idx) {
            rows[i].split = name;
        }
    }
    r.manifest = r.dataset_dir / "manifest.csv";
    data::write_manifest(r.manifest, rows);
    r.rows = rows.size();
    r.counts = data::count_classes(ds);
    out << "wrote " << r.rows << " samples to " << r.dataset_dir.string() << " ("
        << r.counts.positive << " positive, " << r.counts.negative << " negative)\n";
    return r;
}

// ---------------------------------------------------------------- train

struct TrainRun {
    train::FitResult fit;
    train::MetricsReport test;
    nlohmann::json summary;
};

[[nodiscard]] inline std::string run_label(model::Mode m) {
    return m == model::Mode::Hybrid ? "LQER hybrid" : "classical-only ablation";
}

/**
 * Trains one model into `dir`: best.ckpt, last.ckpt, history.csv,
 * timing.csv and summary.json. Data is loaded before anything but the
 * resolved config is written.
 */
inline TrainRun train_into(const RunConfig &cfg, const fs::path &dir,
                           std::ostream &out = std::cout) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto ds = load_dataset(cfg);
    const auto parts = partition(ds, cfg);
    data::Dataset train_set = data::select(ds, parts.train);
    const data::Dataset val_set = data::select(ds, parts.val);
    const data::Dataset test_set = data::select(ds, parts.test);
    const std::size_t base_train = train_set.size();
    if (cfg.data.offline_expansion.enabled) {
        train_set = data::expand_positives(train_set, cfg.data.offline_expansion.policy,
                                           cfg.data.offline_expansion.multiplier,
                                           substream_seed(cfg.run.seed, "expand"));
    }
    prepare_output_dir(dir);

    model::HybridModel m(cfg.model, cfg.run.seed);
    m.set_quantum_options({cfg.run.threads, pqc::half_pi});

    train::FitOptions fo;
    fo.epochs = cfg.run.epochs;
    fo.optim = cfg.optim;
    fo.train.batch_size = cfg.run.batch_size;
    fo.train.threads = cfg.run.threads;
    fo.train.seed = cfg.run.seed;
    fo.train.augment = cfg.data.augment;
    fo.train.threshold = cfg.run.threshold;
    fo.checkpoint_dir = dir;
    fo.checkpoint_meta = {{"mode", model::to_string(cfg.model.mode)}, {"seed", cfg.run.seed}};
    fo.on_epoch = [&](const train::MetricsReport &r) {
        std::ostringstream os;
        os << "epoch " << r.epoch << "/" << cfg.run.epochs << std::fixed << std::setprecision(4)
           << "  train_loss " << r.train_loss << "  val_loss " << r.val_loss << "  val_acc "
           << r.accuracy << "  (" << std::setprecision(1) << r.epoch_seconds << " s)\n";
        out << os.str();
    };
    out << run_label(cfg.model.mode) << ": " << train_set.size() << " train, " << val_set.size()
        << " val, " << test_set.size() << " test samples; " << m.parameter_count()
        << " parameters\n";

    TrainRun run;
    run.fit = train::fit(m, train_set, val_set, fo);
    train::write_history_csv(dir / "history.csv", run.fit.history);
    train::write_timing_csv(dir / "timing.csv", run.fit.history);

    m.load_container(run.fit.best);
    run.test = train::evaluate(m, test_set, cfg.run.threshold);
    run.test.epoch = run.fit.best_epoch;
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto &mon = m.angle_monitor();
    run.summary = {
        {"mode", model::to_string(cfg.model.mode)},
        {"label", run_label(cfg.model.mode)},
        {"epochs", cfg.run.epochs},
        {"best_epoch", run.fit.best_epoch},
        {"best_val_accuracy", run.fit.history.empty() ? nlohmann::json(nullptr)
                                                       : nlohmann::json(run.fit.best_val_accuracy)},
        {"test", run.test},
        {"samples",
         {{"train", train_set.size()}, {"train_before_expansion", base_train},
          {"val", val_set.size()}, {"test", test_set.size()}}},
        {"parameters",
         {{"total", m.parameter_count()},
          {"backbone", m.parameter_count(model::ParamGroup::Backbone)},
          {"quantum_and_head", m.parameter_count(model::ParamGroup::QuantumAndHead)}}},
        {"angles",
         {{"observed", mon.count},
          {"min", mon.count ? nlohmann::json(mon.min) : nlohmann::json(nullptr)},
          {"max", mon.count ? nlohmann::json(mon.max) : nlohmann::json(nullptr)},
          {"within_open_period", mon.within_open_period()}}},
        {"seconds", seconds},
    };
    write_text(dir / "summary.json", run.summary.dump(2) + "\n");
    out << "test: accuracy " << run.test.accuracy << ", sensitivity " << run.test.sensitivity
        << ", specificity " << run.test.specificity << ", auc "
        << (run.test.auc ? std::to_string(*run.test.auc) : std::string("undefined")) << "\n";
    return run;
}

enum class Ablation { None, ClassicalOnly, Both };

[[nodiscard]] inline Ablation ablation_from_string(const std::string &s) {
    if (s.empty() || s == "none") {
        return Ablation::None;
    }
    if (s == "classical-only" || s == "classical_only") {
        return Ablation::ClassicalOnly;
    }
    if (s == "both") {
        return Ablation::Both;
    }
    throw UsageError("--ablation must be none, classical-only or both (got '" + s + "')");
}

/// Side-by-side table of several runs' test metrics, as Markdown.
[[nodiscard]] inline std::string comparison_markdown(const std::vector<nlohmann::json> &runs) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << "| metric |";
    for (const auto &r : runs) {
        os << ' ' << r.at("label").get<std::string>() << " |";
    }
    os << "\n|---|";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        os << "---:|";
    }
    os << '\n';
    for (const char *k : {"accuracy", "auc", "f1", "sensitivity", "specificity", "precision",
                          "recall"}) {
        os << "| " << k << " |";
        for (const auto &r : runs) {
            const auto &v = r.at("test").at(k);
            if (v.is_null()) {
                os << " undefined |";
            } else {
                os << ' ' << v.get<double>() << " |";
            }
        }
        os << '\n';
    }
    os << "| parameters |";
    for (const auto &r : runs) {
        os << ' ' << r.at("parameters").at("total").get<std::size_t>() << " |";
    }
    os << "\n| train seconds |";
    for (const auto &r : runs) {
        os << ' ' << std::setprecision(1) << r.at("seconds").get<double>() << " |";
    }
    os << '\n';
    return os.str();
}

/// Writes comparison.json and comparison.md into `dir`.
inline void write_comparison(const fs::path &dir, const std::vector<nlohmann::json> &runs) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto &r : runs) {
        j.push_back({{"mode", r.at("mode")}, {"label", r.at("label")}, {"test", r.at("test")},
                     {"parameters", r.at("parameters")}, {"seconds", r.at("seconds")}});
    }
    write_text(dir / "comparison.json", j.dump(2) + "\n");
    write_text(dir / "comparison.md", comparison_markdown(runs));
}

struct TrainCommandResult {
    std::vector<TrainRun> runs; ///< hybrid first when both were trained
};

/**
 * `lqer train`. `None` trains the configured model; `ClassicalOnly` forces
 * the q-path off; `Both` trains hybrid and classical-only under the same
 * seed into output_dir/{hybrid,classical-only} and writes the comparison.
 */
inline TrainCommandResult cmd_train(RunConfig cfg, Ablation ablation = Ablation::None,
                                    std::ostream &out = std::cout) {
    if (ablation == Ablation::ClassicalOnly) {
        cfg.model.mode = model::Mode::ClassicalOnly;
    }
    cfg.validate();
    const fs::path dir = write_resolved_config(cfg);
    TrainCommandResult res;
    if (ablation != Ablation::Both) {
        res.runs.push_back(train_into(cfg, dir, out));
        return res;
    }
    std::vector<nlohmann::json> summaries;
    for (const auto mode : {model::Mode::Hybrid, model::Mode::ClassicalOnly}) {
        RunConfig c = cfg;
        c.model.mode = mode;
        res.runs.push_back(train_into(c, dir / model::to_string(mode), out));
        summaries.push_back(res.runs.back().summary);
    }
    write_comparison(dir, summaries);
    out << '\n' << comparison_markdown(summaries);
    return res;
}

// ---------------------------------------------------------------- eval

[[nodiscard]] inline model::HybridModel load_checkpoint(const fs::path &path,
                                                        const model::ModelConfig &cfg) {
    const auto container = ad::load_container(path);
    model::HybridModel m(cfg);
    m.load_container(container);
    return m;
}

/// Model built from the architecture recorded in the checkpoint itself.
[[nodiscard]] inline model::HybridModel load_checkpoint(const fs::path &path) {
    const auto container = ad::load_container(path);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(container.header);
    } catch (const nlohmann::json::exception &e) {
        throw DataError(path.string() + ": checkpoint header is not valid JSON: " + e.what());
    }
    if (!header.contains("model")) {
        throw DataError(path.string() + ": checkpoint header has no model section");
    }
    model::HybridModel m(model_config_from_json(header.at("model"), "checkpoint.model"));
    m.load_container(container);
    return m;
}

[[nodiscard]] inline data::Dataset eval_subset(const RunConfig &cfg, const data::Dataset &ds,
                                               const std::string &which) {
    if (which == "all") {
        return ds;
    }
    const auto parts = partition(ds, cfg);
    if (which == "train") {
        return data::select(ds, parts.train);
    }
    if (which == "val") {
        return data::select(ds, parts.val);
    }
    if (which == "test") {
        return data::select(ds, parts.test);
    }
    throw UsageError("--split must be train, val, test or all (got '" + which + "')");
}

/// `lqer eval`: metrics of a checkpoint on one split of the configured data;
/// written to output_dir/eval.json and printed.
inline train::MetricsReport cmd_eval(const RunConfig &cfg, const fs::path &checkpoint,
                                     const std::string &which = "test",
                                     std::ostream &out = std::cout) {
    cfg.validate();
    const fs::path dir = write_resolved_config(cfg);
    auto m = load_checkpoint(checkpoint, cfg.model);
    const auto ds = eval_subset(cfg, load_dataset(cfg, false), which);
    auto r = train::evaluate(m, ds, cfg.run.threshold);
    nlohmann::json j = r;
    j.erase("train_loss");
    j.erase("epoch");
    j.erase("epoch_seconds");
    j.erase("lr_backbone");
    j.erase("lr_quantum_and_head");
    j["loss"] = j["val_loss"];
    j.erase("val_loss");
    j["split"] = which;
    j["samples"] = ds.size();
    j["checkpoint"] = checkpoint.string();
    write_text(dir / "eval.json", j.dump(2) + "\n");
    out << j.dump(2) << '\n';
    return r;
}

// ---------------------------------------------------------------- predict

struct Prediction {
    int label{0};
    double probability{0};
    std::vector<double> quantum;
    bool resized{false};
};

/// Classifies one PNG with the architecture stored in the checkpoint. An
/// image of the wrong size is resized with a warning.
inline Prediction predict_image(const fs::path &checkpoint, const fs::path &image,
                                double threshold = 0.5) {
    auto m = load_checkpoint(checkpoint);
    const auto &bb = m.config().backbone;
    data::Image img = data::convert_channels(data::read_png(image), bb.channels);
    Prediction p;
    if (img.dim(1) != bb.input_size || img.dim(2) != bb.input_size) {
        log::warn(image.string() + " is " + std::to_string(img.dim(2)) + "x" +
                  std::to_string(img.dim(1)) + "; resizing to " + std::to_string(bb.input_size) +
                  "x" + std::to_string(bb.input_size));
        img = data::resize(img, bb.input_size, bb.input_size);
        p.resized = true;
    }
    const data::Dataset one{{img, 0, "predict", data::Source::Directory}};
    const auto pr = train::predict(m, one, 1);
    p.probability = pr.probabilities.at(0);
    p.label = p.probability >= threshold ? 1 : 0;
    if (!pr.quantum.empty()) {
        p.quantum = pr.quantum.front();
    }
    return p;
}

inline Prediction cmd_predict(const RunConfig &cfg, const fs::path &checkpoint,
                              const fs::path &image, std::ostream &out = std::cout) {
    cfg.validate();
    write_resolved_config(cfg);
    const auto p = predict_image(checkpoint, image, cfg.run.threshold);
    std::ostringstream os;
    os << std::setprecision(17);
    os << "label " << p.label << (p.label == 1 ? " (stenosis)" : " (normal)") << '\n';
    os << "probability " << p.probability << '\n';
    os << "q";
    if (p.quantum.empty()) {
        os << " (none: classical-only model)";
    }
    for (double q : p.quantum) {
        os << ' ' << q;
    }
    os << '\n';
    out << os.str();
    return p;
}

// ---------------------------------------------------------------- selfcheck

/// Runs every oracle check and prints one line each; true iff all pass.
inline bool cmd_selfcheck(const selfcheck::Options &opt = {}, std::ostream &out = std::cout) {
    bool ok = true;
    for (const auto &r : selfcheck::run_all(opt)) {
        std::ostringstream os;
        os << (r.pass ? "PASS " : "FAIL ") << std::left << std::setw(18) << r.name
           << " max deviation " << std::scientific << std::setprecision(3) << r.max_deviation
           << " (tolerance " << r.tolerance << ", " << std::fixed << std::setprecision(2)
           << r.seconds << " s)\n";
        out << os.str();
        ok = ok && r.pass;
    }
    out << (ok ? "selfcheck passed\n" : "selfcheck FAILED\n");
    return ok;
}

} // namespace lqer::app
