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
 * Epoch loop, evaluation and best-checkpoint selection.
 */
#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lqer/autodiff.hpp"
#include "lqer/data.hpp"
#include "lqer/errors.hpp"
#include "lqer/log.hpp"
#include "lqer/model.hpp"
#include "lqer/rng.hpp"
#include "lqer/train/metrics.hpp"
#include "lqer/train/optim.hpp"

namespace lqer::train {

struct MetricsReport {
    std::size_t epoch{0};
    double train_loss{0};
    double val_loss{0};
    double accuracy{0};
    std::optional<double> auc{};
    double f1{0};
    double sensitivity{0};
    double specificity{0};
    double precision{0};
    double recall{0};
    Confusion confusion{};
    double epoch_seconds{0};
    double lr_backbone{0};
    double lr_quantum_and_head{0};
};

inline void to_json(nlohmann::json &j, const MetricsReport &r) {
    j = nlohmann::json{
        {"epoch", r.epoch},
        {"train_loss", r.train_loss},
        {"val_loss", r.val_loss},
        {"accuracy", r.accuracy},
        {"auc", r.auc ? nlohmann::json(*r.auc) : nlohmann::json(nullptr)},
        {"f1", r.f1},
        {"sensitivity", r.sensitivity},
        {"specificity", r.specificity},
        {"precision", r.precision},
        {"recall", r.recall},
        {"confusion",
         {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}}},
        {"epoch_seconds", r.epoch_seconds},
        {"lr_backbone", r.lr_backbone},
        {"lr_quantum_and_head", r.lr_quantum_and_head},
    };
}

struct TrainOptions {
    std::size_t batch_size{16};
    std::size_t threads{1};
    std::uint64_t seed{0};
    data::AugmentPolicy augment{};
    double threshold{0.5};
};

/// Standardized input batch plus labels.
struct Batch {
    ad::Tensor images; ///< [B,C,H,W]
    ad::Tensor labels; ///< [B]
};

/// Stacks samples into a batch: resize to the model input if needed, then
/// per-channel standardization.
[[nodiscard]] inline Batch make_batch(const data::Dataset &samples,
                                      std::span<const std::size_t> idx,
                                      const model::BackboneConfig &cfg) {
    const std::size_t n = idx.size(), c = cfg.channels, s = cfg.input_size;
    Batch b{ad::Tensor::zeros({n, c, s, s}), ad::Tensor::zeros({n})};
    auto X = b.images.data();
    for (std::size_t k = 0; k < n; ++k) {
        const auto &sample = samples.at(idx[k]);
        data::require_binary(sample.label);
        data::Image img = data::convert_channels(sample.image, c);
        if (img.dim(1) != s || img.dim(2) != s) {
            img = data::resize(img, s, s);
        }
        const data::Image z = data::standardize(img);
        std::copy(z.data().begin(), z.data().end(),
                  X.begin() + static_cast<std::ptrdiff_t>(k * c * s * s));
        b.labels.data()[k] = static_cast<double>(sample.label);
    }
    return b;
}

struct EpochResult {
    double train_loss{0};
    double seconds{0};
};

namespace detail {
inline bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}
} // namespace detail

/**
 * One pass over `train` in shuffled mini-batches:
 * augment -> standardize -> forward -> BCE -> backward -> AdamW -> zero grads.
 * Shuffle and augmentation draws come from counter-seeded streams keyed by
 * (epoch, sample index).
 */
inline EpochResult train_epoch(model::HybridModel &model, AdamW &opt,
                               const data::Dataset &train, const TrainOptions &o,
                               std::size_t epoch) {
    if (train.empty()) {
        throw DataError("train_epoch: empty training set");
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = make_rng(counter_seed(substream_seed(o.seed, "shuffle"), epoch));
    data::detail::shuffle(order, shuffle_rng);

    const std::uint64_t aug_base = substream_seed(o.seed, "augment");
    const std::size_t bs = std::max<std::size_t>(o.batch_size, 1);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    data::Dataset augmented(train.size());
    for (std::size_t start = 0; start < order.size(); start += bs) {
        const std::size_t end = std::min(order.size(), start + bs);
        std::vector<std::size_t> local(end - start);
        parallel_for(end - start, o.threads, [&](std::size_t k) {
            const std::size_t i = order[start + k];
            Rng r = make_rng(counter_seed(aug_base, epoch, i));
            augmented[i] = data::augment(train[i], o.augment, r);
            local[k] = i;
        });
        Batch b = make_batch(augmented, local, model.config().backbone);
        ad::Tape tape;
        const ad::Tensor logits = model.hybrid_forward(tape, b.images);
        const ad::Tensor loss = ad::bce_with_logits(tape, logits, b.labels);
        if (!std::isfinite(loss.item()) || !detail::all_finite(logits.data())) {
            throw NumericalError("non-finite loss in epoch " + std::to_string(epoch) +
                                 " at batch " + std::to_string(batches));
        }
        model.hybrid_backward(tape, loss);
        opt.step();
        opt.zero_grad();
        loss_sum += loss.item();
        ++batches;
    }
    const auto t1 = std::chrono::steady_clock::now();
    return {loss_sum / static_cast<double>(batches),
            std::chrono::duration<double>(t1 - t0).count()};
}

/// Model scores for a dataset, without augmentation or gradient tracking.
struct Predictions {
    std::vector<double> logits;
    std::vector<double> probabilities;
    std::vector<int> labels;
    std::vector<std::vector<double>> quantum; ///< q per sample (hybrid only)
};

[[nodiscard]] inline Predictions predict(model::HybridModel &model,
                                         const data::Dataset &ds,
                                         std::size_t batch_size = 32) {
    const ad::NoGradGuard no_grad;
    Predictions p;
    const std::size_t bs = std::max<std::size_t>(batch_size, 1);
    for (std::size_t start = 0; start < ds.size(); start += bs) {
        const std::size_t end = std::min(ds.size(), start + bs);
        std::vector<std::size_t> idx(end - start);
        std::iota(idx.begin(), idx.end(), start);
        const Batch b = make_batch(ds, idx, model.config().backbone);
        ad::Tape tape;
        const auto r = model.forward(tape, b.images);
        const std::size_t nq = model.config().pqc.n_qubits;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const double z = r.logits.data()[k];
            p.logits.push_back(z);
            p.probabilities.push_back(ad::stable_sigmoid(z));
            p.labels.push_back(ds[idx[k]].label);
            if (model.hybrid()) {
                const auto q = r.quantum.data().subspan(k * nq, nq);
                p.quantum.emplace_back(q.begin(), q.end());
            }
        }
    }
    return p;
}

/// Mean BCE of logits against labels (same formula as the training loss).
[[nodiscard]] inline double mean_bce(std::span<const double> logits,
                                     std::span<const int> labels) {
    double s = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double x = logits[i];
        s += std::max(x, 0.0) - x * labels[i] + std::log1p(std::exp(-std::abs(x)));
    }
    return s / static_cast<double>(logits.size());
}

[[nodiscard]] inline MetricsReport report_from(const Predictions &p, double threshold) {
    MetricsReport r;
    r.confusion = confusion_at(p.probabilities, p.labels, threshold);
    const Rates rates = rates_from(r.confusion);
    r.accuracy = rates.accuracy;
    r.sensitivity = rates.sensitivity;
    r.specificity = rates.specificity;
    r.precision = rates.precision;
    r.recall = rates.recall;
    r.f1 = rates.f1;
    r.auc = roc_auc(p.probabilities, p.labels);
    r.val_loss = mean_bce(p.logits, p.labels);
    return r;
}

/// Deterministic evaluation; `val_loss` holds the mean BCE on `ds`.
[[nodiscard]] inline MetricsReport evaluate(model::HybridModel &model,
                                            const data::Dataset &ds,
                                            double threshold = 0.5) {
    if (ds.empty()) {
        throw DataError("evaluate: empty dataset");
    }
    const auto p = predict(model, ds);
    auto r = report_from(p, threshold);
    if (!r.auc) {
        log::warn("evaluate: only one class present; AUC undefined");
    }
    return r;
}

struct FitOptions {
    std::size_t epochs{14};
    OptimConfig optim{};
    TrainOptions train{};
    /// When set, last.ckpt is rewritten after every epoch and best.ckpt
    /// whenever validation accuracy improves (both atomically).
    std::optional<std::filesystem::path> checkpoint_dir{};
    nlohmann::json checkpoint_meta{};
    std::function<void(const MetricsReport &)> on_epoch{};
};

struct FitResult {
    std::vector<MetricsReport> history;
    std::size_t best_epoch{0}; ///< 0 = initial weights
    double best_val_accuracy{-1};
    ad::TensorContainer best;  ///< deep copy of the best weights
};

namespace detail {
inline ad::TensorContainer snapshot(const model::HybridModel &m, nlohmann::json meta) {
    // Round-trip through bytes so the snapshot owns its storage.
    return ad::decode_container(ad::encode_container(m.to_container(std::move(meta))));
}
} // namespace detail

/**
 * Per epoch: train_epoch, evaluate on `val`, feed the plateau scheduler.
 * Keeps the weights with the best validation accuracy (earliest on ties).
 */
inline FitResult fit(model::HybridModel &model, const data::Dataset &train,
                     const data::Dataset &val, const FitOptions &fo) {
    AdamW opt{model.parameters(), fo.optim};
    PlateauScheduler sched{fo.optim.plateau};
    FitResult res;
    res.best = detail::snapshot(model, {{"epoch", 0}});
    const auto write = [&](const std::string &name, const ad::TensorContainer &c) {
        if (fo.checkpoint_dir) {
            ad::save_container(*fo.checkpoint_dir / name, c);
        }
    };
    write("best.ckpt", res.best);
    write("last.ckpt", res.best);
    for (std::size_t e = 1; e <= fo.epochs; ++e) {
        const EpochResult er = train_epoch(model, opt, train, fo.train, e);
        MetricsReport r = evaluate(model, val, fo.train.threshold);
        r.epoch = e;
        r.train_loss = er.train_loss;
        r.epoch_seconds = er.seconds;
        r.lr_backbone = opt.lr(model::ParamGroup::Backbone);
        r.lr_quantum_and_head = opt.lr(model::ParamGroup::QuantumAndHead);
        const double monitored =
            fo.optim.plateau.monitor == "val_accuracy" ? r.accuracy : r.val_loss;
        opt.set_multiplier(sched.observe(monitored));

        nlohmann::json meta = fo.checkpoint_meta;
        meta["epoch"] = e;
        const auto snap = detail::snapshot(model, meta);
        write("last.ckpt", snap);
        if (r.accuracy > res.best_val_accuracy) {
            res.best_val_accuracy = r.accuracy;
            res.best_epoch = e;
            res.best = snap;
            write("best.ckpt", snap);
        }
        res.history.push_back(r);
        if (fo.on_epoch) {
            fo.on_epoch(r);
        }
    }
    return res;
}

/// Fixed column order of history.csv. Wall-clock time is kept out so that
/// identical runs give byte-identical files; see timing.csv.
inline constexpr const char *history_header =
    "epoch,train_loss,val_loss,accuracy,auc,f1,sensitivity,specificity,"
    "precision,recall,tp,fp,tn,fn,lr_backbone,lr_quantum_and_head";

inline void write_history_csv(const std::filesystem::path &path,
                              const std::vector<MetricsReport> &history) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << history_header << '\n' << std::setprecision(17);
    for (const auto &r : history) {
        out << r.epoch << ',' << r.train_loss << ',' << r.val_loss << ',' << r.accuracy << ',';
        if (r.auc) {
            out << *r.auc;
        } else {
            out << "nan";
        }
        out << ',' << r.f1 << ',' << r.sensitivity << ',' << r.specificity << ','
            << r.precision << ',' << r.recall << ',' << r.confusion.tp << ','
            << r.confusion.fp << ',' << r.confusion.tn << ',' << r.confusion.fn << ','
            << r.lr_backbone << ',' << r.lr_quantum_and_head << '\n';
    }
}

inline void write_timing_csv(const std::filesystem::path &path,
                             const std::vector<MetricsReport> &history) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << "epoch,epoch_seconds\n" << std::setprecision(6);
    for (const auto &r : history) {
        out << r.epoch << ',' << r.epoch_seconds << '\n';
    }
}

} // namespace lqer::train
