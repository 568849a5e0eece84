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
 * AdamW with per-group learning rates, and a reduce-on-plateau scheduler.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "lqer/errors.hpp"
#include "lqer/model.hpp"

namespace lqer::train {

struct PlateauConfig {
    double factor{0.1};
    std::size_t patience{3};
    double threshold{1e-4}; ///< absolute improvement required
    std::string monitor{"val_loss"}; ///< "val_loss" (minimized) or "val_accuracy" (maximized)
};

struct OptimConfig {
    double lr_backbone{1e-3};
    double lr_quantum_and_head{1e-3};
    double beta1{0.9};
    double beta2{0.999};
    double eps{1e-8};
    double weight_decay{1e-2};
    PlateauConfig plateau{};

    void validate() const {
        if (!(lr_backbone > 0) || !(lr_quantum_and_head > 0)) {
            throw ConfigError("optim: learning rates must be positive");
        }
        if (lr_quantum_and_head < lr_backbone) {
            throw ConfigError("optim: lr_quantum_and_head must be >= lr_backbone");
        }
        if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1) || !(eps > 0) ||
            weight_decay < 0) {
            throw ConfigError("optim: invalid beta/eps/weight_decay");
        }
        if (!(plateau.factor > 0 && plateau.factor < 1) || plateau.patience < 1 ||
            plateau.threshold < 0) {
            throw ConfigError("optim: invalid plateau settings");
        }
        if (plateau.monitor != "val_loss" && plateau.monitor != "val_accuracy") {
            throw ConfigError("optim: plateau.monitor must be val_loss or val_accuracy");
        }
    }
};

/**
 * Decoupled weight decay Adam:
 *   p <- p * (1 - lr*wd)
 *   m <- b1 m + (1-b1) g,   v <- b2 v + (1-b2) g^2
 *   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
 * with lr taken from the parameter's group and scaled by the scheduler
 * multiplier. Parameters that do not track gradients (frozen) are skipped.
 */
class AdamW {
  public:
    AdamW(std::vector<model::Parameter> params, OptimConfig cfg)
        : params_{std::move(params)}, cfg_{cfg} {
        if (cfg_.lr_backbone < 0 || cfg_.lr_quantum_and_head < 0) {
            throw ConfigError("AdamW: learning rates must be non-negative");
        }
        state_.resize(params_.size());
        for (std::size_t i = 0; i < params_.size(); ++i) {
            state_[i].m.assign(params_[i].tensor.numel(), 0.0);
            state_[i].v.assign(params_[i].tensor.numel(), 0.0);
        }
    }

    [[nodiscard]] double lr(model::ParamGroup g) const noexcept {
        return multiplier_ * (g == model::ParamGroup::Backbone ? cfg_.lr_backbone
                                                               : cfg_.lr_quantum_and_head);
    }

    void set_multiplier(double m) noexcept { multiplier_ = m; }
    [[nodiscard]] double multiplier() const noexcept { return multiplier_; }
    [[nodiscard]] std::size_t steps() const noexcept { return step_; }

    /// (name, group) for every managed parameter, in registry order.
    [[nodiscard]] std::vector<std::pair<std::string, model::ParamGroup>> membership() const {
        std::vector<std::pair<std::string, model::ParamGroup>> out;
        out.reserve(params_.size());
        for (const auto &p : params_) {
            out.emplace_back(p.name, p.group);
        }
        return out;
    }

    void step() {
        ++step_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto &p = params_[i];
            if (!p.tensor.requires_grad()) {
                continue;
            }
            if (!p.tensor.has_grad()) {
                throw UsageError("AdamW: parameter '" + p.name + "' has no gradient");
            }
            const double rate = lr(p.group);
            auto w = p.tensor.data();
            auto g = p.tensor.grad();
            auto &m = state_[i].m;
            auto &v = state_[i].v;
            const double decay = 1.0 - rate * cfg_.weight_decay;
            for (std::size_t k = 0; k < w.size(); ++k) {
                w[k] *= decay;
                m[k] = cfg_.beta1 * m[k] + (1 - cfg_.beta1) * g[k];
                v[k] = cfg_.beta2 * v[k] + (1 - cfg_.beta2) * g[k] * g[k];
                const double mhat = m[k] / bc1;
                const double vhat = v[k] / bc2;
                w[k] -= rate * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
    }

    void zero_grad() {
        for (auto &p : params_) {
            p.tensor.zero_grad();
        }
    }

  private:
    struct Moments {
        std::vector<double> m, v;
    };
    std::vector<model::Parameter> params_;
    OptimConfig cfg_;
    std::vector<Moments> state_;
    std::size_t step_{0};
    double multiplier_{1.0};
};

/**
 * Multiplies the learning-rate multiplier by `factor` once the monitored
 * value has failed to improve by more than `threshold` for `patience`
 * consecutive observations; the counter restarts after each reduction.
 */
class PlateauScheduler {
  public:
    explicit PlateauScheduler(PlateauConfig cfg) : cfg_{std::move(cfg)} {}

    /// Records one epoch's monitored value; returns the multiplier to use.
    double observe(double value) {
        const bool maximize = cfg_.monitor == "val_accuracy";
        const double v = maximize ? -value : value;
        if (v < best_ - cfg_.threshold) {
            best_ = v;
            bad_epochs_ = 0;
        } else {
            ++bad_epochs_;
            if (bad_epochs_ >= cfg_.patience) {
                multiplier_ *= cfg_.factor;
                bad_epochs_ = 0;
                ++reductions_;
            }
        }
        return multiplier_;
    }

    [[nodiscard]] double multiplier() const noexcept { return multiplier_; }
    [[nodiscard]] std::size_t reductions() const noexcept { return reductions_; }

  private:
    PlateauConfig cfg_;
    double best_{std::numeric_limits<double>::infinity()};
    std::size_t bad_epochs_{0};
    std::size_t reductions_{0};
    double multiplier_{1.0};
};

/// Multipliers produced by replaying a whole history through a fresh
/// scheduler, one per entry.
[[nodiscard]] inline std::vector<double>
plateau_multipliers(const std::vector<double> &history, const PlateauConfig &cfg) {
    PlateauScheduler s{cfg};
    std::vector<double> out;
    out.reserve(history.size());
    for (double v : history) {
        out.push_back(s.observe(v));
    }
    return out;
}

} // namespace lqer::train
