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
#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lqer/errors.hpp"

namespace lqer::ad {

using Shape = std::vector<std::size_t>;

[[nodiscard]] inline std::size_t numel(const Shape &s) noexcept {
    return std::accumulate(s.begin(), s.end(), std::size_t{1},
                           std::multiplies<>{});
}

[[nodiscard]] inline std::string shape_str(const Shape &s) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < s.size(); ++i) {
        os << (i ? "," : "") << s[i];
    }
    os << ')';
    return os.str();
}

/// Thread-local switch: while set, ops record nothing and results do not
/// track gradients.
inline bool &grad_disabled() noexcept {
    thread_local bool disabled = false;
    return disabled;
}

/// Disables tape recording for the current scope (evaluation, inference).
class NoGradGuard {
  public:
    NoGradGuard() : previous_{grad_disabled()} { grad_disabled() = true; }
    ~NoGradGuard() { grad_disabled() = previous_; }
    NoGradGuard(const NoGradGuard &) = delete;
    NoGradGuard &operator=(const NoGradGuard &) = delete;

  private:
    bool previous_;
};

/**
 * Dense row-major f64 array with an optional gradient buffer.
 *
 * Copies share storage: a Tensor is a handle, so parameters captured by the
 * tape and held by a model refer to the same buffers. Use clone() for a deep
 * copy.
 */
class Tensor {
  public:
    Tensor() : impl_{std::make_shared<Impl>()} {}

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        Tensor t;
        t.impl_->data.assign(lqer::ad::numel(shape), 0.0);
        t.impl_->shape = std::move(shape);
        t.set_requires_grad(requires_grad);
        return t;
    }

    static Tensor full(Shape shape, double value, bool requires_grad = false) {
        Tensor t = zeros(std::move(shape), requires_grad);
        std::fill(t.impl_->data.begin(), t.impl_->data.end(), value);
        return t;
    }

    static Tensor from(Shape shape, std::vector<double> values,
                       bool requires_grad = false) {
        if (lqer::ad::numel(shape) != values.size()) {
            throw StructuralError("Tensor: " + std::to_string(values.size()) +
                                  " values do not fill shape " +
                                  shape_str(shape));
        }
        Tensor t;
        t.impl_->shape = std::move(shape);
        t.impl_->data = std::move(values);
        t.set_requires_grad(requires_grad);
        return t;
    }

    static Tensor scalar(double v, bool requires_grad = false) {
        return from({1}, {v}, requires_grad);
    }

    [[nodiscard]] Tensor clone() const {
        Tensor t;
        *t.impl_ = *impl_;
        return t;
    }

    [[nodiscard]] const Shape &shape() const noexcept { return impl_->shape; }
    [[nodiscard]] std::size_t dim(std::size_t i) const {
        return impl_->shape.at(i);
    }
    [[nodiscard]] std::size_t rank() const noexcept {
        return impl_->shape.size();
    }
    [[nodiscard]] std::size_t numel() const noexcept {
        return impl_->data.size();
    }

    [[nodiscard]] std::span<double> data() noexcept { return impl_->data; }
    [[nodiscard]] std::span<const double> data() const noexcept {
        return impl_->data;
    }
    [[nodiscard]] double item() const {
        if (numel() != 1) {
            throw UsageError("item() on tensor of shape " + shape_str(shape()));
        }
        return impl_->data[0];
    }

    [[nodiscard]] bool requires_grad() const noexcept {
        return impl_->requires_grad;
    }
    void set_requires_grad(bool on) {
        impl_->requires_grad = on;
        if (on) {
            ensure_grad();
        } else {
            impl_->grad.clear();
        }
    }

    /// Gradient buffer; empty when the tensor does not track gradients.
    /// Writable through const handles: backward closures accumulate into
    /// the gradients of tensors they only read.
    [[nodiscard]] std::span<double> grad() const noexcept { return impl_->grad; }
    [[nodiscard]] bool has_grad() const noexcept { return !impl_->grad.empty(); }

    void ensure_grad() {
        if (impl_->grad.size() != impl_->data.size()) {
            impl_->grad.assign(impl_->data.size(), 0.0);
        }
    }
    void zero_grad() noexcept {
        std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
    }

    [[nodiscard]] bool same_storage(const Tensor &o) const noexcept {
        return impl_ == o.impl_;
    }

  private:
    struct Impl {
        Shape shape{};
        std::vector<double> data{};
        std::vector<double> grad{};
        bool requires_grad{false};
    };
    std::shared_ptr<Impl> impl_;
};

/**
 * Reverse-mode tape. Ops append one node per differentiable result in
 * evaluation order; backward() replays them in reverse.
 */
class Tape {
  public:
    /// Registers an op result and the closure that pushes its gradient to
    /// the op's inputs.
    void record(Tensor output, std::function<void()> backward_fn) {
        nodes_.push_back({std::move(output), std::move(backward_fn)});
    }

    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] bool empty() const noexcept { return nodes_.empty(); }
    void clear() noexcept { nodes_.clear(); }

    /// Seeds d(loss)/d(loss) = 1 and propagates. Intermediate gradients are
    /// reset first; leaf gradients accumulate across calls.
    void backward(Tensor loss) {
        if (loss.numel() != 1) {
            throw UsageError("backward: loss must be a scalar, got shape " +
                             shape_str(loss.shape()));
        }
        if (!loss.requires_grad()) {
            throw UsageError(
                "backward: loss does not depend on any tracked tensor "
                "(was forward run on this tape?)");
        }
        bool on_tape = false;
        for (auto &n : nodes_) {
            n.output.zero_grad();
            on_tape = on_tape || n.output.same_storage(loss);
        }
        if (!on_tape && !nodes_.empty()) {
            throw UsageError("backward: loss was not produced on this tape");
        }
        loss.grad()[0] += 1.0;
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
            it->backward();
        }
    }

  private:
    struct Node {
        Tensor output;
        std::function<void()> backward;
    };
    std::vector<Node> nodes_;
};

} // namespace lqer::ad
