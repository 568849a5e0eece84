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
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "lqer/errors.hpp"

namespace lqer::train {

struct Confusion {
    std::size_t tp{0}, fp{0}, tn{0}, fn{0};

    [[nodiscard]] std::size_t total() const noexcept { return tp + fp + tn + fn; }
};

/// Classification metrics derived from one confusion matrix plus AUC.
/// A rate whose denominator is zero is reported as 0.
struct Rates {
    double accuracy{0}, sensitivity{0}, specificity{0}, precision{0}, recall{0}, f1{0};
};

[[nodiscard]] inline Rates rates_from(const Confusion &c) {
    const auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    Rates r;
    r.accuracy = ratio(c.tp + c.tn, c.total());
    r.sensitivity = ratio(c.tp, c.tp + c.fn);
    r.specificity = ratio(c.tn, c.tn + c.fp);
    r.precision = ratio(c.tp, c.tp + c.fp);
    r.recall = r.sensitivity;
    r.f1 = (r.precision + r.recall) > 0
               ? 2 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

/// Predicted positive when score >= threshold.
[[nodiscard]] inline Confusion confusion_at(std::span<const double> scores,
                                            std::span<const int> labels,
                                            double threshold = 0.5) {
    if (scores.size() != labels.size()) {
        throw StructuralError("confusion: scores and labels differ in length");
    }
    Confusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        if (labels[i] == 1) {
            (pred ? c.tp : c.fn) += 1;
        } else {
            (pred ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

/**
 * Area under the ROC curve by the trapezoidal rule. Scores are visited in
 * descending order; all samples sharing a score move the curve in one
 * diagonal step, which is what gives tied pairs half credit.
 * Returns nullopt when either class is absent.
 */
[[nodiscard]] inline std::optional<double> roc_auc(std::span<const double> scores,
                                                   std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw StructuralError("roc_auc: scores and labels differ in length");
    }
    const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) {
        return std::nullopt;
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    // Accumulate in integer counts; area = sum over steps of
    // dFP * (TP_prev + TP_new) / 2, normalised once at the end.
    double area2 = 0.0; // twice the un-normalised area
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i, dtp = 0, dfp = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] == 1 ? dtp : dfp) += 1;
            ++j;
        }
        area2 += static_cast<double>(dfp) * static_cast<double>(2 * tp + dtp);
        tp += dtp;
        fp += dfp;
        i = j;
    }
    return area2 / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

} // namespace lqer::train
