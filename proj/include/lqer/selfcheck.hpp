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
 * Oracle-backed health checks, shared by `lqer selfcheck` and the tests.
 *
 * Each check compares a production code path against an independent
 * reference (dense Kronecker matrices, central finite differences, the
 * pairwise Mann-Whitney count) and reports the largest deviation seen.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lqer/model.hpp"
#include "lqer/oracles.hpp"
#include "lqer/pqc.hpp"
#include "lqer/qsim.hpp"
#include "lqer/rng.hpp"
#include "lqer/train/metrics.hpp"

namespace lqer::selfcheck {

struct CheckResult {
    std::string name;
    double max_deviation{0};
    double tolerance{0};
    double seconds{0};
    bool pass{false};
};

struct Options {
    /// Shift used by the circuit gradient; anything but pi/2 is a fault.
    double shift{pqc::half_pi};
    std::uint64_t seed{20260};
    std::size_t qsim_circuits{100};
    std::size_t norm_gates{1000};
    std::size_t pqc_circuits{100};
    std::size_t auc_sets{200};
};

namespace detail {
template <typename F> CheckResult timed(std::string name, double tol, F &&body) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    r.name = std::move(name);
    r.tolerance = tol;
    r.max_deviation = body();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.pass = std::isfinite(r.max_deviation) && r.max_deviation <= tol;
    return r;
}

inline qsim::Gate random_gate(Rng &rng, std::size_t n) {
    const auto kind = uniform_index(rng, n > 1 ? 5 : 3);
    const std::size_t t = uniform_index(rng, n);
    const double a = uniform(rng, -2 * std::numbers::pi, 2 * std::numbers::pi);
    switch (kind) {
    case 0: return qsim::Gate::rx(t, a);
    case 1: return qsim::Gate::ry(t, a);
    case 2: return qsim::Gate::rz(t, a);
    default: {
        std::size_t c = uniform_index(rng, n - 1);
        c += c >= t ? 1 : 0;
        return kind == 3 ? qsim::Gate::cnot(c, t) : qsim::Gate::cz(c, t);
    }
    }
}

inline oracle::Dense dense_gate(const qsim::Gate &g, std::size_t n) {
    switch (g.kind) {
    case qsim::GateKind::RX: return oracle::single(n, g.target, oracle::pauli_rotation('X', g.angle));
    case qsim::GateKind::RY: return oracle::single(n, g.target, oracle::pauli_rotation('Y', g.angle));
    case qsim::GateKind::RZ: return oracle::single(n, g.target, oracle::pauli_rotation('Z', g.angle));
    case qsim::GateKind::CNOT: return oracle::controlled(n, *g.control, g.target, oracle::pauli_x());
    case qsim::GateKind::CZ: return oracle::controlled(n, *g.control, g.target, oracle::pauli_z());
    }
    throw StructuralError("unknown gate kind");
}

inline std::vector<qsim::Complex> random_state(Rng &rng, std::size_t n) {
    std::vector<qsim::Complex> a(std::size_t{1} << n);
    double s = 0;
    for (auto &x : a) {
        x = {normal01(rng), normal01(rng)};
        s += std::norm(x);
    }
    for (auto &x : a) {
        x /= std::sqrt(s);
    }
    return a;
}
} // namespace detail

/// Random circuits (1..4 qubits, random start state) against the dense
/// matrix product of Kronecker-expanded gates. Deviation: max |amplitude|.
[[nodiscard]] inline CheckResult qsim_kronecker(const Options &o = {}) {
    return detail::timed("qsim-kronecker", 1e-10, [&] {
        Rng rng = make_rng(o.seed, "qsim-kronecker");
        double worst = 0;
        for (std::size_t c = 0; c < o.qsim_circuits; ++c) {
            const std::size_t n = 1 + uniform_index(rng, 4);
            const auto psi0 = detail::random_state(rng, n);
            std::vector<qsim::Gate> gates(1 + uniform_index(rng, 24));
            for (auto &g : gates) {
                g = detail::random_gate(rng, n);
            }
            const auto got = qsim::apply_circuit(qsim::StateVector::from_amplitudes(psi0), gates);
            std::vector<qsim::Complex> want = psi0;
            for (const auto &g : gates) {
                want = oracle::apply(detail::dense_gate(g, n), want);
            }
            for (std::size_t i = 0; i < want.size(); ++i) {
                worst = std::max(worst, std::abs(got.amplitudes()[i] - want[i]));
            }
        }
        return worst;
    });
}

/// Norm drift after a long random gate sequence on 4 qubits.
[[nodiscard]] inline CheckResult qsim_norm(const Options &o = {}) {
    return detail::timed("qsim-norm", 1e-12, [&] {
        Rng rng = make_rng(o.seed, "qsim-norm");
        auto s = qsim::zero_state(4);
        double worst = 0;
        for (std::size_t k = 0; k < o.norm_gates; ++k) {
            qsim::apply_gate_inplace(s, detail::random_gate(rng, 4));
            worst = std::max(worst, std::abs(s.norm() - 1.0));
        }
        return worst;
    });
}

/// Full Jacobian of the 4-qubit, depth-2 re-uploading circuit: shift rule
/// (one unit cotangent per readout) against central differences, h = 1e-5.
[[nodiscard]] inline CheckResult pqc_shift(const Options &o = {}) {
    return detail::timed("pqc-shift-vs-fd", 1e-6, [&] {
        const pqc::PqcConfig cfg{4, 2, pqc::Entangler::CnotRing, true};
        Rng rng = make_rng(o.seed, "pqc-shift");
        const std::size_t n = cfg.n_qubits, p = cfg.param_count();
        double worst = 0;
        for (std::size_t c = 0; c < o.pqc_circuits; ++c) {
            std::vector<double> z(n), theta(p);
            for (auto &v : z) {
                v = uniform(rng, -std::numbers::pi, std::numbers::pi);
            }
            for (auto &v : theta) {
                v = uniform(rng, -std::numbers::pi, std::numbers::pi);
            }
            for (std::size_t out = 0; out < n; ++out) {
                std::vector<double> cot(n, 0.0);
                cot[out] = 1.0;
                const auto g = pqc::vjp(z, theta, cfg, cot, o.shift);
                const auto fz = [&](std::span<const double> zz) {
                    return pqc::forward(zz, theta, cfg)[out];
                };
                const auto ft = [&](std::span<const double> tt) {
                    return pqc::forward(z, tt, cfg)[out];
                };
                const auto nz = oracle::numeric_gradient(fz, z);
                const auto nt = oracle::numeric_gradient(ft, theta);
                for (std::size_t k = 0; k < n; ++k) {
                    worst = std::max(worst, std::abs(g.inputs[k] - nz[k]));
                }
                for (std::size_t k = 0; k < p; ++k) {
                    worst = std::max(worst, std::abs(g.params[k] - nt[k]));
                }
            }
        }
        return worst;
    });
}

/// The smallest useful hybrid model: 1x8x8 input, d = 8, n = 2, L = 1.
[[nodiscard]] inline model::ModelConfig tiny_model_config() {
    model::ModelConfig m;
    m.backbone.input_size = 8;
    m.backbone.channels = 1;
    m.backbone.stem_channels = 4;
    m.backbone.stem_stride = 1;
    m.backbone.stage_widths = {4, 8};
    m.backbone.blocks_per_stage = {1, 1};
    m.pqc = {2, 1, pqc::Entangler::CnotRing, true};
    m.mode = model::Mode::Hybrid;
    return m;
}

/// Relative error with a small floor on the denominator, so that entries
/// whose true gradient is ~0 are judged on absolute terms.
[[nodiscard]] inline double relative_error(double a, double b, double floor = 1e-6) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

struct ParameterDeviation {
    std::string name;
    model::ParamGroup group;
    double max_relative_error;
};

/// Per parameter tensor: largest relative deviation between backpropagated
/// and central-difference gradients of the mean BCE loss.
[[nodiscard]] inline std::vector<ParameterDeviation>
model_fd_deviations(model::HybridModel &m, const ad::Tensor &x, const ad::Tensor &labels,
                    double h = 1e-6) {
    ad::Tape tape;
    m.zero_grad();
    const auto logits = m.hybrid_forward(tape, x);
    const auto loss = ad::bce_with_logits(tape, logits, labels);
    m.hybrid_backward(tape, loss);

    const auto eval_loss = [&] {
        ad::NoGradGuard guard;
        ad::Tape t;
        return ad::bce_with_logits(t, m.hybrid_forward(t, x), labels).item();
    };
    std::vector<ParameterDeviation> out;
    for (const auto &p : m.parameters()) {
        ad::Tensor w = p.tensor;
        auto data = w.data();
        const auto grad = w.grad();
        double worst = 0;
        for (std::size_t k = 0; k < data.size(); ++k) {
            const double w0 = data[k];
            data[k] = w0 + h;
            const double fp = eval_loss();
            data[k] = w0 - h;
            const double fm = eval_loss();
            data[k] = w0;
            worst = std::max(worst, relative_error(grad[k], (fp - fm) / (2 * h)));
        }
        out.push_back({p.name, p.group, worst});
    }
    return out;
}

[[nodiscard]] inline double model_fd_deviation(model::HybridModel &m, const ad::Tensor &x,
                                               const ad::Tensor &labels, double h = 1e-6) {
    double worst = 0;
    for (const auto &d : model_fd_deviations(m, x, labels, h)) {
        worst = std::max(worst, d.max_relative_error);
    }
    return worst;
}

/// The random batch the end-to-end check uses: 4 samples, labels 0,1,0,1.
[[nodiscard]] inline std::pair<ad::Tensor, ad::Tensor> tiny_batch(std::uint64_t seed) {
    Rng rng = make_rng(seed, "end-to-end");
    auto x = ad::Tensor::zeros({4, 1, 8, 8});
    for (auto &v : x.data()) {
        v = normal01(rng);
    }
    return {x, ad::Tensor::from({4}, {0, 1, 0, 1})};
}

/// End-to-end gradient of the tiny hybrid model on a random batch.
[[nodiscard]] inline CheckResult end_to_end(const Options &o = {}) {
    return detail::timed("end-to-end-fd", 1e-4, [&] {
        model::HybridModel m(tiny_model_config(), o.seed);
        m.set_quantum_options({1, o.shift});
        const auto [x, y] = tiny_batch(o.seed);
        return model_fd_deviation(m, x, y);
    });
}

/// Trapezoidal AUC against the pairwise count, on continuous and tie-heavy
/// score sets.
[[nodiscard]] inline CheckResult auc_oracle(const Options &o = {}) {
    return detail::timed("auc-mann-whitney", 1e-12, [&] {
        Rng rng = make_rng(o.seed, "auc");
        double worst = 0;
        for (std::size_t s = 0; s < o.auc_sets; ++s) {
            const std::size_t n = 2 + uniform_index(rng, 120);
            const bool ties = s % 2 == 1;
            const std::size_t levels = 1 + uniform_index(rng, 6);
            std::vector<double> scores(n);
            std::vector<int> labels(n);
            for (std::size_t i = 0; i < n; ++i) {
                labels[i] = uniform01(rng) < 0.5 ? 1 : 0;
                scores[i] = ties ? static_cast<double>(uniform_index(rng, levels)) / 4.0
                                 : uniform01(rng);
            }
            labels[0] = 1;
            labels[1] = 0;
            const double got = *train::roc_auc(scores, labels);
            worst = std::max(worst, std::abs(got - oracle::mann_whitney_auc(scores, labels)));
        }
        return worst;
    });
}

[[nodiscard]] inline std::vector<CheckResult> run_all(const Options &o = {}) {
    return {qsim_kronecker(o), qsim_norm(o), pqc_shift(o), end_to_end(o), auc_oracle(o)};
}

} // namespace lqer::selfcheck
