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
 * Data re-uploading parameterized quantum circuit with parameter-shift
 * gradients.
 *
 * Layer layout (repeated depth times):
 *   encoding   RY(z_i) on every qubit (every layer when re-uploading,
 *              first layer only otherwise)
 *   trainable  RZ(t[l,i,0]) RY(t[l,i,1]) RZ(t[l,i,2]) on every qubit
 *   entangler  CNOT/CZ ring or CNOT chain
 *
 * Readout is <Z_i> on every qubit.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lqer/errors.hpp"
#include "lqer/qsim.hpp"

namespace lqer::pqc {

enum class Entangler { CnotRing, CzRing, CnotLinear };

[[nodiscard]] inline std::string to_string(Entangler e) {
    switch (e) {
    case Entangler::CnotRing:
        return "cnot_ring";
    case Entangler::CzRing:
        return "cz_ring";
    case Entangler::CnotLinear:
        return "cnot_linear";
    }
    return "?";
}

[[nodiscard]] inline Entangler entangler_from_string(const std::string &s) {
    if (s == "cnot_ring") {
        return Entangler::CnotRing;
    }
    if (s == "cz_ring") {
        return Entangler::CzRing;
    }
    if (s == "cnot_linear") {
        return Entangler::CnotLinear;
    }
    throw ConfigError("unknown entangler '" + s +
                      "' (expected cnot_ring, cz_ring or cnot_linear)");
}

struct PqcConfig {
    std::size_t n_qubits{4};
    std::size_t depth{2};
    Entangler entangler{Entangler::CnotRing};
    bool reupload{true};

    void validate() const {
        if (n_qubits < 1 || n_qubits > qsim::max_qubits) {
            throw ConfigError("pqc: n_qubits out of range");
        }
        if (depth < 1) {
            throw ConfigError("pqc: depth must be >= 1");
        }
    }

    [[nodiscard]] std::size_t param_count() const noexcept {
        return 3 * n_qubits * depth;
    }
};

/// Trainable angles, shape [depth, n_qubits, 3] row-major.
struct PqcParams {
    std::vector<double> theta;

    explicit PqcParams(const PqcConfig &cfg)
        : theta(cfg.param_count(), 0.0) {}
    explicit PqcParams(std::vector<double> t) : theta(std::move(t)) {}

    [[nodiscard]] static constexpr std::size_t
    index(std::size_t layer, std::size_t qubit, std::size_t k,
          std::size_t n_qubits) noexcept {
        return (layer * n_qubits + qubit) * 3 + k;
    }
};

/// Which scalar drives a gate's angle.
enum class AngleSource { None, Input, Param };

struct TaggedGate {
    qsim::Gate gate;
    AngleSource source{AngleSource::None};
    std::size_t index{0};
    std::size_t layer{0};
};

namespace detail {
inline void check_inputs(std::span<const double> z,
                         std::span<const double> theta, const PqcConfig &cfg) {
    cfg.validate();
    if (z.size() != cfg.n_qubits) {
        throw StructuralError("pqc: expected " + std::to_string(cfg.n_qubits) +
                              " input angles, got " + std::to_string(z.size()));
    }
    if (theta.size() != cfg.param_count()) {
        throw StructuralError("pqc: expected " +
                              std::to_string(cfg.param_count()) +
                              " parameters, got " +
                              std::to_string(theta.size()));
    }
    for (double v : z) {
        if (!std::isfinite(v)) {
            throw StructuralError("pqc: non-finite input angle");
        }
    }
    for (double v : theta) {
        if (!std::isfinite(v)) {
            throw StructuralError("pqc: non-finite parameter");
        }
    }
}

inline void append_entangler(std::vector<TaggedGate> &out,
                             const PqcConfig &cfg, std::size_t layer) {
    const std::size_t n = cfg.n_qubits;
    if (n < 2) {
        return;
    }
    const std::size_t pairs = cfg.entangler == Entangler::CnotLinear ? n - 1 : n;
    for (std::size_t i = 0; i < pairs; ++i) {
        const std::size_t t = (i + 1) % n;
        out.push_back({cfg.entangler == Entangler::CzRing ? qsim::Gate::cz(i, t)
                                                          : qsim::Gate::cnot(i, t),
                       AngleSource::None, 0, layer});
    }
}
} // namespace detail

/// Gate list with each rotation tagged by the input or parameter it reads.
[[nodiscard]] inline std::vector<TaggedGate>
build_tagged_circuit(std::span<const double> z, std::span<const double> theta,
                     const PqcConfig &cfg) {
    detail::check_inputs(z, theta, cfg);
    const std::size_t n = cfg.n_qubits;
    std::vector<TaggedGate> gates;
    gates.reserve(cfg.depth * 5 * n);
    for (std::size_t l = 0; l < cfg.depth; ++l) {
        if (l == 0 || cfg.reupload) {
            for (std::size_t i = 0; i < n; ++i) {
                gates.push_back({qsim::Gate::ry(i, z[i]), AngleSource::Input, i, l});
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t base = PqcParams::index(l, i, 0, n);
            gates.push_back({qsim::Gate::rz(i, theta[base]), AngleSource::Param, base, l});
            gates.push_back({qsim::Gate::ry(i, theta[base + 1]), AngleSource::Param, base + 1, l});
            gates.push_back({qsim::Gate::rz(i, theta[base + 2]), AngleSource::Param, base + 2, l});
        }
        detail::append_entangler(gates, cfg, l);
    }
    return gates;
}

[[nodiscard]] inline std::vector<qsim::Gate>
build_circuit(std::span<const double> z, std::span<const double> theta,
              const PqcConfig &cfg) {
    const auto tagged = build_tagged_circuit(z, theta, cfg);
    std::vector<qsim::Gate> out;
    out.reserve(tagged.size());
    for (const auto &t : tagged) {
        out.push_back(t.gate);
    }
    return out;
}

namespace detail {
inline std::vector<double> run(std::span<const TaggedGate> gates,
                               std::size_t n_qubits) {
    auto state = qsim::zero_state(n_qubits);
    for (const auto &t : gates) {
        qsim::apply_gate_inplace(state, t.gate);
    }
    return qsim::expectations_z(state);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}
} // namespace detail

/// Quantum feature vector q_i = <psi| Z_i |psi>.
[[nodiscard]] inline std::vector<double> forward(std::span<const double> z,
                                                 std::span<const double> theta,
                                                 const PqcConfig &cfg) {
    const auto gates = build_tagged_circuit(z, theta, cfg);
    return detail::run(gates, cfg.n_qubits);
}

inline constexpr double half_pi = std::numbers::pi / 2;

/// Vector-Jacobian product of the circuit readout.
struct Vjp {
    std::vector<double> inputs; ///< d(c.q)/dz, length n_qubits
    std::vector<double> params; ///< d(c.q)/dtheta, shaped like theta
};

/**
 * Parameter-shift VJP. Every tagged rotation is evaluated at angle +/- shift
 * and contributes c.(q+ - q-)/2 to the scalar it reads; inputs that appear in
 * several layers accumulate one term per occurrence.
 *
 * `shift` is exposed only so the self-check can inject a fault; the rule is
 * exact for shift = pi/2 and nothing else.
 */
[[nodiscard]] inline Vjp vjp(std::span<const double> z,
                             std::span<const double> theta,
                             const PqcConfig &cfg,
                             std::span<const double> cotangent,
                             double shift = half_pi) {
    auto gates = build_tagged_circuit(z, theta, cfg);
    if (cotangent.size() != cfg.n_qubits) {
        throw StructuralError("pqc: cotangent length must equal n_qubits");
    }
    Vjp out{std::vector<double>(cfg.n_qubits, 0.0),
            std::vector<double>(theta.size(), 0.0)};
    for (auto &g : gates) {
        if (g.source == AngleSource::None) {
            continue;
        }
        const double base = g.gate.angle;
        g.gate.angle = base + shift;
        const double plus = detail::dot(cotangent, detail::run(gates, cfg.n_qubits));
        g.gate.angle = base - shift;
        const double minus = detail::dot(cotangent, detail::run(gates, cfg.n_qubits));
        g.gate.angle = base;
        const double d = 0.5 * (plus - minus);
        if (g.source == AngleSource::Input) {
            out.inputs[g.index] += d;
        } else {
            out.params[g.index] += d;
        }
    }
    return out;
}

[[nodiscard]] inline std::vector<double>
grad_params(std::span<const double> z, std::span<const double> theta,
            const PqcConfig &cfg, std::span<const double> cotangent,
            double shift = half_pi) {
    return vjp(z, theta, cfg, cotangent, shift).params;
}

[[nodiscard]] inline std::vector<double>
grad_inputs(std::span<const double> z, std::span<const double> theta,
            const PqcConfig &cfg, std::span<const double> cotangent,
            double shift = half_pi) {
    return vjp(z, theta, cfg, cotangent, shift).inputs;
}

/// Human-readable gate listing, one block per layer. Angles are printed
/// symbolically (z[i], theta[l,i,k]) so dumps diff cleanly across inputs.
[[nodiscard]] inline std::string describe_circuit(const PqcConfig &cfg) {
    cfg.validate();
    const std::vector<double> z(cfg.n_qubits, 0.0);
    const std::vector<double> theta(cfg.param_count(), 0.0);
    const auto gates = build_tagged_circuit(z, theta, cfg);
    std::ostringstream os;
    os << "pqc n_qubits=" << cfg.n_qubits << " depth=" << cfg.depth
       << " entangler=" << to_string(cfg.entangler)
       << " reupload=" << (cfg.reupload ? "true" : "false")
       << " gates=" << gates.size() << '\n';
    std::size_t layer = cfg.depth;
    for (const auto &t : gates) {
        if (t.layer != layer) {
            layer = t.layer;
            os << "layer " << layer << '\n';
        }
        os << "  " << qsim::to_string(t.gate.kind);
        if (t.gate.control) {
            os << " c=" << *t.gate.control;
        }
        os << " q=" << t.gate.target;
        if (t.source == AngleSource::Input) {
            os << " angle=z[" << t.index << "]";
        } else if (t.source == AngleSource::Param) {
            const std::size_t k = t.index % 3;
            const std::size_t i = (t.index / 3) % cfg.n_qubits;
            os << " angle=theta[" << t.layer << ',' << i
               << ',' << k << ']';
        }
        os << '\n';
    }
    return os.str();
}

} // namespace lqer::pqc
