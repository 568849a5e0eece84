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
 * Dense statevector simulator for small registers.
 *
 * Qubit 0 is the least-significant bit of the basis index: basis state
 * |b_{n-1} ... b_1 b_0> lives at index sum_k b_k 2^k.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lqer/errors.hpp"

namespace lqer::qsim {

using Complex = std::complex<double>;

inline constexpr std::size_t max_qubits = 8;

enum class GateKind { RX, RY, RZ, CNOT, CZ };

[[nodiscard]] inline constexpr bool is_rotation(GateKind k) noexcept {
    return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

[[nodiscard]] inline std::string to_string(GateKind k) {
    switch (k) {
    case GateKind::RX:
        return "RX";
    case GateKind::RY:
        return "RY";
    case GateKind::RZ:
        return "RZ";
    case GateKind::CNOT:
        return "CNOT";
    case GateKind::CZ:
        return "CZ";
    }
    return "?";
}

struct Gate {
    GateKind kind{GateKind::RY};
    std::size_t target{0};
    std::optional<std::size_t> control{};
    double angle{0.0};

    static Gate rx(std::size_t q, double a) { return {GateKind::RX, q, {}, a}; }
    static Gate ry(std::size_t q, double a) { return {GateKind::RY, q, {}, a}; }
    static Gate rz(std::size_t q, double a) { return {GateKind::RZ, q, {}, a}; }
    static Gate cnot(std::size_t c, std::size_t t) {
        return {GateKind::CNOT, t, c, 0.0};
    }
    static Gate cz(std::size_t c, std::size_t t) {
        return {GateKind::CZ, t, c, 0.0};
    }
};

/// 2x2 unitary of a single-qubit rotation, row-major.
using Mat2 = std::array<Complex, 4>;

[[nodiscard]] inline Mat2 rotation_matrix(GateKind kind, double angle) {
    const double c = std::cos(angle / 2);
    const double s = std::sin(angle / 2);
    switch (kind) {
    case GateKind::RX:
        return {Complex{c, 0}, Complex{0, -s}, Complex{0, -s}, Complex{c, 0}};
    case GateKind::RY:
        return {Complex{c, 0}, Complex{-s, 0}, Complex{s, 0}, Complex{c, 0}};
    case GateKind::RZ:
        return {Complex{c, -s}, Complex{0, 0}, Complex{0, 0}, Complex{c, s}};
    default:
        throw StructuralError("rotation_matrix: " + to_string(kind) +
                              " is not a rotation");
    }
}

class StateVector {
  public:
    explicit StateVector(std::size_t n_qubits)
        : n_qubits_{checked(n_qubits)}, amps_(std::size_t{1} << n_qubits) {
        amps_[0] = Complex{1.0, 0.0};
    }

    /// Takes ownership of raw amplitudes; the length must be a power of two
    /// matching a supported register size. No normalization is applied.
    static StateVector from_amplitudes(std::vector<Complex> amps) {
        std::size_t n = 0;
        while ((std::size_t{1} << n) < amps.size()) {
            ++n;
        }
        if (amps.empty() || (std::size_t{1} << n) != amps.size()) {
            throw StructuralError("amplitude count must be a power of two");
        }
        StateVector sv{n};
        sv.amps_ = std::move(amps);
        return sv;
    }

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] std::size_t size() const noexcept { return amps_.size(); }
    [[nodiscard]] std::span<const Complex> amplitudes() const noexcept {
        return amps_;
    }
    [[nodiscard]] std::span<Complex> amplitudes() noexcept { return amps_; }
    [[nodiscard]] const Complex &operator[](std::size_t i) const {
        return amps_[i];
    }

    [[nodiscard]] double norm() const noexcept {
        double s = 0.0;
        for (const auto &a : amps_) {
            s += std::norm(a);
        }
        return std::sqrt(s);
    }

  private:
    static std::size_t checked(std::size_t n) {
        if (n < 1 || n > max_qubits) {
            throw ConfigError("n_qubits must be in [1, " +
                              std::to_string(max_qubits) + "], got " +
                              std::to_string(n));
        }
        return n;
    }

    std::size_t n_qubits_;
    std::vector<Complex> amps_;
};

struct Observable {
    enum class Kind { PauliZ };
    Kind kind{Kind::PauliZ};
    std::size_t qubit{0};

    static Observable z(std::size_t q) { return {Kind::PauliZ, q}; }
};

[[nodiscard]] inline StateVector zero_state(std::size_t n_qubits) {
    return StateVector{n_qubits};
}

inline void validate(const Gate &g, std::size_t n_qubits) {
    if (g.target >= n_qubits) {
        throw StructuralError("gate target " + std::to_string(g.target) +
                              " out of range for " + std::to_string(n_qubits) +
                              " qubits");
    }
    if (is_rotation(g.kind)) {
        if (g.control) {
            throw StructuralError("rotation gates take no control qubit");
        }
        return;
    }
    if (!g.control) {
        throw StructuralError(to_string(g.kind) + " requires a control qubit");
    }
    if (*g.control >= n_qubits || *g.control == g.target) {
        throw StructuralError("invalid control qubit for " +
                              to_string(g.kind));
    }
}

/// In-place gate application: one strided pass over the amplitudes.
inline void apply_gate_inplace(StateVector &state, const Gate &g) {
    validate(g, state.n_qubits());
    auto amps = state.amplitudes();
    const std::size_t dim = amps.size();
    const std::size_t tbit = std::size_t{1} << g.target;

    if (is_rotation(g.kind)) {
        const Mat2 m = rotation_matrix(g.kind, g.angle);
        // Iterate over index pairs (i0, i0 | tbit) with target bit clear.
        for (std::size_t hi = 0; hi < dim; hi += 2 * tbit) {
            for (std::size_t lo = 0; lo < tbit; ++lo) {
                const std::size_t i0 = hi + lo;
                const std::size_t i1 = i0 | tbit;
                const Complex a0 = amps[i0];
                const Complex a1 = amps[i1];
                amps[i0] = m[0] * a0 + m[1] * a1;
                amps[i1] = m[2] * a0 + m[3] * a1;
            }
        }
        return;
    }

    const std::size_t cbit = std::size_t{1} << *g.control;
    if (g.kind == GateKind::CNOT) {
        for (std::size_t i = 0; i < dim; ++i) {
            if ((i & cbit) != 0 && (i & tbit) == 0) {
                std::swap(amps[i], amps[i | tbit]);
            }
        }
    } else { // CZ
        for (std::size_t i = 0; i < dim; ++i) {
            if ((i & cbit) != 0 && (i & tbit) != 0) {
                amps[i] = -amps[i];
            }
        }
    }
}

[[nodiscard]] inline StateVector apply_gate(StateVector state, const Gate &g) {
    apply_gate_inplace(state, g);
    return state;
}

inline void apply_circuit_inplace(StateVector &state,
                                  std::span<const Gate> gates) {
    for (const auto &g : gates) {
        apply_gate_inplace(state, g);
    }
}

[[nodiscard]] inline StateVector apply_circuit(StateVector state,
                                               std::span<const Gate> gates) {
    apply_circuit_inplace(state, gates);
    return state;
}

/// <psi|Z_q|psi>. Only squared magnitudes enter the sum, so the result is
/// real by construction.
[[nodiscard]] inline double expectation(const StateVector &state,
                                        const Observable &obs) {
    if (obs.qubit >= state.n_qubits()) {
        throw StructuralError("observable qubit " + std::to_string(obs.qubit) +
                              " out of range");
    }
    const std::size_t bit = std::size_t{1} << obs.qubit;
    double acc = 0.0;
    const auto amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double p = std::norm(amps[i]);
        acc += (i & bit) == 0 ? p : -p;
    }
    return std::clamp(acc, -1.0, 1.0);
}

/// All single-qubit Z expectations in one pass.
[[nodiscard]] inline std::vector<double> expectations_z(const StateVector &state) {
    std::vector<double> out(state.n_qubits(), 0.0);
    const auto amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double p = std::norm(amps[i]);
        for (std::size_t q = 0; q < out.size(); ++q) {
            out[q] += ((i >> q) & 1U) == 0 ? p : -p;
        }
    }
    for (auto &v : out) {
        v = std::clamp(v, -1.0, 1.0);
    }
    return out;
}

[[nodiscard]] inline Complex inner(const StateVector &a, const StateVector &b) {
    if (a.size() != b.size()) {
        throw StructuralError("inner: register sizes differ");
    }
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += std::conj(a[i]) * b[i];
    }
    return acc;
}

} // namespace lqer::qsim
