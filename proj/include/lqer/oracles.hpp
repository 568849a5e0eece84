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
 * Reference computations that share no code path with the production
 * implementations they check: dense Kronecker-product circuit simulation,
 * central finite differences and the pairwise Mann-Whitney AUC.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lqer/errors.hpp"

namespace lqer::oracle {

using Complex = std::complex<double>;

/// Square complex matrix, row-major.
struct Dense {
    std::size_t dim{0};
    std::vector<Complex> a;

    explicit Dense(std::size_t d) : dim{d}, a(d * d) {}
    static Dense identity(std::size_t d) {
        Dense m{d};
        for (std::size_t i = 0; i < d; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }
    Complex &operator()(std::size_t r, std::size_t c) { return a[r * dim + c]; }
    const Complex &operator()(std::size_t r, std::size_t c) const { return a[r * dim + c]; }
};

[[nodiscard]] inline Dense kron(const Dense &x, const Dense &y) {
    Dense out{x.dim * y.dim};
    for (std::size_t i = 0; i < x.dim; ++i) {
        for (std::size_t j = 0; j < x.dim; ++j) {
            for (std::size_t k = 0; k < y.dim; ++k) {
                for (std::size_t l = 0; l < y.dim; ++l) {
                    out(i * y.dim + k, j * y.dim + l) = x(i, j) * y(k, l);
                }
            }
        }
    }
    return out;
}

[[nodiscard]] inline Dense operator*(const Dense &x, const Dense &y) {
    Dense out{x.dim};
    for (std::size_t i = 0; i < x.dim; ++i) {
        for (std::size_t k = 0; k < x.dim; ++k) {
            for (std::size_t j = 0; j < x.dim; ++j) {
                out(i, j) += x(i, k) * y(k, j);
            }
        }
    }
    return out;
}

[[nodiscard]] inline Dense operator+(const Dense &x, const Dense &y) {
    Dense out{x.dim};
    for (std::size_t i = 0; i < x.a.size(); ++i) {
        out.a[i] = x.a[i] + y.a[i];
    }
    return out;
}

/// Single-qubit factors placed on `n` wires: factors[q] acts on qubit q.
/// Qubit 0 is the least significant bit, so it is the rightmost Kronecker
/// factor: U = F[n-1] (x) ... (x) F[0].
[[nodiscard]] inline Dense on_wires(const std::vector<Dense> &factors) {
    Dense out = factors.back();
    for (std::size_t q = factors.size() - 1; q-- > 0;) {
        out = kron(out, factors[q]);
    }
    return out;
}

[[nodiscard]] inline Dense pauli_x() {
    Dense m{2};
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}
[[nodiscard]] inline Dense pauli_z() {
    Dense m{2};
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}
[[nodiscard]] inline Dense projector(int bit) {
    Dense m{2};
    m(bit, bit) = 1.0;
    return m;
}

/// exp(-i angle P / 2) = cos(angle/2) I - i sin(angle/2) P, P in {X, Y, Z}.
[[nodiscard]] inline Dense pauli_rotation(char axis, double angle) {
    Dense p{2};
    if (axis == 'X') {
        p = pauli_x();
    } else if (axis == 'Y') {
        p(0, 1) = Complex{0, -1};
        p(1, 0) = Complex{0, 1};
    } else if (axis == 'Z') {
        p = pauli_z();
    } else {
        throw UsageError("pauli_rotation: axis must be X, Y or Z");
    }
    Dense out{2};
    const Complex c{std::cos(angle / 2), 0};
    const Complex s{0, -std::sin(angle / 2)};
    for (std::size_t i = 0; i < 4; ++i) {
        out.a[i] = s * p.a[i];
    }
    out(0, 0) += c;
    out(1, 1) += c;
    return out;
}

/// Full 2^n matrix of a single-qubit gate on `target`.
[[nodiscard]] inline Dense single(std::size_t n, std::size_t target, const Dense &u) {
    std::vector<Dense> f(n, Dense::identity(2));
    f[target] = u;
    return on_wires(f);
}

/// Controlled-U as |0><0|_c (x) I + |1><1|_c (x) U_t.
[[nodiscard]] inline Dense controlled(std::size_t n, std::size_t control,
                                      std::size_t target, const Dense &u) {
    std::vector<Dense> f0(n, Dense::identity(2));
    std::vector<Dense> f1(n, Dense::identity(2));
    f0[control] = projector(0);
    f1[control] = projector(1);
    f1[target] = u;
    return on_wires(f0) + on_wires(f1);
}

[[nodiscard]] inline std::vector<Complex> apply(const Dense &m,
                                                std::span<const Complex> v) {
    std::vector<Complex> out(m.dim);
    for (std::size_t i = 0; i < m.dim; ++i) {
        for (std::size_t j = 0; j < m.dim; ++j) {
            out[i] += m(i, j) * v[j];
        }
    }
    return out;
}

/// <v| Z_q |v> through the dense observable.
[[nodiscard]] inline double expect_z(std::span<const Complex> v, std::size_t n,
                                     std::size_t q) {
    const Dense z = single(n, q, pauli_z());
    const auto zv = apply(z, v);
    Complex s{0, 0};
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += std::conj(v[i]) * zv[i];
    }
    return s.real();
}

/// Central difference (f(x+h) - f(x-h)) / 2h of a scalar function of one
/// coordinate of `x`.
[[nodiscard]] inline double central_difference(
    const std::function<double(std::span<const double>)> &f,
    std::vector<double> x, std::size_t k, double h = 1e-5) {
    const double x0 = x[k];
    x[k] = x0 + h;
    const double fp = f(x);
    x[k] = x0 - h;
    const double fm = f(x);
    return (fp - fm) / (2 * h);
}

[[nodiscard]] inline std::vector<double> numeric_gradient(
    const std::function<double(std::span<const double>)> &f,
    const std::vector<double> &x, double h = 1e-5) {
    std::vector<double> g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        g[k] = central_difference(f, x, k, h);
    }
    return g;
}

/// AUC as the fraction of (positive, negative) pairs ranked correctly,
/// ties counted 1/2. O(P*N).
[[nodiscard]] inline double mann_whitney_auc(std::span<const double> scores,
                                             std::span<const int> labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) {
            continue;
        }
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) {
                continue;
            }
            ++pairs;
            if (scores[i] > scores[j]) {
                wins += 1.0;
            } else if (scores[i] == scores[j]) {
                wins += 0.5;
            }
        }
    }
    if (pairs == 0) {
        throw UsageError("mann_whitney_auc: need both classes");
    }
    return wins / static_cast<double>(pairs);
}

} // namespace lqer::oracle
