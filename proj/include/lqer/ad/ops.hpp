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
 * Differentiable operators over ad::Tensor.
 *
 * Every op computes its forward value eagerly and, when any input tracks
 * gradients, records a backward closure on the tape. Broadcasting exists
 * only in the bias/affine ops; every other shape mismatch throws.
 */
#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lqer/ad/tensor.hpp"
#include "lqer/errors.hpp"

namespace lqer::ad {

namespace detail {
inline void require_rank(const Tensor &t, std::size_t r, const char *op) {
    if (t.rank() != r) {
        throw StructuralError(std::string(op) + ": expected rank " +
                              std::to_string(r) + ", got shape " +
                              shape_str(t.shape()));
    }
}

inline void require_same_shape(const Tensor &a, const Tensor &b,
                               const char *op) {
    if (a.shape() != b.shape()) {
        throw StructuralError(std::string(op) + ": shape mismatch " +
                              shape_str(a.shape()) + " vs " +
                              shape_str(b.shape()));
    }
}

template <typename... Ts> bool any_tracks(const Ts &...ts) {
    return !grad_disabled() && (ts.requires_grad() || ...);
}

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using MapConstMat = Eigen::Map<const RowMat>;
} // namespace detail

/// C = A.B for A[m,k], B[k,p].
inline Tensor matmul(Tape &tape, const Tensor &a, const Tensor &b) {
    detail::require_rank(a, 2, "matmul");
    detail::require_rank(b, 2, "matmul");
    const std::size_t m = a.dim(0), k = a.dim(1), p = b.dim(1);
    if (b.dim(0) != k) {
        throw StructuralError("matmul: inner extents differ " +
                              shape_str(a.shape()) + " x " +
                              shape_str(b.shape()));
    }
    Tensor c = Tensor::zeros({m, p}, detail::any_tracks(a, b));
    auto A = a.data();
    auto B = b.data();
    auto C = c.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t l = 0; l < k; ++l) {
            const double av = A[i * k + l];
            for (std::size_t j = 0; j < p; ++j) {
                C[i * p + j] += av * B[l * p + j];
            }
        }
    }
    if (c.requires_grad()) {
        tape.record(c, [a, b, c, m, k, p]() mutable {
            auto dC = c.grad();
            if (a.requires_grad()) {
                auto dA = a.grad();
                auto Bv = b.data();
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t l = 0; l < k; ++l) {
                        double s = 0.0;
                        for (std::size_t j = 0; j < p; ++j) {
                            s += dC[i * p + j] * Bv[l * p + j];
                        }
                        dA[i * k + l] += s;
                    }
                }
            }
            if (b.requires_grad()) {
                auto dB = b.grad();
                auto Av = a.data();
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t l = 0; l < k; ++l) {
                        const double av = Av[i * k + l];
                        for (std::size_t j = 0; j < p; ++j) {
                            dB[l * p + j] += av * dC[i * p + j];
                        }
                    }
                }
            }
        });
    }
    return c;
}

/// y = x.W^T + b for x[N,in], W[out,in], b[out]. The bias is added after the
/// full dot product so a zeroed trailing block of W leaves y bit-identical.
inline Tensor linear(Tape &tape, const Tensor &x, const Tensor &w,
                     const Tensor &b) {
    detail::require_rank(x, 2, "linear");
    detail::require_rank(w, 2, "linear");
    detail::require_rank(b, 1, "linear");
    const std::size_t n = x.dim(0), in = x.dim(1), out = w.dim(0);
    if (w.dim(1) != in || b.dim(0) != out) {
        throw StructuralError("linear: incompatible shapes x" +
                              shape_str(x.shape()) + " W" +
                              shape_str(w.shape()) + " b" +
                              shape_str(b.shape()));
    }
    Tensor y = Tensor::zeros({n, out}, detail::any_tracks(x, w, b));
    auto X = x.data();
    auto W = w.data();
    auto B = b.data();
    auto Y = y.data();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t o = 0; o < out; ++o) {
            double s = 0.0;
            for (std::size_t i = 0; i < in; ++i) {
                s += X[r * in + i] * W[o * in + i];
            }
            Y[r * out + o] = s + B[o];
        }
    }
    if (y.requires_grad()) {
        tape.record(y, [x, w, b, y, n, in, out]() mutable {
            auto dY = y.grad();
            if (x.requires_grad()) {
                auto dX = x.grad();
                auto Wv = w.data();
                for (std::size_t r = 0; r < n; ++r) {
                    for (std::size_t o = 0; o < out; ++o) {
                        const double g = dY[r * out + o];
                        for (std::size_t i = 0; i < in; ++i) {
                            dX[r * in + i] += g * Wv[o * in + i];
                        }
                    }
                }
            }
            if (w.requires_grad()) {
                auto dW = w.grad();
                auto Xv = x.data();
                for (std::size_t r = 0; r < n; ++r) {
                    for (std::size_t o = 0; o < out; ++o) {
                        const double g = dY[r * out + o];
                        for (std::size_t i = 0; i < in; ++i) {
                            dW[o * in + i] += g * Xv[r * in + i];
                        }
                    }
                }
            }
            if (b.requires_grad()) {
                auto dB = b.grad();
                for (std::size_t r = 0; r < n; ++r) {
                    for (std::size_t o = 0; o < out; ++o) {
                        dB[o] += dY[r * out + o];
                    }
                }
            }
        });
    }
    return y;
}

struct Conv2dOptions {
    std::size_t stride{1};
    std::size_t padding{0};
};

[[nodiscard]] inline std::size_t conv_out_extent(std::size_t in, std::size_t k,
                                                 std::size_t stride,
                                                 std::size_t pad) {
    if (stride == 0 || in + 2 * pad < k) {
        throw StructuralError("conv2d: kernel " + std::to_string(k) +
                              " does not fit input " + std::to_string(in) +
                              " with padding " + std::to_string(pad));
    }
    return (in + 2 * pad - k) / stride + 1;
}

namespace detail {
struct ConvGeometry {
    std::size_t n, c, h, w, f, kh, kw, ho, wo, stride, pad;
    [[nodiscard]] std::size_t patch() const noexcept { return c * kh * kw; }
    [[nodiscard]] std::size_t out_pixels() const noexcept { return ho * wo; }
};

// col[(ci*kh + i)*kw + j, oy*wo + ox] = x[ci, oy*s - p + i, ox*s - p + j]
inline void im2col(const double *x, const ConvGeometry &g, double *col) {
    const std::size_t np = g.out_pixels();
    for (std::size_t ci = 0; ci < g.c; ++ci) {
        for (std::size_t i = 0; i < g.kh; ++i) {
            for (std::size_t j = 0; j < g.kw; ++j) {
                double *row = col + ((ci * g.kh + i) * g.kw + j) * np;
                for (std::size_t oy = 0; oy < g.ho; ++oy) {
                    const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + i) -
                                    static_cast<std::ptrdiff_t>(g.pad);
                    for (std::size_t ox = 0; ox < g.wo; ++ox) {
                        const auto ix =
                            static_cast<std::ptrdiff_t>(ox * g.stride + j) -
                            static_cast<std::ptrdiff_t>(g.pad);
                        const bool inside =
                            iy >= 0 && ix >= 0 &&
                            iy < static_cast<std::ptrdiff_t>(g.h) &&
                            ix < static_cast<std::ptrdiff_t>(g.w);
                        row[oy * g.wo + ox] =
                            inside ? x[(ci * g.h + static_cast<std::size_t>(iy)) * g.w +
                                       static_cast<std::size_t>(ix)]
                                   : 0.0;
                    }
                }
            }
        }
    }
}

inline void col2im_add(const double *col, const ConvGeometry &g, double *dx) {
    const std::size_t np = g.out_pixels();
    for (std::size_t ci = 0; ci < g.c; ++ci) {
        for (std::size_t i = 0; i < g.kh; ++i) {
            for (std::size_t j = 0; j < g.kw; ++j) {
                const double *row = col + ((ci * g.kh + i) * g.kw + j) * np;
                for (std::size_t oy = 0; oy < g.ho; ++oy) {
                    const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + i) -
                                    static_cast<std::ptrdiff_t>(g.pad);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) {
                        continue;
                    }
                    for (std::size_t ox = 0; ox < g.wo; ++ox) {
                        const auto ix =
                            static_cast<std::ptrdiff_t>(ox * g.stride + j) -
                            static_cast<std::ptrdiff_t>(g.pad);
                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) {
                            continue;
                        }
                        dx[(ci * g.h + static_cast<std::size_t>(iy)) * g.w +
                           static_cast<std::size_t>(ix)] += row[oy * g.wo + ox];
                    }
                }
            }
        }
    }
}
} // namespace detail

/// 2-D cross-correlation (kernel not flipped). input [N,C,H,W], kernel
/// [F,C,kh,kw] -> [N,F,Ho,Wo] with Ho = (H + 2p - kh)/s + 1.
inline Tensor conv2d(Tape &tape, const Tensor &input, const Tensor &kernel,
                     Conv2dOptions opt = {}) {
    detail::require_rank(input, 4, "conv2d");
    detail::require_rank(kernel, 4, "conv2d");
    if (kernel.dim(1) != input.dim(1)) {
        throw StructuralError("conv2d: kernel expects " +
                              std::to_string(kernel.dim(1)) +
                              " channels, input has " +
                              std::to_string(input.dim(1)));
    }
    detail::ConvGeometry g{};
    g.n = input.dim(0);
    g.c = input.dim(1);
    g.h = input.dim(2);
    g.w = input.dim(3);
    g.f = kernel.dim(0);
    g.kh = kernel.dim(2);
    g.kw = kernel.dim(3);
    g.stride = opt.stride;
    g.pad = opt.padding;
    g.ho = conv_out_extent(g.h, g.kh, g.stride, g.pad);
    g.wo = conv_out_extent(g.w, g.kw, g.stride, g.pad);

    Tensor out = Tensor::zeros({g.n, g.f, g.ho, g.wo},
                               detail::any_tracks(input, kernel));
    std::vector<double> col(g.patch() * g.out_pixels());
    const detail::MapConstMat K(kernel.data().data(),
                                static_cast<Eigen::Index>(g.f),
                                static_cast<Eigen::Index>(g.patch()));
    const std::size_t in_stride = g.c * g.h * g.w;
    const std::size_t out_stride = g.f * g.out_pixels();
    for (std::size_t s = 0; s < g.n; ++s) {
        detail::im2col(input.data().data() + s * in_stride, g, col.data());
        const detail::MapConstMat C(col.data(),
                                    static_cast<Eigen::Index>(g.patch()),
                                    static_cast<Eigen::Index>(g.out_pixels()));
        detail::MapMat O(out.data().data() + s * out_stride,
                         static_cast<Eigen::Index>(g.f),
                         static_cast<Eigen::Index>(g.out_pixels()));
        O.noalias() = K * C;
    }

    if (out.requires_grad()) {
        tape.record(out, [input, kernel, out, g, in_stride,
                          out_stride]() mutable {
            std::vector<double> colbuf(g.patch() * g.out_pixels());
            std::vector<double> dcol(kernel.requires_grad() || input.requires_grad()
                                         ? g.patch() * g.out_pixels()
                                         : 0);
            const detail::MapConstMat Kc(kernel.data().data(),
                                         static_cast<Eigen::Index>(g.f),
                                         static_cast<Eigen::Index>(g.patch()));
            for (std::size_t s = 0; s < g.n; ++s) {
                const detail::MapConstMat dO(
                    out.grad().data() + s * out_stride,
                    static_cast<Eigen::Index>(g.f),
                    static_cast<Eigen::Index>(g.out_pixels()));
                if (kernel.requires_grad()) {
                    detail::im2col(input.data().data() + s * in_stride, g,
                                   colbuf.data());
                    const detail::MapConstMat C(
                        colbuf.data(), static_cast<Eigen::Index>(g.patch()),
                        static_cast<Eigen::Index>(g.out_pixels()));
                    detail::MapMat dK(kernel.grad().data(),
                                      static_cast<Eigen::Index>(g.f),
                                      static_cast<Eigen::Index>(g.patch()));
                    dK.noalias() += dO * C.transpose();
                }
                if (input.requires_grad()) {
                    detail::MapMat dC(dcol.data(),
                                      static_cast<Eigen::Index>(g.patch()),
                                      static_cast<Eigen::Index>(g.out_pixels()));
                    dC.noalias() = Kc.transpose() * dO;
                    detail::col2im_add(dcol.data(), g,
                                       input.grad().data() + s * in_stride);
                }
            }
        });
    }
    return out;
}

/// Per-channel y = x*scale[c] + bias[c] on [N,C,H,W].
inline Tensor channel_affine(Tape &tape, const Tensor &x, const Tensor &scale,
                             const Tensor &bias) {
    detail::require_rank(x, 4, "channel_affine");
    const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    if (scale.numel() != c || bias.numel() != c) {
        throw StructuralError("channel_affine: expected " + std::to_string(c) +
                              " scale/bias entries");
    }
    Tensor y = Tensor::zeros(x.shape(), detail::any_tracks(x, scale, bias));
    auto X = x.data();
    auto S = scale.data();
    auto B = bias.data();
    auto Y = y.data();
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t off = (s * c + ch) * hw;
            for (std::size_t k = 0; k < hw; ++k) {
                Y[off + k] = X[off + k] * S[ch] + B[ch];
            }
        }
    }
    if (y.requires_grad()) {
        tape.record(y, [x, scale, bias, y, n, c, hw]() mutable {
            auto dY = y.grad();
            auto Xv = x.data();
            auto Sv = scale.data();
            for (std::size_t s = 0; s < n; ++s) {
                for (std::size_t ch = 0; ch < c; ++ch) {
                    const std::size_t off = (s * c + ch) * hw;
                    double ds = 0.0, db = 0.0;
                    for (std::size_t k = 0; k < hw; ++k) {
                        ds += dY[off + k] * Xv[off + k];
                        db += dY[off + k];
                    }
                    if (scale.requires_grad()) {
                        scale.grad()[ch] += ds;
                    }
                    if (bias.requires_grad()) {
                        bias.grad()[ch] += db;
                    }
                    if (x.requires_grad()) {
                        auto dX = x.grad();
                        for (std::size_t k = 0; k < hw; ++k) {
                            dX[off + k] += dY[off + k] * Sv[ch];
                        }
                    }
                }
            }
        });
    }
    return y;
}

inline Tensor add(Tape &tape, const Tensor &a, const Tensor &b) {
    detail::require_same_shape(a, b, "add");
    Tensor y = Tensor::zeros(a.shape(), detail::any_tracks(a, b));
    auto A = a.data();
    auto B = b.data();
    auto Y = y.data();
    for (std::size_t i = 0; i < Y.size(); ++i) {
        Y[i] = A[i] + B[i];
    }
    if (y.requires_grad()) {
        tape.record(y, [a, b, y]() mutable {
            auto dY = y.grad();
            if (a.requires_grad()) {
                auto dA = a.grad();
                for (std::size_t i = 0; i < dY.size(); ++i) {
                    dA[i] += dY[i];
                }
            }
            if (b.requires_grad()) {
                auto dB = b.grad();
                for (std::size_t i = 0; i < dY.size(); ++i) {
                    dB[i] += dY[i];
                }
            }
        });
    }
    return y;
}

/// Elementwise product.
inline Tensor mul(Tape &tape, const Tensor &a, const Tensor &b) {
    detail::require_same_shape(a, b, "mul");
    Tensor y = Tensor::zeros(a.shape(), detail::any_tracks(a, b));
    auto A = a.data();
    auto B = b.data();
    auto Y = y.data();
    for (std::size_t i = 0; i < Y.size(); ++i) {
        Y[i] = A[i] * B[i];
    }
    if (y.requires_grad()) {
        tape.record(y, [a, b, y]() mutable {
            auto dY = y.grad();
            auto Av = a.data();
            auto Bv = b.data();
            if (a.requires_grad()) {
                auto dA = a.grad();
                for (std::size_t i = 0; i < dY.size(); ++i) {
                    dA[i] += dY[i] * Bv[i];
                }
            }
            if (b.requires_grad()) {
                auto dB = b.grad();
                for (std::size_t i = 0; i < dY.size(); ++i) {
                    dB[i] += dY[i] * Av[i];
                }
            }
        });
    }
    return y;
}

inline Tensor scale(Tape &tape, const Tensor &x, double alpha) {
    Tensor y = Tensor::zeros(x.shape(), detail::any_tracks(x));
    auto X = x.data();
    auto Y = y.data();
    for (std::size_t i = 0; i < Y.size(); ++i) {
        Y[i] = alpha * X[i];
    }
    if (y.requires_grad()) {
        tape.record(y, [x, y, alpha]() mutable {
            auto dY = y.grad();
            auto dX = x.grad();
            for (std::size_t i = 0; i < dY.size(); ++i) {
                dX[i] += alpha * dY[i];
            }
        });
    }
    return y;
}

namespace detail {
/// Elementwise op whose local derivative is a function of (input, output).
template <typename Fwd, typename Deriv>
Tensor unary(Tape &tape, const Tensor &x, Fwd fwd, Deriv deriv) {
    Tensor y = Tensor::zeros(x.shape(), detail::any_tracks(x));
    auto X = x.data();
    auto Y = y.data();
    for (std::size_t i = 0; i < Y.size(); ++i) {
        Y[i] = fwd(X[i]);
    }
    if (y.requires_grad()) {
        tape.record(y, [x, y, deriv]() mutable {
            auto dY = y.grad();
            auto dX = x.grad();
            auto Xv = x.data();
            auto Yv = y.data();
            for (std::size_t i = 0; i < dY.size(); ++i) {
                dX[i] += dY[i] * deriv(Xv[i], Yv[i]);
            }
        });
    }
    return y;
}
} // namespace detail

[[nodiscard]] inline double stable_sigmoid(double v) noexcept {
    if (v >= 0) {
        return 1.0 / (1.0 + std::exp(-v));
    }
    const double e = std::exp(v);
    return e / (1.0 + e);
}

inline Tensor relu(Tape &tape, const Tensor &x) {
    return detail::unary(
        tape, x, [](double v) { return v > 0 ? v : 0.0; },
        [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

inline Tensor tanh(Tape &tape, const Tensor &x) {
    return detail::unary(
        tape, x, [](double v) { return std::tanh(v); },
        [](double, double y) { return 1.0 - y * y; });
}

inline Tensor sigmoid(Tape &tape, const Tensor &x) {
    return detail::unary(
        tape, x, [](double v) { return stable_sigmoid(v); },
        [](double, double y) { return y * (1.0 - y); });
}

/// Sum of all elements -> shape (1).
inline Tensor sum(Tape &tape, const Tensor &x) {
    double s = 0.0;
    for (double v : x.data()) {
        s += v;
    }
    Tensor y = Tensor::from({1}, {s}, detail::any_tracks(x));
    if (y.requires_grad()) {
        tape.record(y, [x, y]() mutable {
            const double g = y.grad()[0];
            for (auto &d : x.grad()) {
                d += g;
            }
        });
    }
    return y;
}

/// Copy with a new shape of equal element count.
inline Tensor reshape(Tape &tape, const Tensor &x, Shape shape) {
    if (numel(shape) != x.numel()) {
        throw StructuralError("reshape " + shape_str(x.shape()) + " -> " +
                              shape_str(shape));
    }
    Tensor y = Tensor::from(std::move(shape),
                            std::vector<double>(x.data().begin(), x.data().end()),
                            detail::any_tracks(x));
    if (y.requires_grad()) {
        tape.record(y, [x, y]() mutable {
            auto dY = y.grad();
            auto dX = x.grad();
            for (std::size_t i = 0; i < dY.size(); ++i) {
                dX[i] += dY[i];
            }
        });
    }
    return y;
}

/// Spatial mean: [N,C,H,W] -> [N,C].
inline Tensor global_avg_pool(Tape &tape, const Tensor &x) {
    detail::require_rank(x, 4, "global_avg_pool");
    const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    if (hw == 0) {
        throw StructuralError("global_avg_pool: empty spatial extent");
    }
    Tensor y = Tensor::zeros({n, c}, detail::any_tracks(x));
    auto X = x.data();
    auto Y = y.data();
    const double inv = 1.0 / static_cast<double>(hw);
    for (std::size_t k = 0; k < n * c; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < hw; ++i) {
            s += X[k * hw + i];
        }
        Y[k] = s * inv;
    }
    if (y.requires_grad()) {
        tape.record(y, [x, y, n, c, hw, inv]() mutable {
            auto dY = y.grad();
            auto dX = x.grad();
            for (std::size_t k = 0; k < n * c; ++k) {
                const double g = dY[k] * inv;
                for (std::size_t i = 0; i < hw; ++i) {
                    dX[k * hw + i] += g;
                }
            }
        });
    }
    return y;
}

/// Feature-axis concatenation: [N,da] ++ [N,db] -> [N,da+db].
inline Tensor concat(Tape &tape, const Tensor &a, const Tensor &b) {
    detail::require_rank(a, 2, "concat");
    detail::require_rank(b, 2, "concat");
    if (a.dim(0) != b.dim(0)) {
        throw StructuralError("concat: batch extents differ " +
                              shape_str(a.shape()) + " vs " +
                              shape_str(b.shape()));
    }
    const std::size_t n = a.dim(0), da = a.dim(1), db = b.dim(1);
    Tensor y = Tensor::zeros({n, da + db}, detail::any_tracks(a, b));
    auto A = a.data();
    auto B = b.data();
    auto Y = y.data();
    for (std::size_t r = 0; r < n; ++r) {
        std::copy_n(A.begin() + static_cast<std::ptrdiff_t>(r * da), da,
                    Y.begin() + static_cast<std::ptrdiff_t>(r * (da + db)));
        std::copy_n(B.begin() + static_cast<std::ptrdiff_t>(r * db), db,
                    Y.begin() + static_cast<std::ptrdiff_t>(r * (da + db) + da));
    }
    if (y.requires_grad()) {
        tape.record(y, [a, b, y, n, da, db]() mutable {
            auto dY = y.grad();
            for (std::size_t r = 0; r < n; ++r) {
                if (a.requires_grad()) {
                    auto dA = a.grad();
                    for (std::size_t i = 0; i < da; ++i) {
                        dA[r * da + i] += dY[r * (da + db) + i];
                    }
                }
                if (b.requires_grad()) {
                    auto dB = b.grad();
                    for (std::size_t i = 0; i < db; ++i) {
                        dB[r * db + i] += dY[r * (da + db) + da + i];
                    }
                }
            }
        });
    }
    return y;
}

/// Inverse of concat along the feature axis (no tape; for inspection).
[[nodiscard]] inline std::pair<Tensor, Tensor> split_features(const Tensor &x,
                                                              std::size_t da) {
    detail::require_rank(x, 2, "split_features");
    const std::size_t n = x.dim(0), d = x.dim(1);
    if (da > d) {
        throw StructuralError("split_features: split point beyond width");
    }
    Tensor a = Tensor::zeros({n, da});
    Tensor b = Tensor::zeros({n, d - da});
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < d; ++i) {
            if (i < da) {
                a.data()[r * da + i] = x.data()[r * d + i];
            } else {
                b.data()[r * (d - da) + i - da] = x.data()[r * d + i];
            }
        }
    }
    return {a, b};
}

/**
 * Mean binary cross-entropy on logits:
 *   mean_i [ max(x,0) - x*y + log1p(exp(-|x|)) ]
 * which equals log(1 + exp(-(2y-1) x)) without overflow.
 */
inline Tensor bce_with_logits(Tape &tape, const Tensor &logits,
                              const Tensor &labels) {
    const std::size_t n = logits.numel();
    if (labels.numel() != n || n == 0) {
        throw StructuralError("bce_with_logits: " + std::to_string(n) +
                              " logits vs " + std::to_string(labels.numel()) +
                              " labels");
    }
    auto X = logits.data();
    auto L = labels.data();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (L[i] != 0.0 && L[i] != 1.0) {
            throw DataError("bce_with_logits: label " + std::to_string(L[i]) +
                            " at index " + std::to_string(i) +
                            " is not binary");
        }
        const double x = X[i];
        total += std::max(x, 0.0) - x * L[i] + std::log1p(std::exp(-std::abs(x)));
    }
    Tensor y = Tensor::from({1}, {total / static_cast<double>(n)},
                            detail::any_tracks(logits));
    if (y.requires_grad()) {
        tape.record(y, [logits, labels, y, n]() mutable {
            const double g = y.grad()[0] / static_cast<double>(n);
            auto dX = logits.grad();
            auto Xv = logits.data();
            auto Lv = labels.data();
            for (std::size_t i = 0; i < n; ++i) {
                dX[i] += g * (stable_sigmoid(Xv[i]) - Lv[i]);
            }
        });
    }
    return y;
}

} // namespace lqer::ad
