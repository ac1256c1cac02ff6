// Copyright 2026 The pogest Authors
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

#include "pog/kernels.hpp"

#include <algorithm>
#include <vector>

#include "kernels/checks.hpp"

namespace pog::kernels {

ConvShape ConvShape::valid(std::size_t h, std::size_t w, std::size_t d, std::size_t a,
                           std::size_t kh, std::size_t kw, std::size_t stride)
{
    require(stride >= 1 && kh >= 1 && kw >= 1, "invalid conv geometry");
    require(h >= kh && w >= kw, "valid convolution needs input at least as large as the kernel");
    ConvShape s{h, w, d, a, kh, kw, stride, 0, 0, 0, 0};
    s.out_height = (h - kh) / stride + 1;
    s.out_width = (w - kw) / stride + 1;
    return s;
}

ConvShape ConvShape::same(std::size_t h, std::size_t w, std::size_t d, std::size_t a,
                          std::size_t kh, std::size_t kw, std::size_t stride)
{
    require(stride >= 1 && kh >= 1 && kw >= 1, "invalid conv geometry");
    require(h >= 1 && w >= 1, "empty convolution input");
    ConvShape s{h, w, d, a, kh, kw, stride, 0, 0, 0, 0};
    s.out_height = (h + stride - 1) / stride;
    s.out_width = (w + stride - 1) / stride;
    const std::size_t need_h = (s.out_height - 1) * stride + kh;
    const std::size_t need_w = (s.out_width - 1) * stride + kw;
    s.pad_top = need_h > h ? (need_h - h) / 2 : 0;
    s.pad_left = need_w > w ? (need_w - w) / 2 : 0;
    return s;
}

void matmul(const Matrix& a, const Matrix& b, Matrix& c)
{
    detail::check_matmul(a.rows(), a.cols(), b.rows(), b.cols(), a.cols(), b.rows());
    c.reset(a.rows(), b.cols());
    const std::size_t n = a.rows();
    const std::size_t k = a.cols();
    const std::size_t m = b.cols();
    const double* A = a.data().data();
    const double* B = b.data().data();
    double* C = c.data().data();
    // Panels of B rows small enough to stay in L2 while every row of A sweeps them.
    // Each c(i, j) still accumulates over p in increasing order.
    const std::size_t panel = std::max<std::size_t>(1, 16384 / std::max<std::size_t>(1, m));
    const long rows = static_cast<long>(n);
#pragma omp parallel
    for (std::size_t p0 = 0; p0 < k; p0 += panel) {
        const std::size_t p1 = std::min(k, p0 + panel);
#pragma omp for schedule(static)
        for (long il = 0; il < rows; ++il) {
            const auto i = static_cast<std::size_t>(il);
            double* ci = C + i * m;
            for (std::size_t p = p0; p < p1; ++p) {
                const double av = A[i * k + p];
                if (av == 0.0) {
                    continue;
                }
                const double* bp = B + p * m;
                for (std::size_t j = 0; j < m; ++j) {
                    ci[j] += av * bp[j];
                }
            }
        }
    }
}

void matmul_bt(const Matrix& a, const Matrix& b, Matrix& c)
{
    detail::check_matmul(a.rows(), a.cols(), b.rows(), b.cols(), a.cols(), b.cols());
    Matrix bt(b.cols(), b.rows());
    for (std::size_t j = 0; j < b.rows(); ++j) {
        for (std::size_t p = 0; p < b.cols(); ++p) {
            bt(p, j) = b(j, p);
        }
    }
    matmul(a, bt, c);
}

void matmul_at(const Matrix& a, const Matrix& b, Matrix& c)
{
    detail::check_matmul(a.rows(), a.cols(), b.rows(), b.cols(), a.rows(), b.rows());
    c.reset(a.cols(), b.cols());
    const std::size_t n = a.rows();
    const std::size_t k = a.cols();
    const std::size_t m = b.cols();
    const double* A = a.data().data();
    const double* B = b.data().data();
    double* C = c.data().data();
#pragma omp parallel for schedule(static)
    for (std::size_t p = 0; p < k; ++p) {
        double* cp = C + p * m;
        for (std::size_t i = 0; i < n; ++i) {
            const double av = A[i * k + p];
            if (av == 0.0) {
                continue;
            }
            const double* bi = B + i * m;
            for (std::size_t j = 0; j < m; ++j) {
                cp[j] += av * bi[j];
            }
        }
    }
}

namespace {

// Kernel reordered [m][n][d][a] so the innermost loop runs over output channels.
std::vector<double> channel_minor_kernel(const ConvShape& s, std::span<const double> kernel)
{
    const std::size_t D = s.in_channels;
    const std::size_t A = s.out_channels;
    std::vector<double> kt(kernel.size());
    for (std::size_t a = 0; a < A; ++a) {
        for (std::size_t m = 0; m < s.kernel_h; ++m) {
            for (std::size_t n = 0; n < s.kernel_w; ++n) {
                for (std::size_t d = 0; d < D; ++d) {
                    kt[((m * s.kernel_w + n) * D + d) * A + a] =
                        kernel[((a * s.kernel_h + m) * s.kernel_w + n) * D + d];
                }
            }
        }
    }
    return kt;
}

} // namespace

void conv_forward(const ConvShape& s, std::span<const double> input,
                  std::span<const double> kernel, std::span<const double> bias,
                  std::span<double> output, std::size_t batch)
{
    detail::check_conv(s, input.size(), kernel.size(), bias.size(), output.size(), batch);
    const std::size_t D = s.in_channels;
    const std::size_t A = s.out_channels;
    const auto kt = channel_minor_kernel(s, kernel);
    const long rows = static_cast<long>(batch * s.out_height);
#pragma omp parallel
    {
        std::vector<double> acc(A);
#pragma omp for schedule(static)
        for (long r = 0; r < rows; ++r) {
            const std::size_t b = static_cast<std::size_t>(r) / s.out_height;
            const std::size_t oy = static_cast<std::size_t>(r) % s.out_height;
            const double* in = input.data() + b * s.input_size();
            double* out = output.data() + b * s.output_size();
            for (std::size_t ox = 0; ox < s.out_width; ++ox) {
                std::fill(acc.begin(), acc.end(), 0.0);
                for (std::size_t m = 0; m < s.kernel_h; ++m) {
                    const std::size_t ry = oy * s.stride + m;
                    if (ry < s.pad_top || ry - s.pad_top >= s.height) {
                        continue;
                    }
                    const std::size_t iy = ry - s.pad_top;
                    for (std::size_t n = 0; n < s.kernel_w; ++n) {
                        const std::size_t rx = ox * s.stride + n;
                        if (rx < s.pad_left || rx - s.pad_left >= s.width) {
                            continue;
                        }
                        const std::size_t ix = rx - s.pad_left;
                        const double* x = in + (iy * s.width + ix) * D;
                        const double* k = kt.data() + (m * s.kernel_w + n) * D * A;
                        for (std::size_t d = 0; d < D; ++d) {
                            const double xv = x[d];
                            if (xv == 0.0) {
                                continue;
                            }
                            const double* kd = k + d * A;
                            for (std::size_t a = 0; a < A; ++a) {
                                acc[a] += xv * kd[a];
                            }
                        }
                    }
                }
                double* o = out + (oy * s.out_width + ox) * A;
                for (std::size_t a = 0; a < A; ++a) {
                    o[a] = acc[a] + (bias.empty() ? 0.0 : bias[a]);
                }
            }
        }
    }
}

void conv_backward_input(const ConvShape& s, std::span<const double> grad_out,
                         std::span<const double> kernel, std::span<double> grad_in,
                         std::size_t batch)
{
    detail::check_conv(s, grad_in.size(), kernel.size(), 0, grad_out.size(), batch);
    const std::size_t D = s.in_channels;
    const std::size_t A = s.out_channels;
    std::fill(grad_in.begin(), grad_in.end(), 0.0);
#pragma omp parallel for schedule(static)
    for (long bl = 0; bl < static_cast<long>(batch); ++bl) {
        const std::size_t b = static_cast<std::size_t>(bl);
        const double* g = grad_out.data() + b * s.output_size();
        double* gi = grad_in.data() + b * s.input_size();
        for (std::size_t oy = 0; oy < s.out_height; ++oy) {
            for (std::size_t ox = 0; ox < s.out_width; ++ox) {
                const double* go = g + (oy * s.out_width + ox) * A;
                for (std::size_t m = 0; m < s.kernel_h; ++m) {
                    const std::size_t ry = oy * s.stride + m;
                    if (ry < s.pad_top || ry - s.pad_top >= s.height) {
                        continue;
                    }
                    const std::size_t iy = ry - s.pad_top;
                    for (std::size_t n = 0; n < s.kernel_w; ++n) {
                        const std::size_t rx = ox * s.stride + n;
                        if (rx < s.pad_left || rx - s.pad_left >= s.width) {
                            continue;
                        }
                        const std::size_t ix = rx - s.pad_left;
                        double* x = gi + (iy * s.width + ix) * D;
                        for (std::size_t a = 0; a < A; ++a) {
                            const double gv = go[a];
                            if (gv == 0.0) {
                                continue;
                            }
                            const double* k = kernel.data() + ((a * s.kernel_h + m) * s.kernel_w + n) * D;
                            for (std::size_t d = 0; d < D; ++d) {
                                x[d] += k[d] * gv;
                            }
                        }
                    }
                }
            }
        }
    }
}

void conv_backward_kernel(const ConvShape& s, std::span<const double> input,
                          std::span<const double> grad_out, std::span<double> grad_kernel,
                          std::span<double> grad_bias, std::size_t batch)
{
    detail::check_conv(s, input.size(), grad_kernel.size(), grad_bias.size(), grad_out.size(),
                       batch);
    const std::size_t D = s.in_channels;
    const std::size_t A = s.out_channels;
    std::fill(grad_kernel.begin(), grad_kernel.end(), 0.0);
#pragma omp parallel for schedule(static)
    for (long al = 0; al < static_cast<long>(A); ++al) {
        const std::size_t a = static_cast<std::size_t>(al);
        double* ka = grad_kernel.data() + a * s.kernel_h * s.kernel_w * D;
        double bias_acc = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            const double* in = input.data() + b * s.input_size();
            const double* g = grad_out.data() + b * s.output_size();
            for (std::size_t oy = 0; oy < s.out_height; ++oy) {
                for (std::size_t ox = 0; ox < s.out_width; ++ox) {
                    const double gv = g[(oy * s.out_width + ox) * A + a];
                    bias_acc += gv;
                    if (gv == 0.0) {
                        continue;
                    }
                    for (std::size_t m = 0; m < s.kernel_h; ++m) {
                        const std::size_t ry = oy * s.stride + m;
                        if (ry < s.pad_top || ry - s.pad_top >= s.height) {
                            continue;
                        }
                        const std::size_t iy = ry - s.pad_top;
                        for (std::size_t n = 0; n < s.kernel_w; ++n) {
                            const std::size_t rx = ox * s.stride + n;
                            if (rx < s.pad_left || rx - s.pad_left >= s.width) {
                                continue;
                            }
                            const std::size_t ix = rx - s.pad_left;
                            const double* x = in + (iy * s.width + ix) * D;
                            double* k = ka + (m * s.kernel_w + n) * D;
                            for (std::size_t d = 0; d < D; ++d) {
                                k[d] += gv * x[d];
                            }
                        }
                    }
                }
            }
        }
        if (!grad_bias.empty()) {
            grad_bias[a] = bias_acc;
        }
    }
}

} // namespace pog::kernels
