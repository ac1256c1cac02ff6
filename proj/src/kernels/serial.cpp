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

// Reference kernels: one output element at a time, straight from the defining
// sums. Kept for testing the parallel versions and for benchmarking.

#include "pog/kernels.hpp"

#include "kernels/checks.hpp"

namespace pog::kernels::serial {

void matmul(const Matrix& a, const Matrix& b, Matrix& c)
{
    detail::check_matmul(a.rows(), a.cols(), b.rows(), b.cols(), a.cols(), b.rows());
    c.reset(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < a.cols(); ++p) {
                s += a(i, p) * b(p, j);
            }
            c(i, j) = s;
        }
    }
}

void matmul_bt(const Matrix& a, const Matrix& b, Matrix& c)
{
    detail::check_matmul(a.rows(), a.cols(), b.rows(), b.cols(), a.cols(), b.cols());
    c.reset(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < a.cols(); ++p) {
                s += a(i, p) * b(j, p);
            }
            c(i, j) = s;
        }
    }
}

void matmul_at(const Matrix& a, const Matrix& b, Matrix& c)
{
    detail::check_matmul(a.rows(), a.cols(), b.rows(), b.cols(), a.rows(), b.rows());
    c.reset(a.cols(), b.cols());
    for (std::size_t p = 0; p < a.cols(); ++p) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < a.rows(); ++i) {
                s += a(i, p) * b(i, j);
            }
            c(p, j) = s;
        }
    }
}

namespace {

// Input coordinate for output coordinate o and tap t; false when padded.
bool tap(std::size_t o, std::size_t t, std::size_t stride, std::size_t pad,
         std::size_t extent, std::size_t& pos)
{
    const std::size_t raw = o * stride + t;
    if (raw < pad || raw - pad >= extent) {
        return false;
    }
    pos = raw - pad;
    return true;
}

} // namespace

void conv_forward(const ConvShape& s, std::span<const double> input,
                  std::span<const double> kernel, std::span<const double> bias,
                  std::span<double> output, std::size_t batch)
{
    detail::check_conv(s, input.size(), kernel.size(), bias.size(), output.size(), batch);
    const std::size_t D = s.in_channels;
    const std::size_t A = s.out_channels;
    for (std::size_t b = 0; b < batch; ++b) {
        const double* in = input.data() + b * s.input_size();
        double* out = output.data() + b * s.output_size();
        for (std::size_t oy = 0; oy < s.out_height; ++oy) {
            for (std::size_t ox = 0; ox < s.out_width; ++ox) {
                for (std::size_t a = 0; a < A; ++a) {
                    double acc = 0.0;
                    for (std::size_t m = 0; m < s.kernel_h; ++m) {
                        std::size_t iy;
                        if (!tap(oy, m, s.stride, s.pad_top, s.height, iy)) {
                            continue;
                        }
                        for (std::size_t n = 0; n < s.kernel_w; ++n) {
                            std::size_t ix;
                            if (!tap(ox, n, s.stride, s.pad_left, s.width, ix)) {
                                continue;
                            }
                            for (std::size_t d = 0; d < D; ++d) {
                                acc += kernel[((a * s.kernel_h + m) * s.kernel_w + n) * D + d] *
                                       in[(iy * s.width + ix) * D + d];
                            }
                        }
                    }
                    out[(oy * s.out_width + ox) * A + a] = acc + (bias.empty() ? 0.0 : bias[a]);
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
    for (std::size_t b = 0; b < batch; ++b) {
        const double* g = grad_out.data() + b * s.output_size();
        double* gi = grad_in.data() + b * s.input_size();
        for (std::size_t iy = 0; iy < s.height; ++iy) {
            for (std::size_t ix = 0; ix < s.width; ++ix) {
                for (std::size_t d = 0; d < D; ++d) {
                    // Gather every (output, tap) pair that reads this input element.
                    double acc = 0.0;
                    for (std::size_t oy = 0; oy < s.out_height; ++oy) {
                        const std::size_t ry = iy + s.pad_top;
                        if (ry < oy * s.stride || ry - oy * s.stride >= s.kernel_h) {
                            continue;
                        }
                        const std::size_t m = ry - oy * s.stride;
                        for (std::size_t ox = 0; ox < s.out_width; ++ox) {
                            const std::size_t rx = ix + s.pad_left;
                            if (rx < ox * s.stride || rx - ox * s.stride >= s.kernel_w) {
                                continue;
                            }
                            const std::size_t n = rx - ox * s.stride;
                            for (std::size_t a = 0; a < A; ++a) {
                                acc += kernel[((a * s.kernel_h + m) * s.kernel_w + n) * D + d] *
                                       g[(oy * s.out_width + ox) * A + a];
                            }
                        }
                    }
                    gi[(iy * s.width + ix) * D + d] = acc;
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
    for (std::size_t a = 0; a < A; ++a) {
        for (std::size_t m = 0; m < s.kernel_h; ++m) {
            for (std::size_t n = 0; n < s.kernel_w; ++n) {
                for (std::size_t d = 0; d < D; ++d) {
                    double acc = 0.0;
                    for (std::size_t b = 0; b < batch; ++b) {
                        const double* in = input.data() + b * s.input_size();
                        const double* g = grad_out.data() + b * s.output_size();
                        for (std::size_t oy = 0; oy < s.out_height; ++oy) {
                            std::size_t iy;
                            if (!tap(oy, m, s.stride, s.pad_top, s.height, iy)) {
                                continue;
                            }
                            for (std::size_t ox = 0; ox < s.out_width; ++ox) {
                                std::size_t ix;
                                if (!tap(ox, n, s.stride, s.pad_left, s.width, ix)) {
                                    continue;
                                }
                                acc += g[(oy * s.out_width + ox) * A + a] *
                                       in[(iy * s.width + ix) * D + d];
                            }
                        }
                    }
                    grad_kernel[((a * s.kernel_h + m) * s.kernel_w + n) * D + d] = acc;
                }
            }
        }
        if (!grad_bias.empty()) {
            double acc = 0.0;
            for (std::size_t b = 0; b < batch; ++b) {
                const double* g = grad_out.data() + b * s.output_size();
                for (std::size_t o = 0; o < s.out_height * s.out_width; ++o) {
                    acc += g[o * A + a];
                }
            }
            grad_bias[a] = acc;
        }
    }
}

} // namespace pog::kernels::serial
