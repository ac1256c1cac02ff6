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

#ifndef POG_KERNELS_HPP
#define POG_KERNELS_HPP

#include <cstddef>
#include <span>

#include "pog/matrix.hpp"

/// Dense compute kernels used by training and inference.
///
/// `pog::kernels` holds the OpenMP versions; `pog::kernels::serial` holds plain
/// loop implementations of the same contracts. Every output element is summed
/// over its reduction index in ascending order in both, and parallel loops only
/// split independent output elements, so the two agree bit for bit and neither
/// depends on the thread count. Outputs are overwritten, never accumulated into.
namespace pog::kernels {

/* C (n x m) = A (n x k) * B (k x m) */
void matmul(const Matrix& a, const Matrix& b, Matrix& c);
/* C (n x m) = A (n x k) * B(m x k)^T */
void matmul_bt(const Matrix& a, const Matrix& b, Matrix& c);
/* C (k x m) = A(n x k)^T * B (n x m); each element sums over n in order */
void matmul_at(const Matrix& a, const Matrix& b, Matrix& c);

/// Geometry of one 2-D convolution over an HxWxD tensor (channel-minor) with
/// A kernels of size kh x kw x D. Input position of output (oy, ox) and kernel
/// tap (m, n) is (oy * stride + m - pad_top, ox * stride + n - pad_left);
/// taps that land outside the input read zero.
struct ConvShape
{
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel_h = 1;
    std::size_t kernel_w = 1;
    std::size_t stride = 1;
    std::size_t pad_top = 0;
    std::size_t pad_left = 0;
    std::size_t out_height = 0;
    std::size_t out_width = 0;

    /* No padding: out = (in - k) / stride + 1 */
    static ConvShape valid(std::size_t h, std::size_t w, std::size_t d, std::size_t a,
                           std::size_t kh, std::size_t kw, std::size_t stride);
    /* Zero padding so that out = ceil(in / stride); extra padding goes bottom/right */
    static ConvShape same(std::size_t h, std::size_t w, std::size_t d, std::size_t a,
                          std::size_t kh, std::size_t kw, std::size_t stride);

    std::size_t input_size() const { return height * width * in_channels; }
    std::size_t output_size() const { return out_height * out_width * out_channels; }
    std::size_t kernel_size() const { return out_channels * kernel_h * kernel_w * in_channels; }

    bool operator==(const ConvShape&) const = default;
};

/// out[b] = conv(in[b]) + bias for every sample b of the batch. Kernel layout is
/// [a][m][n][d]. `bias` may be empty (treated as zero).
void conv_forward(const ConvShape& s, std::span<const double> input,
                  std::span<const double> kernel, std::span<const double> bias,
                  std::span<double> output, std::size_t batch);

/// Adjoint of conv_forward with respect to its input (transposed convolution):
/// grad_in[b] = S^T grad_out[b], where S is the convolution's matrix.
void conv_backward_input(const ConvShape& s, std::span<const double> grad_out,
                         std::span<const double> kernel, std::span<double> grad_in,
                         std::size_t batch);

/// Kernel and bias gradients summed over the batch. `grad_bias` may be empty.
void conv_backward_kernel(const ConvShape& s, std::span<const double> input,
                          std::span<const double> grad_out, std::span<double> grad_kernel,
                          std::span<double> grad_bias, std::size_t batch);

} // namespace pog::kernels

namespace pog::kernels::serial {

void matmul(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_bt(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_at(const Matrix& a, const Matrix& b, Matrix& c);

void conv_forward(const ConvShape& s, std::span<const double> input,
                  std::span<const double> kernel, std::span<const double> bias,
                  std::span<double> output, std::size_t batch);
void conv_backward_input(const ConvShape& s, std::span<const double> grad_out,
                         std::span<const double> kernel, std::span<double> grad_in,
                         std::size_t batch);
void conv_backward_kernel(const ConvShape& s, std::span<const double> input,
                          std::span<const double> grad_out, std::span<double> grad_kernel,
                          std::span<double> grad_bias, std::size_t batch);

} // namespace pog::kernels::serial

#endif // POG_KERNELS_HPP
