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


#ifndef POG_DECONVNET_HPP
#define POG_DECONVNET_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pog/grid.hpp"
#include "pog/kernels.hpp"
#include "pog/matrix.hpp"
#include "pog/rng.hpp"

namespace pog {

enum class ConvActivation : std::uint8_t { linear, relu };

/* Convolution with kernel layout [a][m][n][d] over HWC tensors */
struct ConvLayer
{
    kernels::ConvShape shape;
    std::vector<double> kernel;
    std::vector<double> bias;  // out_channels
    ConvActivation activation = ConvActivation::relu;

    void validate() const;
};

/// Transposed convolution. `shape` describes the convolution being transposed,
/// so the layer maps shape.out_* (with out_channels) back to shape.height x
/// shape.width x shape.in_channels; the bias has in_channels entries.
struct DeconvLayer
{
    kernels::ConvShape shape;
    std::vector<double> kernel;
    std::vector<double> bias;
    ConvActivation activation = ConvActivation::relu;

    void validate() const;
};

struct DenseLayer
{
    Matrix weights;             // out x in
    std::vector<double> bias;   // out
    ConvActivation activation = ConvActivation::relu;

    void validate() const;
};

/* Forward passes over `batch` stacked HWC tensors */
std::vector<double> conv_forward(const ConvLayer& layer, std::span<const double> input,
                                 std::size_t batch = 1);
std::vector<double> deconv_forward(const DeconvLayer& layer, std::span<const double> input,
                                   std::size_t batch = 1);

/// Dense matrix S with vec(output) = S * vec(input) for one sample (rows index
/// output HWC positions, columns input HWC positions). Test oracle only.
Matrix build_sparse_conv_matrix(const kernels::ConvShape& shape, std::span<const double> kernel);

/* Per-pixel softmax over the innermost `classes` values, max-shifted; rejects non-finite logits */
std::vector<double> pixel_softmax(std::span<const double> logits, std::size_t classes);

inline constexpr double kLogFloor = 1e-12;

/* Mean over pixels of -sum_k y log(max(p, floor)) with one-hot truth */
double cross_entropy_loss(std::span<const double> pred, std::span<const double> truth_one_hot,
                          std::size_t classes);
/* Same with the true class index per pixel */
double cross_entropy_loss(std::span<const double> pred, std::span<const std::uint8_t> truth,
                          std::size_t classes);

struct ConvNetArch
{
    std::size_t encoder_filters = 20;   // A
    std::size_t decoder_filters = 20;   // B
    std::size_t kernel = 3;
    std::size_t stride = 2;
    std::size_t classes = kLevelCount;  // C
};

/// conv -> conv -> dense -> reshape -> deconv -> deconv -> softmax. The dense
/// layer keeps the size of the second feature map (20x20x20 = 8000 at paper scale).
struct ConvNetModel
{
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t in_channels = 0;
    std::size_t classes = 0;
    ConvLayer conv1;
    ConvLayer conv2;
    DenseLayer fc;
    DeconvLayer deconv1;
    DeconvLayer deconv2;

    /* Shape chain check; throws std::invalid_argument */
    void validate() const;
    /* Every parameter array in a fixed order */
    std::vector<std::span<double>> parameters();
    std::vector<std::span<const double>> parameters() const;
    std::size_t parameter_count() const;
};

/* Fan-based uniform weights, zero biases */
ConvNetModel make_convnet(std::size_t rows, std::size_t cols, std::size_t in_channels,
                          const ConvNetArch& arch, Rng& rng);
/* Same shapes, every parameter zero */
ConvNetModel zero_like(const ConvNetModel& model);

/* Class probabilities, batch x rows x cols x classes */
std::vector<double> forward(const ConvNetModel& model, std::span<const double> input,
                            std::size_t batch = 1);
std::vector<double> forward(const ConvNetModel& model, const AugmentedOccupancyGrid& aog);

/// Mean per-pixel cross-entropy over the batch; fills `grad` (same shapes as
/// the model) with its gradient when non-null.
double loss_and_gradient(const ConvNetModel& model, std::span<const double> input,
                         std::span<const std::uint8_t> targets, std::size_t batch,
                         ConvNetModel* grad);

struct ConvTrainSpec
{
    std::size_t epochs = 100;
    double learning_rate = 0.05;
    std::size_t batch_size = 16;
    std::uint64_t rng_seed = 1;
    ConvNetArch arch;

    void validate() const;
};

struct ConvSample
{
    std::vector<double> input;           // rows x cols x in_channels
    std::vector<std::uint8_t> target;    // class index per cell
};

/* Throws std::invalid_argument when the grids do not share geometry */
ConvSample make_sample(const AugmentedOccupancyGrid& aog, const QuantizedPog& target);

struct ConvTrainLog
{
    std::vector<double> epoch_loss;      // mean training batch loss
    std::vector<double> holdout_loss;    // loss on the held-out samples (if any)
};

/// Plain mini-batch SGD on the cross-entropy. Parameters are rounded to f32 at
/// the end so a saved model reproduces them exactly.
ConvNetModel train_convnet(const std::vector<ConvSample>& samples, std::size_t rows,
                           std::size_t cols, const ConvTrainSpec& spec,
                           const std::vector<ConvSample>& holdout = {},
                           ConvTrainLog* log = nullptr);

/* Argmax class per pixel (ties to the lower level) as a quantized POG */
QuantizedPog predict_pog(const ConvNetModel& model, const AugmentedOccupancyGrid& aog,
                         double t_pred);
/* Argmax class per pixel of a batch x pixels x classes probability tensor */
std::vector<std::uint8_t> argmax_classes(std::span<const double> probs, std::size_t classes);

std::vector<std::uint8_t> encode_convnet(const ConvNetModel& model);
ConvNetModel decode_convnet(std::vector<std::uint8_t> bytes, const std::string& source = "<memory>");
void save_convnet(const ConvNetModel& model, const std::filesystem::path& path);
ConvNetModel load_convnet(const std::filesystem::path& path);

} // namespace pog

#endif // POG_DECONVNET_HPP
