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


#ifndef POG_AUTOENCODER_HPP
#define POG_AUTOENCODER_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "pog/matrix.hpp"
#include "pog/rng.hpp"

namespace pog {

enum class Activation { linear, sigmoid, tanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);

/* f applied in place */
void activate(Activation a, std::span<double> values);

struct CorruptionSpec
{
    enum class Kind { gaussian, masking, salt_pepper };

    Kind kind = Kind::gaussian;
    double strength = 0.1;  // std-dev (gaussian) or fraction (masking, salt_pepper)
    double low = 0.0;       // salt-and-pepper values; train_layer sets them from the data
    double high = 1.0;

    void validate() const;
};

std::string_view to_string(CorruptionSpec::Kind k);
CorruptionSpec::Kind parse_corruption(std::string_view s);

std::vector<double> corrupt(std::span<const double> p, const CorruptionSpec& spec, Rng& rng);

/// One tied-weight autoencoder layer: q = f(W p + b), r = f(W^T q + b').
/// Only W is stored, so the decoder is the transpose by construction.
struct AutoencoderLayer
{
    Matrix weights;                 // out x in
    std::vector<double> bias_enc;   // out
    std::vector<double> bias_dec;   // in
    Activation activation = Activation::linear;

    std::size_t in_dim() const { return weights.cols(); }
    std::size_t out_dim() const { return weights.rows(); }
    void validate() const;

    /* Zero biases, weights uniform in +-sqrt(6 / (in + out)) */
    static AutoencoderLayer initialized(std::size_t in, std::size_t out, Activation a, Rng& rng);
};

std::vector<double> encode_layer(const AutoencoderLayer& layer, std::span<const double> p);
std::vector<double> decode_layer(const AutoencoderLayer& layer, std::span<const double> q);

/* Row-wise batch versions: one sample per row */
Matrix encode_layer(const AutoencoderLayer& layer, const Matrix& p);
Matrix decode_layer(const AutoencoderLayer& layer, const Matrix& q);

struct TrainSpec
{
    std::size_t epochs = 500;
    double learning_rate = 0.001;
    double weight_decay = 0.005;   // lambda
    CorruptionSpec corruption;
    std::size_t batch_size = 32;
    std::uint64_t rng_seed = 1;
    Activation activation = Activation::linear;

    void validate() const;
};

struct LayerGradient
{
    double loss = 0.0;
    Matrix weights;
    std::vector<double> bias_enc;
    std::vector<double> bias_dec;
};

/// (1/2G) sum_g |r_g - p_g|^2 + (lambda/2) sum W^2, where r_g reconstructs the
/// corrupted row g of `noisy` and p_g is the matching clean row.
double layer_objective(const AutoencoderLayer& layer, const Matrix& clean, const Matrix& noisy,
                       double weight_decay);

/* Objective and its gradient with respect to W, b and b' */
LayerGradient layer_gradient(const AutoencoderLayer& layer, const Matrix& clean,
                             const Matrix& noisy, double weight_decay);

/* Objective on a batch after drawing fresh corruption from rng */
double layer_loss(const AutoencoderLayer& layer, const Matrix& batch, const TrainSpec& spec,
                  Rng& rng);

struct TrainLog
{
    double initial_loss = 0.0;        // clean-input objective before training
    double final_loss = 0.0;          // same, after training
    std::vector<double> epoch_loss;   // mean batch objective (with corruption) per epoch
};

/// Mini-batch gradient descent on the layer objective. Rows of `data` are the
/// samples; corruption is redrawn for every presentation. Parameters are
/// rounded to f32 at the end so a saved model reproduces them exactly.
AutoencoderLayer train_layer(const Matrix& data, std::size_t hidden_dim, const TrainSpec& spec,
                             TrainLog* log = nullptr);

struct SdaModel
{
    std::vector<AutoencoderLayer> layers;

    /* Input dimension followed by each layer's output dimension */
    std::vector<std::size_t> layer_sizes() const;
    std::size_t input_dim() const { return layers.front().in_dim(); }
    std::size_t code_dim() const { return layers.back().out_dim(); }
    void validate() const;
};

/// Greedy layer-wise training. `sizes` starts with the input dimension; layer l
/// trains on the clean codes of layer l-1 with its own seed derived from spec.rng_seed.
SdaModel train_stack(const Matrix& data, const std::vector<std::size_t>& sizes,
                     const TrainSpec& spec, std::vector<TrainLog>* logs = nullptr);

std::vector<double> encode_stack(const SdaModel& model, std::span<const double> p);
std::vector<double> decode_stack(const SdaModel& model, std::span<const double> q);
Matrix encode_stack(const SdaModel& model, const Matrix& p);
Matrix decode_stack(const SdaModel& model, const Matrix& q);

std::vector<std::uint8_t> encode_sda(const SdaModel& model);
SdaModel decode_sda(std::vector<std::uint8_t> bytes, const std::string& source = "<memory>");
void save_sda(const SdaModel& model, const std::filesystem::path& path);
SdaModel load_sda(const std::filesystem::path& path);

} // namespace pog

#endif // POG_AUTOENCODER_HPP
