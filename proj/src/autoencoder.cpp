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


#include "pog/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pog/binary_io.hpp"
#include "pog/errors.hpp"
#include "pog/kernels.hpp"

namespace pog {

namespace {

constexpr char kSdaMagic[] = "POGS";
constexpr std::uint16_t kSdaVersion = 1;

double apply(Activation a, double x)
{
    switch (a) {
    case Activation::linear: return x;
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Activation::tanh: return std::tanh(x);
    }
    return x;
}

// f'(x) expressed through y = f(x).
double slope(Activation a, double y)
{
    switch (a) {
    case Activation::linear: return 1.0;
    case Activation::sigmoid: return y * (1.0 - y);
    case Activation::tanh: return 1.0 - y * y;
    }
    return 1.0;
}

void add_row_bias(Matrix& m, std::span<const double> bias)
{
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] += bias[c];
        }
    }
}

std::vector<double> column_sums(const Matrix& m)
{
    std::vector<double> s(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            s[c] += m(r, c);
        }
    }
    return s;
}

double squared_norm(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return s;
}

struct Forward
{
    Matrix a_out;  // f(W p~ + b)
    Matrix r_out;  // f(W^T q + b')
};

Forward forward(const AutoencoderLayer& layer, const Matrix& noisy)
{
    Forward f;
    f.a_out = encode_layer(layer, noisy);
    f.r_out = decode_layer(layer, f.a_out);
    return f;
}

double objective_from(const Matrix& recon, const Matrix& clean, const Matrix& weights,
                      double weight_decay)
{
    double err = 0.0;
    for (std::size_t k = 0; k < recon.size(); ++k) {
        const double d = recon.data()[k] - clean.data()[k];
        err += d * d;
    }
    const double g = static_cast<double>(clean.rows());
    return err / (2.0 * g) + 0.5 * weight_decay * squared_norm(weights.data());
}

void check_batch(const AutoencoderLayer& layer, const Matrix& clean, const Matrix& noisy)
{
    require(clean.rows() >= 1, "empty autoencoder batch");
    require(clean.rows() == noisy.rows() && clean.cols() == noisy.cols(),
            "clean and corrupted batches differ in shape");
    require(clean.cols() == layer.in_dim(), "batch width does not match the layer input");
}

} // namespace

std::string_view to_string(Activation a)
{
    switch (a) {
    case Activation::linear: return "linear";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    }
    return "?";
}

Activation parse_activation(std::string_view s)
{
    for (auto a : {Activation::linear, Activation::sigmoid, Activation::tanh}) {
        if (to_string(a) == s) {
            return a;
        }
    }
    throw std::invalid_argument("unknown activation '" + std::string(s) + "'");
}

void activate(Activation a, std::span<double> values)
{
    if (a == Activation::linear) {
        return;
    }
    for (double& v : values) {
        v = apply(a, v);
    }
}

void CorruptionSpec::validate() const
{
    require(strength >= 0.0 && std::isfinite(strength), "corruption strength must be >= 0");
    if (kind != Kind::gaussian) {
        require(strength <= 1.0, "corruption fraction must be <= 1");
    }
}

std::string_view to_string(CorruptionSpec::Kind k)
{
    switch (k) {
    case CorruptionSpec::Kind::gaussian: return "gaussian";
    case CorruptionSpec::Kind::masking: return "masking";
    case CorruptionSpec::Kind::salt_pepper: return "salt_pepper";
    }
    return "?";
}

CorruptionSpec::Kind parse_corruption(std::string_view s)
{
    for (auto k : {CorruptionSpec::Kind::gaussian, CorruptionSpec::Kind::masking,
                   CorruptionSpec::Kind::salt_pepper}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    throw std::invalid_argument("unknown corruption kind '" + std::string(s) + "'");
}

std::vector<double> corrupt(std::span<const double> p, const CorruptionSpec& spec, Rng& rng)
{
    spec.validate();
    std::vector<double> out(p.begin(), p.end());
    if (spec.strength == 0.0) {
        return out;
    }
    switch (spec.kind) {
    case CorruptionSpec::Kind::gaussian:
        for (double& v : out) {
            v += spec.strength * rng.normal();
        }
        break;
    case CorruptionSpec::Kind::masking:
        for (double& v : out) {
            if (rng.uniform() < spec.strength) {
                v = 0.0;
            }
        }
        break;
    case CorruptionSpec::Kind::salt_pepper:
        for (double& v : out) {
            if (rng.uniform() < spec.strength) {
                v = rng.coin() ? spec.high : spec.low;
            }
        }
        break;
    }
    return out;
}

void AutoencoderLayer::validate() const
{
    require(in_dim() >= 1 && out_dim() >= 1, "autoencoder layer without units");
    require(bias_enc.size() == out_dim(), "encoder bias size mismatch");
    require(bias_dec.size() == in_dim(), "decoder bias size mismatch");
}

AutoencoderLayer AutoencoderLayer::initialized(std::size_t in, std::size_t out, Activation a,
                                               Rng& rng)
{
    require(in >= 1 && out >= 1, "autoencoder layer dimensions must be >= 1");
    AutoencoderLayer layer;
    layer.activation = a;
    layer.weights.reset(out, in);
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& w : layer.weights.data()) {
        w = rng.uniform(-bound, bound);
    }
    layer.bias_enc.assign(out, 0.0);
    layer.bias_dec.assign(in, 0.0);
    return layer;
}

std::vector<double> encode_layer(const AutoencoderLayer& layer, std::span<const double> p)
{
    layer.validate();
    require(p.size() == layer.in_dim(), "encode: input has " + std::to_string(p.size()) +
                                            " values, layer expects " +
                                            std::to_string(layer.in_dim()));
    std::vector<double> q(layer.out_dim());
    for (std::size_t j = 0; j < q.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            s += layer.weights(j, i) * p[i];
        }
        q[j] = apply(layer.activation, s + layer.bias_enc[j]);
    }
    return q;
}

std::vector<double> decode_layer(const AutoencoderLayer& layer, std::span<const double> q)
{
    layer.validate();
    require(q.size() == layer.out_dim(), "decode: code has " + std::to_string(q.size()) +
                                             " values, layer expects " +
                                             std::to_string(layer.out_dim()));
    std::vector<double> r(layer.in_dim());
    for (std::size_t i = 0; i < r.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            s += layer.weights(j, i) * q[j];
        }
        r[i] = apply(layer.activation, s + layer.bias_dec[i]);
    }
    return r;
}

Matrix encode_layer(const AutoencoderLayer& layer, const Matrix& p)
{
    layer.validate();
    require(p.cols() == layer.in_dim(), "encode: batch width does not match the layer input");
    Matrix q;
    kernels::matmul_bt(p, layer.weights, q);
    add_row_bias(q, layer.bias_enc);
    activate(layer.activation, q.data());
    return q;
}

Matrix decode_layer(const AutoencoderLayer& layer, const Matrix& q)
{
    layer.validate();
    require(q.cols() == layer.out_dim(), "decode: batch width does not match the layer output");
    Matrix r;
    kernels::matmul(q, layer.weights, r);
    add_row_bias(r, layer.bias_dec);
    activate(layer.activation, r.data());
    return r;
}

void TrainSpec::validate() const
{
    require(epochs >= 1, "epochs must be >= 1");
    require(learning_rate > 0.0, "learning rate must be > 0");
    require(weight_decay >= 0.0, "weight decay must be >= 0");
    require(batch_size >= 1, "batch size must be >= 1");
    corruption.validate();
}

double layer_objective(const AutoencoderLayer& layer, const Matrix& clean, const Matrix& noisy,
                       double weight_decay)
{
    check_batch(layer, clean, noisy);
    const Forward f = forward(layer, noisy);
    return objective_from(f.r_out, clean, layer.weights, weight_decay);
}

LayerGradient layer_gradient(const AutoencoderLayer& layer, const Matrix& clean,
                             const Matrix& noisy, double weight_decay)
{
    check_batch(layer, clean, noisy);
    const Forward f = forward(layer, noisy);
    const double g = static_cast<double>(clean.rows());

    LayerGradient grad;
    grad.loss = objective_from(f.r_out, clean, layer.weights, weight_decay);

    Matrix delta_r(f.r_out.rows(), f.r_out.cols());
    for (std::size_t k = 0; k < delta_r.size(); ++k) {
        const double r = f.r_out.data()[k];
        delta_r.data()[k] = (r - clean.data()[k]) / g * slope(layer.activation, r);
    }
    Matrix delta_a;
    kernels::matmul_bt(delta_r, layer.weights, delta_a);
    for (std::size_t k = 0; k < delta_a.size(); ++k) {
        delta_a.data()[k] *= slope(layer.activation, f.a_out.data()[k]);
    }

    Matrix from_decoder;
    kernels::matmul_at(delta_a, noisy, grad.weights);
    kernels::matmul_at(f.a_out, delta_r, from_decoder);
    for (std::size_t k = 0; k < grad.weights.size(); ++k) {
        grad.weights.data()[k] += from_decoder.data()[k] + weight_decay * layer.weights.data()[k];
    }
    grad.bias_enc = column_sums(delta_a);
    grad.bias_dec = column_sums(delta_r);
    return grad;
}

double layer_loss(const AutoencoderLayer& layer, const Matrix& batch, const TrainSpec& spec,
                  Rng& rng)
{
    Matrix noisy(batch.rows(), batch.cols());
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        const auto c = corrupt(batch.row(r), spec.corruption, rng);
        std::copy(c.begin(), c.end(), noisy.row(r).begin());
    }
    return layer_objective(layer, batch, noisy, spec.weight_decay);
}

AutoencoderLayer train_layer(const Matrix& data, std::size_t hidden_dim, const TrainSpec& spec,
                             TrainLog* log)
{
    spec.validate();
    require(data.rows() >= 1 && data.cols() >= 1, "autoencoder training needs data");
    require(hidden_dim >= 1, "hidden dimension must be >= 1");

    TrainSpec s = spec;
    const auto [lo, hi] = std::minmax_element(data.data().begin(), data.data().end());
    s.corruption.low = *lo;
    s.corruption.high = *hi;

    Rng init_rng(s.rng_seed, {0});
    AutoencoderLayer layer =
        AutoencoderLayer::initialized(data.cols(), hidden_dim, s.activation, init_rng);
    TrainLog local;
    local.initial_loss = layer_objective(layer, data, data, s.weight_decay);

    const std::size_t n = data.rows();
    const std::size_t dim = data.cols();
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < n; ++k) {
        order[k] = k;
    }
    for (std::size_t epoch = 0; epoch < s.epochs; ++epoch) {
        Rng order_rng(s.rng_seed, {1, epoch});
        Rng noise_rng(s.rng_seed, {2, epoch});
        order_rng.shuffle(order);
        double sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += s.batch_size) {
            const std::size_t g = std::min(s.batch_size, n - start);
            Matrix clean(g, dim);
            Matrix noisy(g, dim);
            for (std::size_t r = 0; r < g; ++r) {
                const auto src = data.row(order[start + r]);
                std::copy(src.begin(), src.end(), clean.row(r).begin());
                const auto c = corrupt(src, s.corruption, noise_rng);
                std::copy(c.begin(), c.end(), noisy.row(r).begin());
            }
            const LayerGradient grad = layer_gradient(layer, clean, noisy, s.weight_decay);
            if (!std::isfinite(grad.loss)) {
                throw NumericError("autoencoder training diverged: loss " +
                                   std::to_string(grad.loss) + " at epoch " +
                                   std::to_string(epoch + 1) + ", batch " +
                                   std::to_string(batches + 1) + " (learning rate " +
                                   std::to_string(s.learning_rate) + ")");
            }
            sum += grad.loss;
            ++batches;
            for (std::size_t k = 0; k < layer.weights.size(); ++k) {
                layer.weights.data()[k] -= s.learning_rate * grad.weights.data()[k];
            }
            for (std::size_t k = 0; k < layer.bias_enc.size(); ++k) {
                layer.bias_enc[k] -= s.learning_rate * grad.bias_enc[k];
            }
            for (std::size_t k = 0; k < layer.bias_dec.size(); ++k) {
                layer.bias_dec[k] -= s.learning_rate * grad.bias_dec[k];
            }
        }
        local.epoch_loss.push_back(sum / static_cast<double>(batches));
    }

    io::round_to_f32(layer.weights.data());
    io::round_to_f32(layer.bias_enc);
    io::round_to_f32(layer.bias_dec);
    local.final_loss = layer_objective(layer, data, data, s.weight_decay);
    if (!std::isfinite(local.final_loss)) {
        throw NumericError("autoencoder training produced a non-finite final loss");
    }
    if (log != nullptr) {
        *log = std::move(local);
    }
    return layer;
}

std::vector<std::size_t> SdaModel::layer_sizes() const
{
    std::vector<std::size_t> sizes;
    if (layers.empty()) {
        return sizes;
    }
    sizes.push_back(layers.front().in_dim());
    for (const auto& l : layers) {
        sizes.push_back(l.out_dim());
    }
    return sizes;
}

void SdaModel::validate() const
{
    require(!layers.empty(), "SDA model without layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].validate();
        if (l > 0) {
            require(layers[l].in_dim() == layers[l - 1].out_dim(),
                    "SDA layer " + std::to_string(l) + " does not chain onto its predecessor");
        }
    }
}

SdaModel train_stack(const Matrix& data, const std::vector<std::size_t>& sizes,
                     const TrainSpec& spec, std::vector<TrainLog>* logs)
{
    require(sizes.size() >= 2, "layer sizes need the input dimension and at least one layer");
    require(sizes.front() == data.cols(), "first layer size must equal the input dimension (" +
                                              std::to_string(data.cols()) + ")");
    SdaModel model;
    Matrix codes = data;
    for (std::size_t l = 1; l < sizes.size(); ++l) {
        TrainSpec layer_spec = spec;
        if (sizes.size() > 2) {
            layer_spec.rng_seed = Rng(spec.rng_seed, {l}).next();
        }
        TrainLog log;
        model.layers.push_back(train_layer(codes, sizes[l], layer_spec, &log));
        if (logs != nullptr) {
            logs->push_back(std::move(log));
        }
        if (l + 1 < sizes.size()) {
            codes = encode_layer(model.layers.back(), codes);
        }
    }
    return model;
}

std::vector<double> encode_stack(const SdaModel& model, std::span<const double> p)
{
    model.validate();
    std::vector<double> v(p.begin(), p.end());
    for (const auto& layer : model.layers) {
        v = encode_layer(layer, v);
    }
    return v;
}

std::vector<double> decode_stack(const SdaModel& model, std::span<const double> q)
{
    model.validate();
    std::vector<double> v(q.begin(), q.end());
    for (auto it = model.layers.rbegin(); it != model.layers.rend(); ++it) {
        v = decode_layer(*it, v);
    }
    return v;
}

Matrix encode_stack(const SdaModel& model, const Matrix& p)
{
    model.validate();
    Matrix v = p;
    for (const auto& layer : model.layers) {
        v = encode_layer(layer, v);
    }
    return v;
}

Matrix decode_stack(const SdaModel& model, const Matrix& q)
{
    model.validate();
    Matrix v = q;
    for (auto it = model.layers.rbegin(); it != model.layers.rend(); ++it) {
        v = decode_layer(*it, v);
    }
    return v;
}

std::vector<std::uint8_t> encode_sda(const SdaModel& model)
{
    model.validate();
    io::ByteWriter w;
    w.bytes(kSdaMagic);
    w.u16(kSdaVersion);
    w.u32(static_cast<std::uint32_t>(model.layers.size()));
    for (const auto& layer : model.layers) {
        w.u32(static_cast<std::uint32_t>(layer.in_dim()));
        w.u32(static_cast<std::uint32_t>(layer.out_dim()));
        w.u8(static_cast<std::uint8_t>(layer.activation));
        w.f32_array(layer.weights.data());
        w.f32_array(layer.bias_enc);
        w.f32_array(layer.bias_dec);
    }
    return w.data();
}

SdaModel decode_sda(std::vector<std::uint8_t> bytes, const std::string& source)
{
    io::ByteReader r(std::move(bytes), source);
    r.expect_magic(kSdaMagic);
    if (const auto v = r.u16(); v != kSdaVersion) {
        r.fail("unsupported SDA model version " + std::to_string(v));
    }
    const std::uint32_t count = r.u32();
    if (count == 0) {
        r.fail("SDA model without layers");
    }
    SdaModel model;
    for (std::uint32_t l = 0; l < count; ++l) {
        const std::size_t in = r.u32();
        const std::size_t out = r.u32();
        const std::uint8_t act = r.u8();
        if (in == 0 || out == 0 || act > static_cast<std::uint8_t>(Activation::tanh)) {
            r.fail("invalid SDA layer header");
        }
        AutoencoderLayer layer;
        layer.activation = static_cast<Activation>(act);
        layer.weights = Matrix(out, in, r.f32_array(in * out));
        layer.bias_enc = r.f32_array(out);
        layer.bias_dec = r.f32_array(in);
        if (!model.layers.empty() && model.layers.back().out_dim() != in) {
            r.fail("SDA layer " + std::to_string(l) + " does not chain onto its predecessor");
        }
        model.layers.push_back(std::move(layer));
    }
    r.expect_end();
    return model;
}

void save_sda(const SdaModel& model, const std::filesystem::path& path)
{
    io::write_file_bytes(path, encode_sda(model));
}

SdaModel load_sda(const std::filesystem::path& path)
{
    return decode_sda(io::read_file_bytes(path), path.string());
}

} // namespace pog
