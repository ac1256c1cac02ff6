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


#include "pog/deconvnet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pog/binary_io.hpp"
#include "pog/errors.hpp"

namespace pog {

namespace {

constexpr std::string_view kConvNetMagic = "POGC";
constexpr std::uint16_t kConvNetVersion = 1;

void activate_inplace(ConvActivation a, std::span<double> v)
{
    if (a == ConvActivation::relu) {
        for (double& x : v) {
            if (x < 0.0) {
                x = 0.0; // NaN passes through so divergence stays visible
            }
        }
    }
}

/* Multiplies `grad` by the activation derivative, read off the activated output */
void backprop_activation(ConvActivation a, std::span<const double> out, std::span<double> grad)
{
    if (a == ConvActivation::relu) {
        for (std::size_t k = 0; k < grad.size(); ++k) {
            if (out[k] <= 0.0) {
                grad[k] = 0.0;
            }
        }
    }
}

void check_layer(const kernels::ConvShape& s, std::size_t kernel, std::size_t bias,
                 std::size_t bias_expected, const char* what)
{
    require(s.stride >= 1 && s.kernel_h >= 1 && s.kernel_w >= 1,
            std::string(what) + ": kernel and stride must be >= 1");
    require(s.height >= 1 && s.width >= 1 && s.in_channels >= 1 && s.out_channels >= 1,
            std::string(what) + ": empty shape");
    require(kernel == s.kernel_size(), std::string(what) + ": kernel size mismatch");
    require(bias == bias_expected, std::string(what) + ": bias size mismatch");
}

void fill_uniform(std::span<double> v, double limit, Rng& rng)
{
    for (double& x : v) {
        x = rng.uniform(-limit, limit);
    }
}

double conv_limit(const kernels::ConvShape& s)
{
    const double area = static_cast<double>(s.kernel_h * s.kernel_w);
    return std::sqrt(6.0 / (area * static_cast<double>(s.in_channels + s.out_channels)));
}

void write_shape(io::ByteWriter& w, const kernels::ConvShape& s)
{
    for (std::size_t v : {s.height, s.width, s.in_channels, s.out_channels, s.kernel_h,
                          s.kernel_w, s.stride, s.pad_top, s.pad_left, s.out_height,
                          s.out_width}) {
        w.u32(static_cast<std::uint32_t>(v));
    }
}

kernels::ConvShape read_shape(io::ByteReader& r)
{
    kernels::ConvShape s;
    for (std::size_t* v : {&s.height, &s.width, &s.in_channels, &s.out_channels, &s.kernel_h,
                           &s.kernel_w, &s.stride, &s.pad_top, &s.pad_left, &s.out_height,
                           &s.out_width}) {
        *v = r.u32();
    }
    return s;
}

ConvActivation read_activation(io::ByteReader& r)
{
    const std::uint8_t a = r.u8();
    if (a > static_cast<std::uint8_t>(ConvActivation::relu)) {
        r.fail("unknown activation code " + std::to_string(a));
    }
    return static_cast<ConvActivation>(a);
}

/* Every intermediate tensor of one batched forward pass */
struct Activations
{
    std::vector<double> h1, h2, f, u1, logits, probs;
};

Activations run_forward(const ConvNetModel& m, std::span<const double> input, std::size_t batch)
{
    require(batch >= 1, "forward needs at least one sample");
    require(input.size() == batch * m.conv1.shape.input_size(),
            "network input size mismatch: got " + std::to_string(input.size()) +
                " values for " + std::to_string(batch) + " samples");
    Activations a;
    a.h1 = conv_forward(m.conv1, input, batch);
    a.h2 = conv_forward(m.conv2, a.h1, batch);

    Matrix x(batch, m.fc.weights.cols(), a.h2);
    Matrix z;
    kernels::matmul_bt(x, m.fc.weights, z);
    for (std::size_t b = 0; b < batch; ++b) {
        auto row = z.row(b);
        for (std::size_t k = 0; k < row.size(); ++k) {
            row[k] += m.fc.bias[k];
        }
    }
    a.f = std::move(z.storage());
    activate_inplace(m.fc.activation, a.f);

    a.u1 = deconv_forward(m.deconv1, a.f, batch);
    a.logits = deconv_forward(m.deconv2, a.u1, batch);
    a.probs = pixel_softmax(a.logits, m.classes);
    return a;
}

/* Bias gradient of a deconvolution: per output channel sum over positions and batch */
void deconv_bias_grad(std::span<const double> grad_out, std::size_t channels, std::span<double> out)
{
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < grad_out.size(); ++k) {
        out[k % channels] += grad_out[k];
    }
}

} // namespace

void ConvLayer::validate() const
{
    check_layer(shape, kernel.size(), bias.size(), shape.out_channels, "conv layer");
}

void DeconvLayer::validate() const
{
    check_layer(shape, kernel.size(), bias.size(), shape.in_channels, "deconv layer");
}

void DenseLayer::validate() const
{
    require(weights.rows() >= 1 && weights.cols() >= 1, "dense layer: empty weights");
    require(bias.size() == weights.rows(), "dense layer: bias size mismatch");
}

std::vector<double> conv_forward(const ConvLayer& layer, std::span<const double> input,
                                 std::size_t batch)
{
    std::vector<double> out(layer.shape.output_size() * batch);
    kernels::conv_forward(layer.shape, input, layer.kernel, layer.bias, out, batch);
    activate_inplace(layer.activation, out);
    return out;
}

std::vector<double> deconv_forward(const DeconvLayer& layer, std::span<const double> input,
                                   std::size_t batch)
{
    std::vector<double> out(layer.shape.input_size() * batch);
    kernels::conv_backward_input(layer.shape, input, layer.kernel, out, batch);
    const std::size_t d = layer.shape.in_channels;
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] += layer.bias[k % d];
    }
    activate_inplace(layer.activation, out);
    return out;
}

Matrix build_sparse_conv_matrix(const kernels::ConvShape& s, std::span<const double> kernel)
{
    require(kernel.size() == s.kernel_size(), "conv kernel size mismatch");
    const std::size_t D = s.in_channels;
    const std::size_t A = s.out_channels;
    Matrix S(s.output_size(), s.input_size());
    for (std::size_t oy = 0; oy < s.out_height; ++oy) {
        for (std::size_t ox = 0; ox < s.out_width; ++ox) {
            for (std::size_t a = 0; a < A; ++a) {
                const std::size_t row = (oy * s.out_width + ox) * A + a;
                for (std::size_t m = 0; m < s.kernel_h; ++m) {
                    const std::size_t ry = oy * s.stride + m;
                    if (ry < s.pad_top || ry - s.pad_top >= s.height) {
                        continue;
                    }
                    for (std::size_t n = 0; n < s.kernel_w; ++n) {
                        const std::size_t rx = ox * s.stride + n;
                        if (rx < s.pad_left || rx - s.pad_left >= s.width) {
                            continue;
                        }
                        for (std::size_t d = 0; d < D; ++d) {
                            const std::size_t col =
                                ((ry - s.pad_top) * s.width + (rx - s.pad_left)) * D + d;
                            S(row, col) = kernel[((a * s.kernel_h + m) * s.kernel_w + n) * D + d];
                        }
                    }
                }
            }
        }
    }
    return S;
}

std::vector<double> pixel_softmax(std::span<const double> logits, std::size_t classes)
{
    require(classes >= 1 && logits.size() % classes == 0,
            "softmax input is not a whole number of pixels");
    std::vector<double> out(logits.size());
    for (std::size_t p = 0; p < logits.size(); p += classes) {
        double mx = logits[p];
        for (std::size_t c = 0; c < classes; ++c) {
            const double z = logits[p + c];
            if (!std::isfinite(z)) {
                throw NumericError("non-finite logit at pixel " + std::to_string(p / classes));
            }
            mx = std::max(mx, z);
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            out[p + c] = std::exp(logits[p + c] - mx);
            sum += out[p + c];
        }
        for (std::size_t c = 0; c < classes; ++c) {
            out[p + c] /= sum;
        }
    }
    return out;
}

double cross_entropy_loss(std::span<const double> pred, std::span<const double> truth_one_hot,
                          std::size_t classes)
{
    require(classes >= 1 && pred.size() % classes == 0 && pred.size() == truth_one_hot.size(),
            "cross-entropy shape mismatch");
    require(!pred.empty(), "cross-entropy of an empty tensor");
    double sum = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
        if (truth_one_hot[k] != 0.0) {
            sum -= truth_one_hot[k] * std::log(std::max(pred[k], kLogFloor));
        }
    }
    return sum / static_cast<double>(pred.size() / classes);
}

double cross_entropy_loss(std::span<const double> pred, std::span<const std::uint8_t> truth,
                          std::size_t classes)
{
    require(classes >= 1 && pred.size() == truth.size() * classes,
            "cross-entropy shape mismatch");
    require(!truth.empty(), "cross-entropy of an empty tensor");
    double sum = 0.0;
    for (std::size_t p = 0; p < truth.size(); ++p) {
        require(truth[p] < classes, "class index out of range");
        sum -= std::log(std::max(pred[p * classes + truth[p]], kLogFloor));
    }
    return sum / static_cast<double>(truth.size());
}

void ConvNetModel::validate() const
{
    require(classes >= 2, "convnet needs at least two classes");
    require(rows >= 1 && cols >= 1 && in_channels >= 1, "convnet input shape is empty");
    conv1.validate();
    conv2.validate();
    fc.validate();
    deconv1.validate();
    deconv2.validate();
    const auto& c1 = conv1.shape;
    const auto& c2 = conv2.shape;
    const auto& d1 = deconv1.shape;
    const auto& d2 = deconv2.shape;
    require(c1.height == rows && c1.width == cols && c1.in_channels == in_channels,
            "first convolution does not match the input grid");
    require(c2.height == c1.out_height && c2.width == c1.out_width &&
                c2.in_channels == c1.out_channels,
            "second convolution does not chain onto the first");
    require(fc.weights.cols() == c2.output_size(), "dense layer input size mismatch");
    require(fc.weights.rows() == d1.output_size(),
            "dense layer output does not reshape into the first deconvolution input");
    require(d1.height == d2.out_height && d1.width == d2.out_width &&
                d1.in_channels == d2.out_channels,
            "deconvolutions do not chain");
    require(d2.height == rows && d2.width == cols && d2.in_channels == classes,
            "last deconvolution does not produce rows x cols x classes");
}

std::vector<std::span<double>> ConvNetModel::parameters()
{
    return {conv1.kernel, conv1.bias,   conv2.kernel,   conv2.bias,   fc.weights.data(),
            fc.bias,      deconv1.kernel, deconv1.bias, deconv2.kernel, deconv2.bias};
}

std::vector<std::span<const double>> ConvNetModel::parameters() const
{
    return {conv1.kernel, conv1.bias,   conv2.kernel,   conv2.bias,   fc.weights.data(),
            fc.bias,      deconv1.kernel, deconv1.bias, deconv2.kernel, deconv2.bias};
}

std::size_t ConvNetModel::parameter_count() const
{
    std::size_t n = 0;
    for (const auto& p : parameters()) {
        n += p.size();
    }
    return n;
}

ConvNetModel make_convnet(std::size_t rows, std::size_t cols, std::size_t in_channels,
                          const ConvNetArch& arch, Rng& rng)
{
    require(arch.encoder_filters >= 1 && arch.decoder_filters >= 1, "filter counts must be >= 1");
    require(arch.classes >= 2, "convnet needs at least two classes");
    const std::size_t k = arch.kernel;
    const std::size_t st = arch.stride;
    ConvNetModel m;
    m.rows = rows;
    m.cols = cols;
    m.in_channels = in_channels;
    m.classes = arch.classes;

    const auto s1 = kernels::ConvShape::same(rows, cols, in_channels, arch.encoder_filters, k, k, st);
    const auto s2 = kernels::ConvShape::same(s1.out_height, s1.out_width, arch.encoder_filters,
                                             arch.encoder_filters, k, k, st);
    const auto t2 = kernels::ConvShape::same(rows, cols, arch.classes, arch.decoder_filters, k, k, st);
    const auto t1 = kernels::ConvShape::same(t2.out_height, t2.out_width, arch.decoder_filters,
                                             arch.decoder_filters, k, k, st);
    require(t1.out_height == s2.out_height && t1.out_width == s2.out_width,
            "encoder and decoder spatial sizes disagree");

    m.conv1 = {s1, std::vector<double>(s1.kernel_size()), std::vector<double>(s1.out_channels),
               ConvActivation::relu};
    m.conv2 = {s2, std::vector<double>(s2.kernel_size()), std::vector<double>(s2.out_channels),
               ConvActivation::relu};
    m.fc = {Matrix(t1.output_size(), s2.output_size()), std::vector<double>(t1.output_size()),
            ConvActivation::relu};
    m.deconv1 = {t1, std::vector<double>(t1.kernel_size()), std::vector<double>(t1.in_channels),
                 ConvActivation::relu};
    m.deconv2 = {t2, std::vector<double>(t2.kernel_size()), std::vector<double>(t2.in_channels),
                 ConvActivation::linear};

    fill_uniform(m.conv1.kernel, conv_limit(s1), rng);
    fill_uniform(m.conv2.kernel, conv_limit(s2), rng);
    fill_uniform(m.fc.weights.data(),
                 std::sqrt(6.0 / static_cast<double>(m.fc.weights.rows() + m.fc.weights.cols())),
                 rng);
    fill_uniform(m.deconv1.kernel, conv_limit(t1), rng);
    fill_uniform(m.deconv2.kernel, conv_limit(t2), rng);
    m.validate();
    return m;
}

ConvNetModel zero_like(const ConvNetModel& model)
{
    ConvNetModel z = model;
    for (auto p : z.parameters()) {
        std::fill(p.begin(), p.end(), 0.0);
    }
    return z;
}

std::vector<double> forward(const ConvNetModel& model, std::span<const double> input,
                            std::size_t batch)
{
    return run_forward(model, input, batch).probs;
}

std::vector<double> forward(const ConvNetModel& model, const AugmentedOccupancyGrid& aog)
{
    const auto& g = aog.config();
    require(g.rows == model.rows && g.cols == model.cols &&
                AugmentedOccupancyGrid::kAttributes == model.in_channels,
            "AOG shape does not match the network input");
    return forward(model, aog.values(), 1);
}

double loss_and_gradient(const ConvNetModel& m, std::span<const double> input,
                         std::span<const std::uint8_t> targets, std::size_t batch,
                         ConvNetModel* grad)
{
    const std::size_t C = m.classes;
    const std::size_t pixels = m.rows * m.cols;
    require(targets.size() == batch * pixels, "target size mismatch");
    const Activations a = run_forward(m, input, batch);
    const double loss = cross_entropy_loss(a.probs, targets, C);
    if (grad == nullptr) {
        return loss;
    }
    *grad = zero_like(m);

    // d loss / d logits = (p - onehot) / N, except where the log clamp is active.
    const double inv = 1.0 / static_cast<double>(batch * pixels);
    std::vector<double> g_logits(a.probs.size());
    for (std::size_t p = 0; p < batch * pixels; ++p) {
        const std::size_t t = targets[p];
        if (a.probs[p * C + t] < kLogFloor) {
            continue;
        }
        for (std::size_t c = 0; c < C; ++c) {
            g_logits[p * C + c] = (a.probs[p * C + c] - (c == t ? 1.0 : 0.0)) * inv;
        }
    }

    // deconv2 (linear)
    kernels::conv_backward_kernel(m.deconv2.shape, g_logits, a.u1, grad->deconv2.kernel, {}, batch);
    deconv_bias_grad(g_logits, C, grad->deconv2.bias);
    std::vector<double> g_u1(a.u1.size());
    kernels::conv_forward(m.deconv2.shape, g_logits, m.deconv2.kernel, {}, g_u1, batch);

    backprop_activation(m.deconv1.activation, a.u1, g_u1);
    kernels::conv_backward_kernel(m.deconv1.shape, g_u1, a.f, grad->deconv1.kernel, {}, batch);
    deconv_bias_grad(g_u1, m.deconv1.shape.in_channels, grad->deconv1.bias);
    std::vector<double> g_f(a.f.size());
    kernels::conv_forward(m.deconv1.shape, g_u1, m.deconv1.kernel, {}, g_f, batch);

    backprop_activation(m.fc.activation, a.f, g_f);
    const Matrix gz(batch, m.fc.weights.rows(), std::move(g_f));
    const Matrix x(batch, m.fc.weights.cols(), a.h2);
    kernels::matmul_at(gz, x, grad->fc.weights);
    for (std::size_t b = 0; b < batch; ++b) {
        const auto row = gz.row(b);
        for (std::size_t k = 0; k < row.size(); ++k) {
            grad->fc.bias[k] += row[k];
        }
    }
    Matrix gx;
    kernels::matmul(gz, m.fc.weights, gx);
    std::vector<double> g_h2 = std::move(gx.storage());

    backprop_activation(m.conv2.activation, a.h2, g_h2);
    kernels::conv_backward_kernel(m.conv2.shape, a.h1, g_h2, grad->conv2.kernel, grad->conv2.bias,
                                  batch);
    std::vector<double> g_h1(a.h1.size());
    kernels::conv_backward_input(m.conv2.shape, g_h2, m.conv2.kernel, g_h1, batch);

    backprop_activation(m.conv1.activation, a.h1, g_h1);
    kernels::conv_backward_kernel(m.conv1.shape, input, g_h1, grad->conv1.kernel, grad->conv1.bias,
                                  batch);
    return loss;
}

void ConvTrainSpec::validate() const
{
    require(epochs >= 1, "epochs must be >= 1");
    require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning rate must be > 0");
    require(batch_size >= 1, "batch size must be >= 1");
    require(arch.kernel >= 1 && arch.stride >= 1, "kernel and stride must be >= 1");
}

ConvSample make_sample(const AugmentedOccupancyGrid& aog, const QuantizedPog& target)
{
    require(aog.config().same_geometry(target.config()),
            "AOG and target POG have different grids");
    ConvSample s;
    s.input.assign(aog.values().begin(), aog.values().end());
    s.target.reserve(target.levels().size());
    for (const QuantizedLevel l : target.levels()) {
        s.target.push_back(l.index);
    }
    return s;
}

namespace {

void gather(const std::vector<ConvSample>& samples, std::span<const std::size_t> idx,
            std::vector<double>& input, std::vector<std::uint8_t>& target)
{
    input.clear();
    target.clear();
    for (const std::size_t k : idx) {
        input.insert(input.end(), samples[k].input.begin(), samples[k].input.end());
        target.insert(target.end(), samples[k].target.begin(), samples[k].target.end());
    }
}

void check_samples(const std::vector<ConvSample>& samples, std::size_t in_size,
                   std::size_t pixels, const char* what)
{
    for (std::size_t k = 0; k < samples.size(); ++k) {
        require(samples[k].input.size() == in_size && samples[k].target.size() == pixels,
                std::string(what) + " sample " + std::to_string(k) + " has the wrong shape");
    }
}

} // namespace

ConvNetModel train_convnet(const std::vector<ConvSample>& samples, std::size_t rows,
                           std::size_t cols, const ConvTrainSpec& spec,
                           const std::vector<ConvSample>& holdout, ConvTrainLog* log)
{
    spec.validate();
    require(!samples.empty(), "convnet training needs samples");
    const std::size_t in_size = samples.front().input.size();
    require(rows * cols >= 1 && in_size % (rows * cols) == 0, "sample input is not rows x cols x D");
    const std::size_t channels = in_size / (rows * cols);
    check_samples(samples, in_size, rows * cols, "training");
    check_samples(holdout, in_size, rows * cols, "holdout");
    for (const auto& s : samples) {
        for (const std::uint8_t t : s.target) {
            require(t < spec.arch.classes, "target class out of range");
        }
    }

    Rng init_rng(spec.rng_seed, {0});
    ConvNetModel model = make_convnet(rows, cols, channels, spec.arch, init_rng);
    ConvNetModel grad;
    ConvTrainLog local;

    std::vector<double> hold_in;
    std::vector<std::uint8_t> hold_t;
    std::vector<std::size_t> all_hold(holdout.size());
    for (std::size_t k = 0; k < all_hold.size(); ++k) {
        all_hold[k] = k;
    }
    gather(holdout, all_hold, hold_in, hold_t);

    const std::size_t n = samples.size();
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < n; ++k) {
        order[k] = k;
    }
    std::vector<double> in;
    std::vector<std::uint8_t> tg;
    for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
        Rng order_rng(spec.rng_seed, {1, epoch});
        order_rng.shuffle(order);
        double sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += spec.batch_size) {
            const std::size_t g = std::min(spec.batch_size, n - start);
            gather(samples, std::span(order).subspan(start, g), in, tg);
            const double loss = loss_and_gradient(model, in, tg, g, &grad);
            if (!std::isfinite(loss)) {
                throw NumericError("convnet training diverged: loss " + std::to_string(loss) +
                                   " at epoch " + std::to_string(epoch + 1) + ", batch " +
                                   std::to_string(batches + 1) + " (learning rate " +
                                   std::to_string(spec.learning_rate) + ")");
            }
            sum += loss;
            ++batches;
            auto params = model.parameters();
            const auto grads = std::as_const(grad).parameters();
            for (std::size_t p = 0; p < params.size(); ++p) {
                for (std::size_t k = 0; k < params[p].size(); ++k) {
                    params[p][k] -= spec.learning_rate * grads[p][k];
                }
            }
        }
        local.epoch_loss.push_back(sum / static_cast<double>(batches));
        if (!holdout.empty()) {
            local.holdout_loss.push_back(
                loss_and_gradient(model, hold_in, hold_t, holdout.size(), nullptr));
        }
    }

    for (auto p : model.parameters()) {
        io::round_to_f32(p);
        if (!std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); })) {
            throw NumericError("convnet training diverged: non-finite parameters after epoch " +
                               std::to_string(spec.epochs));
        }
    }
    if (log != nullptr) {
        *log = std::move(local);
    }
    return model;
}

std::vector<std::uint8_t> argmax_classes(std::span<const double> probs, std::size_t classes)
{
    require(classes >= 1 && classes <= 256 && probs.size() % classes == 0,
            "probabilities are not a whole number of pixels");
    std::vector<std::uint8_t> out(probs.size() / classes);
    for (std::size_t p = 0; p < out.size(); ++p) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < classes; ++c) {
            if (probs[p * classes + c] > probs[p * classes + best]) {
                best = c;
            }
        }
        out[p] = static_cast<std::uint8_t>(best);
    }
    return out;
}

QuantizedPog predict_pog(const ConvNetModel& model, const AugmentedOccupancyGrid& aog,
                         double t_pred)
{
    require(model.classes == kLevelCount, "model classes do not match the quantized levels");
    const auto cls = argmax_classes(forward(model, aog), model.classes);
    std::vector<QuantizedLevel> levels(cls.size());
    for (std::size_t k = 0; k < cls.size(); ++k) {
        levels[k].index = cls[k];
    }
    return QuantizedPog(aog.config().with_attributes(1), t_pred, std::move(levels));
}

std::vector<std::uint8_t> encode_convnet(const ConvNetModel& model)
{
    model.validate();
    io::ByteWriter w;
    w.bytes(kConvNetMagic);
    w.u16(kConvNetVersion);
    for (std::size_t v : {model.rows, model.cols, model.in_channels, model.classes}) {
        w.u32(static_cast<std::uint32_t>(v));
    }
    for (const ConvLayer* l : {&model.conv1, &model.conv2}) {
        write_shape(w, l->shape);
        w.u8(static_cast<std::uint8_t>(l->activation));
        w.f32_array(l->kernel);
        w.f32_array(l->bias);
    }
    w.u32(static_cast<std::uint32_t>(model.fc.weights.rows()));
    w.u32(static_cast<std::uint32_t>(model.fc.weights.cols()));
    w.u8(static_cast<std::uint8_t>(model.fc.activation));
    w.f32_array(model.fc.weights.data());
    w.f32_array(model.fc.bias);
    for (const DeconvLayer* l : {&model.deconv1, &model.deconv2}) {
        write_shape(w, l->shape);
        w.u8(static_cast<std::uint8_t>(l->activation));
        w.f32_array(l->kernel);
        w.f32_array(l->bias);
    }
    return w.data();
}

ConvNetModel decode_convnet(std::vector<std::uint8_t> bytes, const std::string& source)
{
    io::ByteReader r(std::move(bytes), source);
    r.expect_magic(kConvNetMagic);
    if (const auto v = r.u16(); v != kConvNetVersion) {
        r.fail("unsupported convnet model version " + std::to_string(v));
    }
    ConvNetModel m;
    m.rows = r.u32();
    m.cols = r.u32();
    m.in_channels = r.u32();
    m.classes = r.u32();
    // Shapes are checked before any payload is sized from them.
    const auto layer_shape = [&r]() {
        const auto s = read_shape(r);
        if (s.height == 0 || s.width == 0 || s.in_channels == 0 || s.out_channels == 0 ||
            s.kernel_h == 0 || s.kernel_w == 0 || s.stride == 0 ||
            s.kernel_size() > r.remaining()) {
            r.fail("invalid layer shape");
        }
        return s;
    };
    for (ConvLayer* l : {&m.conv1, &m.conv2}) {
        l->shape = layer_shape();
        l->activation = read_activation(r);
        l->kernel = r.f32_array(l->shape.kernel_size());
        l->bias = r.f32_array(l->shape.out_channels);
    }
    const std::size_t out = r.u32();
    const std::size_t in = r.u32();
    if (out == 0 || in == 0 || out * in > r.remaining()) {
        r.fail("invalid dense layer shape");
    }
    m.fc.activation = read_activation(r);
    m.fc.weights = Matrix(out, in, r.f32_array(out * in));
    m.fc.bias = r.f32_array(out);
    for (DeconvLayer* l : {&m.deconv1, &m.deconv2}) {
        l->shape = layer_shape();
        l->activation = read_activation(r);
        l->kernel = r.f32_array(l->shape.kernel_size());
        l->bias = r.f32_array(l->shape.in_channels);
    }
    r.expect_end();
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        r.fail(e.what());
    }
    for (const ConvLayer* l : {&m.conv1, &m.conv2}) {
        if (l->shape != kernels::ConvShape::same(l->shape.height, l->shape.width,
                                                 l->shape.in_channels, l->shape.out_channels,
                                                 l->shape.kernel_h, l->shape.kernel_w,
                                                 l->shape.stride)) {
            r.fail("inconsistent convolution padding");
        }
    }
    for (const DeconvLayer* l : {&m.deconv1, &m.deconv2}) {
        if (l->shape != kernels::ConvShape::same(l->shape.height, l->shape.width,
                                                 l->shape.in_channels, l->shape.out_channels,
                                                 l->shape.kernel_h, l->shape.kernel_w,
                                                 l->shape.stride)) {
            r.fail("inconsistent deconvolution padding");
        }
    }
    return m;
}

void save_convnet(const ConvNetModel& model, const std::filesystem::path& path)
{
    io::write_file_bytes(path, encode_convnet(model));
}

ConvNetModel load_convnet(const std::filesystem::path& path)
{
    return decode_convnet(io::read_file_bytes(path), path.string());
}

} // namespace pog
