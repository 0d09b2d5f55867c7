#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <variant>
#include <vector>

#include "advlab/dataset.hpp"
#include "advlab/tensor.hpp"

namespace advlab {

// Layer vocabulary. Spatial activations are (row, column, channel) row-major;
// flat activations are plain vectors.

// Convolution weights are laid out [out][kernel_row][kernel_col][in].
struct ConvLayer {
    std::size_t kernel_h = 3;
    std::size_t kernel_w = 3;
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    std::size_t stride = 1;
    std::size_t padding = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

struct ReluLayer {
    friend bool operator==(const ReluLayer&, const ReluLayer&) = default;
};

struct MaxPoolLayer {
    std::size_t window = 2;
    std::size_t stride = 2;

    friend bool operator==(const MaxPoolLayer&, const MaxPoolLayer&) = default;
};

struct FlattenLayer {
    friend bool operator==(const FlattenLayer&, const FlattenLayer&) = default;
};

// Weights laid out [out][in].
struct DenseLayer {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct SoftmaxLayer {
    friend bool operator==(const SoftmaxLayer&, const SoftmaxLayer&) = default;
};

using Layer = std::variant<ConvLayer, ReluLayer, MaxPoolLayer, FlattenLayer, DenseLayer, SoftmaxLayer>;

// Immutable layer stack ending in a single softmax.
class Classifier {
public:
    // Validates that layer shapes compose, weights are finite and sized, and
    // softmax appears exactly once, last. Throws ShapeError/ParameterError.
    Classifier(ImageShape input_shape, std::vector<Layer> layers);

    const ImageShape& input_shape() const noexcept { return input_shape_; }
    std::size_t num_classes() const noexcept { return num_classes_; }
    const std::vector<Layer>& layers() const noexcept { return layers_; }

    friend bool operator==(const Classifier&, const Classifier&) = default;

private:
    ImageShape input_shape_;
    std::vector<Layer> layers_;
    std::size_t num_classes_ = 0;
};

struct Prediction {
    std::vector<double> probabilities;
    std::size_t argmax_label = 0;  // lowest index on ties
    double argmax_probability = 0.0;
};

// conv3x3x8 -> relu -> pool2 -> conv3x3x16 -> relu -> pool2 -> flatten -> dense -> softmax.
// Height and width must be divisible by 4. Weights drawn uniform in
// [-s, s], s = sqrt(6 / (fan_in + fan_out)); biases zero.
Classifier make_default_classifier(ImageShape input, std::size_t num_classes, std::uint64_t seed);

// Softmax with max subtraction.
std::vector<double> softmax(std::span<const double> logits);

Prediction forward(const Classifier& f, const Image& x);

// Cross-entropy -log(p_y), p_y floored at 1e-12.
double loss(const Classifier& f, const Image& x, std::size_t label);

// d loss / d x, same shape as x (H x W x C).
Tensor input_gradient(const Classifier& f, const Image& x, std::size_t label);

struct PredictionWithGradient {
    Prediction prediction;
    Tensor gradient;  // d loss(label) / d x
};

// forward() and input_gradient() from a single forward pass.
PredictionWithGradient predict_with_gradient(const Classifier& f, const Image& x, std::size_t label);

struct TrainOptions {
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    double learning_rate = 0.05;
    std::uint64_t seed = 1;
    // Called after each epoch with the mean per-sample loss seen during it.
    std::function<void(std::size_t epoch, double mean_loss)> on_epoch;
};

// Minibatch SGD on cross-entropy. Single-threaded and deterministic given the
// seed; returns a new classifier and leaves f untouched.
Classifier train(const Classifier& f, const LabeledDataset& data, const TrainOptions& options);

double accuracy(const Classifier& f, const LabeledDataset& data);

// "ADVM" binary model format, version 1, little-endian throughout.
void save_model(const Classifier& f, const std::filesystem::path& path);
Classifier load_model(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_model(const Classifier& f);
Classifier decode_model(const std::vector<std::uint8_t>& bytes);

}  // namespace advlab
