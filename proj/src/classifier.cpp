#include "advlab/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "advlab/error.hpp"
#include "advlab/rng.hpp"

namespace advlab {
namespace {

using Shape = std::vector<std::size_t>;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

std::size_t pool_extent(std::size_t in, std::size_t window, std::size_t stride) {
    return (in - window) / stride + 1;
}

Shape output_shape(const Layer& layer, const Shape& in) {
    auto require_spatial = [&](const char* name) {
        if (in.size() != 3) {
            throw ShapeError(std::string(name) + " expects a spatial input, got " + shape_string(in));
        }
    };
    return std::visit(
        Overloaded{
            [&](const ConvLayer& c) -> Shape {
                require_spatial("conv");
                if (c.kernel_h == 0 || c.kernel_w == 0 || c.stride == 0 || c.out_channels == 0) {
                    throw ParameterError("conv kernel, stride and out-channels must be positive");
                }
                if (in[2] != c.in_channels) {
                    throw ShapeError("conv expects " + std::to_string(c.in_channels) +
                                     " input channels, got " + shape_string(in));
                }
                if (in[0] + 2 * c.padding < c.kernel_h || in[1] + 2 * c.padding < c.kernel_w) {
                    throw ShapeError("conv kernel larger than padded input " + shape_string(in));
                }
                return {(in[0] + 2 * c.padding - c.kernel_h) / c.stride + 1,
                        (in[1] + 2 * c.padding - c.kernel_w) / c.stride + 1, c.out_channels};
            },
            [&](const ReluLayer&) -> Shape { return in; },
            [&](const MaxPoolLayer& p) -> Shape {
                require_spatial("maxpool");
                if (p.window == 0 || p.stride == 0) throw ParameterError("maxpool window and stride must be positive");
                if (in[0] < p.window || in[1] < p.window) {
                    throw ShapeError("maxpool window larger than input " + shape_string(in));
                }
                return {pool_extent(in[0], p.window, p.stride), pool_extent(in[1], p.window, p.stride), in[2]};
            },
            [&](const FlattenLayer&) -> Shape {
                return {std::accumulate(in.begin(), in.end(), std::size_t{1}, std::multiplies<>())};
            },
            [&](const DenseLayer& d) -> Shape {
                if (in.size() != 1 || in[0] != d.in_dim) {
                    throw ShapeError("dense expects flat input of " + std::to_string(d.in_dim) +
                                     ", got " + shape_string(in));
                }
                if (d.out_dim == 0) throw ParameterError("dense out-dim must be positive");
                return {d.out_dim};
            },
            [&](const SoftmaxLayer&) -> Shape {
                if (in.size() != 1) throw ShapeError("softmax expects a flat input, got " + shape_string(in));
                return in;
            },
        },
        layer);
}

void check_params(std::span<const double> values, std::size_t expected, const char* what) {
    if (values.size() != expected) {
        throw ShapeError(std::string(what) + " has " + std::to_string(values.size()) +
                         " values, expected " + std::to_string(expected));
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw NumericError(std::string(what) + " contains a non-finite value");
    }
}

// Activations of every layer before the softmax. acts[0] is the input,
// acts.back() the logits.
struct ForwardTrace {
    std::vector<Shape> shapes;
    std::vector<std::vector<double>> acts;
};

// Weights reordered to [kernel_row][kernel_col][in][out] so the innermost
// loops run over contiguous output channels.
std::vector<double> conv_weights_by_output(const ConvLayer& c) {
    const std::size_t ic = c.in_channels, oc = c.out_channels;
    std::vector<double> t(c.weights.size());
    for (std::size_t o = 0; o < oc; ++o)
        for (std::size_t k = 0; k < c.kernel_h * c.kernel_w; ++k)
            for (std::size_t i = 0; i < ic; ++i) t[(k * ic + i) * oc + o] = c.weights[(o * c.kernel_h * c.kernel_w + k) * ic + i];
    return t;
}

std::vector<double> conv_forward(const ConvLayer& c, const Shape& in_shape,
                                 std::span<const double> in, const Shape& out_shape) {
    const std::size_t ih = in_shape[0], iw = in_shape[1], ic = in_shape[2];
    const std::size_t oh = out_shape[0], ow = out_shape[1], oc = out_shape[2];
    const std::vector<double> wt = conv_weights_by_output(c);
    std::vector<double> out(oh * ow * oc);
    for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
            double* dst = &out[(oy * ow + ox) * oc];
            for (std::size_t o = 0; o < oc; ++o) dst[o] = c.bias[o];
            for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
                const auto y = static_cast<std::ptrdiff_t>(oy * c.stride + ky) -
                               static_cast<std::ptrdiff_t>(c.padding);
                if (y < 0 || y >= static_cast<std::ptrdiff_t>(ih)) continue;
                for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
                    const auto x = static_cast<std::ptrdiff_t>(ox * c.stride + kx) -
                                   static_cast<std::ptrdiff_t>(c.padding);
                    if (x < 0 || x >= static_cast<std::ptrdiff_t>(iw)) continue;
                    const double* src = &in[(static_cast<std::size_t>(y) * iw + static_cast<std::size_t>(x)) * ic];
                    const double* w = &wt[(ky * c.kernel_w + kx) * ic * oc];
                    for (std::size_t i = 0; i < ic; ++i) {
                        const double v = src[i];
                        const double* wi = w + i * oc;
                        for (std::size_t o = 0; o < oc; ++o) dst[o] += wi[o] * v;
                    }
                }
            }
        }
    }
    return out;
}

// Accumulates into grad_in and, when non-null, weight/bias gradients.
void conv_backward(const ConvLayer& c, const Shape& in_shape, std::span<const double> in,
                   const Shape& out_shape, std::span<const double> grad_out,
                   std::span<double> grad_in, std::vector<double>* grad_w,
                   std::vector<double>* grad_b) {
    const std::size_t ih = in_shape[0], iw = in_shape[1], ic = in_shape[2];
    const std::size_t oh = out_shape[0], ow = out_shape[1], oc = out_shape[2];
    const std::vector<double> wt = conv_weights_by_output(c);
    std::vector<double> gwt(grad_w ? wt.size() : 0, 0.0);
    for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
            const double* g = &grad_out[(oy * ow + ox) * oc];
            if (grad_b) {
                for (std::size_t o = 0; o < oc; ++o) (*grad_b)[o] += g[o];
            }
            for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
                const auto y = static_cast<std::ptrdiff_t>(oy * c.stride + ky) -
                               static_cast<std::ptrdiff_t>(c.padding);
                if (y < 0 || y >= static_cast<std::ptrdiff_t>(ih)) continue;
                for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
                    const auto x = static_cast<std::ptrdiff_t>(ox * c.stride + kx) -
                                   static_cast<std::ptrdiff_t>(c.padding);
                    if (x < 0 || x >= static_cast<std::ptrdiff_t>(iw)) continue;
                    const std::size_t base = (static_cast<std::size_t>(y) * iw + static_cast<std::size_t>(x)) * ic;
                    const std::size_t woff = (ky * c.kernel_w + kx) * ic * oc;
                    for (std::size_t i = 0; i < ic; ++i) {
                        const double* wi = &wt[woff + i * oc];
                        double acc = 0.0;
                        for (std::size_t o = 0; o < oc; ++o) acc += wi[o] * g[o];
                        grad_in[base + i] += acc;
                        if (grad_w) {
                            double* gw = &gwt[woff + i * oc];
                            const double v = in[base + i];
                            for (std::size_t o = 0; o < oc; ++o) gw[o] += v * g[o];
                        }
                    }
                }
            }
        }
    }
    if (grad_w) {
        const std::size_t k_count = c.kernel_h * c.kernel_w;
        for (std::size_t o = 0; o < oc; ++o)
            for (std::size_t k = 0; k < k_count; ++k)
                for (std::size_t i = 0; i < ic; ++i)
                    (*grad_w)[(o * k_count + k) * ic + i] += gwt[(k * ic + i) * oc + o];
    }
}

// Index of the first maximum inside a pooling window.
std::size_t pool_argmax(std::span<const double> in, std::size_t w, std::size_t ch,
                        std::size_t c, std::size_t y0, std::size_t x0, std::size_t window) {
    std::size_t best = (y0 * w + x0) * ch + c;
    for (std::size_t dy = 0; dy < window; ++dy) {
        for (std::size_t dx = 0; dx < window; ++dx) {
            const std::size_t idx = ((y0 + dy) * w + (x0 + dx)) * ch + c;
            if (in[idx] > in[best]) best = idx;
        }
    }
    return best;
}

std::vector<double> layer_forward(const Layer& layer, const Shape& in_shape,
                                  std::span<const double> in, const Shape& out_shape) {
    return std::visit(
        Overloaded{
            [&](const ConvLayer& c) { return conv_forward(c, in_shape, in, out_shape); },
            [&](const ReluLayer&) {
                std::vector<double> out(in.begin(), in.end());
                for (double& v : out) v = v > 0.0 ? v : 0.0;
                return out;
            },
            [&](const MaxPoolLayer& p) {
                const std::size_t oh = out_shape[0], ow = out_shape[1], ch = out_shape[2];
                std::vector<double> out(oh * ow * ch);
                for (std::size_t oy = 0; oy < oh; ++oy)
                    for (std::size_t ox = 0; ox < ow; ++ox)
                        for (std::size_t c = 0; c < ch; ++c)
                            out[(oy * ow + ox) * ch + c] =
                                in[pool_argmax(in, in_shape[1], ch, c, oy * p.stride, ox * p.stride, p.window)];
                return out;
            },
            [&](const FlattenLayer&) { return std::vector<double>(in.begin(), in.end()); },
            [&](const DenseLayer& d) {
                std::vector<double> out(d.bias);
                for (std::size_t o = 0; o < d.out_dim; ++o) {
                    const double* w = &d.weights[o * d.in_dim];
                    double acc = 0.0;
                    for (std::size_t i = 0; i < d.in_dim; ++i) acc += w[i] * in[i];
                    out[o] += acc;
                }
                return out;
            },
            [&](const SoftmaxLayer&) { return softmax(in); },
        },
        layer);
}

struct ParamGrads {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;
};

// grad of the loss w.r.t. layer input, given grad w.r.t. its output.
std::vector<double> layer_backward(const Layer& layer, const Shape& in_shape,
                                   std::span<const double> in, const Shape& out_shape,
                                   std::span<const double> grad_out, std::vector<double>* grad_w,
                                   std::vector<double>* grad_b) {
    std::vector<double> grad_in(in.size(), 0.0);
    std::visit(
        Overloaded{
            [&](const ConvLayer& c) {
                conv_backward(c, in_shape, in, out_shape, grad_out, grad_in, grad_w, grad_b);
            },
            [&](const ReluLayer&) {
                for (std::size_t i = 0; i < in.size(); ++i) grad_in[i] = in[i] > 0.0 ? grad_out[i] : 0.0;
            },
            [&](const MaxPoolLayer& p) {
                const std::size_t oh = out_shape[0], ow = out_shape[1], ch = out_shape[2];
                for (std::size_t oy = 0; oy < oh; ++oy)
                    for (std::size_t ox = 0; ox < ow; ++ox)
                        for (std::size_t c = 0; c < ch; ++c)
                            grad_in[pool_argmax(in, in_shape[1], ch, c, oy * p.stride, ox * p.stride, p.window)] +=
                                grad_out[(oy * ow + ox) * ch + c];
            },
            [&](const FlattenLayer&) { std::copy(grad_out.begin(), grad_out.end(), grad_in.begin()); },
            [&](const DenseLayer& d) {
                for (std::size_t o = 0; o < d.out_dim; ++o) {
                    const double g = grad_out[o];
                    const double* w = &d.weights[o * d.in_dim];
                    for (std::size_t i = 0; i < d.in_dim; ++i) grad_in[i] += w[i] * g;
                    if (grad_w) {
                        double* gw = &(*grad_w)[o * d.in_dim];
                        for (std::size_t i = 0; i < d.in_dim; ++i) gw[i] += in[i] * g;
                    }
                    if (grad_b) (*grad_b)[o] += g;
                }
            },
            [&](const SoftmaxLayer&) {
                throw std::logic_error("softmax is folded into the loss gradient");
            },
        },
        layer);
    return grad_in;
}

ForwardTrace run_to_logits(const Classifier& f, const Image& x) {
    if (x.shape() != f.input_shape()) {
        throw ShapeError("input shape " + x.shape().str() + " does not match classifier input " +
                         f.input_shape().str());
    }
    ForwardTrace trace;
    const auto& layers = f.layers();
    trace.shapes.reserve(layers.size());
    trace.acts.reserve(layers.size());
    trace.shapes.push_back({x.height(), x.width(), x.channels()});
    trace.acts.emplace_back(x.pixels().begin(), x.pixels().end());
    for (std::size_t k = 0; k + 1 < layers.size(); ++k) {
        Shape out_shape = output_shape(layers[k], trace.shapes.back());
        trace.acts.push_back(layer_forward(layers[k], trace.shapes.back(), trace.acts.back(), out_shape));
        trace.shapes.push_back(std::move(out_shape));
    }
    return trace;
}

void check_label(const Classifier& f, std::size_t label) {
    if (label >= f.num_classes()) {
        throw ParameterError("class id " + std::to_string(label) + " out of range for " +
                             std::to_string(f.num_classes()) + " classes");
    }
}

Prediction make_prediction(std::vector<double> probabilities) {
    Prediction p;
    const auto best = std::max_element(probabilities.begin(), probabilities.end());
    p.argmax_label = static_cast<std::size_t>(best - probabilities.begin());
    p.argmax_probability = *best;
    p.probabilities = std::move(probabilities);
    return p;
}

double cross_entropy(std::span<const double> probabilities, std::size_t label) {
    return -std::log(std::max(probabilities[label], 1e-12));
}

// Backpropagates d loss / d logits = p - onehot(label). Returns d loss / d input.
std::vector<double> backward(const Classifier& f, const ForwardTrace& trace, std::size_t label,
                             ParamGrads* grads) {
    const auto& layers = f.layers();
    std::vector<double> grad = softmax(trace.acts.back());
    grad[label] -= 1.0;
    for (std::size_t k = layers.size() - 1; k-- > 0;) {
        std::vector<double>* gw = nullptr;
        std::vector<double>* gb = nullptr;
        if (grads && !grads->weights[k].empty()) {
            gw = &grads->weights[k];
            gb = &grads->bias[k];
        }
        grad = layer_backward(layers[k], trace.shapes[k], trace.acts[k], trace.shapes[k + 1], grad, gw, gb);
    }
    return grad;
}

std::vector<double> uniform_weights(std::size_t count, std::size_t fan_in, std::size_t fan_out,
                                    SplitMix64& rng) {
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<double> w(count);
    for (double& v : w) v = rng.uniform(-s, s);
    return w;
}

}  // namespace

Classifier::Classifier(ImageShape input_shape, std::vector<Layer> layers)
    : input_shape_(input_shape), layers_(std::move(layers)) {
    if (input_shape_.size() == 0) throw ParameterError("classifier input shape must be non-empty");
    if (layers_.empty() || !std::holds_alternative<SoftmaxLayer>(layers_.back())) {
        throw ParameterError("classifier must end with a softmax layer");
    }
    Shape shape{input_shape_.height, input_shape_.width, input_shape_.channels};
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const Layer& layer = layers_[k];
        if (k + 1 < layers_.size() && std::holds_alternative<SoftmaxLayer>(layer)) {
            throw ParameterError("softmax may only appear as the last layer");
        }
        shape = output_shape(layer, shape);
        if (const auto* c = std::get_if<ConvLayer>(&layer)) {
            check_params(c->weights, c->out_channels * c->kernel_h * c->kernel_w * c->in_channels, "conv weights");
            check_params(c->bias, c->out_channels, "conv bias");
        } else if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            check_params(d->weights, d->out_dim * d->in_dim, "dense weights");
            check_params(d->bias, d->out_dim, "dense bias");
        }
    }
    num_classes_ = shape[0];
}

Classifier make_default_classifier(ImageShape input, std::size_t num_classes, std::uint64_t seed) {
    if (input.height % 4 != 0 || input.width % 4 != 0 || input.height == 0 || input.width == 0) {
        throw ParameterError("default architecture needs height and width divisible by 4, got " + input.str());
    }
    if (num_classes == 0) throw ParameterError("num_classes must be positive");
    SplitMix64 rng(seed);
    auto conv = [&](std::size_t in_ch, std::size_t out_ch) {
        ConvLayer c{3, 3, in_ch, out_ch, 1, 1, {}, {}};
        c.weights = uniform_weights(out_ch * 9 * in_ch, 9 * in_ch, 9 * out_ch, rng);
        c.bias.assign(out_ch, 0.0);
        return c;
    };
    std::vector<Layer> layers;
    layers.emplace_back(conv(input.channels, 8));
    layers.emplace_back(ReluLayer{});
    layers.emplace_back(MaxPoolLayer{2, 2});
    layers.emplace_back(conv(8, 16));
    layers.emplace_back(ReluLayer{});
    layers.emplace_back(MaxPoolLayer{2, 2});
    layers.emplace_back(FlattenLayer{});
    DenseLayer dense;
    dense.in_dim = 16 * (input.height / 4) * (input.width / 4);
    dense.out_dim = num_classes;
    dense.weights = uniform_weights(dense.in_dim * num_classes, dense.in_dim, num_classes, rng);
    dense.bias.assign(num_classes, 0.0);
    layers.emplace_back(std::move(dense));
    layers.emplace_back(SoftmaxLayer{});
    return Classifier(input, std::move(layers));
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.begin(), logits.end());
    if (p.empty()) return p;
    const double top = *std::max_element(p.begin(), p.end());
    double total = 0.0;
    for (double& v : p) {
        v = std::exp(v - top);
        total += v;
    }
    for (double& v : p) v /= total;
    return p;
}

Prediction forward(const Classifier& f, const Image& x) {
    const ForwardTrace trace = run_to_logits(f, x);
    return make_prediction(softmax(trace.acts.back()));
}

double loss(const Classifier& f, const Image& x, std::size_t label) {
    check_label(f, label);
    return cross_entropy(forward(f, x).probabilities, label);
}

Tensor input_gradient(const Classifier& f, const Image& x, std::size_t label) {
    check_label(f, label);
    const ForwardTrace trace = run_to_logits(f, x);
    std::vector<double> grad = backward(f, trace, label, nullptr);
    return Tensor({x.height(), x.width(), x.channels()}, std::move(grad));
}

PredictionWithGradient predict_with_gradient(const Classifier& f, const Image& x, std::size_t label) {
    check_label(f, label);
    const ForwardTrace trace = run_to_logits(f, x);
    std::vector<double> grad = backward(f, trace, label, nullptr);
    return {make_prediction(softmax(trace.acts.back())),
            Tensor({x.height(), x.width(), x.channels()}, std::move(grad))};
}

Classifier train(const Classifier& f, const LabeledDataset& data, const TrainOptions& options) {
    if (data.empty()) throw ParameterError("cannot train on an empty dataset");
    if (data.image_shape() != f.input_shape()) {
        throw ShapeError("dataset image shape " + data.image_shape().str() +
                         " does not match classifier input " + f.input_shape().str());
    }
    if (data.num_classes() > f.num_classes()) {
        throw ParameterError("dataset has " + std::to_string(data.num_classes()) +
                             " classes but the classifier only " + std::to_string(f.num_classes()));
    }
    if (options.batch_size == 0) throw ParameterError("batch size must be positive");
    if (!(options.learning_rate >= 0.0) || !std::isfinite(options.learning_rate)) {
        throw ParameterError("learning rate must be finite and non-negative");
    }

    std::vector<Layer> layers = f.layers();
    ParamGrads grads;
    grads.weights.resize(layers.size());
    grads.bias.resize(layers.size());
    auto reset_grads = [&] {
        for (std::size_t k = 0; k < layers.size(); ++k) {
            if (const auto* c = std::get_if<ConvLayer>(&layers[k])) {
                grads.weights[k].assign(c->weights.size(), 0.0);
                grads.bias[k].assign(c->bias.size(), 0.0);
            } else if (const auto* d = std::get_if<DenseLayer>(&layers[k])) {
                grads.weights[k].assign(d->weights.size(), 0.0);
                grads.bias[k].assign(d->bias.size(), 0.0);
            }
        }
    };
    auto apply_update = [&](double scale) {
        auto step = [&](std::vector<double>& params, const std::vector<double>& g) {
            for (std::size_t i = 0; i < params.size(); ++i) params[i] -= scale * g[i];
        };
        for (std::size_t k = 0; k < layers.size(); ++k) {
            if (auto* c = std::get_if<ConvLayer>(&layers[k])) {
                step(c->weights, grads.weights[k]);
                step(c->bias, grads.bias[k]);
            } else if (auto* d = std::get_if<DenseLayer>(&layers[k])) {
                step(d->weights, grads.weights[k]);
                step(d->bias, grads.bias[k]);
            }
        }
    };

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(options.seed);

    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        // The working model is rebuilt per batch so each forward pass sees
        // the weights updated by the previous batch.
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
            const std::size_t stop = std::min(order.size(), start + options.batch_size);
            const Classifier current(f.input_shape(), layers);
            reset_grads();
            for (std::size_t n = start; n < stop; ++n) {
                const LabeledItem& item = data[order[n]];
                const ForwardTrace trace = run_to_logits(current, item.image);
                epoch_loss += cross_entropy(softmax(trace.acts.back()), item.label);
                backward(current, trace, item.label, &grads);
            }
            apply_update(options.learning_rate / static_cast<double>(stop - start));
        }
        if (options.on_epoch) options.on_epoch(epoch, epoch_loss / static_cast<double>(order.size()));
    }
    return Classifier(f.input_shape(), std::move(layers));
}

double accuracy(const Classifier& f, const LabeledDataset& data) {
    if (data.empty()) throw ParameterError("cannot score an empty dataset");
    std::size_t correct = 0;
    for (const auto& item : data.items()) {
        if (forward(f, item.image).argmax_label == item.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace advlab
