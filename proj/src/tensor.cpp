#include "advlab/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "advlab/error.hpp"

namespace advlab {
namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != element_count(shape_)) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string(shape_));
    }
    for (double v : data_) {
        if (!std::isfinite(v)) throw NumericError("tensor contains a non-finite value");
    }
}

std::string shape_string(std::span<const std::size_t> shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out << 'x';
        out << shape[i];
    }
    out << ']';
    return out.str();
}

std::string ImageShape::str() const {
    return std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels);
}

Image::Image(ImageShape shape) : Image(shape, std::vector<double>(shape.size(), 0.0)) {}

Image::Image(ImageShape shape, std::vector<double> pixels)
    : shape_(shape), pixels_(std::move(pixels)) {
    if (shape_.height == 0 || shape_.width == 0) {
        throw ParameterError("image dimensions must be positive, got " + shape_.str());
    }
    if (shape_.channels != 1 && shape_.channels != 3) {
        throw ParameterError("image channels must be 1 or 3, got " +
                             std::to_string(shape_.channels));
    }
    if (pixels_.size() != shape_.size()) {
        throw ShapeError("image data length " + std::to_string(pixels_.size()) +
                         " does not match shape " + shape_.str());
    }
    for (double v : pixels_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ParameterError("image intensity outside [0, 1]: " + std::to_string(v));
        }
    }
}

Tensor Image::to_tensor() const {
    return Tensor({shape_.height, shape_.width, shape_.channels}, pixels_);
}

}  // namespace advlab
