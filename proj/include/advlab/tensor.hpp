#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace advlab {

// Dense row-major array of doubles. Carries activations and gradients.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const double> values() const noexcept { return data_; }
    std::span<double> values() noexcept { return data_; }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

std::string shape_string(std::span<const std::size_t> shape);

struct ImageShape {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;

    std::size_t size() const noexcept { return height * width * channels; }
    std::string str() const;
    friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

// H x W x C grid of intensities in [0, 1], laid out (row, column, channel).
// Channels is 1 (gray) or 3 (RGB).
class Image {
public:
    Image() = default;
    // All-zero image.
    explicit Image(ImageShape shape);
    // Throws ParameterError if the length, channel count or any value is invalid.
    Image(ImageShape shape, std::vector<double> pixels);

    const ImageShape& shape() const noexcept { return shape_; }
    std::size_t height() const noexcept { return shape_.height; }
    std::size_t width() const noexcept { return shape_.width; }
    std::size_t channels() const noexcept { return shape_.channels; }
    std::size_t size() const noexcept { return pixels_.size(); }

    std::span<const double> pixels() const noexcept { return pixels_; }

    double at(std::size_t row, std::size_t col, std::size_t ch) const {
        return pixels_[(row * shape_.width + col) * shape_.channels + ch];
    }

    Tensor to_tensor() const;

    friend bool operator==(const Image&, const Image&) = default;

private:
    ImageShape shape_;
    std::vector<double> pixels_;
};

}  // namespace advlab
