#pragma once

#include <cstddef>
#include <string>

#include "advlab/tensor.hpp"

namespace advlab {

enum class FilterKind { identity, gaussian, median };

std::string_view to_string(FilterKind kind);

// Default Gaussian sigma for a kernel size: 0.3 * ((k - 1) / 2 - 1) + 0.8.
double default_sigma(std::size_t kernel_size);

class FilterSpec {
public:
    static FilterSpec identity();
    // kernel_size must be 3 or 5; sigma <= 0 selects default_sigma(kernel_size).
    static FilterSpec gaussian(std::size_t kernel_size, double sigma = 0.0);
    static FilterSpec median(std::size_t kernel_size);

    FilterKind kind() const noexcept { return kind_; }
    // 0 for the identity filter.
    std::size_t kernel_size() const noexcept { return kernel_size_; }
    // Only meaningful for gaussian.
    double sigma() const noexcept { return sigma_; }

    // e.g. "none", "gaussian3", "median5".
    std::string label() const;

    friend bool operator==(const FilterSpec&, const FilterSpec&) = default;

private:
    FilterSpec(FilterKind kind, std::size_t kernel_size, double sigma)
        : kind_(kind), kernel_size_(kernel_size), sigma_(sigma) {}

    FilterKind kind_ = FilterKind::identity;
    std::size_t kernel_size_ = 0;
    double sigma_ = 0.0;
};

// Parses "gaussian3", "gaussian5", "median3", "median5" or "none".
FilterSpec parse_filter(std::string_view name);

// size x size kernel, K(i,j) proportional to exp(-((i-c)^2 + (j-c)^2) / (2 sigma^2)),
// c = (size-1)/2, divided by its computed sum.
Tensor gaussian_kernel(std::size_t size, double sigma);

// Per-channel filtering with edge-replicate borders. Gaussian runs as two
// separable 1-D passes; median sorts each size x size window.
Image apply_filter(const Image& x, const FilterSpec& spec);

}  // namespace advlab
