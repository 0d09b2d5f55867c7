#include "advlab/filters.hpp"

#include <algorithm>
#include <cmath>

#include "advlab/error.hpp"

namespace advlab {
namespace {

void check_kernel_size(std::size_t k) {
    if (k != 3 && k != 5) {
        throw ParameterError("filter kernel size must be 3 or 5, got " + std::to_string(k));
    }
}

std::size_t clamp_index(std::ptrdiff_t i, std::size_t extent) {
    if (i < 0) return 0;
    if (i >= static_cast<std::ptrdiff_t>(extent)) return extent - 1;
    return static_cast<std::size_t>(i);
}

std::vector<double> gaussian_1d(std::size_t size, double sigma) {
    const double c = static_cast<double>(size - 1) / 2.0;
    std::vector<double> k(size);
    double total = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        const double d = static_cast<double>(i) - c;
        k[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
        total += k[i];
    }
    for (double& v : k) v /= total;
    return k;
}

Image gaussian_filter(const Image& x, std::size_t size, double sigma) {
    const std::vector<double> k = gaussian_1d(size, sigma);
    const auto radius = static_cast<std::ptrdiff_t>(size / 2);
    const std::size_t h = x.height(), w = x.width(), ch = x.channels();
    const auto src = x.pixels();

    std::vector<double> rows(src.size());
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            for (std::size_t l = 0; l < ch; ++l) {
                double acc = 0.0;
                for (std::ptrdiff_t d = -radius; d <= radius; ++d) {
                    const std::size_t cc = clamp_index(static_cast<std::ptrdiff_t>(c) + d, w);
                    acc += k[static_cast<std::size_t>(d + radius)] * src[(r * w + cc) * ch + l];
                }
                rows[(r * w + c) * ch + l] = acc;
            }

    // Weights are convex, so the output stays within the input range; the
    // clamp only absorbs rounding.
    const auto [lo_it, hi_it] = std::minmax_element(src.begin(), src.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<double> out(src.size());
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            for (std::size_t l = 0; l < ch; ++l) {
                double acc = 0.0;
                for (std::ptrdiff_t d = -radius; d <= radius; ++d) {
                    const std::size_t rr = clamp_index(static_cast<std::ptrdiff_t>(r) + d, h);
                    acc += k[static_cast<std::size_t>(d + radius)] * rows[(rr * w + c) * ch + l];
                }
                out[(r * w + c) * ch + l] = std::clamp(acc, lo, hi);
            }
    return Image(x.shape(), std::move(out));
}

Image median_filter(const Image& x, std::size_t size) {
    const auto radius = static_cast<std::ptrdiff_t>(size / 2);
    const std::size_t h = x.height(), w = x.width(), ch = x.channels();
    const auto src = x.pixels();
    std::vector<double> out(src.size());
    std::vector<double> window(size * size);
    const auto middle = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            for (std::size_t l = 0; l < ch; ++l) {
                std::size_t n = 0;
                for (std::ptrdiff_t dy = -radius; dy <= radius; ++dy) {
                    const std::size_t rr = clamp_index(static_cast<std::ptrdiff_t>(r) + dy, h);
                    for (std::ptrdiff_t dx = -radius; dx <= radius; ++dx) {
                        const std::size_t cc = clamp_index(static_cast<std::ptrdiff_t>(c) + dx, w);
                        window[n++] = src[(rr * w + cc) * ch + l];
                    }
                }
                std::nth_element(window.begin(), middle, window.end());
                out[(r * w + c) * ch + l] = *middle;
            }
    return Image(x.shape(), std::move(out));
}

}  // namespace

std::string_view to_string(FilterKind kind) {
    switch (kind) {
        case FilterKind::identity: return "none";
        case FilterKind::gaussian: return "gaussian";
        case FilterKind::median: return "median";
    }
    return "?";
}

double default_sigma(std::size_t kernel_size) {
    return 0.3 * ((static_cast<double>(kernel_size) - 1.0) / 2.0 - 1.0) + 0.8;
}

FilterSpec FilterSpec::identity() { return FilterSpec(FilterKind::identity, 0, 0.0); }

FilterSpec FilterSpec::gaussian(std::size_t kernel_size, double sigma) {
    check_kernel_size(kernel_size);
    if (std::isnan(sigma) || std::isinf(sigma)) throw ParameterError("gaussian sigma must be finite");
    return FilterSpec(FilterKind::gaussian, kernel_size, sigma > 0.0 ? sigma : default_sigma(kernel_size));
}

FilterSpec FilterSpec::median(std::size_t kernel_size) {
    check_kernel_size(kernel_size);
    return FilterSpec(FilterKind::median, kernel_size, 0.0);
}

std::string FilterSpec::label() const {
    if (kind_ == FilterKind::identity) return "none";
    return std::string(to_string(kind_)) + std::to_string(kernel_size_);
}

FilterSpec parse_filter(std::string_view name) {
    if (name == "none") return FilterSpec::identity();
    if (name == "gaussian3") return FilterSpec::gaussian(3);
    if (name == "gaussian5") return FilterSpec::gaussian(5);
    if (name == "median3") return FilterSpec::median(3);
    if (name == "median5") return FilterSpec::median(5);
    throw ParameterError("unknown filter '" + std::string(name) +
                         "' (expected none, gaussian3, gaussian5, median3 or median5)");
}

Tensor gaussian_kernel(std::size_t size, double sigma) {
    if (size % 2 == 0) throw ParameterError("gaussian kernel size must be odd, got " + std::to_string(size));
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ParameterError("gaussian sigma must be > 0, got " + std::to_string(sigma));
    }
    const double c = static_cast<double>(size - 1) / 2.0;
    std::vector<double> k(size * size);
    double total = 0.0;
    for (std::size_t i = 0; i < size; ++i)
        for (std::size_t j = 0; j < size; ++j) {
            const double di = static_cast<double>(i) - c;
            const double dj = static_cast<double>(j) - c;
            k[i * size + j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
            total += k[i * size + j];
        }
    for (double& v : k) v /= total;
    return Tensor({size, size}, std::move(k));
}

Image apply_filter(const Image& x, const FilterSpec& spec) {
    switch (spec.kind()) {
        case FilterKind::identity: return x;
        case FilterKind::gaussian: return gaussian_filter(x, spec.kernel_size(), spec.sigma());
        case FilterKind::median: return median_filter(x, spec.kernel_size());
    }
    return x;
}

}  // namespace advlab
