#include "advlab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>

#include "advlab/error.hpp"
#include "advlab/rng.hpp"

namespace advlab {
namespace {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const char* field) {
    if (bytes.size() < offset + 4) {
        throw FormatError(std::string("IDX header truncated while reading ") + field);
    }
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void check_magic(std::uint32_t magic, std::uint32_t expected, const char* what) {
    if (magic != expected) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "IDX %s magic 0x%08X, expected 0x%08X", what, magic,
                      expected);
        throw FormatError(buf);
    }
}

}  // namespace

LabeledDataset::LabeledDataset(std::vector<LabeledItem> items, std::size_t num_classes)
    : items_(std::move(items)), num_classes_(num_classes) {
    if (num_classes_ == 0) throw ParameterError("dataset needs at least one class");
    for (const auto& item : items_) {
        if (item.label >= num_classes_) {
            throw ParameterError("label " + std::to_string(item.label) + " out of range for " +
                                 std::to_string(num_classes_) + " classes");
        }
        if (item.image.shape() != items_.front().image.shape()) {
            throw ShapeError("dataset images differ in shape: " + item.image.shape().str() +
                             " vs " + items_.front().image.shape().str());
        }
    }
}

std::vector<Image> decode_idx_images(const std::vector<std::uint8_t>& bytes) {
    check_magic(read_be32(bytes, 0, "magic"), kIdxImageMagic, "image");
    const std::size_t count = read_be32(bytes, 4, "image count");
    const std::size_t rows = read_be32(bytes, 8, "row count");
    const std::size_t cols = read_be32(bytes, 12, "column count");
    if (rows == 0 || cols == 0) throw FormatError("IDX image dimensions must be positive");
    const std::size_t per_image = rows * cols;
    if ((bytes.size() - 16) / per_image < count) {
        throw FormatError("IDX image payload truncated: header declares " + std::to_string(count) +
                          " images of " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    std::vector<Image> images;
    images.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        const auto* src = bytes.data() + 16 + n * per_image;
        std::vector<double> pixels(per_image);
        for (std::size_t i = 0; i < per_image; ++i) pixels[i] = src[i] / 255.0;
        images.emplace_back(ImageShape{rows, cols, 1}, std::move(pixels));
    }
    return images;
}

std::vector<std::uint8_t> decode_idx_labels(const std::vector<std::uint8_t>& bytes) {
    check_magic(read_be32(bytes, 0, "magic"), kIdxLabelMagic, "label");
    const std::size_t count = read_be32(bytes, 4, "label count");
    if (bytes.size() - 8 < count) {
        throw FormatError("IDX label payload truncated: header declares " + std::to_string(count) +
                          " labels, found " + std::to_string(bytes.size() - 8));
    }
    return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

LabeledDataset load_idx_dataset(const std::filesystem::path& image_path,
                                const std::filesystem::path& label_path) {
    std::vector<Image> images;
    std::vector<std::uint8_t> labels;
    try {
        images = decode_idx_images(read_file(image_path));
    } catch (const FormatError& e) {
        throw FormatError(image_path.string() + ": " + e.what());
    }
    try {
        labels = decode_idx_labels(read_file(label_path));
    } catch (const FormatError& e) {
        throw FormatError(label_path.string() + ": " + e.what());
    }
    if (images.size() != labels.size()) {
        throw FormatError("IDX count mismatch: " + std::to_string(images.size()) + " images, " +
                          std::to_string(labels.size()) + " labels");
    }
    if (images.empty()) throw FormatError("IDX files contain no items");

    std::vector<LabeledItem> items;
    items.reserve(images.size());
    std::size_t max_label = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        max_label = std::max<std::size_t>(max_label, labels[i]);
        items.push_back({std::move(images[i]), labels[i]});
    }
    return LabeledDataset(std::move(items), max_label + 1);
}

namespace {

struct ShapeParams {
    double cy, cx;        // center
    double radius;        // outer extent
    double stroke;        // ring/cross thickness
    double foreground;    // shape intensity
    double background;    // base background intensity
};

bool covers(ShapeClass cls, const ShapeParams& p, double y, double x) {
    const double dy = y - p.cy;
    const double dx = x - p.cx;
    switch (cls) {
        case ShapeClass::disk:
            return dy * dy + dx * dx <= p.radius * p.radius;
        case ShapeClass::square: {
            const double half = 0.85 * p.radius;
            return std::abs(dy) <= half && std::abs(dx) <= half;
        }
        case ShapeClass::ring: {
            const double r2 = dy * dy + dx * dx;
            const double inner = p.radius - p.stroke;
            return r2 <= p.radius * p.radius && r2 >= inner * inner;
        }
        case ShapeClass::cross: {
            const double half = 0.5 * p.stroke;
            return (std::abs(dy) <= half && std::abs(dx) <= p.radius) ||
                   (std::abs(dx) <= half && std::abs(dy) <= p.radius);
        }
    }
    return false;
}

Image render_shape(ShapeClass cls, std::size_t side, SplitMix64& rng) {
    const double s = static_cast<double>(side);
    ShapeParams p{};
    p.radius = rng.uniform(0.30 * s, 0.40 * s);
    p.stroke = rng.uniform(0.18 * s, 0.22 * s);
    const double mid = 0.5 * (s - 1.0);
    const double jitter = 0.06 * s;
    p.cy = mid + rng.uniform(-jitter, jitter);
    p.cx = mid + rng.uniform(-jitter, jitter);
    p.background = rng.uniform(0.0, 0.1);
    p.foreground = p.background + rng.uniform(0.15, 0.25);

    std::vector<double> pixels(side * side);
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            const double base = covers(cls, p, static_cast<double>(r), static_cast<double>(c))
                                    ? p.foreground
                                    : p.background;
            const double noisy = base + rng.uniform(-0.02, 0.02);
            pixels[r * side + c] = std::clamp(noisy, 0.0, 1.0);
        }
    }
    return Image({side, side, 1}, std::move(pixels));
}

}  // namespace

LabeledDataset generate_shape_dataset(std::size_t num_per_class, std::size_t side,
                                      std::uint64_t seed) {
    if (side < 16) throw ParameterError("shape dataset side must be >= 16, got " + std::to_string(side));
    if (num_per_class < 1) throw ParameterError("shape dataset needs at least one item per class");

    std::vector<LabeledItem> items;
    items.reserve(num_per_class * kShapeClassCount);
    for (std::size_t cls = 0; cls < kShapeClassCount; ++cls) {
        SplitMix64 rng(derive_seed(seed, cls));
        for (std::size_t n = 0; n < num_per_class; ++n) {
            items.push_back({render_shape(static_cast<ShapeClass>(cls), side, rng), cls});
        }
    }
    return LabeledDataset(std::move(items), kShapeClassCount);
}

}  // namespace advlab
