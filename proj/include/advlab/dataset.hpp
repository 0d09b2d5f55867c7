#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "advlab/tensor.hpp"

namespace advlab {

struct LabeledItem {
    Image image;
    std::size_t label = 0;

    friend bool operator==(const LabeledItem&, const LabeledItem&) = default;
};

// Images of one common shape, each tagged with a class id below num_classes.
class LabeledDataset {
public:
    LabeledDataset() = default;
    LabeledDataset(std::vector<LabeledItem> items, std::size_t num_classes);

    const std::vector<LabeledItem>& items() const noexcept { return items_; }
    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    std::size_t num_classes() const noexcept { return num_classes_; }
    // Shape shared by every image. Undefined for an empty dataset.
    const ImageShape& image_shape() const { return items_.front().image.shape(); }

    const LabeledItem& operator[](std::size_t i) const { return items_[i]; }

    friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

private:
    std::vector<LabeledItem> items_;
    std::size_t num_classes_ = 0;
};

// IDX files: big-endian u32 magic (0x803 images, 0x801 labels), big-endian u32
// dimension sizes, then u8 payload. num_classes is max label + 1.
LabeledDataset load_idx_dataset(const std::filesystem::path& image_path,
                                const std::filesystem::path& label_path);

// Parses in-memory IDX buffers; used by load_idx_dataset.
std::vector<Image> decode_idx_images(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> decode_idx_labels(const std::vector<std::uint8_t>& bytes);

enum class ShapeClass : std::size_t { disk = 0, square = 1, ring = 2, cross = 3 };
inline constexpr std::size_t kShapeClassCount = 4;

// Synthetic four-class gray dataset: filled disk, filled square, hollow ring
// and cross, drawn at random position/size/intensity over a noisy background.
// Items are ordered class-major and are a pure function of the arguments.
LabeledDataset generate_shape_dataset(std::size_t num_per_class, std::size_t side,
                                      std::uint64_t seed);

}  // namespace advlab
