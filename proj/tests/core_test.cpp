#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "advlab/dataset.hpp"
#include "advlab/error.hpp"
#include "advlab/image_io.hpp"
#include "test_support.hpp"

namespace advlab {
namespace {

using testing::TempDir;

std::vector<std::uint8_t> bytes_of(const std::string& header, std::initializer_list<std::uint8_t> payload) {
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), payload);
    return out;
}

TEST(ImageTest, RejectsOutOfRangeAndMismatchedData) {
    EXPECT_THROW(Image({1, 1, 1}, {1.5}), ParameterError);
    EXPECT_THROW(Image({1, 1, 1}, {-0.1}), ParameterError);
    EXPECT_THROW(Image({1, 1, 1}, {std::nan("")}), ParameterError);
    EXPECT_THROW(Image({2, 2, 1}, {0.0, 0.0}), ShapeError);
    EXPECT_THROW(Image({1, 1, 2}, {0.0, 0.0}), ParameterError);
    EXPECT_THROW(Image({0, 1, 1}, {}), ParameterError);
}

TEST(ImageIoTest, LoadsGrayPixel) {
    TempDir dir;
    testing::write_bytes(dir / "a.pgm", bytes_of("P5\n1 1\n255\n", {255}));
    const Image img = load_image(dir / "a.pgm");
    EXPECT_EQ(img.shape(), (ImageShape{1, 1, 1}));
    EXPECT_EQ(img.pixels()[0], 1.0);
}

TEST(ImageIoTest, LoadsColorPixelWithLinearScaling) {
    TempDir dir;
    testing::write_bytes(dir / "a.ppm", bytes_of("P6\n1 1\n255\n", {0, 128, 255}));
    const Image img = load_image(dir / "a.ppm");
    EXPECT_EQ(img.shape(), (ImageShape{1, 1, 3}));
    EXPECT_EQ(img.pixels()[0], 0.0);
    EXPECT_EQ(img.pixels()[1], 128.0 / 255.0);
    EXPECT_EQ(img.pixels()[2], 1.0);
}

TEST(ImageIoTest, HeaderCommentsAreSkipped) {
    const Image img = decode_netpbm(bytes_of("P5\n# made by hand\n2 1\n255\n", {0, 51}));
    EXPECT_EQ(img.width(), 2u);
    EXPECT_EQ(img.pixels()[1], 51.0 / 255.0);
}

TEST(ImageIoTest, SaveQuantizesWithRoundHalfUp) {
    EXPECT_EQ(quantize(0.5), 128);  // 127.5 rounds up
    EXPECT_EQ(quantize(0.0), 0);
    EXPECT_EQ(quantize(1.0), 255);
    EXPECT_EQ(quantize(1.0 / 255.0), 1);

    TempDir dir;
    save_image(Image({1, 1, 1}, {0.5}), dir / "half.pgm");
    EXPECT_EQ(testing::read_bytes(dir / "half.pgm"), bytes_of("P5\n1 1\n255\n", {128}));
    save_image(Image({1, 1, 3}, {0.0, 0.0, 0.0}), dir / "black.ppm");
    EXPECT_EQ(testing::read_bytes(dir / "black.ppm"), bytes_of("P6\n1 1\n255\n", {0, 0, 0}));
}

TEST(ImageIoTest, FormatErrorsNameTheField) {
    auto message = [](const std::vector<std::uint8_t>& bytes) {
        try {
            decode_netpbm(bytes);
        } catch (const FormatError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message(bytes_of("P3\n1 1\n255\n", {0})).find("magic"), std::string::npos);
    EXPECT_NE(message(bytes_of("P5\n1 1\n65535\n", {0, 0})).find("maxval"), std::string::npos);
    EXPECT_NE(message(bytes_of("P6\n2 2\n255\n", {1, 2, 3})).find("truncated"), std::string::npos);
    EXPECT_NE(message(bytes_of("P5\nx 1\n255\n", {0})).find("width"), std::string::npos);
    EXPECT_NE(message(bytes_of("P5\n1\n", {})).find("height"), std::string::npos);
}

TEST(ImageIoTest, MissingFileIsIoError) {
    EXPECT_THROW(load_image("/nonexistent/dir/x.pgm"), IoError);
    EXPECT_THROW(save_image(Image({1, 1, 1}), "/nonexistent/dir/x.pgm"), IoError);
}

// Property: save -> load -> save is byte-identical, and load(save(x)) moves
// each intensity by at most half a quantization step.
TEST(ImageIoTest, RoundTripIsStable) {
    SplitMix64 rng(7);
    TempDir dir;
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t channels = trial % 2 ? 3 : 1;
        const Image original = testing::random_image({1 + rng.below(9), 1 + rng.below(9), channels}, rng);
        save_image(original, dir / "a.pnm");
        const Image loaded = load_image(dir / "a.pnm");
        save_image(loaded, dir / "b.pnm");
        ASSERT_EQ(testing::read_bytes(dir / "a.pnm"), testing::read_bytes(dir / "b.pnm"));
        for (std::size_t i = 0; i < original.size(); ++i) {
            ASSERT_LE(std::abs(loaded.pixels()[i] - original.pixels()[i]), 1.0 / 510.0 + 1e-15);
        }
    }
}

std::vector<std::uint8_t> idx_images(std::uint32_t count, std::uint32_t rows, std::uint32_t cols,
                                     std::vector<std::uint8_t> payload) {
    std::vector<std::uint8_t> out;
    testing::put_be32(out, 0x00000803);
    testing::put_be32(out, count);
    testing::put_be32(out, rows);
    testing::put_be32(out, cols);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

std::vector<std::uint8_t> idx_labels(std::vector<std::uint8_t> labels) {
    std::vector<std::uint8_t> out;
    testing::put_be32(out, 0x00000801);
    testing::put_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    return out;
}

TEST(IdxTest, DecodesImagesAndLabels) {
    const auto images = decode_idx_images(idx_images(1, 2, 2, {0, 51, 102, 255}));
    ASSERT_EQ(images.size(), 1u);
    EXPECT_EQ(images[0].shape(), (ImageShape{2, 2, 1}));
    EXPECT_EQ(images[0].at(0, 1, 0), 51.0 / 255.0);
    EXPECT_EQ(images[0].at(1, 1, 0), 1.0);
    EXPECT_EQ(decode_idx_labels(idx_labels({7})), std::vector<std::uint8_t>{7});
}

TEST(IdxTest, LoadsDatasetFromFiles) {
    TempDir dir;
    testing::write_bytes(dir / "img", idx_images(2, 2, 2, {0, 0, 0, 0, 255, 255, 255, 255}));
    testing::write_bytes(dir / "lbl", idx_labels({1, 4}));
    const LabeledDataset data = load_idx_dataset(dir / "img", dir / "lbl");
    EXPECT_EQ(data.size(), 2u);
    EXPECT_EQ(data.num_classes(), 5u);
    EXPECT_EQ(data[1].label, 4u);
    EXPECT_EQ(data[1].image.pixels()[3], 1.0);
}

TEST(IdxTest, RejectsBadFiles) {
    TempDir dir;
    testing::write_bytes(dir / "img", idx_images(2, 2, 2, std::vector<std::uint8_t>(8, 0)));
    testing::write_bytes(dir / "lbl3", idx_labels({0, 1, 2}));
    EXPECT_THROW(load_idx_dataset(dir / "img", dir / "lbl3"), FormatError);  // count mismatch

    auto bad_magic = idx_images(2, 2, 2, std::vector<std::uint8_t>(8, 0));
    bad_magic[3] = 0x08;
    EXPECT_THROW(decode_idx_images(bad_magic), FormatError);
    EXPECT_THROW(decode_idx_labels(idx_images(1, 1, 1, {0})), FormatError);  // image magic in label file
    EXPECT_THROW(decode_idx_images(idx_images(2, 2, 2, {0, 0, 0})), FormatError);  // truncated
    EXPECT_THROW(decode_idx_images({0, 0, 8}), FormatError);
    EXPECT_THROW(load_idx_dataset(dir / "missing", dir / "lbl3"), IoError);
}

TEST(DatasetTest, RejectsInconsistentItems) {
    EXPECT_THROW(LabeledDataset({{Image({1, 1, 1}), 3}}, 3), ParameterError);
    EXPECT_THROW(LabeledDataset({{Image({1, 1, 1}), 0}, {Image({2, 1, 1}), 0}}, 1), ShapeError);
}

TEST(ShapeDatasetTest, CountsAndLabels) {
    const LabeledDataset data = generate_shape_dataset(5, 16, 3);
    ASSERT_EQ(data.size(), 20u);
    EXPECT_EQ(data.num_classes(), 4u);
    EXPECT_EQ(data.image_shape(), (ImageShape{16, 16, 1}));
    std::vector<int> counts(4, 0);
    for (const auto& item : data.items()) ++counts[item.label];
    EXPECT_EQ(counts, (std::vector<int>{5, 5, 5, 5}));
}

TEST(ShapeDatasetTest, IsDeterministicInItsArguments) {
    EXPECT_EQ(generate_shape_dataset(3, 32, 11), generate_shape_dataset(3, 32, 11));
    EXPECT_NE(generate_shape_dataset(3, 32, 11), generate_shape_dataset(3, 32, 12));
}

TEST(ShapeDatasetTest, RejectsBadParameters) {
    EXPECT_THROW(generate_shape_dataset(1, 15, 1), ParameterError);
    EXPECT_THROW(generate_shape_dataset(0, 32, 1), ParameterError);
}

TEST(ShapeDatasetTest, ShapesAreBrighterThanBackground) {
    const LabeledDataset data = generate_shape_dataset(10, 32, 5);
    for (const auto& item : data.items()) {
        // The center pixel is covered by every class except the ring.
        const double center = item.image.at(16, 16, 0);
        const double corner = item.image.at(0, 0, 0);
        if (item.label != static_cast<std::size_t>(ShapeClass::ring)) {
            EXPECT_GT(center, corner) << "label " << item.label;
        }
    }
}

}  // namespace
}  // namespace advlab
