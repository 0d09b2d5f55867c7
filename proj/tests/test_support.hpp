#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "advlab/classifier.hpp"
#include "advlab/rng.hpp"
#include "advlab/tensor.hpp"

namespace advlab::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

Image random_image(ImageShape shape, SplitMix64& rng);
std::vector<double> random_vector(std::size_t n, double scale, SplitMix64& rng);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

// Appends a big-endian u32.
void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v);

// Central finite difference of loss(f, x, label) along every pixel.
std::vector<double> finite_difference_gradient(const Classifier& f, const Image& x, std::size_t label,
                                               double step);

// |a - b| / max(|a|, |b|, 1e-6)
double relative_error(double a, double b);

// Default 32x32 victim trained on the synthetic shape set (seed 1,
// 100 per class, 20 epochs, batch 32, lr 0.05). Trained once per process.
const Classifier& trained_shape_classifier();

// Held-out shape images (seed 2, 50 per class).
const LabeledDataset& held_out_shapes();

// Runs the CLI with the given arguments; returns its exit code.
int run_cli(const std::string& args);

}  // namespace advlab::testing
