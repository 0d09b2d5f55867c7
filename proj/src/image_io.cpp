#include "advlab/image_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "advlab/error.hpp"

namespace advlab {
namespace {

class HeaderReader {
public:
    explicit HeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    // Skips whitespace and '#' comments, then reads an unsigned decimal token.
    std::size_t number(const char* field) {
        skip_space_and_comments();
        std::size_t value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > (1u << 30)) throw FormatError(std::string("netpbm ") + field + " is too large");
            ++pos_;
            ++digits;
        }
        if (digits == 0) throw FormatError(std::string("netpbm ") + field + " is missing or not a number");
        return value;
    }

    // Exactly one whitespace byte separates the maxval from the payload.
    void single_space(const char* field) {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw FormatError(std::string("netpbm ") + field + " must be followed by whitespace");
        }
        ++pos_;
    }

    std::size_t position() const { return pos_; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 2;
};

}  // namespace

std::uint8_t quantize(double v) {
    const double scaled = std::floor(v * 255.0 + 0.5);
    if (!(scaled > 0.0)) return 0;
    if (scaled >= 255.0) return 255;
    return static_cast<std::uint8_t>(scaled);
}

Image decode_netpbm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw FormatError("netpbm magic must be P5 or P6");
    }
    const std::size_t channels = bytes[1] == '6' ? 3 : 1;
    HeaderReader header(bytes);
    const std::size_t width = header.number("width");
    const std::size_t height = header.number("height");
    const std::size_t maxval = header.number("maxval");
    if (width == 0) throw FormatError("netpbm width must be positive");
    if (height == 0) throw FormatError("netpbm height must be positive");
    if (maxval != 255) {
        throw FormatError("netpbm maxval must be 255, got " + std::to_string(maxval));
    }
    header.single_space("maxval");

    const std::size_t count = width * height * channels;
    const std::size_t offset = header.position();
    if (bytes.size() - offset < count) {
        throw FormatError("netpbm payload truncated: expected " + std::to_string(count) +
                          " bytes, found " + std::to_string(bytes.size() - offset));
    }
    std::vector<double> pixels(count);
    for (std::size_t i = 0; i < count; ++i) pixels[i] = bytes[offset + i] / 255.0;
    return Image({height, width, channels}, std::move(pixels));
}

std::vector<std::uint8_t> encode_netpbm(const Image& img) {
    const std::string header = std::string(img.channels() == 3 ? "P6" : "P5") + "\n" +
                               std::to_string(img.width()) + " " +
                               std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + img.size());
    for (double v : img.pixels()) out.push_back(quantize(v));
    return out;
}

Image load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    try {
        return decode_netpbm(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_image(const Image& img, const std::filesystem::path& path) {
    const auto bytes = encode_netpbm(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace advlab
