#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "advlab/classifier.hpp"
#include "advlab/error.hpp"

// ADVM layout (all integers u32 LE, all reals f64 LE):
//   "ADVM" version=1 height width channels layer_count
//   per layer: kind tag, then
//     conv    (1): kernel_h kernel_w in out stride padding, weights, bias
//     relu    (2): -
//     maxpool (3): window stride
//     flatten (4): -
//     dense   (5): in out, weights, bias
//     softmax (6): -

namespace advlab {
namespace {

constexpr std::uint32_t kModelVersion = 1;

enum class Tag : std::uint32_t { conv = 1, relu = 2, maxpool = 3, flatten = 4, dense = 5, softmax = 6 };

class Writer {
public:
    void u32(std::size_t v) {
        const auto x = static_cast<std::uint32_t>(v);
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
    }
    void f64s(const std::vector<double>& values) {
        for (double v : values) {
            const auto bits = std::bit_cast<std::uint64_t>(v);
            for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
        }
    }
    void raw(const char* s, std::size_t n) { bytes_.insert(bytes_.end(), s, s + n); }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::uint32_t u32(const char* field) {
        need(4, field);
        std::uint32_t x = 0;
        for (int i = 0; i < 4; ++i) x |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
        pos_ += 4;
        return x;
    }
    std::vector<double> f64s(std::size_t count, const char* field) {
        if (count > (bytes_.size() - pos_) / 8) {
            throw FormatError(std::string("model file truncated in ") + field);
        }
        std::vector<double> out(count);
        for (auto& v : out) {
            std::uint64_t bits = 0;
            for (int i = 0; i < 8; ++i) bits |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
            v = std::bit_cast<double>(bits);
            pos_ += 8;
        }
        return out;
    }
    bool match(const char* s, std::size_t n) {
        if (bytes_.size() < pos_ + n || std::memcmp(bytes_.data() + pos_, s, n) != 0) return false;
        pos_ += n;
        return true;
    }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n, const char* field) {
        if (bytes_.size() - pos_ < n) throw FormatError(std::string("model file truncated in ") + field);
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace

std::vector<std::uint8_t> encode_model(const Classifier& f) {
    Writer w;
    w.raw("ADVM", 4);
    w.u32(kModelVersion);
    w.u32(f.input_shape().height);
    w.u32(f.input_shape().width);
    w.u32(f.input_shape().channels);
    w.u32(f.layers().size());
    for (const Layer& layer : f.layers()) {
        std::visit(Overloaded{
                       [&](const ConvLayer& c) {
                           w.u32(static_cast<std::uint32_t>(Tag::conv));
                           w.u32(c.kernel_h);
                           w.u32(c.kernel_w);
                           w.u32(c.in_channels);
                           w.u32(c.out_channels);
                           w.u32(c.stride);
                           w.u32(c.padding);
                           w.f64s(c.weights);
                           w.f64s(c.bias);
                       },
                       [&](const ReluLayer&) { w.u32(static_cast<std::uint32_t>(Tag::relu)); },
                       [&](const MaxPoolLayer& p) {
                           w.u32(static_cast<std::uint32_t>(Tag::maxpool));
                           w.u32(p.window);
                           w.u32(p.stride);
                       },
                       [&](const FlattenLayer&) { w.u32(static_cast<std::uint32_t>(Tag::flatten)); },
                       [&](const DenseLayer& d) {
                           w.u32(static_cast<std::uint32_t>(Tag::dense));
                           w.u32(d.in_dim);
                           w.u32(d.out_dim);
                           w.f64s(d.weights);
                           w.f64s(d.bias);
                       },
                       [&](const SoftmaxLayer&) { w.u32(static_cast<std::uint32_t>(Tag::softmax)); },
                   },
                   layer);
    }
    return w.take();
}

Classifier decode_model(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    if (!r.match("ADVM", 4)) throw FormatError("model file has bad magic (expected \"ADVM\")");
    const std::uint32_t version = r.u32("version");
    if (version != kModelVersion) {
        throw FormatError("unsupported model version " + std::to_string(version) + " (supported: " +
                          std::to_string(kModelVersion) + ")");
    }
    ImageShape input;
    input.height = r.u32("height");
    input.width = r.u32("width");
    input.channels = r.u32("channels");
    const std::uint32_t count = r.u32("layer count");
    std::vector<Layer> layers;
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::uint32_t tag = r.u32("layer tag");
        switch (static_cast<Tag>(tag)) {
            case Tag::conv: {
                ConvLayer c;
                c.kernel_h = r.u32("conv kernel_h");
                c.kernel_w = r.u32("conv kernel_w");
                c.in_channels = r.u32("conv in_channels");
                c.out_channels = r.u32("conv out_channels");
                c.stride = r.u32("conv stride");
                c.padding = r.u32("conv padding");
                c.weights = r.f64s(c.out_channels * c.kernel_h * c.kernel_w * c.in_channels, "conv weights");
                c.bias = r.f64s(c.out_channels, "conv bias");
                layers.emplace_back(std::move(c));
                break;
            }
            case Tag::relu:
                layers.emplace_back(ReluLayer{});
                break;
            case Tag::maxpool: {
                MaxPoolLayer p;
                p.window = r.u32("maxpool window");
                p.stride = r.u32("maxpool stride");
                layers.emplace_back(p);
                break;
            }
            case Tag::flatten:
                layers.emplace_back(FlattenLayer{});
                break;
            case Tag::dense: {
                DenseLayer d;
                d.in_dim = r.u32("dense in_dim");
                d.out_dim = r.u32("dense out_dim");
                d.weights = r.f64s(d.in_dim * d.out_dim, "dense weights");
                d.bias = r.f64s(d.out_dim, "dense bias");
                layers.emplace_back(std::move(d));
                break;
            }
            case Tag::softmax:
                layers.emplace_back(SoftmaxLayer{});
                break;
            default:
                throw FormatError("model file has unknown layer tag " + std::to_string(tag));
        }
    }
    if (!r.at_end()) throw FormatError("model file has trailing bytes");
    try {
        return Classifier(input, std::move(layers));
    } catch (const ParameterError& e) {
        throw FormatError(std::string("model file describes an invalid network: ") + e.what());
    } catch (const NumericError& e) {
        throw FormatError(std::string("model file describes an invalid network: ") + e.what());
    }
}

void save_model(const Classifier& f, const std::filesystem::path& path) {
    const auto bytes = encode_model(f);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

Classifier load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                          std::istreambuf_iterator<char>());
    try {
        return decode_model(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace advlab
