#include "volcast/weights_io.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "volcast/errors.hpp"

namespace volcast::tcn {

namespace {

constexpr std::array<char, 4> kMagic = {'V', 'C', 'T', 'W'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    std::array<unsigned char, 4> b{static_cast<unsigned char>(v & 0xff),
                                   static_cast<unsigned char>((v >> 8) & 0xff),
                                   static_cast<unsigned char>((v >> 16) & 0xff),
                                   static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b.data()), 4);
}

std::uint32_t read_u32(std::istream& in) {
    std::array<unsigned char, 4> b{};
    in.read(reinterpret_cast<char*>(b.data()), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    std::array<unsigned char, 8> b{};
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b.data()), 8);
}

double read_f64(std::istream& in) {
    std::array<unsigned char, 8> b{};
    in.read(reinterpret_cast<char*>(b.data()), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace

void save_weights(const TcnModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write weight file: " + path.string());
    out.write(kMagic.data(), kMagic.size());
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(model.input_length));
    write_u32(out, static_cast<std::uint32_t>(model.layers.size()));
    for (const auto& layer : model.layers) {
        write_u32(out, static_cast<std::uint32_t>(layer.in_channels));
        write_u32(out, static_cast<std::uint32_t>(layer.out_channels));
        write_u32(out, static_cast<std::uint32_t>(layer.kernel));
        write_u32(out, static_cast<std::uint32_t>(layer.dilation));
        out.put(static_cast<char>(layer.activation));
    }
    for (const auto& layer : model.layers) {
        for (double w : layer.weights) write_f64(out, w);
        for (double b : layer.biases) write_f64(out, b);
    }
    if (!out) throw DataError("write failed: " + path.string());
}

TcnModel load_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open weight file: " + path.string());
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw DataError("not a weight file: " + path.string());
    const std::uint32_t version = read_u32(in);
    if (version != kVersion) {
        throw DataError("unsupported weight file version " + std::to_string(version) + ": " +
                        path.string());
    }
    TcnModel model;
    model.input_length = static_cast<int>(read_u32(in));
    const std::uint32_t layer_count = read_u32(in);
    if (!in || model.input_length <= 0 || layer_count == 0 || layer_count > 1024) {
        throw DataError("corrupt weight file header: " + path.string());
    }
    model.layers.resize(layer_count);
    for (auto& layer : model.layers) {
        layer.in_channels = static_cast<int>(read_u32(in));
        layer.out_channels = static_cast<int>(read_u32(in));
        layer.kernel = static_cast<int>(read_u32(in));
        layer.dilation = static_cast<int>(read_u32(in));
        const int act = in.get();
        if (!in || layer.in_channels <= 0 || layer.out_channels <= 0 || layer.kernel <= 0 ||
            layer.dilation <= 0 || (act != 0 && act != 1)) {
            throw DataError("corrupt layer header in weight file: " + path.string());
        }
        layer.activation = static_cast<Activation>(act);
    }
    for (auto& layer : model.layers) {
        layer.weights.resize(static_cast<std::size_t>(layer.out_channels) * layer.in_channels *
                             layer.kernel);
        layer.biases.resize(static_cast<std::size_t>(layer.out_channels));
        for (auto& w : layer.weights) w = read_f64(in);
        for (auto& b : layer.biases) b = read_f64(in);
    }
    if (!in) throw DataError("truncated weight file: " + path.string());
    return model;
}

} // namespace volcast::tcn
