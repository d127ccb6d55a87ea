#include "vocattr/nn.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

namespace vocattr {

namespace {

constexpr char kMagic[4] = {'V', 'O', 'C', 'A'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("model: truncated file");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& os, float v) { write_u32(os, std::bit_cast<uint32_t>(v)); }

float read_f32(std::istream& is) { return std::bit_cast<float>(read_u32(is)); }

template <typename T>
void write_array(std::ostream& os, const std::vector<T>& data,
                 const std::vector<uint32_t>& dims) {
    write_u32(os, static_cast<uint32_t>(dims.size()));
    size_t total = 1;
    for (uint32_t d : dims) {
        write_u32(os, d);
        total *= d;
    }
    if (total != data.size()) throw std::logic_error("model: array/shape mismatch on save");
    for (T x : data) write_f32(os, static_cast<float>(x));
}

template <typename T>
void read_array(std::istream& is, std::vector<T>& data, const std::vector<uint32_t>& dims) {
    const uint32_t ndims = read_u32(is);
    if (ndims != dims.size()) throw std::runtime_error("model: shape mismatch");
    size_t total = 1;
    for (uint32_t expect : dims) {
        if (read_u32(is) != expect) throw std::runtime_error("model: shape mismatch");
        total *= expect;
    }
    data.resize(total);
    for (size_t i = 0; i < total; ++i) data[i] = static_cast<T>(read_f32(is));
}

template <typename T>
void save_model_impl(const std::string& path, const Cnn<T>& model) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("model: cannot open file for writing: " + path);
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    const ModelConfig& cfg = model.config();
    write_u32(os, static_cast<uint32_t>(cfg.n_classes));
    write_u32(os, static_cast<uint32_t>(cfg.channels.size()));
    for (int c : cfg.channels) write_u32(os, static_cast<uint32_t>(c));
    for (const auto& blk : model.blocks()) {
        write_array(os, blk.w,
                    {static_cast<uint32_t>(blk.out_ch), static_cast<uint32_t>(blk.in_ch), 3, 3});
        write_array(os, blk.b, {static_cast<uint32_t>(blk.out_ch)});
    }
    const auto& dense = model.dense();
    write_array(os, dense.w,
                {static_cast<uint32_t>(dense.out_dim), static_cast<uint32_t>(dense.in_dim)});
    write_array(os, dense.b, {static_cast<uint32_t>(dense.out_dim)});
    if (!os) throw std::runtime_error("model: write failed: " + path);
}

}  // namespace

void save_model(const std::string& path, const Cnn<float>& model) {
    save_model_impl(path, model);
}

void save_model(const std::string& path, const Cnn<double>& model) {
    save_model_impl(path, model);
}

Cnn<float> load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("model: cannot open file: " + path);
    char magic[4];
    if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kMagic))
        throw std::runtime_error("model: bad magic");
    if (read_u32(is) != kVersion) throw std::runtime_error("model: unsupported version");

    ModelConfig cfg;
    cfg.n_classes = static_cast<int>(read_u32(is));
    const uint32_t n_blocks = read_u32(is);
    if (n_blocks == 0 || n_blocks > 16) throw std::runtime_error("model: implausible block count");
    cfg.channels.clear();
    for (uint32_t i = 0; i < n_blocks; ++i) cfg.channels.push_back(static_cast<int>(read_u32(is)));

    Cnn<float> model(cfg);
    for (auto& blk : model.blocks()) {
        read_array(is, blk.w,
                   {static_cast<uint32_t>(blk.out_ch), static_cast<uint32_t>(blk.in_ch), 3, 3});
        read_array(is, blk.b, {static_cast<uint32_t>(blk.out_ch)});
    }
    auto& dense = model.dense();
    read_array(is, dense.w,
               {static_cast<uint32_t>(dense.out_dim), static_cast<uint32_t>(dense.in_dim)});
    read_array(is, dense.b, {static_cast<uint32_t>(dense.out_dim)});
    return model;
}

}  // namespace vocattr
