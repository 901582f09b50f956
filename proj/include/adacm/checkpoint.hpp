#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "adacm/errors.hpp"
#include "adacm/nn.hpp"

namespace adacm {

// Parameter checkpoint container. Little-endian binary layout:
//   magic "ADCM", format version u32,
//   model config block (fixed-width fields),
//   tensor count u32, then per tensor:
//     name length u32 + bytes, rank u32, extents u32..., float64 payload.
// load(save(p)) round-trips byte-identically.

namespace ckpt_detail {

constexpr std::uint32_t kVersion = 1;

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double d) {
    std::uint64_t v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n, const char* what) const {
        if (pos + n > buf.size())
            throw FormatError(std::string("checkpoint truncated reading ") + what +
                              " at byte offset " + std::to_string(pos));
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    double f64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 8;
        return std::bit_cast<double>(v);
    }
    std::string bytes(std::size_t n, const char* what) {
        need(n, what);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

}  // namespace ckpt_detail

inline std::string serialize_checkpoint(const ModelParams& p) {
    using namespace ckpt_detail;
    std::string out = "ADCM";
    put_u32(out, kVersion);
    const ModelConfig& c = p.config;
    put_u32(out, static_cast<std::uint32_t>(c.input_dim));
    put_u32(out, static_cast<std::uint32_t>(c.hidden_dim));
    put_u32(out, static_cast<std::uint32_t>(c.embedding_dim));
    put_u32(out, static_cast<std::uint32_t>(c.classes));
    put_u32(out, c.activation == Activation::tanh ? 0u : 1u);
    put_u32(out, c.front_end == FrontEnd::none ? 0u : 1u);
    put_u32(out, static_cast<std::uint32_t>(c.image_height));
    put_u32(out, static_cast<std::uint32_t>(c.image_width));
    put_u32(out, static_cast<std::uint32_t>(c.conv_channels1));
    put_u32(out, static_cast<std::uint32_t>(c.conv_channels2));
    put_u32(out, static_cast<std::uint32_t>(c.conv_kernel));
    put_u32(out, static_cast<std::uint32_t>(p.tensors.size()));
    for (const auto& nt : p.tensors) {
        put_u32(out, static_cast<std::uint32_t>(nt.name.size()));
        out += nt.name;
        put_u32(out, static_cast<std::uint32_t>(nt.tensor.rank()));
        for (std::size_t e : nt.tensor.shape()) put_u32(out, static_cast<std::uint32_t>(e));
        for (double v : nt.tensor.values()) put_f64(out, v);
    }
    return out;
}

inline ModelParams deserialize_checkpoint(const std::string& buf) {
    using namespace ckpt_detail;
    Reader r{buf};
    if (r.bytes(4, "magic") != "ADCM")
        throw FormatError("checkpoint magic mismatch at byte offset 0");
    std::uint32_t version = r.u32("version");
    if (version != kVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version) +
                          " at byte offset 4");
    ModelParams p;
    p.config.input_dim = r.u32("input_dim");
    p.config.hidden_dim = r.u32("hidden_dim");
    p.config.embedding_dim = r.u32("embedding_dim");
    p.config.classes = r.u32("classes");
    p.config.activation = r.u32("activation") == 0 ? Activation::tanh : Activation::relu;
    p.config.front_end = r.u32("front_end") == 0 ? FrontEnd::none : FrontEnd::conv;
    p.config.image_height = r.u32("image_height");
    p.config.image_width = r.u32("image_width");
    p.config.conv_channels1 = r.u32("conv_channels1");
    p.config.conv_channels2 = r.u32("conv_channels2");
    p.config.conv_kernel = r.u32("conv_kernel");
    std::uint32_t count = r.u32("tensor count");
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor nt;
        std::uint32_t name_len = r.u32("name length");
        nt.name = r.bytes(name_len, "name");
        std::uint32_t rank = r.u32("rank");
        std::vector<std::size_t> shape;
        std::size_t total = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            std::uint32_t e = r.u32("extent");
            if (e == 0) throw FormatError("zero extent at byte offset " + std::to_string(r.pos - 4));
            shape.push_back(e);
            total *= e;
        }
        std::vector<double> data(total);
        for (std::size_t j = 0; j < total; ++j) data[j] = r.f64("payload");
        nt.tensor = Tensor(std::move(shape), std::move(data));
        p.tensors.push_back(std::move(nt));
    }
    if (r.pos != buf.size())
        throw FormatError("trailing bytes after checkpoint at byte offset " + std::to_string(r.pos));
    return p;
}

inline void save_checkpoint(const ModelParams& p, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    std::string buf = serialize_checkpoint(p);
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw IoError("write failed for " + path);
}

inline ModelParams load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(buf);
}

}  // namespace adacm
