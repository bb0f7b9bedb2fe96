#include "wife/bands.hpp"

#include <fstream>
#include <iterator>

#include "binio.hpp"

namespace wife {

namespace {
constexpr std::string_view kBandsMagic = "WBN1";
}

std::vector<std::uint8_t> encode_bands(const SubbandSet& s) {
    const Shape& shape = s.shape();
    if (shape.b != 1 || shape.c != 1) {
        throw ShapeError("encode_bands: expected (1,1,H,W) subbands, got " + shape.str());
    }
    for (const Tensor* t : {&s.lh, &s.hl, &s.hh}) {
        if (t->shape() != shape) throw ShapeError("encode_bands: inconsistent subband shapes");
    }
    binio::Writer w;
    w.bytes(kBandsMagic);
    w.le(static_cast<std::uint32_t>(shape.h));
    w.le(static_cast<std::uint32_t>(shape.w));
    for (const Tensor* t : {&s.ll, &s.lh, &s.hl, &s.hh}) {
        for (double v : t->data()) w.le(v);
    }
    return std::move(w.buffer());
}

SubbandSet decode_bands(std::span<const std::uint8_t> bytes) {
    binio::Reader r(bytes, "bands");
    if (bytes.size() < 4 || r.take(4) != kBandsMagic) throw FormatError("bad magic");
    const auto h = r.le<std::uint32_t>();
    const auto w = r.le<std::uint32_t>();
    const std::uint64_t plane = std::uint64_t{h} * w;
    if (r.remaining() != plane * 4 * 8) {
        throw FormatError("bands: payload is " + std::to_string(r.remaining()) + " bytes, expected " +
                          std::to_string(plane * 32));
    }
    const Shape shape{1, 1, h, w};
    SubbandSet s{Tensor(shape), Tensor(shape), Tensor(shape), Tensor(shape)};
    for (Tensor* t : {&s.ll, &s.lh, &s.hl, &s.hh}) {
        for (double& v : t->data()) v = r.le<double>();
    }
    return s;
}

void save_bands(const SubbandSet& s, const std::filesystem::path& path) {
    const auto bytes = encode_bands(s);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + path.string());
}

SubbandSet load_bands(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open bands file " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_bands(bytes);
}

}  // namespace wife
