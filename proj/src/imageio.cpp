#include "wife/imageio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace wife {

namespace {

constexpr double kWr = 0.299;
constexpr double kWg = 0.587;
constexpr double kWb = 0.114;

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t pos() const { return pos_; }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = static_cast<char>(bytes_[pos_]);
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::size_t read_uint(const char* field) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        std::size_t value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
            if (value > (1u << 30)) throw ParseError(std::string("PNM ") + field + " too large", start);
            ++pos_;
        }
        if (pos_ == start) throw ParseError(std::string("PNM: expected ") + field, pos_);
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    void expect_single_space() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw ParseError("PNM: expected whitespace after maxval", pos_);
        }
        ++pos_;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

double quantum(std::span<const std::uint8_t> raster, std::size_t i, bool wide, double maxval) {
    if (!wide) return static_cast<double>(raster[i]) / maxval;
    const unsigned v = (static_cast<unsigned>(raster[2 * i]) << 8) | raster[2 * i + 1];
    return static_cast<double>(v) / maxval;
}

std::uint8_t quantize(double v) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::round(clamped * 255.0));
}

std::vector<std::uint8_t> header(const char* magic, std::size_t w, std::size_t h) {
    const std::string text = std::string(magic) + "\n" + std::to_string(w) + " " +
                             std::to_string(h) + "\n255\n";
    return {text.begin(), text.end()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

GrayImage::GrayImage(std::size_t height, std::size_t width, std::vector<double> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
    if (pixels_.size() != height_ * width_) {
        throw ShapeError("image data length " + std::to_string(pixels_.size()) + " does not match " +
                         std::to_string(height_) + "x" + std::to_string(width_));
    }
}

bool GrayImage::in_unit_range() const {
    return std::all_of(pixels_.begin(), pixels_.end(),
                       [](double v) { return v >= 0.0 && v <= 1.0; });
}

AnyImage decode_pnm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw ParseError("PNM: unsupported magic (expected P5 or P6)", 0);
    }
    const bool color = bytes[1] == '6';
    HeaderReader reader(bytes.subspan(2));
    const std::size_t width = reader.read_uint("width");
    const std::size_t height = reader.read_uint("height");
    const std::size_t maxval_pos = reader.pos() + 2;
    const std::size_t maxval = reader.read_uint("maxval");
    if (maxval != 255 && maxval != 65535) {
        throw ParseError("PNM: maxval " + std::to_string(maxval) + " not supported", maxval_pos);
    }
    reader.expect_single_space();
    if (width == 0 || height == 0) throw ParseError("PNM: empty image", 2);

    const std::size_t offset = reader.pos() + 2;
    const bool wide = maxval == 65535;
    const std::size_t channels = color ? 3 : 1;
    const std::size_t samples = width * height * channels;
    const std::size_t need = samples * (wide ? 2 : 1);
    if (bytes.size() - offset < need) {
        throw ParseError("PNM: truncated raster, expected " + std::to_string(need) + " bytes, found " +
                             std::to_string(bytes.size() - offset),
                         bytes.size());
    }
    const auto raster = bytes.subspan(offset, need);
    const double mv = static_cast<double>(maxval);

    if (!color) {
        GrayImage img(height, width);
        auto px = img.pixels();
        for (std::size_t i = 0; i < samples; ++i) px[i] = quantum(raster, i, wide, mv);
        return img;
    }
    RgbImage img{GrayImage(height, width), GrayImage(height, width), GrayImage(height, width)};
    auto r = img.r.pixels();
    auto g = img.g.pixels();
    auto b = img.b.pixels();
    for (std::size_t i = 0; i < width * height; ++i) {
        r[i] = quantum(raster, 3 * i, wide, mv);
        g[i] = quantum(raster, 3 * i + 1, wide, mv);
        b[i] = quantum(raster, 3 * i + 2, wide, mv);
    }
    return img;
}

AnyImage load_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_pnm(bytes);
}

std::vector<std::uint8_t> encode_pnm(const GrayImage& image) {
    auto out = header("P5", image.width(), image.height());
    for (double v : image.pixels()) out.push_back(quantize(v));
    return out;
}

std::vector<std::uint8_t> encode_pnm(const RgbImage& image) {
    if (!image.r.same_size(image.g) || !image.r.same_size(image.b)) {
        throw ShapeError("RGB planes differ in size");
    }
    auto out = header("P6", image.width(), image.height());
    for (std::size_t i = 0; i < image.r.size(); ++i) {
        out.push_back(quantize(image.r.pixels()[i]));
        out.push_back(quantize(image.g.pixels()[i]));
        out.push_back(quantize(image.b.pixels()[i]));
    }
    return out;
}

void save_pnm(const GrayImage& image, const std::filesystem::path& path) {
    write_file(path, encode_pnm(image));
}

void save_pnm(const RgbImage& image, const std::filesystem::path& path) {
    write_file(path, encode_pnm(image));
}

YCbCrImage rgb_to_ycbcr(const RgbImage& rgb) {
    const std::size_t h = rgb.height();
    const std::size_t w = rgb.width();
    YCbCrImage out{GrayImage(h, w), GrayImage(h, w), GrayImage(h, w)};
    for (std::size_t i = 0; i < h * w; ++i) {
        const double r = rgb.r.pixels()[i];
        const double g = rgb.g.pixels()[i];
        const double b = rgb.b.pixels()[i];
        const double y = kWr * r + kWg * g + kWb * b;
        out.y.pixels()[i] = y;
        out.cb.pixels()[i] = 0.5 * (b - y) / (1.0 - kWb);
        out.cr.pixels()[i] = 0.5 * (r - y) / (1.0 - kWr);
    }
    return out;
}

RgbImage ycbcr_to_rgb(const YCbCrImage& ycc, bool clamp) {
    const std::size_t h = ycc.y.height();
    const std::size_t w = ycc.y.width();
    if (!ycc.y.same_size(ycc.cb) || !ycc.y.same_size(ycc.cr)) {
        throw ShapeError("YCbCr planes differ in size");
    }
    RgbImage out{GrayImage(h, w), GrayImage(h, w), GrayImage(h, w)};
    for (std::size_t i = 0; i < h * w; ++i) {
        const double y = ycc.y.pixels()[i];
        double r = y + 2.0 * (1.0 - kWr) * ycc.cr.pixels()[i];
        double b = y + 2.0 * (1.0 - kWb) * ycc.cb.pixels()[i];
        double g = (y - kWr * r - kWb * b) / kWg;
        if (clamp) {
            r = std::clamp(r, 0.0, 1.0);
            g = std::clamp(g, 0.0, 1.0);
            b = std::clamp(b, 0.0, 1.0);
        }
        out.r.pixels()[i] = r;
        out.g.pixels()[i] = g;
        out.b.pixels()[i] = b;
    }
    return out;
}

GrayImage luma(const AnyImage& image) {
    if (const auto* gray = std::get_if<GrayImage>(&image)) return *gray;
    return rgb_to_ycbcr(std::get<RgbImage>(image)).y;
}

Tensor to_tensor(const GrayImage& image) {
    return Tensor(Shape{1, 1, image.height(), image.width()},
                  std::vector<double>(image.pixels().begin(), image.pixels().end()));
}

GrayImage from_tensor(const Tensor& t) {
    const Shape& s = t.shape();
    if (s.b != 1 || s.c != 1) throw ShapeError("from_tensor: expected (1,1,H,W), got " + s.str());
    GrayImage img(s.h, s.w);
    auto src = t.data();
    auto dst = img.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::clamp(src[i], 0.0, 1.0);
    return img;
}

}  // namespace wife
