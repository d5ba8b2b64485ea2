#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "scefis/error.hpp"
#include "scefis/image.hpp"

namespace scefis {
namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct RawGray {
    int width = 0;
    int height = 0;
    std::vector<double> gray;  ///< [0,1]
};

// 16-bit files are read as linear 16-bit samples: asking the simplified API for 8-bit
// output would gamma-encode them.
RawGray decode_png(std::span<const std::uint8_t> bytes) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw IoError(std::string("png decode: ") + image.message);

    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    const bool wide = (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
    if (wide)
        image.format = color ? PNG_FORMAT_LINEAR_RGB : PNG_FORMAT_LINEAR_Y;
    else
        image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
    const std::size_t channels = color ? 3 : 1;
    std::vector<std::uint8_t> b8;
    std::vector<std::uint16_t> b16;
    void* buffer = nullptr;
    if (wide) {
        b16.resize(n * channels);
        buffer = b16.data();
    } else {
        b8.resize(n * channels);
        buffer = b8.data();
    }
    if (!png_image_finish_read(&image, nullptr, buffer, 0, nullptr)) {
        png_image_free(&image);
        throw IoError(std::string("png decode: ") + image.message);
    }

    const double scale = wide ? 65535.0 : 255.0;
    auto sample = [&](std::size_t i) { return wide ? static_cast<double>(b16[i]) : static_cast<double>(b8[i]); };
    RawGray raw{static_cast<int>(image.width), static_cast<int>(image.height), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        double v = color ? 0.299 * sample(3 * i) + 0.587 * sample(3 * i + 1) + 0.114 * sample(3 * i + 2) : sample(i);
        raw.gray[i] = std::clamp(v / scale, 0.0, 1.0);
    }
    return raw;
}

// Binary PGM (P5), maxval up to 65535.
bool decode_pgm(std::span<const std::uint8_t> bytes, int& w, int& h, std::vector<double>& out) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') return false;
    std::size_t pos = 2;
    auto next_token = [&]() -> long {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        long v = 0;
        bool any = false;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos] - '0');
            ++pos;
            any = true;
        }
        if (!any) throw IoError("pgm: malformed header");
        return v;
    };
    w = static_cast<int>(next_token());
    h = static_cast<int>(next_token());
    const long maxval = next_token();
    ++pos;  // single whitespace before raster
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw IoError("pgm: bad header values");
    const std::size_t n = static_cast<std::size_t>(w) * h;
    const std::size_t bpp = maxval < 256 ? 1 : 2;
    if (bytes.size() < pos + n * bpp) throw IoError("pgm: truncated raster");
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const long v = bpp == 1 ? bytes[pos + i] : (bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1];
        out[i] = std::min(1.0, static_cast<double>(v) / static_cast<double>(maxval));
    }
    return true;
}

std::vector<std::uint8_t> encode_gray8(int w, int h, const std::vector<std::uint8_t>& px) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(w);
    image.height = static_cast<png_uint_32>(h);
    image.format = PNG_FORMAT_GRAY;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, px.data(), 0, nullptr))
        throw IoError(std::string("png encode: ") + image.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, px.data(), 0, nullptr))
        throw IoError(std::string("png encode: ") + image.message);
    out.resize(size);
    return out;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

GrayImage decode_image(std::span<const std::uint8_t> bytes) {
    int w = 0, h = 0;
    std::vector<double> px;
    if (decode_pgm(bytes, w, h, px)) return GrayImage(w, h, std::move(px));
    RawGray raw = decode_png(bytes);
    return GrayImage(raw.width, raw.height, std::move(raw.gray));
}

BinaryMask decode_mask(std::span<const std::uint8_t> bytes) {
    int w = 0, h = 0;
    std::vector<double> px;
    if (decode_pgm(bytes, w, h, px)) {
        std::vector<std::uint8_t> labels(px.size());
        std::transform(px.begin(), px.end(), labels.begin(), [](double v) { return v > 0.0 ? 1 : 0; });
        return BinaryMask(w, h, std::move(labels));
    }
    const RawGray raw = decode_png(bytes);
    std::vector<std::uint8_t> labels(raw.gray.size());
    std::transform(raw.gray.begin(), raw.gray.end(), labels.begin(), [](double v) { return v > 0.0 ? 1 : 0; });
    return BinaryMask(raw.width, raw.height, std::move(labels));
}

GrayImage load_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return decode_image(bytes);
}

BinaryMask load_mask(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return decode_mask(bytes);
}

std::vector<std::uint8_t> encode_png(const BinaryMask& mask) {
    std::vector<std::uint8_t> px(mask.size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = mask[i] ? 255 : 0;
    return encode_gray8(mask.width(), mask.height(), px);
}

std::vector<std::uint8_t> encode_png(const GrayImage& img) {
    std::vector<std::uint8_t> px(img.size());
    const auto src = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(src[i] * 255.0), 0L, 255L));
    return encode_gray8(img.width(), img.height(), px);
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) { write_file(path, encode_png(mask)); }

void save_image(const GrayImage& img, const std::filesystem::path& path) { write_file(path, encode_png(img)); }

}  // namespace scefis
