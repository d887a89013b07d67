#include "cellgen/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

#include "cellgen/errors.hpp"

namespace cellgen {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void on_png_error(png_structp png, png_const_charp msg) {
    auto* err = static_cast<std::string*>(png_get_error_ptr(png));
    if (err) *err = msg;
    png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

}  // namespace

PngData read_png(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw IoError("cannot open " + path.string());
    png_byte sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw IoError(path.string() + " is not a PNG file");

    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("libpng initialisation failed");
    }

    PngData out;
    std::vector<png_bytep> row_ptrs;
    std::vector<png_byte> buffer;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("failed to decode " + path.string() + ": " + message);
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (depth == 16) png_set_swap(png);  // little-endian sample bytes
    png_read_update_info(png, info);

    out.rows = static_cast<int>(png_get_image_height(png, info));
    out.cols = static_cast<int>(png_get_image_width(png, info));
    out.channels = png_get_channels(png, info);
    depth = png_get_bit_depth(png, info);
    out.bit_depth = depth;

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    buffer.resize(rowbytes * out.rows);
    row_ptrs.resize(out.rows);
    for (int r = 0; r < out.rows; ++r) row_ptrs[r] = buffer.data() + rowbytes * r;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const std::size_t n = static_cast<std::size_t>(out.rows) * out.cols * out.channels;
    out.samples.resize(n);
    if (depth == 16) {
        for (std::size_t i = 0; i < n; ++i)
            out.samples[i] = static_cast<std::uint16_t>(buffer[2 * i] | (buffer[2 * i + 1] << 8));
    } else {
        for (std::size_t i = 0; i < n; ++i) out.samples[i] = buffer[i];
    }
    return out;
}

void write_png(const std::filesystem::path& path, const PngData& data) {
    if (data.bit_depth != 8 && data.bit_depth != 16) throw InputError("PNG bit depth must be 8 or 16");
    int color = 0;
    switch (data.channels) {
        case 1: color = PNG_COLOR_TYPE_GRAY; break;
        case 2: color = PNG_COLOR_TYPE_GRAY_ALPHA; break;
        case 3: color = PNG_COLOR_TYPE_RGB; break;
        case 4: color = PNG_COLOR_TYPE_RGBA; break;
        default: throw InputError("PNG channel count must be 1 to 4");
    }
    const std::size_t n = static_cast<std::size_t>(data.rows) * data.cols * data.channels;
    if (data.samples.size() != n || data.rows < 1 || data.cols < 1)
        throw InputError("PNG sample buffer does not match its dimensions");

    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw IoError("cannot create " + path.string());

    const int bytes = data.bit_depth / 8;
    const std::size_t rowbytes = static_cast<std::size_t>(data.cols) * data.channels * bytes;
    std::vector<png_byte> buffer(rowbytes * data.rows);
    for (std::size_t i = 0; i < n; ++i) {
        if (bytes == 2) {
            buffer[2 * i] = static_cast<png_byte>(data.samples[i] >> 8);
            buffer[2 * i + 1] = static_cast<png_byte>(data.samples[i] & 0xff);
        } else {
            buffer[i] = static_cast<png_byte>(data.samples[i]);
        }
    }
    std::vector<png_bytep> row_ptrs(data.rows);
    for (int r = 0; r < data.rows; ++r) row_ptrs[r] = buffer.data() + rowbytes * r;

    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed to encode " + path.string() + ": " + message);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(data.cols), static_cast<png_uint_32>(data.rows),
                 data.bit_depth, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_gray8(const std::filesystem::path& path, const Grid<std::uint8_t>& img) {
    PngData d{img.rows(), img.cols(), 1, 8, std::vector<std::uint16_t>(img.values().begin(), img.values().end())};
    write_png(path, d);
}

void write_gray16(const std::filesystem::path& path, const Grid<std::uint16_t>& img) {
    PngData d{img.rows(), img.cols(), 1, 16, std::vector<std::uint16_t>(img.values().begin(), img.values().end())};
    write_png(path, d);
}

}  // namespace cellgen
