#ifndef TEXMINE_IMAGE_IO_HPP
#define TEXMINE_IMAGE_IO_HPP

// PNG/JPEG decoding into float rasters and PNG encoding of rasters.
// Links against libpng and libjpeg.

#include "texmine/raster.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include <jpeglib.h>

namespace texmine {

enum class PngDepth { k8, k16 };

namespace detail {

struct PngReadState {
    std::span<const std::uint8_t> bytes;
    std::size_t offset = 0;
};

inline void png_read_from_span(png_structp png, png_bytep out, png_size_t n) {
    auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (st->offset + n > st->bytes.size())
        png_error(png, "unexpected end of PNG data");
    std::memcpy(out, st->bytes.data() + st->offset, n);
    st->offset += n;
}

inline void png_error_to_longjmp(png_structp png, png_const_charp) { png_longjmp(png, 1); }
inline void png_silent_warning(png_structp, png_const_charp) {}

inline Raster decode_png(std::span<const std::uint8_t> bytes) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             png_error_to_longjmp, png_silent_warning);
    if (!png)
        throw CorruptImage("libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw CorruptImage("libpng initialisation failed");
    }

    PngReadState state{bytes, 0};
    std::vector<std::uint8_t> pixels;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0, height = 0;
    int depth = 0, channels = 0;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw CorruptImage("corrupt PNG data");
    }

    png_set_read_fn(png, &state, png_read_from_span);
    png_read_info(png, info);
    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    const int color_type = png_get_color_type(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    depth = png_get_bit_depth(png, info);
    channels = png_get_channels(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    pixels.resize(row_bytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y)
        rows[y] = pixels.data() + y * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    if (channels != 3)
        throw UnsupportedFormat("unsupported PNG channel layout");

    Raster out(static_cast<int>(width), static_cast<int>(height), 3);
    auto dst = out.data();
    if (depth == 16) {
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] = static_cast<float>((pixels[2 * i] << 8 | pixels[2 * i + 1]) / 65535.0);
    } else {
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] = static_cast<float>(pixels[i] / 255.0);
    }
    return out;
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    std::longjmp(err->jump, 1);
}

inline void jpeg_silent_message(j_common_ptr) {}

inline Raster decode_jpeg(std::span<const std::uint8_t> bytes) {
    jpeg_decompress_struct cinfo{};
    JpegErrorManager err{};
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    err.base.output_message = jpeg_silent_message;

    std::vector<std::uint8_t> pixels;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw CorruptImage("corrupt JPEG data");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    const int w = static_cast<int>(cinfo.output_width);
    const int h = static_cast<int>(cinfo.output_height);
    pixels.resize(static_cast<std::size_t>(w) * h * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);

    Raster out(w, h, 3);
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = static_cast<float>(pixels[i] / 255.0);
    return out;
}

inline void png_write_to_vector(png_structp png, png_bytep data, png_size_t n) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + n);
}

inline void png_flush_noop(png_structp) {}

} // namespace detail

inline bool is_png(std::span<const std::uint8_t> b) {
    static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    return b.size() >= 8 && std::memcmp(b.data(), sig, 8) == 0;
}

inline bool is_jpeg(std::span<const std::uint8_t> b) {
    return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

/// Decodes PNG or JPEG bytes to a 3-channel raster. Alpha is discarded,
/// grayscale is replicated, 8-bit maps v/255 and 16-bit maps v/65535.
inline Raster decode_to_raster(std::span<const std::uint8_t> bytes) {
    if (is_png(bytes))
        return detail::decode_png(bytes);
    if (is_jpeg(bytes))
        return detail::decode_jpeg(bytes);
    throw UnsupportedFormat("unrecognised image format");
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("short write to " + path.string());
}

inline Raster read_image(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return decode_to_raster(bytes);
}

/// Encodes a 1- or 3-channel raster as PNG. 1-channel rasters become
/// grayscale, 3-channel become RGB. Values are rounded to the nearest level.
inline std::vector<std::uint8_t> encode_png(const Raster& r, PngDepth depth = PngDepth::k8) {
    if (r.channels() != 1 && r.channels() != 3)
        throw InvalidArgument("encode_png supports 1- or 3-channel rasters");
    if (r.empty())
        throw InvalidArgument("cannot encode an empty raster");

    const int bytes_per_sample = depth == PngDepth::k16 ? 2 : 1;
    const double levels = depth == PngDepth::k16 ? 65535.0 : 255.0;
    const std::size_t row_bytes = static_cast<std::size_t>(r.width()) * r.channels() * bytes_per_sample;
    std::vector<std::uint8_t> pixels(row_bytes * r.height());
    auto src = r.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const auto q = static_cast<std::uint32_t>(std::lround(clamp01(static_cast<double>(src[i])) * levels));
        if (bytes_per_sample == 2) {
            pixels[2 * i] = static_cast<std::uint8_t>(q >> 8);
            pixels[2 * i + 1] = static_cast<std::uint8_t>(q & 0xFF);
        } else {
            pixels[i] = static_cast<std::uint8_t>(q);
        }
    }

    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              detail::png_error_to_longjmp, detail::png_silent_warning);
    if (!png)
        throw IoError("libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng initialisation failed");
    }
    std::vector<png_bytep> rows(r.height());
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed");
    }
    png_set_write_fn(png, &out, detail::png_write_to_vector, detail::png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(r.width()), static_cast<png_uint_32>(r.height()),
                 bytes_per_sample * 8, r.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < r.height(); ++y)
        rows[y] = pixels.data() + y * row_bytes;
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

inline void write_png(const std::filesystem::path& path, const Raster& r, PngDepth depth = PngDepth::k8) {
    write_file_bytes(path, encode_png(r, depth));
}

/// Bit depth and colour layout of a PNG, read from its header.
struct PngHeader {
    int width = 0;
    int height = 0;
    int bit_depth = 0;
    bool rgb = false;
};

inline PngHeader read_png_header(std::span<const std::uint8_t> bytes) {
    // IHDR is always the first chunk: 8-byte signature, 4 length, 4 type, then data.
    if (!is_png(bytes) || bytes.size() < 33)
        throw CorruptImage("not a PNG stream");
    auto be32 = [&](std::size_t o) {
        return static_cast<int>(bytes[o] << 24 | bytes[o + 1] << 16 | bytes[o + 2] << 8 | bytes[o + 3]);
    };
    PngHeader h;
    h.width = be32(16);
    h.height = be32(20);
    h.bit_depth = bytes[24];
    h.rgb = bytes[25] == PNG_COLOR_TYPE_RGB;
    return h;
}

} // namespace texmine

#endif // TEXMINE_IMAGE_IO_HPP
