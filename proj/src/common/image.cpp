// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/image.hpp"

#include <cstdio>
#include <memory>

#include <png.h>

#include "subjswap/error.hpp"
#include "subjswap/store.hpp"

namespace subjswap {

namespace {

void append_to_buffer(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<unsigned char>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void flush_nothing(png_structp) {}

[[noreturn]] void png_failure(png_structp, png_const_charp message) {
    throw Error(ErrorKind::io, std::string("png: ") + message);
}

void png_warning_ignore(png_structp, png_const_charp) {}

}  // namespace

std::vector<unsigned char> encode_png(const RgbImage& image) {
    require(image.width > 0 && image.height > 0 &&
                image.pixels.size() == static_cast<std::size_t>(image.width) * image.height * 3,
            ErrorKind::shape, "invalid RGB image dimensions");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_failure, png_warning_ignore);
    require(png != nullptr, ErrorKind::io, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    std::vector<unsigned char> out;
    try {
        png_set_write_fn(png, &out, append_to_buffer, flush_nothing);
        png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
                     PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        for (int y = 0; y < image.height; ++y)
            png_write_row(png, const_cast<png_bytep>(image.pixel(0, y)));
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
    return out;
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
    write_file_atomic(path, encode_png(image));
}

RgbImage read_png(const std::filesystem::path& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
    require(file != nullptr, ErrorKind::io, "cannot open " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_failure, png_warning_ignore);
    require(png != nullptr, ErrorKind::io, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    RgbImage image;
    try {
        png_init_io(png, file.get());
        png_read_info(png, info);
        png_set_strip_16(png);
        png_set_strip_alpha(png);
        png_set_palette_to_rgb(png);
        png_set_expand_gray_1_2_4_to_8(png);
        png_set_gray_to_rgb(png);
        png_read_update_info(png, info);
        image = RgbImage(static_cast<int>(png_get_image_width(png, info)),
                         static_cast<int>(png_get_image_height(png, info)));
        require(png_get_rowbytes(png, info) == static_cast<png_size_t>(image.width) * 3, ErrorKind::io,
                "unsupported PNG layout in " + path.string());
        for (int y = 0; y < image.height; ++y)
            png_read_row(png, image.pixel(0, y), nullptr);
        png_read_end(png, nullptr);
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

}  // namespace subjswap
