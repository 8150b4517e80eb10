// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <png.h>

#include <cstring>
#include <string>
#include <vector>

#include "sdaqec/core/error.hpp"

namespace sdaqec {

/// Decoded 8-bit raster, interleaved pixels, `channels` in {1, 3}.
struct RawImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 0;
    std::vector<unsigned char> pixels;
};

/// Decode a PNG file to 8-bit grayscale. Color, palette and 16-bit inputs are
/// converted by libpng; alpha is stripped.
inline RawImage read_png_gray(const std::string &path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;

    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw DataError("cannot decode PNG '" + path + "': " + image.message);
    }
    image.format = PNG_FORMAT_GRAY;

    RawImage out;
    out.width = image.width;
    out.height = image.height;
    out.channels = 1;
    out.pixels.resize(PNG_IMAGE_SIZE(image));

    if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw DataError("cannot decode PNG '" + path + "': " + image.message);
    }
    return out;
}

/// Encode an 8-bit raster as PNG. Supports 1 (gray) or 3 (RGB) channels.
inline void write_png(const std::string &path, const RawImage &img) {
    if (img.channels != 1 && img.channels != 3) {
        throw DataError("write_png supports 1 or 3 channels, got " +
                        std::to_string(img.channels));
    }
    if (img.pixels.size() != img.width * img.height * img.channels) {
        throw DataError("write_png: pixel buffer does not match dimensions");
    }

    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

    if (!png_image_write_to_file(&image, path.c_str(), 0, img.pixels.data(), 0, nullptr)) {
        throw DataError("cannot write PNG '" + path + "': " + image.message);
    }
}

} // namespace sdaqec
