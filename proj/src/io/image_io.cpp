#include "blurgs/io/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

namespace blurgs {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw std::runtime_error("cannot open " + path.string());
    return f;
}

}  // namespace

void write_png(const std::filesystem::path& path, std::span<const double> data, int width, int height, int channels) {
    if (channels != 1 && channels != 3) throw std::invalid_argument("write_png: 1 or 3 channels supported");
    if (data.size() != static_cast<std::size_t>(width) * height * channels) throw std::invalid_argument("write_png: size mismatch");
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng initialization failed");
    }
    std::vector<png_byte> bytes(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        bytes[i] = static_cast<png_byte>(std::lround(std::clamp(data[i], 0.0, 1.0) * 255.0));
    }
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = bytes.data() + static_cast<std::size_t>(y) * width * channels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("failed writing " + path.string());
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, width, height, 8, channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

LoadedImage read_png(const std::filesystem::path& path) {
    FilePtr f = open_file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("libpng initialization failed");
    }
    LoadedImage img;
    std::vector<png_byte> bytes;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("failed reading " + path.string());
    }
    png_init_io(png, f.get());
    png_read_info(png, info);
    const png_byte type = png_get_color_type(png, info);
    if (png_get_bit_depth(png, info) != 8 || (type != PNG_COLOR_TYPE_RGB && type != PNG_COLOR_TYPE_GRAY)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error(path.string() + ": only 8-bit RGB or gray PNG supported");
    }
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.channels = type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    bytes.resize(static_cast<std::size_t>(img.width) * img.height * img.channels);
    rows.resize(img.height);
    for (int y = 0; y < img.height; ++y) rows[y] = bytes.data() + static_cast<std::size_t>(y) * img.width * img.channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    img.data.resize(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) img.data[i] = bytes[i] / 255.0;
    return img;
}

void write_pfm(const std::filesystem::path& path, std::span<const double> data, int width, int height) {
    if (data.size() != static_cast<std::size_t>(width) * height) throw std::invalid_argument("write_pfm: size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "Pf\n" << width << " " << height << "\n-1.0\n";
    std::vector<float> row(width);
    for (int y = height - 1; y >= 0; --y) {
        for (int x = 0; x < width; ++x) row[x] = static_cast<float>(data[static_cast<std::size_t>(y) * width + x]);
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

LoadedImage read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string magic;
    double scale = 0.0;
    LoadedImage img;
    in >> magic >> img.width >> img.height >> scale;
    in.get();
    if (magic != "Pf" || img.width <= 0 || img.height <= 0 || scale >= 0.0) {
        throw std::runtime_error(path.string() + ": expected little-endian single-channel PFM");
    }
    img.channels = 1;
    img.data.resize(static_cast<std::size_t>(img.width) * img.height);
    std::vector<float> row(img.width);
    for (int y = img.height - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!in) throw std::runtime_error(path.string() + ": truncated PFM");
        for (int x = 0; x < img.width; ++x) img.data[static_cast<std::size_t>(y) * img.width + x] = row[x];
    }
    return img;
}

}  // namespace blurgs
