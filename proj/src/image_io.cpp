#include "occond/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

#include <png.h>

#include "occond/error.hpp"

namespace occond::io {

namespace {

static_assert(std::endian::native == std::endian::little,
              "PFM writer assumes a little-endian host");

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw IoError(path.string(), std::string("cannot open: ") + std::strerror(errno));
  }
  return f;
}

// Rows as big-endian bytes, as PNG stores them.
template <typename T>
void write_png(const std::filesystem::path& path, const Grid<T>& image, int bit_depth) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw DimensionError(path.string(), "PNG output needs 1 or 3 channels");
  }
  if (image.width() < 1 || image.height() < 1) {
    throw DimensionError(path.string(), "PNG output needs a non-empty image");
  }
  auto file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path.string(), "libpng initialisation failed");
  }
  const int bytes_per_sample = bit_depth / 8;
  const std::size_t row_bytes =
      static_cast<std::size_t>(image.width()) * image.channels() * bytes_per_sample;
  std::vector<png_byte> row(row_bytes);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path.string(), "PNG encoding failed");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, image.width(), image.height(), bit_depth,
               image.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < image.height(); ++r) {
    std::size_t k = 0;
    for (int c = 0; c < image.width(); ++c) {
      for (int ch = 0; ch < image.channels(); ++ch) {
        const auto value = static_cast<std::uint32_t>(image.at(r, c, ch));
        if (bytes_per_sample == 2) {
          row[k++] = static_cast<png_byte>(value >> 8);
        }
        row[k++] = static_cast<png_byte>(value & 0xFF);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) {
    throw IoError(path.string(), "write failed");
  }
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(path.string(), "cannot open for reading");
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError(path.string(), "cannot open for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError(path.string(), "write failed");
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

std::vector<std::uint8_t> encode_pfm(const FloatMap& image, const std::vector<std::string>& comments) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw DimensionError("pfm", "PFM supports 1 or 3 channels, got " +
                                    std::to_string(image.channels()));
  }
  std::ostringstream header;
  header << (image.channels() == 3 ? "PF" : "Pf") << "\n";
  for (const auto& c : comments) header << "# " << c << "\n";
  header << image.width() << " " << image.height() << "\n-1.0\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> out(h.begin(), h.end());
  const std::size_t row_values = static_cast<std::size_t>(image.width()) * image.channels();
  out.reserve(out.size() + image.size() * sizeof(float));
  for (int r = image.height() - 1; r >= 0; --r) {
    const auto* row = reinterpret_cast<const std::uint8_t*>(&image.at(r, 0));
    out.insert(out.end(), row, row + row_values * sizeof(float));
  }
  return out;
}

FloatMap decode_pfm(const std::vector<std::uint8_t>& bytes, const std::string& name,
                    std::vector<std::string>* comments) {
  std::size_t pos = 0;
  const auto next_line = [&]() -> std::string {
    if (pos >= bytes.size()) throw IoError(name, "truncated PFM header");
    std::string line;
    while (pos < bytes.size() && bytes[pos] != '\n') line.push_back(static_cast<char>(bytes[pos++]));
    ++pos;
    return line;
  };
  const auto content_line = [&]() {
    for (;;) {
      std::string line = next_line();
      if (!line.empty() && line[0] == '#') {
        if (comments) comments->push_back(line.size() > 2 ? line.substr(2) : "");
        continue;
      }
      return line;
    }
  };
  const std::string magic = content_line();
  int channels = 0;
  if (magic == "PF") {
    channels = 3;
  } else if (magic == "Pf") {
    channels = 1;
  } else {
    throw IoError(name, "not a PFM file (magic '" + magic + "')");
  }
  int width = 0, height = 0;
  double scale = 0.0;
  {
    std::istringstream dims(content_line());
    if (!(dims >> width >> height) || width < 1 || height < 1) {
      throw IoError(name, "bad PFM dimensions");
    }
    std::istringstream sc(content_line());
    if (!(sc >> scale) || scale == 0.0) throw IoError(name, "bad PFM scale");
  }
  const bool big_endian = scale > 0.0;
  FloatMap image(height, width, channels);
  const std::size_t row_values = static_cast<std::size_t>(width) * channels;
  if (bytes.size() - pos < image.size() * sizeof(float)) {
    throw IoError(name, "truncated PFM data");
  }
  for (int r = height - 1; r >= 0; --r) {
    for (std::size_t k = 0; k < row_values; ++k) {
      std::uint8_t raw[4];
      std::memcpy(raw, &bytes[pos], 4);
      pos += 4;
      if (big_endian) std::reverse(raw, raw + 4);
      float value;
      std::memcpy(&value, raw, 4);
      image[static_cast<std::size_t>(r) * row_values + k] = value;
    }
  }
  return image;
}

void write_pfm(const std::filesystem::path& path, const FloatMap& image,
               const std::vector<std::string>& comments) {
  write_file(path, encode_pfm(image, comments));
}

FloatMap read_pfm(const std::filesystem::path& path, std::vector<std::string>* comments) {
  return decode_pfm(read_file(path), path.string(), comments);
}

void write_png8(const std::filesystem::path& path, const Grid<std::uint8_t>& image) {
  write_png(path, image, 8);
}

void write_png16(const std::filesystem::path& path, const Grid<std::uint16_t>& image) {
  write_png(path, image, 16);
}

PngImage read_png(const std::filesystem::path& path) {
  auto file = open_file(path, "rb");
  png_byte signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw IoError(path.string(), "not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string(), "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string(), "PNG decoding failed");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_png(png, info, PNG_TRANSFORM_EXPAND | PNG_TRANSFORM_PACKING | PNG_TRANSFORM_STRIP_ALPHA,
               nullptr);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  const int depth = png_get_bit_depth(png, info);
  png_bytepp rows = png_get_rows(png, info);

  PngImage out;
  out.bit_depth = depth == 16 ? 16 : 8;
  out.pixels = Grid<std::uint16_t>(height, width, channels);
  for (int r = 0; r < height; ++r) {
    const png_bytep row = rows[r];
    for (int c = 0; c < width; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        const std::size_t k = static_cast<std::size_t>(c) * channels + ch;
        out.pixels.at(r, c, ch) =
            depth == 16 ? static_cast<std::uint16_t>((row[2 * k] << 8) | row[2 * k + 1])
                        : static_cast<std::uint16_t>(row[k]);
      }
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void write_mask_png(const std::filesystem::path& path, const BinaryMap& mask) {
  Grid<std::uint8_t> img(mask.height(), mask.width(), 1, 0);
  for (std::size_t i = 0; i < mask.size(); ++i) img[i] = mask[i] ? 255 : 0;
  write_png8(path, img);
}

namespace {

const Grid<std::uint16_t>& require_gray(const PngImage& png, const std::filesystem::path& path) {
  if (png.pixels.channels() != 1) {
    throw DimensionError(path.string(), "expected a single-channel PNG");
  }
  return png.pixels;
}

}  // namespace

BinaryMap read_mask_png(const std::filesystem::path& path) {
  const auto png = read_png(path);
  const auto& px = require_gray(png, path);
  const std::uint32_t half = png.bit_depth == 16 ? 32768 : 128;
  BinaryMap out(px.height(), px.width(), 1, 0);
  for (std::size_t i = 0; i < px.size(); ++i) out[i] = px[i] >= half ? 1 : 0;
  return out;
}

FloatMap read_weight_png(const std::filesystem::path& path) {
  const auto png = read_png(path);
  const auto& px = require_gray(png, path);
  const double full = png.bit_depth == 16 ? 65535.0 : 255.0;
  FloatMap out(px.height(), px.width(), 1, 0.0f);
  for (std::size_t i = 0; i < px.size(); ++i) out[i] = static_cast<float>(px[i] / full);
  return out;
}

void write_count_png(const std::filesystem::path& path, const CountMap& count) {
  Grid<std::uint16_t> img(count.height(), count.width(), 1, 0);
  for (std::size_t i = 0; i < count.size(); ++i) {
    img[i] = static_cast<std::uint16_t>(std::min<std::uint32_t>(count[i], 65535u));
  }
  write_png16(path, img);
}

CountMap read_count_png(const std::filesystem::path& path) {
  const auto png = read_png(path);
  const auto& px = require_gray(png, path);
  CountMap out(px.height(), px.width(), 1, 0);
  for (std::size_t i = 0; i < px.size(); ++i) out[i] = px[i];
  return out;
}

Grid<std::uint8_t> normal_to_rgb(const FloatMap& normal) {
  if (normal.channels() != 3) {
    throw DimensionError("normal", "normal map needs 3 channels");
  }
  Grid<std::uint8_t> out(normal.height(), normal.width(), 3, 0);
  for (std::size_t p = 0; p < normal.pixel_count(); ++p) {
    const float x = normal[3 * p], y = normal[3 * p + 1], z = normal[3 * p + 2];
    if (x == 0.0f && y == 0.0f && z == 0.0f) continue;
    for (int k = 0; k < 3; ++k) {
      const double v = (static_cast<double>(normal[3 * p + k]) + 1.0) / 2.0 * 255.0;
      out[3 * p + k] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

}  // namespace occond::io
