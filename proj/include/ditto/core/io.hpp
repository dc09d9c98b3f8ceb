// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <png.h>

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ditto/core/error.hpp"
#include "ditto/core/tensor.hpp"

namespace ditto::io {

namespace fs = std::filesystem;

// Tensor file layout: "DTNS" magic, then channels/height/width as little-endian
// uint32, then C*H*W little-endian float32 values in channel-major order.
inline constexpr std::array<char, 4> kTensorMagic = {'D', 'T', 'N', 'S'};
inline constexpr std::size_t kTensorHeaderBytes = 16;

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

inline float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

/// Little-endian float32 bytes for a tensor's values (no header).
inline std::string encode_f32(std::span<const double> values) {
  std::string out;
  out.reserve(values.size() * 4);
  for (double v : values) put_f32(out, static_cast<float>(v));
  return out;
}

inline std::vector<double> decode_f32(std::string_view bytes) {
  require(bytes.size() % 4 == 0, ErrorKind::kProtocol, "float32 payload length not a multiple of 4");
  std::vector<double> out(bytes.size() / 4);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = get_f32(p + 4 * i);
  return out;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "short write to " + path.string());
}

inline std::string encode_tensor_file(const Tensor& t) {
  std::string out(kTensorMagic.begin(), kTensorMagic.end());
  put_u32(out, static_cast<std::uint32_t>(t.channels()));
  put_u32(out, static_cast<std::uint32_t>(t.height()));
  put_u32(out, static_cast<std::uint32_t>(t.width()));
  out += encode_f32(t.data());
  return out;
}

inline Tensor decode_tensor_file(std::string_view bytes) {
  require(bytes.size() >= kTensorHeaderBytes, ErrorKind::kIo, "tensor file shorter than header");
  require(std::equal(kTensorMagic.begin(), kTensorMagic.end(), bytes.begin()), ErrorKind::kIo,
          "bad tensor file magic");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const auto c = get_u32(p + 4), h = get_u32(p + 8), w = get_u32(p + 12);
  const std::size_t n = static_cast<std::size_t>(c) * h * w;
  require(bytes.size() == kTensorHeaderBytes + 4 * n, ErrorKind::kIo, "tensor file size does not match header");
  Tensor t(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w));
  auto values = decode_f32(bytes.substr(kTensorHeaderBytes));
  std::copy(values.begin(), values.end(), t.data().begin());
  return t;
}

inline void write_tensor(const fs::path& path, const Tensor& t) { write_file(path, encode_tensor_file(t)); }
inline Tensor read_tensor(const fs::path& path) { return decode_tensor_file(read_file(path)); }

/// Writes a 1- or 3-channel tensor with values in [0,1] as an 8-bit PNG.
inline void write_png(const fs::path& path, const Tensor& img) {
  require(img.channels() == 1 || img.channels() == 3, ErrorKind::kInvalidArgument,
          "png export needs 1 or 3 channels");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!fp) fail(ErrorKind::kIo, "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::kIo, "libpng error writing " + path.string());
  }
  png_init_io(png, fp.get());
  const int color = img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(png, info, img.width(), img.height(), 8, color, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<unsigned char> row(static_cast<std::size_t>(img.width()) * img.channels());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c)
        row[static_cast<std::size_t>(x) * img.channels() + c] =
            static_cast<unsigned char>(std::lround(std::clamp(img(c, y, x), 0.0, 1.0) * 255.0));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

/// Reads an 8-bit PNG as a 3-channel tensor in [0,1] (gray is replicated, alpha dropped).
inline Tensor read_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    fail(ErrorKind::kIo, "cannot read png " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    fail(ErrorKind::kIo, "cannot decode png " + path.string() + ": " + image.message);
  }
  const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
  Tensor t(3, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) t(c, y, x) = buf[(static_cast<std::size_t>(y) * w + x) * 3 + c] / 255.0;
  return t;
}

inline std::string base64_encode(std::string_view in) {
  static constexpr char kTable[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < in.size(); i += 3) {
    const std::uint32_t v = (static_cast<unsigned char>(in[i]) << 16) |
                            (static_cast<unsigned char>(in[i + 1]) << 8) | static_cast<unsigned char>(in[i + 2]);
    out += kTable[(v >> 18) & 63];
    out += kTable[(v >> 12) & 63];
    out += kTable[(v >> 6) & 63];
    out += kTable[v & 63];
  }
  if (i < in.size()) {
    std::uint32_t v = static_cast<unsigned char>(in[i]) << 16;
    if (i + 1 < in.size()) v |= static_cast<unsigned char>(in[i + 1]) << 8;
    out += kTable[(v >> 18) & 63];
    out += kTable[(v >> 12) & 63];
    out += i + 1 < in.size() ? kTable[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

inline std::string base64_decode(std::string_view in) {
  auto value = [](char ch) -> int {
    if (ch >= 'A' && ch <= 'Z') return ch - 'A';
    if (ch >= 'a' && ch <= 'z') return ch - 'a' + 26;
    if (ch >= '0' && ch <= '9') return ch - '0' + 52;
    if (ch == '+') return 62;
    if (ch == '/') return 63;
    return -1;
  };
  require(in.size() % 4 == 0, ErrorKind::kProtocol, "base64 length not a multiple of 4");
  std::string out;
  out.reserve(in.size() / 4 * 3);
  for (std::size_t i = 0; i < in.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      if (in[i + k] == '=') {
        v[k] = 0;
        ++pad;
      } else {
        v[k] = value(in[i + k]);
        require(v[k] >= 0 && pad == 0, ErrorKind::kProtocol, "invalid base64 character");
      }
    }
    require(pad <= 2 && (pad == 0 || i + 4 == in.size()), ErrorKind::kProtocol, "invalid base64 padding");
    const std::uint32_t n = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
    out += static_cast<char>((n >> 16) & 0xFF);
    if (pad < 2) out += static_cast<char>((n >> 8) & 0xFF);
    if (pad < 1) out += static_cast<char>(n & 0xFF);
  }
  return out;
}

/// 64-bit FNV-1a, used for input fingerprints in run manifests.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace ditto::io
