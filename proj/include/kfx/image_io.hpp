#pragma once

// Frame file I/O. Accepted formats are 8-bit PNG (RGB or RGBA, alpha
// ignored) and binary PPM (P6, maxval 255). Sequences are directories of
// frame_%06d.png / frame_%06d.ppm with indices contiguous from 0.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

#include "kfx/image.hpp"

namespace kfx {

namespace fs = std::filesystem;

inline RawFrame read_png(const fs::path& path) {
  png_image im;
  std::memset(&im, 0, sizeof(im));
  im.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&im, path.string().c_str()))
    throw std::runtime_error("cannot read PNG " + path.string() + ": " +
                             im.message);
  im.format = PNG_FORMAT_BGR;  // libpng folds RGBA/palette/gray down for us
  RawFrame frame(static_cast<int>(im.width), static_cast<int>(im.height));
  if (!png_image_finish_read(&im, nullptr, frame.pixels.data(), 0, nullptr))
    throw std::runtime_error("cannot decode PNG " + path.string() + ": " +
                             im.message);
  return frame;
}

inline void write_png(const RawFrame& frame, const fs::path& path) {
  png_image im;
  std::memset(&im, 0, sizeof(im));
  im.version = PNG_IMAGE_VERSION;
  im.width = static_cast<png_uint_32>(frame.width);
  im.height = static_cast<png_uint_32>(frame.height);
  im.format = PNG_FORMAT_BGR;
  // Write to a temp name and rename, so a crash never leaves a bad file.
  const fs::path tmp = path.string() + ".tmp";
  if (!png_image_write_to_file(&im, tmp.string().c_str(), 0,
                               frame.pixels.data(), 0, nullptr))
    throw std::runtime_error("cannot write PNG " + path.string() + ": " +
                             im.message);
  fs::rename(tmp, path);
}

inline RawFrame read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P6")
    throw std::runtime_error("not a P6 PPM: " + path.string());
  auto next_int = [&]() {
    // skip whitespace and # comments
    int c = in.get();
    while (c == '#' || std::isspace(c)) {
      if (c == '#')
        while (c != '\n' && c != EOF) c = in.get();
      c = in.get();
    }
    int v = 0;
    bool any = false;
    while (c >= '0' && c <= '9') {
      v = v * 10 + (c - '0');
      any = true;
      c = in.get();
    }
    if (!any) throw std::runtime_error("bad PPM header: " + path.string());
    return v;
  };
  const int w = next_int(), h = next_int(), maxval = next_int();
  if (maxval != 255)
    throw std::runtime_error("PPM maxval must be 255: " + path.string());
  RawFrame frame(w, h);
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(rgb.data()),
          static_cast<std::streamsize>(rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(rgb.size()))
    throw std::runtime_error("truncated PPM: " + path.string());
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    frame.pixels[i] = rgb[i + 2];
    frame.pixels[i + 1] = rgb[i + 1];
    frame.pixels[i + 2] = rgb[i];
  }
  return frame;
}

inline void write_ppm(const RawFrame& frame, const fs::path& path) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "P6\n" << frame.width << " " << frame.height << "\n255\n";
    for (std::size_t i = 0; i < frame.pixels.size(); i += 3) {
      const char rgb[3] = {static_cast<char>(frame.pixels[i + 2]),
                           static_cast<char>(frame.pixels[i + 1]),
                           static_cast<char>(frame.pixels[i])};
      out.write(rgb, 3);
    }
  }
  fs::rename(tmp, path);
}

inline RawFrame read_frame(const fs::path& path) {
  return path.extension() == ".ppm" ? read_ppm(path) : read_png(path);
}

// Loads frame_%06d.{png,ppm} from a directory, sorted by index. Indices
// must be contiguous from 0 and all frames must share one size.
inline std::vector<RawFrame> load_frame_sequence(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw std::runtime_error("no frames found in " + dir.string() +
                             " (not a directory)");
  static const std::regex pat(R"(frame_(\d{6})\.(png|ppm))");
  std::map<long, fs::path> by_index;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (!std::regex_match(name, m, pat)) continue;
    const long idx = std::stol(m[1].str());
    auto [it, inserted] = by_index.emplace(idx, entry.path());
    if (!inserted)
      throw std::runtime_error("duplicate frame index " +
                               std::to_string(idx) + ": " + name + " and " +
                               it->second.filename().string());
  }
  if (by_index.empty())
    throw std::runtime_error("no frames found in " + dir.string());
  long expect = 0;
  for (const auto& [idx, path] : by_index) {
    if (idx != expect)
      throw std::runtime_error("missing frame index " +
                               std::to_string(expect));
    ++expect;
  }
  std::vector<RawFrame> frames;
  frames.reserve(by_index.size());
  for (const auto& [idx, path] : by_index) {
    RawFrame f = read_frame(path);
    if (!frames.empty() && (f.width != frames[0].width ||
                            f.height != frames[0].height))
      throw std::runtime_error("mixed frame dimensions at " +
                               path.filename().string());
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace kfx
