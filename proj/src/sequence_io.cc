// Copyright 2026 The BSVD Stream Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bsvd/sequence_io.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <string>

#include "bsvd/byte_io.h"
#include "bsvd/errors.h"

namespace bsvd {

std::vector<std::uint8_t> encode_sequence(std::span<const Tensor> frames) {
  if (frames.empty()) throw ConfigError("sequence: no frames to encode");
  const Shape s = frames.front().shape();
  ByteWriter w;
  w.raw(std::string_view(kSequenceMagic, sizeof(kSequenceMagic)));
  w.u32(kSequenceVersion);
  w.u32(static_cast<std::uint32_t>(frames.size()));
  w.u32(static_cast<std::uint32_t>(s.channels));
  w.u32(static_cast<std::uint32_t>(s.height));
  w.u32(static_cast<std::uint32_t>(s.width));
  for (const Tensor& f : frames) {
    if (f.shape() != s) throw ConfigError("sequence: frames differ in shape");
    w.f32s(f.data());
  }
  return w.take();
}

std::vector<Tensor> decode_sequence(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (!r.has(28)) throw FormatError("sequence: truncated header");
  auto magic = r.raw(8);
  if (std::memcmp(magic.data(), kSequenceMagic, 8) != 0) throw FormatError("sequence: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kSequenceVersion) {
    throw FormatError("sequence: unsupported version " + std::to_string(version));
  }
  const std::uint32_t t = r.u32();
  const Shape s{static_cast<int>(r.u32()), static_cast<int>(r.u32()), static_cast<int>(r.u32())};
  if (s.channels < 1 || s.height < 1 || s.width < 1) throw FormatError("sequence: empty frame shape");
  const std::size_t payload = static_cast<std::size_t>(t) * s.elements() * 4;
  if (r.remaining() != payload) {
    throw FormatError("sequence: payload is " + std::to_string(r.remaining()) + " bytes, expected " +
                      std::to_string(payload));
  }
  std::vector<Tensor> frames;
  frames.reserve(t);
  for (std::uint32_t i = 0; i < t; ++i) {
    std::vector<float> data(s.elements());
    for (float& v : data) v = r.f32();
    try {
      frames.emplace_back(s, std::move(data));
    } catch (const ConfigError& e) {
      throw FormatError("sequence: frame " + std::to_string(i) + ": " + e.what());
    }
  }
  return frames;
}

void write_sequence(const std::filesystem::path& path, std::span<const Tensor> frames) {
  write_file_bytes(path, encode_sequence(frames));
}

std::vector<Tensor> read_sequence(const std::filesystem::path& path) {
  return decode_sequence(read_file_bytes(path));
}

void write_netpbm(const std::filesystem::path& path, const Tensor& frame) {
  if (frame.channels() != 1 && frame.channels() != 3) {
    throw ConfigError("netpbm: only 1- or 3-channel frames can be exported");
  }
  ByteWriter w;
  std::ostringstream header;
  header << (frame.channels() == 1 ? "P5" : "P6") << "\n"
         << frame.width() << " " << frame.height() << "\n255\n";
  w.raw(header.str());
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      for (int c = 0; c < frame.channels(); ++c) {
        const double v = std::clamp(static_cast<double>(frame.at(c, y, x)), 0.0, 1.0);
        w.u8(static_cast<std::uint8_t>(std::lround(v * 255.0)));
      }
    }
  }
  write_file_bytes(path, w.bytes());
}

Tensor read_netpbm(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  std::size_t pos = 0;
  auto token = [&]() {
    std::string tok;
    while (pos < bytes.size()) {
      const char ch = static_cast<char>(bytes[pos]);
      if (ch == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!tok.empty()) break;
        ++pos;
      } else {
        tok.push_back(ch);
        ++pos;
      }
    }
    return tok;
  };
  const std::string kind = token();
  if (kind != "P5" && kind != "P6") throw FormatError("netpbm: " + path.string() + " is not P5/P6");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(token());
    height = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw FormatError("netpbm: malformed header in " + path.string());
  }
  if (maxval != 255 || width < 1 || height < 1) {
    throw FormatError("netpbm: only 8-bit images are supported");
  }
  ++pos;  // single whitespace after maxval
  const int channels = kind == "P5" ? 1 : 3;
  if (bytes.size() - std::min(pos, bytes.size()) < static_cast<std::size_t>(width) * height * channels) {
    throw FormatError("netpbm: truncated pixel data in " + path.string());
  }
  Tensor out({channels, height, width});
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) out.at(c, y, x) = bytes[pos++] / 255.0f;
    }
  }
  return out;
}

void export_netpbm_frames(const std::filesystem::path& dir, std::span<const Tensor> frames) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04zu.%s", i,
                  frames[i].channels() == 1 ? "pgm" : "ppm");
    write_netpbm(dir / name, frames[i]);
  }
}

std::vector<Tensor> import_netpbm_frames(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (ext == ".ppm" || ext == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw FormatError("netpbm: no .ppm/.pgm files in " + dir.string());
  std::vector<Tensor> frames;
  for (const auto& f : files) frames.push_back(read_netpbm(f));
  return frames;
}

}  // namespace bsvd
