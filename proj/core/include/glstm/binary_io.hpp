// Copyright 2026 The gLSTM Captioner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Little-endian byte streams, atomic file writes and the tagged container
// used for checkpoints and CCA models:
//   4 magic bytes | u32 version | u32 header length | JSON header | f64 payload

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace glstm::io {

// Reads a whole file; throws MissingFileError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over the target, so a
// failed run never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

class ByteWriter {
 public:
  void u32(std::uint32_t v);
  void f32(float v);
  void f64(double v);
  void f64s(std::span<const double> values);
  void raw(std::string_view bytes);
  const std::string& bytes() const noexcept { return out_; }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : in_(bytes) {}
  std::uint32_t u32();
  float f32();
  double f64();
  void f64s(std::span<double> out);
  std::string_view raw(std::size_t n);
  std::size_t remaining() const noexcept { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const;
  std::string_view in_;
  std::size_t pos_ = 0;
};

struct Container {
  std::string header_json;
  std::vector<double> payload;
};

std::string encode_container(std::string_view magic, std::uint32_t version,
                             const Container& container);
// Throws VersionError on wrong magic or version and TruncatedFileError when the
// byte stream ends early or the payload is not a whole number of values.
Container decode_container(std::string_view bytes, std::string_view magic,
                           std::uint32_t version);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 14695981039346656037ULL);

}  // namespace glstm::io
