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

#include "glstm/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "glstm/error.hpp"

namespace glstm::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place: " + path.string());
  }
}

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::f64(double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

void ByteWriter::f64s(std::span<const double> values) {
  out_.reserve(out_.size() + 8 * values.size());
  for (double v : values) f64(v);
}

void ByteWriter::raw(std::string_view bytes) { out_.append(bytes); }

void ByteReader::need(std::size_t n) const {
  if (remaining() < n) {
    throw TruncatedFileError("unexpected end of data: needed " + std::to_string(n) +
                             " bytes, " + std::to_string(remaining()) + " left");
  }
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
  pos_ += 4;
  return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

double ByteReader::f64() {
  need(8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
  pos_ += 8;
  return std::bit_cast<double>(bits);
}

void ByteReader::f64s(std::span<double> out) {
  need(8 * out.size());
  for (double& v : out) v = f64();
}

std::string_view ByteReader::raw(std::size_t n) {
  need(n);
  auto view = in_.substr(pos_, n);
  pos_ += n;
  return view;
}

std::string encode_container(std::string_view magic, std::uint32_t version,
                             const Container& container) {
  ByteWriter w;
  w.raw(magic);
  w.u32(version);
  w.u32(static_cast<std::uint32_t>(container.header_json.size()));
  w.raw(container.header_json);
  w.f64s(container.payload);
  return w.bytes();
}

Container decode_container(std::string_view bytes, std::string_view magic,
                           std::uint32_t version) {
  if (bytes.size() < magic.size() || bytes.substr(0, magic.size()) != magic) {
    throw VersionError("bad magic bytes: expected \"" + std::string(magic) + "\"");
  }
  ByteReader r(bytes.substr(magic.size()));
  const std::uint32_t found = r.u32();
  if (found != version) {
    throw VersionError("unsupported version " + std::to_string(found) + " (expected " +
                       std::to_string(version) + ")");
  }
  const std::uint32_t header_len = r.u32();
  Container out;
  out.header_json = std::string(r.raw(header_len));
  if (r.remaining() % 8 != 0) {
    throw TruncatedFileError("payload is not a whole number of 64-bit values");
  }
  out.payload.resize(r.remaining() / 8);
  r.f64s(out.payload);
  return out;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace glstm::io
