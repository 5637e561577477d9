// Copyright 2026 The NetDP Authors.
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


#include "netdp/binary_io.h"

#include <bit>
#include <cstring>

#include "netdp/common.h"

namespace netdp {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
T ToLittle(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
      std::swap(b[i], b[sizeof(T) - 1 - i]);
    }
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

// Guards length prefixes read from untrusted files.
constexpr std::uint64_t kMaxLength = std::uint64_t{1} << 40;

}  // namespace

BinaryWriter::BinaryWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw DataError("cannot open for writing: " + path.string());
}

void BinaryWriter::WriteU32(std::uint32_t v) {
  v = ToLittle(v);
  out_.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void BinaryWriter::WriteU64(std::uint64_t v) {
  v = ToLittle(v);
  out_.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void BinaryWriter::WriteF32(float v) { WriteU32(std::bit_cast<std::uint32_t>(v)); }

void BinaryWriter::WriteF64(double v) { WriteU64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::WriteBytes(std::string_view bytes) {
  out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void BinaryWriter::WriteString(std::string_view s) {
  WriteU64(s.size());
  WriteBytes(s);
}

void BinaryWriter::WriteU64Array(std::span<const std::uint64_t> v) {
  WriteU64(v.size());
  for (auto x : v) WriteU64(x);
}

void BinaryWriter::WriteF64Array(std::span<const double> v) {
  WriteU64(v.size());
  for (auto x : v) WriteF64(x);
}

void BinaryWriter::Close() {
  out_.flush();
  if (!out_) throw DataError("write failed: " + path_.string());
  out_.close();
}

BinaryReader::BinaryReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw DataError("cannot open for reading: " + path.string());
}

void BinaryReader::ReadRaw(void* dst, std::size_t n) {
  in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) {
    throw DataError("unexpected end of file: " + path_.string());
  }
}

std::uint32_t BinaryReader::ReadU32() {
  std::uint32_t v;
  ReadRaw(&v, sizeof v);
  return ToLittle(v);
}

std::uint64_t BinaryReader::ReadU64() {
  std::uint64_t v;
  ReadRaw(&v, sizeof v);
  return ToLittle(v);
}

float BinaryReader::ReadF32() { return std::bit_cast<float>(ReadU32()); }

double BinaryReader::ReadF64() { return std::bit_cast<double>(ReadU64()); }

std::string BinaryReader::ReadBytes(std::size_t n) {
  std::string s(n, '\0');
  if (n > 0) ReadRaw(s.data(), n);
  return s;
}

std::string BinaryReader::ReadString() {
  const std::uint64_t n = ReadU64();
  if (n > kMaxLength) throw DataError("corrupt length prefix: " + path_.string());
  return ReadBytes(n);
}

std::vector<std::uint64_t> BinaryReader::ReadU64Array() {
  const std::uint64_t n = ReadU64();
  if (n > kMaxLength) throw DataError("corrupt length prefix: " + path_.string());
  std::vector<std::uint64_t> v(n);
  for (auto& x : v) x = ReadU64();
  return v;
}

std::vector<double> BinaryReader::ReadF64Array() {
  const std::uint64_t n = ReadU64();
  if (n > kMaxLength) throw DataError("corrupt length prefix: " + path_.string());
  std::vector<double> v(n);
  for (auto& x : v) x = ReadF64();
  return v;
}

std::uint32_t BinaryReader::ExpectHeader(std::string_view magic,
                                         std::uint32_t max_version) {
  if (ReadBytes(magic.size()) != magic) {
    throw DataError("bad magic in " + path_.string());
  }
  const std::uint32_t version = ReadU32();
  if (version == 0 || version > max_version) {
    throw DataError("unsupported format version " + std::to_string(version) +
                    " in " + path_.string());
  }
  return version;
}

bool BinaryReader::AtEnd() {
  return in_.peek() == std::ifstream::traits_type::eof();
}

}  // namespace netdp
