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


#ifndef NETDP_BINARY_IO_H_
#define NETDP_BINARY_IO_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace netdp {

// Little-endian binary writer. Strings and arrays are length-prefixed with
// a u64 count.
class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path);

  void WriteU32(std::uint32_t v);
  void WriteU64(std::uint64_t v);
  void WriteF32(float v);
  void WriteF64(double v);
  void WriteBytes(std::string_view bytes);
  void WriteString(std::string_view s);
  void WriteU64Array(std::span<const std::uint64_t> v);
  void WriteF64Array(std::span<const double> v);

  // Flushes and reports write failures.
  void Close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path);

  std::uint32_t ReadU32();
  std::uint64_t ReadU64();
  float ReadF32();
  double ReadF64();
  std::string ReadBytes(std::size_t n);
  std::string ReadString();
  std::vector<std::uint64_t> ReadU64Array();
  std::vector<double> ReadF64Array();

  // Reads a magic tag and a version word; throws DataError on mismatch.
  std::uint32_t ExpectHeader(std::string_view magic,
                             std::uint32_t max_version);

  bool AtEnd();

 private:
  void ReadRaw(void* dst, std::size_t n);

  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace netdp

#endif  // NETDP_BINARY_IO_H_
