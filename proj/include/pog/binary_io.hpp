// Copyright 2026 The pogest Authors
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

#ifndef POG_BINARY_IO_HPP
#define POG_BINARY_IO_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pog::io {

/// Little-endian byte sink. Collects the whole payload in memory and writes it
/// in one go so partially written files never appear on disk.
class ByteWriter
{
public:
    void bytes(std::string_view raw);
    void u8(std::uint8_t v);
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i32(std::int32_t v);
    void f32(float v);
    void f64(double v);
    /* Writes every value narrowed to f32 */
    void f32_array(std::span<const double> values);
    void f64_array(std::span<const double> values);

    const std::vector<std::uint8_t>& data() const { return mData; }

    /* Throws DataError naming the path when the file cannot be written */
    void save(const std::filesystem::path& path) const;

private:
    std::vector<std::uint8_t> mData;
};

/// Bounds-checked little-endian reader. Every failure reports the byte offset
/// at which decoding stopped.
class ByteReader
{
public:
    ByteReader(std::vector<std::uint8_t> data, std::string source);

    static ByteReader from_file(const std::filesystem::path& path);

    void expect_magic(std::string_view magic);
    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int32_t i32();
    float f32();
    double f64();
    std::vector<double> f32_array(std::size_t count);
    std::vector<double> f64_array(std::size_t count);

    std::size_t offset() const { return mOffset; }
    std::size_t remaining() const { return mData.size() - mOffset; }
    /* Throws unless every byte has been consumed */
    void expect_end() const;
    [[noreturn]] void fail(const std::string& what) const;

private:
    const std::uint8_t* take(std::size_t n);

    std::vector<std::uint8_t> mData;
    std::string mSource;
    std::size_t mOffset = 0;
};

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/* Whole file contents; throws DataError naming the path on failure */
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

/* Narrows to f32 and back; values produced this way survive a save/load exactly */
double round_to_f32(double v);
void round_to_f32(std::span<double> values);

/* FNV-1a, used for config hashes recorded in manifests */
std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t v);

} // namespace pog::io

#endif // POG_BINARY_IO_HPP
