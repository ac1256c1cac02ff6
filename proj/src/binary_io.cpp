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

#include "pog/binary_io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "pog/errors.hpp"

namespace pog::io {

void ByteWriter::bytes(std::string_view raw)
{
    mData.insert(mData.end(), raw.begin(), raw.end());
}

void ByteWriter::u8(std::uint8_t v) { mData.push_back(v); }

void ByteWriter::u16(std::uint16_t v)
{
    mData.push_back(static_cast<std::uint8_t>(v & 0xff));
    mData.push_back(static_cast<std::uint8_t>(v >> 8));
}

void ByteWriter::u32(std::uint32_t v)
{
    for (int shift = 0; shift < 32; shift += 8) {
        mData.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
    }
}

void ByteWriter::u64(std::uint64_t v)
{
    for (int shift = 0; shift < 64; shift += 8) {
        mData.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
    }
}

void ByteWriter::i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::f32_array(std::span<const double> values)
{
    mData.reserve(mData.size() + 4 * values.size());
    for (double v : values) {
        f32(static_cast<float>(v));
    }
}

void ByteWriter::f64_array(std::span<const double> values)
{
    mData.reserve(mData.size() + 8 * values.size());
    for (double v : values) {
        f64(v);
    }
}

void ByteWriter::save(const std::filesystem::path& path) const { write_file_bytes(path, mData); }

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot open '" + path.string() + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw DataError("failed writing '" + path.string() + "'");
    }
}

ByteReader::ByteReader(std::vector<std::uint8_t> data, std::string source)
    : mData(std::move(data)), mSource(std::move(source))
{
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "' for reading");
    }
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
}

ByteReader ByteReader::from_file(const std::filesystem::path& path)
{
    return ByteReader(read_file_bytes(path), path.string());
}

void ByteReader::fail(const std::string& what) const
{
    throw DataError(mSource + ": " + what + " at byte offset " +
                    std::to_string(mOffset));
}

const std::uint8_t* ByteReader::take(std::size_t n)
{
    if (remaining() < n) {
        fail("truncated data (need " + std::to_string(n) + " bytes, have " +
             std::to_string(remaining()) + ")");
    }
    const std::uint8_t* p = mData.data() + mOffset;
    mOffset += n;
    return p;
}

void ByteReader::expect_magic(std::string_view magic)
{
    const std::size_t start = mOffset;
    const std::uint8_t* p = take(magic.size());
    for (std::size_t i = 0; i < magic.size(); ++i) {
        if (p[i] != static_cast<std::uint8_t>(magic[i])) {
            mOffset = start;
            fail("bad magic, expected '" + std::string(magic) + "'");
        }
    }
}

std::uint8_t ByteReader::u8() { return *take(1); }

std::uint16_t ByteReader::u16()
{
    const std::uint8_t* p = take(2);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t ByteReader::u32()
{
    const std::uint8_t* p = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | p[i];
    }
    return v;
}

std::uint64_t ByteReader::u64()
{
    const std::uint8_t* p = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | p[i];
    }
    return v;
}

std::int32_t ByteReader::i32() { return static_cast<std::int32_t>(u32()); }

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::vector<double> ByteReader::f32_array(std::size_t count)
{
    if (remaining() / 4 < count) {
        fail("truncated f32 payload (need " + std::to_string(count) +
             " values, have " + std::to_string(remaining() / 4) + ")");
    }
    std::vector<double> out(count);
    for (auto& v : out) {
        v = static_cast<double>(f32());
    }
    return out;
}

std::vector<double> ByteReader::f64_array(std::size_t count)
{
    if (remaining() / 8 < count) {
        fail("truncated f64 payload (need " + std::to_string(count) +
             " values, have " + std::to_string(remaining() / 8) + ")");
    }
    std::vector<double> out(count);
    for (auto& v : out) {
        v = f64();
    }
    return out;
}

void ByteReader::expect_end() const
{
    if (mOffset != mData.size()) {
        fail("unexpected trailing data (" + std::to_string(remaining()) +
             " bytes)");
    }
}

double round_to_f32(double v)
{
    return static_cast<double>(static_cast<float>(v));
}

void round_to_f32(std::span<double> values)
{
    for (auto& v : values) {
        v = round_to_f32(v);
    }
}

std::uint64_t fnv1a(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : text) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(v));
    return buf;
}

} // namespace pog::io
