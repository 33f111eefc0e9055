// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chainbench {

// Raised by decoders on malformed input; `offset()` is the byte position at
// which decoding failed.
class DecodeError : public std::runtime_error {
public:
    DecodeError(std::size_t offset, const std::string& what)
        : std::runtime_error("decode error at offset " + std::to_string(offset) + ": " + what),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Canonical encoding primitives: fixed field order, little-endian integers,
// u32 length prefixes for variable-size payloads.
class ByteWriter {
public:
    void put_u8(std::uint8_t v) { out_.push_back(v); }
    void put_u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void put_u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void put_i64(std::int64_t v) { put_u64(static_cast<std::uint64_t>(v)); }
    void put_blob(std::span<const std::uint8_t> bytes) {
        put_u32(static_cast<std::uint32_t>(bytes.size()));
        out_.insert(out_.end(), bytes.begin(), bytes.end());
    }

    const std::vector<std::uint8_t>& bytes() const { return out_; }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t get_u8() {
        need(1, "u8");
        return data_[pos_++];
    }
    std::uint32_t get_u32() {
        need(4, "u32");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t get_u64() {
        need(8, "u64");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    std::int64_t get_i64() { return static_cast<std::int64_t>(get_u64()); }
    std::vector<std::uint8_t> get_blob() {
        const std::uint32_t len = get_u32();
        need(len, "blob body");
        std::vector<std::uint8_t> out(data_.begin() + pos_, data_.begin() + pos_ + len);
        pos_ += len;
        return out;
    }

    std::size_t position() const { return pos_; }
    bool exhausted() const { return pos_ == data_.size(); }
    void expect_exhausted() const {
        if (!exhausted()) throw DecodeError(pos_, "trailing bytes");
    }

private:
    void need(std::size_t n, const char* what) const {
        if (pos_ + n > data_.size())
            throw DecodeError(pos_, std::string("truncated input reading ") + what);
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

}  // namespace chainbench
