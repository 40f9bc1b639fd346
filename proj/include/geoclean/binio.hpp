#pragma once

// Little-endian binary serialization for model files. Explicit byte
// packing keeps the on-disk format independent of host endianness and
// struct layout.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "geoclean/common.hpp"

namespace geoclean {

class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }

    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }

    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }

    void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }

    void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }

    void str(std::string_view s) {
        u64(s.size());
        buf_.append(s);
    }

    void raw(std::string_view s) { buf_.append(s); }

    const std::string& data() const { return buf_; }

private:
    std::string buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view data) : data_(data) {}

    uint8_t u8() {
        need(1);
        return static_cast<uint8_t>(data_[pos_++]);
    }

    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(data_[pos_++])) << (8 * i);
        return v;
    }

    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(data_[pos_++])) << (8 * i);
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    float f32() { return std::bit_cast<float>(u32()); }

    std::string str() {
        uint64_t n = u64();
        need(n);
        std::string s(data_.substr(pos_, n));
        pos_ += n;
        return s;
    }

    std::string raw(size_t n) {
        need(n);
        std::string s(data_.substr(pos_, n));
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == data_.size(); }

private:
    void need(uint64_t n) const {
        if (pos_ + n > data_.size()) throw DataError("truncated binary payload");
    }

    std::string_view data_;
    size_t pos_ = 0;
};

}  // namespace geoclean
