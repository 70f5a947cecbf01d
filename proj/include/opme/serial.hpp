#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace opme {

// Raised when an index file or section fails structural validation.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// Little-endian byte sink. All multi-byte integers in the index file go
// through here so the on-disk format is identical across hosts.
class ByteWriter {
public:
    void put_u8(uint8_t v) { buf_.push_back(v); }

    void put_u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }

    void put_u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }

    void put_bytes(const uint8_t* p, size_t len) { buf_.insert(buf_.end(), p, p + len); }

    void put_blob(const std::vector<uint8_t>& b) { put_bytes(b.data(), b.size()); }

    size_t size() const { return buf_.size(); }
    const std::vector<uint8_t>& bytes() const { return buf_; }
    std::vector<uint8_t> take() { return std::move(buf_); }

private:
    std::vector<uint8_t> buf_;
};

// Bounds-checked little-endian reader; throws FormatError on truncation.
class ByteReader {
public:
    ByteReader(const uint8_t* data, size_t len) : data_(data), len_(len) {}

    uint8_t get_u8() {
        need(1);
        return data_[pos_++];
    }

    uint32_t get_u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    uint64_t get_u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }

    const uint8_t* get_bytes(size_t len) {
        need(len);
        const uint8_t* p = data_ + pos_;
        pos_ += len;
        return p;
    }

    size_t remaining() const { return len_ - pos_; }
    size_t pos() const { return pos_; }

private:
    void need(size_t k) const {
        if (len_ - pos_ < k) throw FormatError("truncated section");
    }

    const uint8_t* data_;
    size_t len_;
    size_t pos_ = 0;
};

// Packs fixed-width integers LSB-first into a byte stream.
class BitWriter {
public:
    void put(uint64_t value, unsigned width) {
        for (unsigned i = 0; i < width; ++i) {
            if (fill_ == 0) bytes_.push_back(0);
            if ((value >> i) & 1u) bytes_.back() |= static_cast<uint8_t>(1u << fill_);
            fill_ = (fill_ + 1) & 7;
        }
    }

    // Byte-aligned by construction once taken; trailing bits are zero.
    std::vector<uint8_t> take() {
        fill_ = 0;
        return std::move(bytes_);
    }

    size_t bit_count() const { return bytes_.empty() ? 0 : (bytes_.size() - 1) * 8 + (fill_ ? fill_ : 8); }

private:
    std::vector<uint8_t> bytes_;
    unsigned fill_ = 0;  // bits used in the last byte, 0 == byte boundary
};

class BitReader {
public:
    BitReader(const uint8_t* data, size_t nbytes) : data_(data), nbytes_(nbytes) {}

    uint64_t get(unsigned width) {
        uint64_t v = 0;
        for (unsigned i = 0; i < width; ++i) {
            size_t byte = bit_ >> 3;
            if (byte >= nbytes_) throw FormatError("truncated bit payload");
            if ((data_[byte] >> (bit_ & 7)) & 1u) v |= uint64_t(1) << i;
            ++bit_;
        }
        return v;
    }

private:
    const uint8_t* data_;
    size_t nbytes_;
    size_t bit_ = 0;
};

inline size_t packed_bytes(size_t count, unsigned width) { return (count * width + 7) / 8; }

}  // namespace detail
}  // namespace opme
