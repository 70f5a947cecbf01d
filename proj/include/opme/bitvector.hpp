#pragma once

#include <cstdint>
#include <vector>

#include "opme/serial.hpp"

namespace opme {

// Static bit vector with rank1/select1. The rank directory (one u64 count per
// 512-bit superblock plus one u16 offset per word) is rebuilt on load and is
// not part of the serialized form.
class RankBitVector {
public:
    RankBitVector() = default;
    explicit RankBitVector(size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}
    explicit RankBitVector(const std::vector<bool>& bits);

    void set(size_t i) { words_[i >> 6] |= uint64_t(1) << (i & 63); }
    bool get(size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }

    // Call once after all set() calls; queries are invalid before this.
    void finalize();

    size_t size() const { return nbits_; }
    uint64_t ones() const { return total_ones_; }

    // Number of 1s among the first i bits; i in [0, size()].
    uint64_t rank1(size_t i) const;

    // Position (0-based) of the k-th 1, k in [1, ones()].
    size_t select1(uint64_t k) const;

    void serialize(detail::ByteWriter& w) const;
    static RankBitVector deserialize(detail::ByteReader& r);

    size_t serialized_bits() const { return 64 + words_.size() * 64; }

    bool operator==(const RankBitVector& o) const {
        return nbits_ == o.nbits_ && words_ == o.words_;
    }

private:
    size_t nbits_ = 0;
    std::vector<uint64_t> words_;
    std::vector<uint64_t> super_;  // cumulative ones before each 8-word superblock
    std::vector<uint16_t> word_off_;  // ones before each word, within its superblock
    uint64_t total_ones_ = 0;
};

}  // namespace opme
