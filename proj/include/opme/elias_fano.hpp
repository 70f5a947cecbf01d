#pragma once

#include <cstdint>
#include <vector>

#include "opme/bitvector.hpp"
#include "opme/serial.hpp"

namespace opme {

// Elias-Fano representation of a non-decreasing sequence: low bits packed
// verbatim, high parts unary-coded in a bit vector.
class EliasFano {
public:
    EliasFano() = default;

    static EliasFano build(const std::vector<uint64_t>& sorted_values);

    // k in [1, size()]; returns the k-th stored value.
    uint64_t access(uint64_t k) const;

    uint64_t size() const { return count_; }
    uint64_t universe() const { return universe_; }

    void serialize(detail::ByteWriter& w) const;
    static EliasFano deserialize(detail::ByteReader& r);

private:
    uint64_t count_ = 0;
    uint64_t universe_ = 0;  // exclusive upper bound on values
    unsigned low_bits_ = 0;
    std::vector<uint64_t> low_words_;
    RankBitVector high_;

    uint64_t low_at(uint64_t idx) const;
};

}  // namespace opme
