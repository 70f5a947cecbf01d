#include "opme/elias_fano.hpp"

#include <bit>
#include <stdexcept>

namespace opme {

static unsigned low_width(uint64_t universe, uint64_t count) {
    if (count == 0) return 0;
    uint64_t per = universe / count;
    return per <= 1 ? 0 : std::bit_width(per) - 1;  // floor(log2(u/n))
}

EliasFano EliasFano::build(const std::vector<uint64_t>& sorted_values) {
    EliasFano ef;
    ef.count_ = sorted_values.size();
    uint64_t max_v = 0;
    for (size_t i = 0; i < sorted_values.size(); ++i) {
        if (i && sorted_values[i] < sorted_values[i - 1])
            throw std::invalid_argument("EliasFano: sequence not non-decreasing");
        max_v = sorted_values[i];
    }
    ef.universe_ = sorted_values.empty() ? 1 : max_v + 1;
    ef.low_bits_ = low_width(ef.universe_, ef.count_);
    ef.low_words_.assign((ef.count_ * ef.low_bits_ + 63) / 64, 0);

    uint64_t high_len = ef.count_ + (ef.count_ ? (max_v >> ef.low_bits_) : 0) + 1;
    RankBitVector high(high_len);
    for (uint64_t i = 0; i < ef.count_; ++i) {
        uint64_t v = sorted_values[i];
        if (ef.low_bits_) {
            uint64_t lo = v & ((uint64_t(1) << ef.low_bits_) - 1);
            uint64_t bitpos = i * ef.low_bits_;
            ef.low_words_[bitpos >> 6] |= lo << (bitpos & 63);
            unsigned spill = static_cast<unsigned>(bitpos & 63);
            if (spill + ef.low_bits_ > 64) ef.low_words_[(bitpos >> 6) + 1] |= lo >> (64 - spill);
        }
        high.set((v >> ef.low_bits_) + i);
    }
    high.finalize();
    ef.high_ = std::move(high);
    return ef;
}

uint64_t EliasFano::low_at(uint64_t idx) const {
    if (!low_bits_) return 0;
    uint64_t bitpos = idx * low_bits_;
    uint64_t word = low_words_[bitpos >> 6] >> (bitpos & 63);
    unsigned spill = static_cast<unsigned>(bitpos & 63);
    if (spill + low_bits_ > 64) word |= low_words_[(bitpos >> 6) + 1] << (64 - spill);
    return word & ((uint64_t(1) << low_bits_) - 1);
}

uint64_t EliasFano::access(uint64_t k) const {
    if (k == 0 || k > count_) throw std::invalid_argument("EliasFano::access: index out of range");
    uint64_t pos = high_.select1(k);
    uint64_t high_part = pos - (k - 1);
    return (high_part << low_bits_) | low_at(k - 1);
}

void EliasFano::serialize(detail::ByteWriter& w) const {
    w.put_u64(count_);
    w.put_u64(universe_);
    w.put_u64(low_bits_);
    for (uint64_t word : low_words_) w.put_u64(word);
    high_.serialize(w);
}

EliasFano EliasFano::deserialize(detail::ByteReader& r) {
    EliasFano ef;
    ef.count_ = r.get_u64();
    ef.universe_ = r.get_u64();
    uint64_t lb = r.get_u64();
    if (lb > 63) throw FormatError("EliasFano: bad low-bit width");
    ef.low_bits_ = static_cast<unsigned>(lb);
    ef.low_words_.resize((ef.count_ * ef.low_bits_ + 63) / 64);
    for (auto& word : ef.low_words_) word = r.get_u64();
    ef.high_ = RankBitVector::deserialize(r);
    return ef;
}

}  // namespace opme
