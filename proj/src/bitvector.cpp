#include "opme/bitvector.hpp"

#include <bit>
#include <stdexcept>

namespace opme {

RankBitVector::RankBitVector(const std::vector<bool>& bits) : RankBitVector(bits.size()) {
    for (size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) set(i);
    finalize();
}

void RankBitVector::finalize() {
    size_t nwords = words_.size();
    super_.assign((nwords + 7) / 8 + 1, 0);
    word_off_.assign(nwords, 0);
    uint64_t total = 0;
    for (size_t w = 0; w < nwords; ++w) {
        if (w % 8 == 0) super_[w / 8] = total;
        word_off_[w] = static_cast<uint16_t>(total - super_[w / 8]);
        total += std::popcount(words_[w]);
    }
    super_[(nwords + 7) / 8] = total;
    total_ones_ = total;
}

uint64_t RankBitVector::rank1(size_t i) const {
    if (i > nbits_) throw std::invalid_argument("rank1: index beyond bit count");
    if (i == 0) return 0;
    size_t w = (i - 1) >> 6;
    uint64_t r = super_[w / 8] + word_off_[w];
    uint64_t mask = (i & 63) ? ((uint64_t(1) << (i & 63)) - 1) : ~uint64_t(0);
    return r + std::popcount(words_[w] & mask);
}

size_t RankBitVector::select1(uint64_t k) const {
    if (k == 0 || k > total_ones_) throw std::invalid_argument("select1: rank out of range");
    // superblock step
    size_t lo = 0, hi = super_.size() - 1;
    while (lo + 1 < hi) {
        size_t mid = (lo + hi) / 2;
        if (super_[mid] < k) lo = mid; else hi = mid;
    }
    uint64_t rem = k - super_[lo];
    size_t w = lo * 8;
    while (true) {
        uint64_t pc = std::popcount(words_[w]);
        if (rem <= pc) break;
        rem -= pc;
        ++w;
    }
    uint64_t word = words_[w];
    for (unsigned b = 0;; ++b) {
        if ((word >> b) & 1u) {
            if (--rem == 0) return w * 64 + b;
        }
    }
}

void RankBitVector::serialize(detail::ByteWriter& w) const {
    w.put_u64(nbits_);
    for (uint64_t word : words_) w.put_u64(word);
}

RankBitVector RankBitVector::deserialize(detail::ByteReader& r) {
    uint64_t nbits = r.get_u64();
    RankBitVector bv;
    bv.nbits_ = nbits;
    bv.words_.resize((nbits + 63) / 64);
    for (auto& word : bv.words_) word = r.get_u64();
    if (nbits % 64) {
        uint64_t tail_mask = (uint64_t(1) << (nbits % 64)) - 1;
        if (!bv.words_.empty() && (bv.words_.back() & ~tail_mask))
            throw FormatError("bit vector has stray bits past its length");
    }
    bv.finalize();
    return bv;
}

}  // namespace opme
