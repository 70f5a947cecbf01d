#include "opme/mphf.hpp"

#include <algorithm>
#include <bit>
#include <cassert>

#include "opme/fingerprint.hpp"

namespace opme {

namespace {

constexpr unsigned kMaxLevels = 48;
constexpr uint64_t kGammaNum = 2;  // level size = 2x remaining keys

uint64_t level_position(uint64_t fp, unsigned level, uint64_t size) {
    return splitmix64(fp ^ (0xa0761d6478bd642fULL + level)) % size;
}

}  // namespace

Mphf Mphf::build(const std::vector<Encoding>& keys, uint64_t seed) {
    Mphf h;
    h.key_count_ = keys.size();
    h.seed_ = seed;

    // Distinct keys must have distinct fingerprints; retry the seed until the
    // build set is collision-free.
    std::vector<uint64_t> fps(keys.size());
    for (unsigned attempt = 0;; ++attempt) {
        if (attempt > 64) throw BuildError("Mphf: could not find a collision-free seed");
        Fingerprinter f(h.seed_);
        for (size_t i = 0; i < keys.size(); ++i) fps[i] = f.of(keys[i]);
        std::vector<size_t> order(keys.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return fps[a] < fps[b]; });
        bool clash = false;
        for (size_t i = 1; i < order.size(); ++i) {
            if (fps[order[i - 1]] != fps[order[i]]) continue;
            // Identical fingerprints from identical keys mean a duplicate key set.
            if (keys[order[i - 1]] == keys[order[i]]) throw BuildError("Mphf: duplicate keys");
            clash = true;
        }
        if (!clash) break;
        h.seed_ = splitmix64(h.seed_ + attempt + 1);
    }

    std::vector<uint64_t> pending = fps;
    std::vector<bool> all_bits;
    for (unsigned level = 0; level < kMaxLevels && !pending.empty(); ++level) {
        uint64_t size = std::max<uint64_t>(pending.size() * kGammaNum, 2);
        std::vector<uint8_t> occupancy(size, 0);  // 0, 1, 2+ hits
        for (uint64_t fp : pending) {
            uint64_t p = level_position(fp, level, size);
            if (occupancy[p] < 2) ++occupancy[p];
        }
        std::vector<uint64_t> next;
        for (uint64_t fp : pending) {
            if (occupancy[level_position(fp, level, size)] != 1) next.push_back(fp);
        }
        for (uint64_t p = 0; p < size; ++p) all_bits.push_back(occupancy[p] == 1);
        h.level_sizes_.push_back(size);
        pending = std::move(next);
    }
    h.fallback_ = std::move(pending);
    std::sort(h.fallback_.begin(), h.fallback_.end());

    RankBitVector bv(all_bits.size());
    for (size_t i = 0; i < all_bits.size(); ++i)
        if (all_bits[i]) bv.set(i);
    bv.finalize();
    h.bits_ = std::move(bv);
    h.rebuild_offsets();
    return h;
}

void Mphf::rebuild_offsets() {
    level_offsets_.clear();
    uint64_t off = 0;
    for (uint64_t s : level_sizes_) {
        level_offsets_.push_back(off);
        off += s;
    }
}

uint64_t Mphf::key_fingerprint(std::span<const RankValue> key) const {
    return Fingerprinter(seed_).of(key);
}

uint64_t Mphf::eval(std::span<const RankValue> key) const {
    return eval_fp(key_fingerprint(key));
}

uint64_t Mphf::eval_fp(uint64_t key_fp) const {
    if (key_count_ == 0) return 1;
    for (size_t level = 0; level < level_sizes_.size(); ++level) {
        uint64_t p = level_offsets_[level] + level_position(key_fp, static_cast<unsigned>(level), level_sizes_[level]);
        if (bits_.get(p)) return bits_.rank1(p) + 1;
    }
    auto it = std::lower_bound(fallback_.begin(), fallback_.end(), key_fp);
    if (it != fallback_.end() && *it == key_fp)
        return bits_.ones() + static_cast<uint64_t>(it - fallback_.begin()) + 1;
    return 1;  // foreign key: any in-range value satisfies the contract
}

void Mphf::serialize(detail::ByteWriter& w) const {
    w.put_u64(key_count_);
    w.put_u64(seed_);
    w.put_u64(level_sizes_.size());
    for (uint64_t s : level_sizes_) w.put_u64(s);
    bits_.serialize(w);
    w.put_u64(fallback_.size());
    for (uint64_t fp : fallback_) w.put_u64(fp);
}

Mphf Mphf::deserialize(detail::ByteReader& r) {
    Mphf h;
    h.key_count_ = r.get_u64();
    h.seed_ = r.get_u64();
    uint64_t levels = r.get_u64();
    if (levels > kMaxLevels) throw FormatError("Mphf: level count out of range");
    h.level_sizes_.resize(levels);
    uint64_t total = 0;
    for (auto& s : h.level_sizes_) {
        s = r.get_u64();
        total += s;
    }
    h.bits_ = RankBitVector::deserialize(r);
    if (h.bits_.size() != total) throw FormatError("Mphf: bitmap size mismatch");
    uint64_t fb = r.get_u64();
    if (fb > h.key_count_) throw FormatError("Mphf: fallback larger than key set");
    h.fallback_.resize(fb);
    for (auto& fp : h.fallback_) fp = r.get_u64();
    h.rebuild_offsets();
    return h;
}

Mmphf Mmphf::build(const std::vector<Encoding>& sorted_keys, uint64_t seed) {
    for (size_t i = 1; i < sorted_keys.size(); ++i) {
        if (compare_encodings(sorted_keys[i - 1], sorted_keys[i]) >= 0)
            throw BuildError("Mmphf: keys not strictly sorted");
    }
    Mmphf m;
    m.mphf_ = Mphf::build(sorted_keys, seed);
    uint64_t n = sorted_keys.size();
    m.rank_width_ = n ? std::bit_width(n) : 1;
    detail::BitWriter bw;
    std::vector<uint64_t> slot_rank(n, 0);
    for (uint64_t k = 0; k < n; ++k) {
        uint64_t slot = m.mphf_.eval(sorted_keys[k]);
        assert(slot >= 1 && slot <= n);
        slot_rank[slot - 1] = k + 1;
    }
    for (uint64_t s = 0; s < n; ++s) bw.put(slot_rank[s], m.rank_width_);
    m.ranks_ = bw.take();
    return m;
}

uint64_t Mmphf::rank_at(uint64_t slot) const {
    uint64_t bitpos = slot * rank_width_;
    uint64_t v = 0;
    for (unsigned i = 0; i < rank_width_; ++i, ++bitpos)
        if ((ranks_[bitpos >> 3] >> (bitpos & 7)) & 1u) v |= uint64_t(1) << i;
    return v;
}

uint64_t Mmphf::eval(std::span<const RankValue> key) const {
    if (key_count() == 0) return 1;
    uint64_t slot = mphf_.eval(key);
    uint64_t rank = rank_at(slot - 1);
    return rank ? rank : 1;
}

void Mmphf::serialize(detail::ByteWriter& w) const {
    mphf_.serialize(w);
    w.put_u64(rank_width_);
    w.put_u64(ranks_.size());
    w.put_bytes(ranks_.data(), ranks_.size());
}

Mmphf Mmphf::deserialize(detail::ByteReader& r) {
    Mmphf m;
    m.mphf_ = Mphf::deserialize(r);
    uint64_t width = r.get_u64();
    if (width == 0 || width > 64) throw FormatError("Mmphf: bad rank width");
    m.rank_width_ = static_cast<unsigned>(width);
    uint64_t nbytes = r.get_u64();
    if (nbytes != detail::packed_bytes(m.mphf_.key_count(), m.rank_width_))
        throw FormatError("Mmphf: rank payload size mismatch");
    const uint8_t* p = r.get_bytes(nbytes);
    m.ranks_.assign(p, p + nbytes);
    return m;
}

}  // namespace opme
