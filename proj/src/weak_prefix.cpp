#include "opme/weak_prefix.hpp"

#include <algorithm>
#include <bit>
#include <cassert>

#include "opme/mphf.hpp"  // BuildError

namespace opme {

namespace {

size_t lcp_len(const Encoding& a, const Encoding& b) {
    size_t k = std::min(a.size(), b.size());
    size_t i = 0;
    while (i < k && a[i].doubled == b[i].doubled) ++i;
    return i;
}

}  // namespace

WeakPrefixSearcher WeakPrefixSearcher::build(const std::vector<Encoding>& sorted_keys, uint64_t seed) {
    WeakPrefixSearcher w;
    w.dict_size_ = sorted_keys.size();
    w.seed_ = seed;
    if (sorted_keys.empty()) return w;
    if (sorted_keys.size() > 0xffffffffULL) throw BuildError("WeakPrefixSearcher: dictionary too large");

    // Distinct keys with their runs of duplicates.
    std::vector<uint32_t> run_start;  // 1-based dictionary index of each distinct key's run
    std::vector<const Encoding*> u;
    for (size_t i = 0; i < sorted_keys.size(); ++i) {
        if (i && compare_encodings(sorted_keys[i - 1], sorted_keys[i]) > 0)
            throw BuildError("WeakPrefixSearcher: dictionary not sorted");
        if (i == 0 || sorted_keys[i - 1] != sorted_keys[i]) {
            run_start.push_back(static_cast<uint32_t>(i + 1));
            u.push_back(&sorted_keys[i]);
        }
    }
    size_t m = u.size();
    auto run_end = [&](size_t ui) {
        return ui + 1 < m ? run_start[ui + 1] - 1 : static_cast<uint32_t>(sorted_keys.size());
    };

    std::vector<uint32_t> adj_lcp(m ? m - 1 : 0);
    for (size_t i = 0; i + 1 < m; ++i) adj_lcp[i] = static_cast<uint32_t>(lcp_len(*u[i], *u[i + 1]));

    // Retry derived seeds until all distinct key prefixes fingerprint injectively.
    for (unsigned attempt = 0;; ++attempt) {
        if (attempt > 64) throw BuildError("WeakPrefixSearcher: could not find a collision-free seed");
        Fingerprinter f(w.seed_);
        std::unordered_map<uint64_t, int> seen;
        size_t total_prefixes = 0;
        for (size_t i = 0; i < m; ++i) total_prefixes += u[i]->size() - (i ? std::min<size_t>(adj_lcp[i - 1], u[i]->size()) : 0);
        seen.reserve(total_prefixes * 2);
        bool clash = false;
        for (size_t i = 0; i < m && !clash; ++i) {
            uint64_t fp = 0;
            size_t fresh_from = i ? adj_lcp[i - 1] : 0;  // shorter prefixes already enumerated
            for (size_t t = 0; t < u[i]->size(); ++t) {
                fp = f.extend(fp, (*u[i])[t].doubled);
                if (t < fresh_from) continue;
                if (!seen.emplace(fp, 0).second) {
                    clash = true;
                    break;
                }
            }
        }
        if (!clash) break;
        w.seed_ = splitmix64(w.seed_ + attempt + 1);
    }

    // Compacted trie walk, one entry per node at its skip start + 1.
    Fingerprinter f(w.seed_);
    struct Frame {
        size_t ulo, uhi;
        uint64_t skip_start;
    };
    std::vector<Frame> stack{{0, m - 1, 0}};
    while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        const Encoding& head = *u[fr.ulo];
        uint64_t extent = fr.ulo == fr.uhi ? head.size() : lcp_len(head, *u[fr.uhi]);
        assert(extent > fr.skip_start);

        uint64_t fp = 0;
        for (uint64_t t = 0; t < fr.skip_start + 1; ++t) fp = f.extend(fp, head[t].doubled);
        Entry e;
        e.fp = fp;
        e.lo = run_start[fr.ulo];
        e.hi = run_end(fr.uhi);
        e.extent_len = static_cast<uint32_t>(extent);
        w.entries_.push_back(e);
        if (fr.skip_start == 0) w.root_extent_ = extent;

        // Children: group the remaining keys by the symbol after the extent.
        size_t child = fr.ulo + (head.size() == extent ? 1 : 0);
        while (child <= fr.uhi) {
            uint32_t sym = (*u[child])[extent].doubled;
            size_t end = child;
            while (end + 1 <= fr.uhi && (*u[end + 1])[extent].doubled == sym) ++end;
            stack.push_back({child, end, extent});
            child = end + 1;
        }
    }

    std::sort(w.entries_.begin(), w.entries_.end(), [](const Entry& a, const Entry& b) {
        return std::tie(a.extent_len, a.lo, a.fp) < std::tie(b.extent_len, b.lo, b.fp);
    });
    w.rebuild_map();
    return w;
}

void WeakPrefixSearcher::rebuild_map() {
    by_fp_.clear();
    by_fp_.reserve(entries_.size() * 2);
    for (size_t i = 0; i < entries_.size(); ++i) by_fp_[entries_[i].fp] = static_cast<uint32_t>(i);
}

PrefixRange WeakPrefixSearcher::query(std::span<const RankValue> q) const {
    if (q.empty()) throw std::invalid_argument("WeakPrefixSearcher::query: empty pattern");
    if (dict_size_ == 0) return {0, 0};
    Fingerprinter f(seed_);
    uint64_t m = q.size();
    std::vector<uint64_t> fps(m + 1, 0);
    for (uint64_t i = 0; i < m; ++i) fps[i + 1] = f.extend(fps[i], q[i].doubled);

    PrefixRange cur{1, dict_size_};
    uint64_t a = 0, b = m;
    while (a < b) {
        uint64_t probe = detail::two_fattest(a, b);
        auto it = by_fp_.find(fps[probe]);
        if (it != by_fp_.end() && entries_[it->second].extent_len >= probe) {
            // Entered the node owning this probe length; the search resumes
            // below its extent with the full upper bound.
            const Entry& e = entries_[it->second];
            cur = {e.lo, e.hi};
            a = std::min<uint64_t>(e.extent_len, m);
            b = m;
        } else {
            b = probe - 1;
        }
    }
    return cur;
}

void WeakPrefixSearcher::serialize(detail::ByteWriter& w) const {
    w.put_u64(dict_size_);
    w.put_u64(seed_);
    w.put_u64(root_extent_);
    w.put_u64(entries_.size());
    for (const Entry& e : entries_) {
        w.put_u64(e.fp);
        w.put_u32(e.lo);
        w.put_u32(e.hi);
        w.put_u32(e.extent_len);
    }
}

WeakPrefixSearcher WeakPrefixSearcher::deserialize(detail::ByteReader& r) {
    WeakPrefixSearcher w;
    w.dict_size_ = r.get_u64();
    w.seed_ = r.get_u64();
    w.root_extent_ = r.get_u64();
    uint64_t count = r.get_u64();
    w.entries_.resize(count);
    for (auto& e : w.entries_) {
        e.fp = r.get_u64();
        e.lo = r.get_u32();
        e.hi = r.get_u32();
        e.extent_len = r.get_u32();
        if (e.lo < 1 || e.lo > e.hi || e.hi > w.dict_size_)
            throw FormatError("WeakPrefixSearcher: entry range out of bounds");
    }
    w.rebuild_map();
    return w;
}

}  // namespace opme
