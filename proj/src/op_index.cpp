#include "opme/op_index.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>

namespace opme {

namespace {

constexpr char kMagic[4] = {'O', 'P', 'M', 'E'};
constexpr uint8_t kVersion = 1;

double log2d(uint64_t n) { return std::log2(static_cast<double>(n)); }

uint64_t ceil_guarded(double x) { return static_cast<uint64_t>(std::ceil(x - 1e-9)); }
uint64_t floor_guarded(double x) { return static_cast<uint64_t>(std::floor(x + 1e-9)); }

unsigned width_l(const IndexParams& p) { return std::max<unsigned>(1, std::bit_width(p.ell - 1)); }
unsigned width_b(const IndexParams& p) { return std::max<unsigned>(1, std::bit_width(2 * p.ell - 1)); }
// D spans the unsampled run before the anchor gap, the extension-prefixed
// block, and any skipped short suffixes, each bounded by sample,
// occ_threshold and ell respectively.
uint64_t max_anchor_offset(const IndexParams& p) { return p.sample + p.occ_threshold + p.ell; }

unsigned width_d(const IndexParams& p) {
    return std::max<unsigned>(1, std::bit_width(max_anchor_offset(p)));
}

}  // namespace

IndexParams IndexParams::compute(uint64_t n, uint64_t c_num, uint64_t c_den, const Overrides& ov) {
    if (n < 2) throw std::invalid_argument("IndexParams: text must have at least 2 characters");
    if (c_num == 0 || c_den == 0) throw std::invalid_argument("IndexParams: c must be positive");
    IndexParams p;
    p.n = n;
    p.c_num = c_num;
    p.c_den = c_den;
    double lg = log2d(n);
    double c = static_cast<double>(c_num) / static_cast<double>(c_den);
    double lgc = std::pow(lg, c);
    p.m_max = std::max<uint64_t>(1, ceil_guarded(lgc));
    p.ell = p.m_max + std::max<uint64_t>(1, ceil_guarded(lg));
    if (n < 4) {
        p.sample = 1;
    } else {
        p.sample = std::max<uint64_t>(1, floor_guarded(lg / std::log2(lg)));
    }
    p.occ_threshold = p.sample;
    p.m_min = p.sample;
    if (ov.ell) p.ell = *ov.ell;
    if (ov.sample) p.sample = *ov.sample;
    p.occ_threshold = ov.occ_threshold ? *ov.occ_threshold : p.sample;
    p.m_min = ov.m_min ? *ov.m_min : p.sample;
    if (ov.fp_seed) p.fp_seed = *ov.fp_seed;
    if (p.ell < p.m_max)
        throw std::invalid_argument("IndexParams: ell override below the pattern length bound");
    if (p.sample < 1 || p.occ_threshold < 1)
        throw std::invalid_argument("IndexParams: sample and occ_threshold must be positive");
    if (p.m_min > p.sample)
        throw std::invalid_argument("IndexParams: m_min must not exceed sample");
    // Backward stepping is sound only when every match in an unsampled range
    // is steppable (threshold at least sample-1) and chains cannot outgrow
    // the flag cutoff (at most ell - m_max steps' worth of growth).
    if (p.occ_threshold + 1 < p.sample)
        throw std::invalid_argument("IndexParams: occ_threshold must be at least sample - 1");
    if (p.sample > p.ell - p.m_max)
        throw std::invalid_argument("IndexParams: sample too large for the window span");
    return p;
}

int suffix_compare(std::span<const uint64_t> s, uint64_t j1, uint64_t j2) {
    uint64_t n = s.size();
    if (j1 < 1 || j1 > n || j2 < 1 || j2 > n)
        throw std::invalid_argument("suffix_compare: position out of range");
    if (j1 == j2) return 0;
    OrderStatSet a, b;
    uint64_t la = n - j1 + 1, lb = n - j2 + 1;
    uint64_t k = std::min(la, lb);
    for (uint64_t t = 0; t < k; ++t) {
        RankValue ra = a.rank_and_insert(s[j1 - 1 + t]);
        RankValue rb = b.rank_and_insert(s[j2 - 1 + t]);
        if (ra != rb) return ra.doubled < rb.doubled ? -1 : 1;
    }
    return la < lb ? -1 : 1;  // proper prefix is smaller; lengths differ since j1 != j2
}

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

struct IndexBuilder {
    std::span<const uint64_t> s;
    const IndexParams& prm;
    uint64_t n;
    uint64_t cap;  // truncation length of the scratch encodings: min(ell, n)

    // Scratch: truncated suffix encodings, flat with stride `cap`.
    std::vector<uint16_t> enc;
    std::vector<uint64_t> r;     // R[p], 1-based p as index p-1
    std::vector<uint64_t> rinv;  // text position -> R-position
    std::vector<uint32_t> lcp;   // lcp[p-1] between R-positions p and p+1, capped

    IndexBuilder(std::span<const uint64_t> text, const IndexParams& params)
        : s(text), prm(params), n(text.size()), cap(std::min(params.ell, text.size())) {}

    uint64_t suffix_len(uint64_t j) const { return n - j + 1; }
    uint64_t trunc_len(uint64_t j) const { return std::min<uint64_t>(cap, suffix_len(j)); }
    const uint16_t* row(uint64_t j) const { return enc.data() + (j - 1) * cap; }

    void build_encodings() {
        if (cap > 32000) throw BuildError("build: window span too large for scratch encodings");
        enc.assign(n * cap, 0);
        OrderStatSet set;
        for (uint64_t j = 1; j <= n; ++j) {
            set.clear();
            uint16_t* out = enc.data() + (j - 1) * cap;
            uint64_t t = trunc_len(j);
            for (uint64_t k = 0; k < t; ++k)
                out[k] = static_cast<uint16_t>(set.rank_and_insert(s[j - 1 + k]).doubled);
        }
    }

    // Full-order comparison: truncated rows first, on-demand beyond the cap.
    bool suffix_less(uint64_t a, uint64_t b) const {
        uint64_t ta = trunc_len(a), tb = trunc_len(b);
        const uint16_t* ra = row(a);
        const uint16_t* rb = row(b);
        uint64_t k = std::min(ta, tb);
        for (uint64_t t = 0; t < k; ++t) {
            if (ra[t] != rb[t]) return ra[t] < rb[t];
        }
        if (ta != tb) return ta < tb;                      // one ended inside the cap
        if (suffix_len(a) <= cap || suffix_len(b) <= cap)  // shorter one fully compared
            return suffix_len(a) < suffix_len(b);
        // TODO: prefix doubling would avoid the near-quadratic fallback on
        // long periodic inputs; only ties past the cap reach it.
        return suffix_compare(s, a, b) < 0;
    }

    void build_suffix_order() {
        r.resize(n);
        std::iota(r.begin(), r.end(), uint64_t{1});
        std::sort(r.begin(), r.end(), [&](uint64_t a, uint64_t b) { return suffix_less(a, b); });
        rinv.assign(n + 1, 0);
        for (uint64_t p = 1; p <= n; ++p) rinv[r[p - 1]] = p;
        lcp.assign(n > 0 ? n - 1 : 0, 0);
        for (uint64_t p = 1; p < n; ++p) {
            uint64_t a = r[p - 1], b = r[p];
            uint64_t k = std::min(trunc_len(a), trunc_len(b));
            const uint16_t* ra = row(a);
            const uint16_t* rb = row(b);
            uint32_t m = 0;
            while (m < k && ra[m] == rb[m]) ++m;
            lcp[p - 1] = m;
        }
    }

    bool sampled_rule(uint64_t p) const {
        uint64_t j = r[p - 1];
        return p % prm.sample == 0 || p == 1 || j == 1 || j == n || j % prm.sample == 0;
    }

    // Occurrences of the length-t window starting at text position x, capped
    // at occ_threshold + 1. Equals the size of the maximal R-interval around
    // rinv[x] whose members share t encoded symbols with it.
    uint64_t occ_capped(uint64_t x, uint64_t t) const {
        uint64_t p = rinv[x];
        uint64_t cnt = 1;
        uint32_t mn = UINT32_MAX;
        for (uint64_t q = p; q >= 2; --q) {
            mn = std::min(mn, lcp[q - 2]);
            if (mn < t) break;
            if (++cnt > prm.occ_threshold) return cnt;
        }
        mn = UINT32_MAX;
        for (uint64_t q = p; q < n; ++q) {
            mn = std::min(mn, lcp[q - 1]);
            if (mn < t) break;
            if (++cnt > prm.occ_threshold) return cnt;
        }
        return cnt;
    }

    Encoding row_encoding(uint64_t j, uint64_t len) const {
        Encoding e;
        e.reserve(len);
        const uint16_t* p = row(j);
        for (uint64_t k = 0; k < len; ++k) e.push_back(RankValue{p[k]});
        return e;
    }

    // trunc(E(S[x..n]), |q|) vs q, proper prefix smaller.
    int compare_trunc(uint64_t x, std::span<const RankValue> q) const {
        uint64_t avail = std::min<uint64_t>(trunc_len(x), q.size());
        const uint16_t* rx = row(x);
        for (uint64_t k = 0; k < avail; ++k) {
            if (rx[k] != q[k].doubled) return rx[k] < q[k].doubled ? -1 : 1;
        }
        if (avail == q.size()) return 0;  // q fully matched (suffix may continue)
        return -1;                        // suffix ran out: proper prefix of q
    }

    // Anchor comparison: a suffix shorter than the extension takes part only
    // if it diverges before its own end; a proper prefix has no window of
    // the extension's length and is skipped.
    enum class AnchorCmp { Smaller, NotSmaller, Skipped };
    AnchorCmp anchor_compare(uint64_t x, std::span<const RankValue> ext) const {
        uint64_t len = suffix_len(x);
        uint64_t t = std::min<uint64_t>(len, ext.size());
        const uint16_t* rx = row(x);
        for (uint64_t k = 0; k < t; ++k) {
            if (rx[k] != ext[k].doubled)
                return rx[k] < ext[k].doubled ? AnchorCmp::Smaller : AnchorCmp::NotSmaller;
        }
        return len < ext.size() ? AnchorCmp::Skipped : AnchorCmp::NotSmaller;
    }
};

OpIndex OpIndex::build(std::span<const uint64_t> s, const IndexParams& params,
                       const BuildOptions& opts) {
    if (s.size() < 2) throw std::invalid_argument("OpIndex::build: need at least 2 characters");
    if (params.n != s.size()) throw std::invalid_argument("OpIndex::build: params.n mismatch");

    OpIndex ix;
    ix.params_ = params;
    ix.ws_ = WindowStore::build(s, params.ell);

    IndexBuilder bld(s, params);
    bld.build_encodings();
    bld.build_suffix_order();
    const uint64_t n = bld.n;

    // Sampled entries.
    ix.is_sampled_ = RankBitVector(n);
    std::vector<uint64_t> sampled_rpos;
    for (uint64_t p = 1; p <= n; ++p) {
        if (bld.sampled_rule(p)) {
            ix.is_sampled_.set(p - 1);
            sampled_rpos.push_back(p);
        }
    }
    ix.is_sampled_.finalize();
    std::vector<uint64_t> values_sorted;
    values_sorted.reserve(sampled_rpos.size());
    for (uint64_t p : sampled_rpos) values_sorted.push_back(bld.r[p - 1]);
    std::sort(values_sorted.begin(), values_sorted.end());
    ix.sampled_values_ = EliasFano::build(values_sorted);
    ix.slot_to_sorted_.resize(sampled_rpos.size());
    for (size_t i = 0; i < sampled_rpos.size(); ++i) {
        uint64_t v = bld.r[sampled_rpos[i] - 1];
        ix.slot_to_sorted_[i] = static_cast<uint32_t>(
            std::lower_bound(values_sorted.begin(), values_sorted.end(), v) - values_sorted.begin());
    }

    // Anchor of an extension encoding among the sampled entries: the greatest
    // slot whose truncated encoding is strictly smaller, suffixes that are
    // proper prefixes of the extension skipped. 0 when none qualifies. The
    // prefix-as-smaller order is monotone over slots, so binary search finds
    // the boundary and a short walk drops the skipped entries.
    auto anchor_slot = [&](std::span<const RankValue> ext) -> uint64_t {
        uint64_t lo = 0, hi = sampled_rpos.size();
        while (lo < hi) {
            uint64_t mid = (lo + hi + 1) / 2;
            if (bld.compare_trunc(bld.r[sampled_rpos[mid - 1] - 1], ext) < 0) lo = mid;
            else hi = mid - 1;
        }
        while (lo >= 1 && bld.anchor_compare(bld.r[sampled_rpos[lo - 1] - 1], ext) ==
                              IndexBuilder::AnchorCmp::Skipped)
            --lo;
        return lo;
    };

    // L/B/D tables and the extension encoding set.
    uint64_t num_unsampled = n - sampled_rpos.size();
    ix.l_.assign(num_unsampled, 0);
    ix.b_.assign(num_unsampled, 0);
    ix.d_.assign(num_unsampled, 0);
    std::vector<Encoding> extensions;
    uint64_t max_d = max_anchor_offset(params);
    uint64_t idx = 0;
    for (uint64_t p = 1; p <= n; ++p) {
        if (ix.is_sampled_.get(p - 1)) continue;
        uint64_t j = bld.r[p - 1];
        assert(j >= 2);  // j == 1 is always value-sampled
        uint64_t l_found = 0;
        uint64_t t_max = std::min<uint64_t>(params.ell, bld.suffix_len(j - 1));
        for (uint64_t t = 2; t <= t_max; ++t) {  // t = L + 1
            if (bld.occ_capped(j - 1, t) <= params.occ_threshold) {
                l_found = t - 1;
                break;
            }
        }
        if (l_found == 0) {  // flag
            ++idx;
            continue;
        }
        OrderStatSet win(l_found);
        for (uint64_t k = 0; k < l_found; ++k) win.insert(s[j - 1 + k]);
        RankValue bval = win.rank(s[j - 2]);
        assert(bval.doubled <= 2 * l_found + 1);

        Encoding ext = bld.row_encoding(j - 1, l_found + 1);
        uint64_t a_slot = anchor_slot(ext);
        uint64_t a_rpos = a_slot ? sampled_rpos[a_slot - 1] : 0;
        uint64_t d = bld.rinv[j - 1] - a_rpos;
        if (d < 1 || d > max_d) throw BuildError("build: anchor offset out of bounds");

        ix.l_[idx] = static_cast<uint32_t>(l_found);
        ix.b_[idx] = bval.doubled;
        ix.d_[idx] = static_cast<uint32_t>(d);
        extensions.push_back(std::move(ext));
        ++idx;
    }

    // Backstep anchor: mmphf over the distinct extensions plus the unary
    // coding of their (monotone) anchor slots.
    std::sort(extensions.begin(), extensions.end(), encoding_less);
    extensions.erase(std::unique(extensions.begin(), extensions.end()), extensions.end());
    ix.anchor_h_ = Mmphf::build(extensions, splitmix64(params.fp_seed ^ 0x7c0fULL));
    {
        uint64_t prev = 0;
        std::vector<bool> bu;
        for (const Encoding& e : extensions) {
            uint64_t a = anchor_slot(e);
            if (a < prev) throw BuildError("build: anchor slots not monotone");
            for (uint64_t k = prev; k < a; ++k) bu.push_back(false);
            bu.push_back(true);
            prev = a;
        }
        ix.anchor_ranges_ = RankBitVector(bu);
    }

    // Weak prefix searcher over the truncated suffix encodings in R order.
    {
        std::vector<Encoding> dict;
        dict.reserve(n);
        for (uint64_t p = 1; p <= n; ++p) {
            uint64_t j = bld.r[p - 1];
            dict.push_back(bld.row_encoding(j, bld.trunc_len(j)));
        }
        ix.wps_ = WeakPrefixSearcher::build(dict, params.fp_seed);
    }

    // Short-pattern table: every encoding of length < m_min occurring in S.
    {
        std::vector<OpIndex::ShortEntry> entries;
        for (uint64_t len = 1; len < params.m_min; ++len) {
            if (len > n) break;
            std::vector<std::pair<std::vector<uint16_t>, uint64_t>> occ;  // enc -> first pos
            for (uint64_t j = 1; j + len - 1 <= n; ++j) {
                const uint16_t* rp = bld.row(j);
                occ.emplace_back(std::vector<uint16_t>(rp, rp + len), j);
            }
            std::sort(occ.begin(), occ.end());
            for (size_t i = 0; i < occ.size();) {
                size_t k = i;
                while (k < occ.size() && occ[k].first == occ[i].first) ++k;
                OpIndex::ShortEntry e;
                e.enc = occ[i].first;
                e.count = k - i;
                e.position = occ[i].second;
                entries.push_back(std::move(e));
                i = k;
            }
        }
        std::sort(entries.begin(), entries.end(),
                  [](const OpIndex::ShortEntry& a, const OpIndex::ShortEntry& b) {
                      return a.enc < b.enc;
                  });
        ix.short_table_ = std::move(entries);
    }

    if (opts.verify) {
        // Backstep chain soundness against the scratch R, structure contracts.
        for (uint64_t p = 1, k = 0; p <= n; ++p) {
            if (ix.is_sampled_.get(p - 1)) continue;
            uint64_t j = bld.r[p - 1];
            uint64_t l = ix.l_[k];
            if (l != 0) {
                Encoding ext = bld.row_encoding(j - 1, l + 1);
                uint64_t via_hash = ix.anchor_slot_hashed(ext);
                uint64_t via_search = ix.anchor_slot_searched(ext);
                if (via_hash != via_search) throw BuildError("verify: anchor routes disagree");
                uint64_t next = (via_hash ? sampled_rpos[via_hash - 1] : 0) + ix.d_[k];
                if (next < 1 || next > n || bld.r[next - 1] != j - 1)
                    throw BuildError("verify: backward step does not reach the previous suffix");
            }
            ++k;
        }
        // Mmphf bijectivity and monotonicity over the extension set.
        std::vector<bool> hit(extensions.size(), false);
        for (size_t k = 0; k < extensions.size(); ++k) {
            uint64_t v = ix.anchor_h_.eval(extensions[k]);
            if (v != k + 1) throw BuildError("verify: mmphf is not the sorted rank");
            hit[k] = true;
        }
        for (bool h : hit)
            if (!h) throw BuildError("verify: mmphf not surjective");
        // Weak prefix search returns the exact run for every dictionary key.
        for (uint64_t p = 1; p <= n; ++p) {
            uint64_t j = bld.r[p - 1];
            Encoding key = bld.row_encoding(j, bld.trunc_len(j));
            PrefixRange got = ix.wps_.query(key);
            if (got.lo > p || got.hi < p) throw BuildError("verify: wps misses its own key");
        }
    }
    return ix;
}

// ---------------------------------------------------------------------------
// queries
// ---------------------------------------------------------------------------

std::vector<uint64_t> OpIndex::sampled_positions() const {
    std::vector<uint64_t> out;
    out.reserve(num_sampled());
    for (uint64_t k = 1; k <= num_sampled(); ++k) out.push_back(slot_rpos(k));
    return out;
}

uint64_t OpIndex::slot_value(uint64_t slot) const {
    return sampled_values_.access(slot_to_sorted_[slot - 1] + 1);
}

std::optional<uint64_t> OpIndex::value_slot(uint64_t text_pos) const {
    uint64_t lo = 1, hi = sampled_values_.size();
    if (hi == 0) return std::nullopt;
    while (lo < hi) {  // sorted values, binary search by access
        uint64_t mid = (lo + hi) / 2;
        if (sampled_values_.access(mid) < text_pos) lo = mid + 1;
        else hi = mid;
    }
    if (sampled_values_.access(lo) != text_pos) return std::nullopt;
    uint64_t sorted_idx = lo - 1;
    for (uint64_t s = 0; s < slot_to_sorted_.size(); ++s)
        if (slot_to_sorted_[s] == sorted_idx) return s + 1;
    return std::nullopt;
}

OpIndex::BackstepRow OpIndex::backstep_row(uint64_t rpos) const {
    if (is_sampled(rpos)) throw std::invalid_argument("backstep_row: position is sampled");
    uint64_t idx = unsampled_index(rpos);
    BackstepRow row;
    row.flag = l_[idx] == 0;
    if (!row.flag) {
        row.l = l_[idx];
        row.b = RankValue{b_[idx]};
        row.d = d_[idx];
    }
    return row;
}

uint64_t OpIndex::anchor_slot_hashed(std::span<const RankValue> ext) const {
    uint64_t k = anchor_h_.eval(ext);
    return anchor_ranges_.select1(k) + 1 - k;  // unary-coded monotone anchor slots
}

uint64_t OpIndex::anchor_slot_searched(std::span<const RankValue> ext) const {
    uint64_t lo = 0, hi = num_sampled();
    while (lo < hi) {
        uint64_t mid = (lo + hi + 1) / 2;
        if (compare_slot_prefix(mid, ext) < 0) lo = mid;
        else hi = mid - 1;
    }
    // Suffixes that are proper prefixes of the extension have no window of
    // its length; skip them downwards.
    while (lo >= 1 && params_.n - slot_value(lo) + 1 < ext.size()) {
        uint64_t len = params_.n - slot_value(lo) + 1;
        if (compare_encodings(ws_.extract(slot_value(lo), std::min(len, ws_.window_span())),
                              ext.first(std::min<size_t>(len, ext.size()))) != 0)
            break;  // diverges before its end: a genuine strictly-smaller entry
        --lo;
    }
    return lo;
}

int OpIndex::compare_slot_prefix(uint64_t slot, std::span<const RankValue> q) const {
    uint64_t x = slot_value(slot);
    uint64_t avail = std::min<uint64_t>(q.size(), params_.n - x + 1);
    avail = std::min<uint64_t>(avail, ws_.window_span());
    Encoding e = ws_.extract(x, avail);
    int c = compare_encodings(e, q);
    if (c != 0) return c;
    return avail == q.size() ? 0 : -1;  // suffix shorter than q: proper prefix
}

std::optional<int> OpIndex::compare_text_suffixes(uint64_t a, uint64_t b) const {
    if (a == b) return 0;
    uint64_t la = params_.n - a + 1, lb = params_.n - b + 1;
    uint64_t k = std::min({la, lb, ws_.window_span()});
    Encoding ea = ws_.extract(a, k), eb = ws_.extract(b, k);
    int c = compare_encodings(ea, eb);
    if (c != 0) return c;
    if (std::min(la, lb) <= k) return la < lb ? -1 : 1;  // shorter one is a proper prefix
    return std::nullopt;  // identical through the window span
}

std::optional<uint64_t> OpIndex::backward_step(uint64_t rpos, std::span<const RankValue> ext) const {
    BackstepRow row = backstep_row(rpos);
    if (row.flag) return std::nullopt;
    if (ext.size() != row.l + 1)
        throw std::invalid_argument("backward_step: extension length must be L+1");
    uint64_t slot = anchor_slot_hashed(ext);
    uint64_t next = (slot ? slot_rpos(slot) : 0) + row.d;
    if (next < 1 || next > params_.n) return std::nullopt;
    return next;
}

void OpIndex::check_pattern(std::span<const uint64_t> p) const {
    if (p.empty()) throw std::invalid_argument("query: empty pattern");
    if (p.size() > params_.m_max)
        throw PatternTooLong("query: pattern longer than the indexed bound");
}

QueryResult OpIndex::short_lookup(std::span<const RankValue> ep) const {
    std::vector<uint16_t> key(ep.size());
    for (size_t i = 0; i < ep.size(); ++i) key[i] = static_cast<uint16_t>(ep[i].doubled);
    auto it = std::lower_bound(short_table_.begin(), short_table_.end(), key,
                               [](const ShortEntry& e, const std::vector<uint16_t>& k) {
                                   return e.enc < k;
                               });
    if (it == short_table_.end() || it->enc != key) return {0, std::nullopt};
    return {it->count, it->position};
}

OpIndex::ChainResult OpIndex::run_chain(uint64_t start_rpos, std::span<const uint64_t> pattern,
                                        std::span<const RankValue> ep, bool hashed_anchor,
                                        QueryTrace* trace) const {
    const uint64_t n = params_.n;
    const uint64_t m = pattern.size();

    // The candidate string grows one prepended character per step. Values
    // live in a spread-out domain (dense ranks scaled by a power of two) so
    // a strictly-between character stays realizable without remapping the
    // whole string; the midpoint halves the gap, and one extra bit per
    // possible step keeps every midpoint exact.
    unsigned spread = static_cast<unsigned>(std::min<uint64_t>(params_.sample + 3, 40));
    std::vector<uint64_t> rev = detail::dense_double(pattern);  // reversed below
    std::reverse(rev.begin(), rev.end());
    for (auto& v : rev) v <<= spread;

    std::vector<uint64_t> prefix, distinct;
    uint64_t i = start_rpos;
    if (trace) trace->assign(1, i);
    for (uint64_t b = 0; b <= params_.sample; ++b) {
        if (is_sampled(i)) {
            uint64_t j = slot_value(is_sampled_.rank1(i));
            uint64_t pos = j + b;
            if (pos + m - 1 > n) return {std::nullopt, false};
            if (!ws_.extract_matches(pos, ep)) return {std::nullopt, false};
            return {pos, false};
        }
        if (b == params_.sample) return {std::nullopt, false};
        uint64_t idx = unsampled_index(i);
        uint64_t l = l_[idx];
        // A flagged or out-of-reach L cannot rule the candidate out, it only
        // means the stepping procedure is unavailable here.
        if (l == 0 || l > rev.size()) return {std::nullopt, true};

        prefix.assign(rev.end() - l, rev.end());
        std::reverse(prefix.begin(), prefix.end());
        distinct = prefix;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

        RankValue bval{b_[idx]};
        uint64_t x;
        if (bval.is_tie()) {
            uint64_t j = bval.whole_part();
            if (j < 1 || j > distinct.size()) return {std::nullopt, false};  // not realizable here
            x = distinct[j - 1];
        } else {
            uint64_t g = bval.whole_part();
            if (g > distinct.size()) return {std::nullopt, false};
            if (g == 0) x = distinct.front() - 1;
            else if (g == distinct.size()) x = distinct.back() + 1;
            else {
                x = (distinct[g - 1] + distinct[g]) / 2;
                if (x == distinct[g - 1]) {
                    // Gaps exhausted (only after very many steps): respread.
                    std::vector<uint64_t> fwd(rev.rbegin(), rev.rend());
                    fwd = detail::dense_double(fwd);
                    for (auto& v : fwd) v <<= spread;
                    rev.assign(fwd.rbegin(), fwd.rend());
                    prefix.assign(fwd.begin(), fwd.begin() + l);
                    distinct = prefix;
                    std::sort(distinct.begin(), distinct.end());
                    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
                    x = (distinct[g - 1] + distinct[g]) / 2;
                }
            }
        }

        prefix.insert(prefix.begin(), x);
        Encoding ext = rank_encode(prefix);

        uint64_t slot = hashed_anchor ? anchor_slot_hashed(ext) : anchor_slot_searched(ext);
        if (slot > num_sampled()) return {std::nullopt, false};
        uint64_t next = (slot ? slot_rpos(slot) : 0) + d_[idx];
        if (next < 1 || next > n) return {std::nullopt, false};
        rev.push_back(x);
        i = next;
        if (trace) trace->push_back(i);
    }
    return {std::nullopt, false};
}

QueryResult OpIndex::query_fast(std::span<const uint64_t> p, QueryTrace* trace) const {
    check_pattern(p);
    const uint64_t n = params_.n;
    const uint64_t m = p.size();
    if (m > n) return {0, std::nullopt};
    Encoding ep = rank_encode(p);
    if (m < params_.m_min) return short_lookup(ep);

    PrefixRange range = wps_.query(ep);
    uint64_t l = range.lo, r = range.hi;
    if (l < 1 || r > n || l > r) return {0, std::nullopt};

    uint64_t before = is_sampled_.rank1(l - 1);
    if (before < num_sampled() && slot_rpos(before + 1) <= r) {
        // A sampled entry falls in the range: verify there directly.
        uint64_t j = slot_value(before + 1);
        if (j + m - 1 <= n && ws_.extract_matches(j, ep)) return {r - l + 1, j};
        return {0, std::nullopt};
    }
    ChainResult res = run_chain(l, p, ep, /*hashed_anchor=*/true, trace);
    if (res.match_pos) return {r - l + 1, res.match_pos};
    return {0, std::nullopt};
}

QueryResult OpIndex::query_slow(std::span<const uint64_t> p, QueryTrace* trace) const {
    check_pattern(p);
    const uint64_t n = params_.n;
    const uint64_t m = p.size();
    if (m > n) return {0, std::nullopt};
    Encoding ep = rank_encode(p);
    if (m < params_.m_min) return short_lookup(ep);

    const uint64_t s_cnt = num_sampled();
    // Bracket E(P) among the sampled entries by truncated comparison.
    uint64_t lo_slot = 0, hi = s_cnt;  // greatest slot with trunc < ep
    while (lo_slot < hi) {
        uint64_t mid = (lo_slot + hi + 1) / 2;
        if (compare_slot_prefix(mid, ep) < 0) lo_slot = mid;
        else hi = mid - 1;
    }
    uint64_t hi_slot = s_cnt + 1;  // least slot with trunc > ep
    {
        uint64_t lo = lo_slot;
        uint64_t hi2 = s_cnt;
        while (lo < hi2) {
            uint64_t mid = (lo + hi2 + 1) / 2;
            if (compare_slot_prefix(mid, ep) <= 0) lo = mid;
            else hi2 = mid - 1;
        }
        hi_slot = lo + 1;
    }
    uint64_t sa = lo_slot + 1, sb = hi_slot - 1;  // slots whose trunc == ep
    bool have_slots = sa <= sb;

    bool uncertain = false;  // a candidate the stepping procedure cannot decide
    QueryTrace best_trace;

    // Chain a gap candidate; a verified text position proves a match exists
    // there, an L rejection means stepping cannot rule a match out.
    auto chain_candidate = [&](uint64_t rpos) -> std::optional<uint64_t> {
        QueryTrace t;
        ChainResult res = run_chain(rpos, p, ep, /*hashed_anchor=*/false, trace ? &t : nullptr);
        if (res.l_rejected) uncertain = true;
        if (res.match_pos && trace && best_trace.empty()) best_trace = std::move(t);
        return res.match_pos;
    };

    QueryResult out{0, std::nullopt};
    if (have_slots) {
        // Everything between the first and last equal slot is a match by
        // contiguity; fringe matches are chained and kept only when their
        // suffix order places them on the correct side of the slot block.
        uint64_t interior = slot_rpos(sb) - slot_rpos(sa) + 1;
        std::set<uint64_t> left_set, right_set;
        uint64_t left_from = (lo_slot >= 1 ? slot_rpos(lo_slot) : 0) + 1;
        for (uint64_t q = left_from; q < slot_rpos(sa); ++q) {
            if (auto j = chain_candidate(q)) {
                auto c = compare_text_suffixes(*j, slot_value(sa));
                if (!c) uncertain = true;
                else if (*c < 0) left_set.insert(*j);
            }
        }
        uint64_t right_to = hi_slot <= s_cnt ? slot_rpos(hi_slot) - 1 : n;
        for (uint64_t q = slot_rpos(sb) + 1; q <= right_to; ++q) {
            if (auto j = chain_candidate(q)) {
                auto c = compare_text_suffixes(*j, slot_value(sb));
                if (!c) uncertain = true;
                else if (*c > 0) right_set.insert(*j);
            }
        }
        out = {interior + left_set.size() + right_set.size(), slot_value(sa)};
    } else {
        // No sampled entry equals the pattern: every match hides in one gap,
        // and each one's chain terminates with its own verified position.
        std::set<uint64_t> positions;
        uint64_t from = (lo_slot >= 1 ? slot_rpos(lo_slot) : 0) + 1;
        uint64_t to = hi_slot <= s_cnt ? slot_rpos(hi_slot) - 1 : n;
        for (uint64_t q = from; q <= to; ++q) {
            if (auto j = chain_candidate(q)) positions.insert(*j);
        }
        if (!positions.empty()) out = {positions.size(), *positions.begin()};
    }

    if (uncertain) {
        // Certify the boundary by the scan bound instead.
        std::vector<uint64_t> all = scan_all(p);
        if (trace) *trace = best_trace;
        if (all.empty()) return {0, std::nullopt};
        return {all.size(), all.front()};
    }
    if (trace) *trace = best_trace;
    return out;
}

std::vector<uint64_t> OpIndex::scan_all(std::span<const uint64_t> p) const {
    if (p.empty()) throw std::invalid_argument("scan_all: empty pattern");
    if (p.size() > params_.ell) throw PatternTooLong("scan_all: pattern longer than the window span");
    std::vector<uint64_t> out;
    if (p.size() > params_.n) return out;
    Encoding ep = rank_encode(p);
    for (uint64_t i = 1; i + p.size() - 1 <= params_.n; ++i) {
        if (ws_.extract_matches(i, ep)) out.push_back(i);
    }
    return out;
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

namespace {

std::vector<uint8_t> pack_u32(const std::vector<uint32_t>& values, unsigned width) {
    detail::BitWriter bw;
    for (uint32_t v : values) bw.put(v, width);
    return bw.take();
}

std::vector<uint32_t> unpack_u32(detail::ByteReader& r, uint64_t count, unsigned width) {
    size_t nbytes = detail::packed_bytes(count, width);
    detail::BitReader br(r.get_bytes(nbytes), nbytes);
    std::vector<uint32_t> out(count);
    for (auto& v : out) v = static_cast<uint32_t>(br.get(width));
    return out;
}

}  // namespace

std::vector<uint8_t> OpIndex::serialize() const {
    detail::ByteWriter sections[6];
    ws_.serialize(sections[0]);
    {
        detail::ByteWriter& w = sections[1];
        is_sampled_.serialize(w);
        sampled_values_.serialize(w);
        unsigned width = std::max<unsigned>(1, std::bit_width(num_sampled()));
        w.put_u64(width);
        w.put_blob(pack_u32(slot_to_sorted_, width));
    }
    {
        detail::ByteWriter& w = sections[2];
        w.put_u64(l_.size());
        w.put_blob(pack_u32(l_, width_l(params_)));
        w.put_blob(pack_u32(b_, width_b(params_)));
        w.put_blob(pack_u32(d_, width_d(params_)));
    }
    {
        detail::ByteWriter& w = sections[3];
        anchor_h_.serialize(w);
        anchor_ranges_.serialize(w);
    }
    wps_.serialize(sections[4]);
    {
        detail::ByteWriter& w = sections[5];
        w.put_u64(short_table_.size());
        for (const ShortEntry& e : short_table_) {
            w.put_u32(static_cast<uint32_t>(e.enc.size()));
            w.put_u64(e.count);
            w.put_u64(e.position);
            for (uint16_t sym : e.enc) w.put_u8(static_cast<uint8_t>(sym));
        }
    }

    detail::ByteWriter out;
    out.put_bytes(reinterpret_cast<const uint8_t*>(kMagic), 4);
    out.put_u8(kVersion);
    out.put_u64(params_.n);
    out.put_u64(params_.c_num);
    out.put_u64(params_.c_den);
    out.put_u64(params_.ell);
    out.put_u64(params_.sample);
    out.put_u64(params_.occ_threshold);
    out.put_u64(params_.m_min);
    out.put_u64(params_.fp_seed);
    out.put_u64(6);
    for (auto& s : sections) {
        out.put_u64(s.size());
        out.put_blob(s.bytes());
    }
    return out.take();
}

OpIndex::SectionSizes OpIndex::section_sizes() const {
    std::vector<uint8_t> all = serialize();
    detail::ByteReader r(all.data(), all.size());
    r.get_bytes(4 + 1 + 9 * 8);
    SectionSizes sz;
    sz.header = 4 + 1 + 9 * 8;
    uint64_t* fields[6] = {&sz.window_store, &sz.sampled, &sz.backstep,
                           &sz.anchor,       &sz.weak_prefix, &sz.short_table};
    for (auto* f : fields) {
        uint64_t len = r.get_u64();
        r.get_bytes(len);
        *f = len + 8;
    }
    return sz;
}

OpIndex OpIndex::deserialize(std::span<const uint8_t> bytes) {
    detail::ByteReader r(bytes.data(), bytes.size());
    const uint8_t* magic = r.get_bytes(4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not an index file");
    if (r.get_u8() != kVersion) throw FormatError("unsupported index version");
    OpIndex ix;
    IndexParams& p = ix.params_;
    p.n = r.get_u64();
    p.c_num = r.get_u64();
    p.c_den = r.get_u64();
    p.ell = r.get_u64();
    p.sample = r.get_u64();
    p.occ_threshold = r.get_u64();
    p.m_min = r.get_u64();
    p.fp_seed = r.get_u64();
    if (p.n < 2 || p.ell < 1 || p.sample < 1 || p.occ_threshold < 1 ||
        p.occ_threshold + 1 < p.sample || p.m_min > p.sample)
        throw FormatError("index header out of range");
    {
        // m_max is derived, not stored.
        double lg = std::log2(static_cast<double>(p.n));
        double c = static_cast<double>(p.c_num) / static_cast<double>(std::max<uint64_t>(1, p.c_den));
        p.m_max = std::max<uint64_t>(1, ceil_guarded(std::pow(lg, c)));
    }
    if (r.get_u64() != 6) throw FormatError("unexpected section count");

    auto open_section = [&]() {
        uint64_t len = r.get_u64();
        return detail::ByteReader(r.get_bytes(len), len);
    };
    {
        auto s = open_section();
        ix.ws_ = WindowStore::deserialize(s);
    }
    {
        auto s = open_section();
        ix.is_sampled_ = RankBitVector::deserialize(s);
        if (ix.is_sampled_.size() != p.n) throw FormatError("sampled bitvector length mismatch");
        ix.sampled_values_ = EliasFano::deserialize(s);
        if (ix.sampled_values_.size() != ix.is_sampled_.ones())
            throw FormatError("sampled value count mismatch");
        uint64_t width = s.get_u64();
        if (width == 0 || width > 32) throw FormatError("bad slot index width");
        std::vector<uint32_t> v = unpack_u32(s, ix.is_sampled_.ones(), static_cast<unsigned>(width));
        for (uint32_t x : v)
            if (x >= ix.sampled_values_.size()) throw FormatError("slot index out of range");
        ix.slot_to_sorted_ = std::move(v);
    }
    {
        auto s = open_section();
        uint64_t cnt = s.get_u64();
        if (cnt != p.n - ix.is_sampled_.ones()) throw FormatError("backstep row count mismatch");
        ix.l_ = unpack_u32(s, cnt, width_l(p));
        ix.b_ = unpack_u32(s, cnt, width_b(p));
        ix.d_ = unpack_u32(s, cnt, width_d(p));
        for (uint64_t k = 0; k < cnt; ++k) {
            if (ix.l_[k] == 0) {
                if (ix.b_[k] || ix.d_[k]) throw FormatError("flagged row with stray values");
            } else if (ix.l_[k] > p.ell - 1 || ix.b_[k] > 2 * ix.l_[k] + 1 || ix.d_[k] == 0 ||
                       ix.d_[k] > max_anchor_offset(p)) {
                throw FormatError("backstep row out of range");
            }
        }
    }
    {
        auto s = open_section();
        ix.anchor_h_ = Mmphf::deserialize(s);
        ix.anchor_ranges_ = RankBitVector::deserialize(s);
        if (ix.anchor_ranges_.ones() != ix.anchor_h_.key_count())
            throw FormatError("anchor unary coding mismatch");
    }
    {
        auto s = open_section();
        ix.wps_ = WeakPrefixSearcher::deserialize(s);
        if (ix.wps_.dictionary_size() != p.n) throw FormatError("wps dictionary size mismatch");
    }
    {
        auto s = open_section();
        uint64_t cnt = s.get_u64();
        ix.short_table_.resize(cnt);
        for (auto& e : ix.short_table_) {
            uint32_t len = s.get_u32();
            if (len == 0 || len >= p.m_min) throw FormatError("short table entry length out of range");
            e.count = s.get_u64();
            e.position = s.get_u64();
            const uint8_t* syms = s.get_bytes(len);
            e.enc.assign(syms, syms + len);
        }
        for (size_t i = 1; i < ix.short_table_.size(); ++i)
            if (!(ix.short_table_[i - 1].enc < ix.short_table_[i].enc))
                throw FormatError("short table not sorted");
    }
    return ix;
}

void OpIndex::save(const std::string& path) const {
    std::vector<uint8_t> bytes = serialize();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

OpIndex OpIndex::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace opme
