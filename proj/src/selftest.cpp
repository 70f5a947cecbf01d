#include "opme/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "opme/corpus.hpp"
#include "opme/fingerprint.hpp"
#include "opme/op_index.hpp"
#include "opme/oracle.hpp"

namespace opme {
namespace selftest {

namespace {

using Clock = std::chrono::steady_clock;

struct Rng {
    uint64_t state;
    explicit Rng(uint64_t seed) : state(seed ^ 0x2545f4914f6cdd1dULL) {}
    uint64_t next() { return state = splitmix64(state); }
    uint64_t below(uint64_t bound) { return next() % bound; }  // bound > 0
};

const std::vector<uint64_t>& golden_string() {
    static const std::vector<uint64_t> s = {3, 9, 7, 2, 3, 5, 6, 8, 4, 3, 6, 5, 9, 5, 2,
                                            2, 0, 1, 5, 6, 0, 5, 4, 3, 1, 2, 5, 6, 7, 1};
    return s;
}

const std::vector<uint64_t>& golden_suffix_order() {
    static const std::vector<uint64_t> r = {30, 29, 22, 13, 2,  23, 8,  14, 20, 3,
                                            16, 24, 11, 9,  15, 28, 7,  19, 12, 1,
                                            21, 10, 27, 6,  18, 26, 17, 5,  25, 4};
    return r;
}

const std::vector<uint64_t>& golden_sampled() {
    static const std::vector<uint64_t> s = {1, 4, 7, 8, 9, 11, 12, 16, 19, 20, 24, 28, 30};
    return s;
}

struct GoldenRow {
    uint64_t i, l, b_doubled, d;
};
const std::vector<GoldenRow>& golden_rows() {
    static const std::vector<GoldenRow> rows = {
        {2, 2, 3, 4},  {3, 2, 1, 2},  {5, 2, 1, 1},  {6, 3, 7, 3},  {10, 3, 7, 1},
        {13, 2, 1, 3}, {14, 3, 7, 3}, {15, 2, 3, 1}, {17, 3, 3, 4}, {18, 3, 3, 5},
        {21, 2, 5, 1}, {22, 2, 3, 2}, {23, 4, 3, 2}, {25, 4, 2, 3}, {26, 4, 1, 1},
        {27, 2, 5, 3}, {29, 2, 5, 4}};
    return rows;
}

OpIndex build_golden_index(bool verify) {
    IndexParams::Overrides ov;
    ov.sample = 4;
    ov.occ_threshold = 4;
    IndexParams p = IndexParams::compute(golden_string().size(), 1, 1, ov);
    return OpIndex::build(golden_string(), p, {verify});
}

// Strictly increasing per-character transform into a large alphabet.
std::vector<uint64_t> monotone_transform(const std::vector<uint64_t>& s, Rng& rng) {
    std::vector<uint64_t> distinct(s.begin(), s.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::map<uint64_t, uint64_t> map;
    uint64_t cur = 0;
    for (uint64_t v : distinct) {
        cur += 1 + rng.below(1u << 20);
        map[v] = cur;
    }
    std::vector<uint64_t> out;
    out.reserve(s.size());
    for (uint64_t v : s) out.push_back(map[v]);
    return out;
}

std::string fmt_positions(const std::vector<uint64_t>& v, size_t limit = 8) {
    std::ostringstream ss;
    for (size_t i = 0; i < v.size() && i < limit; ++i) ss << (i ? " " : "") << v[i];
    if (v.size() > limit) ss << " ...";
    return ss.str();
}

// --------------------------------------------------------------------------
// criterion 1: golden-instance reproduction
// --------------------------------------------------------------------------
bool crit1(std::string& detail, Scale) {
    const auto& s = golden_string();
    auto r = oracle::naive_suffix_order(s);
    if (r != golden_suffix_order()) {
        detail = "suffix order differs from the reference permutation";
        return false;
    }
    OpIndex ix = build_golden_index(true);
    if (ix.sampled_positions() != golden_sampled()) {
        detail = "sampled set differs; got {" + fmt_positions(ix.sampled_positions(), 32) + "}";
        return false;
    }
    for (size_t k = 0; k < golden_sampled().size(); ++k) {
        uint64_t p = golden_sampled()[k];
        if (ix.slot_value(k + 1) != golden_suffix_order()[p - 1]) {
            detail = "stored entry at R-position " + std::to_string(p) + " differs";
            return false;
        }
    }
    std::map<uint64_t, GoldenRow> expect;
    for (const GoldenRow& row : golden_rows()) expect[row.i] = row;
    for (uint64_t p = 1; p <= s.size(); ++p) {
        if (ix.is_sampled(p)) continue;
        auto row = ix.backstep_row(p);
        auto it = expect.find(p);
        if (it == expect.end()) {
            detail = "unexpected unsampled R-position " + std::to_string(p);
            return false;
        }
        if (row.flag || row.l != it->second.l || row.b.doubled != it->second.b_doubled ||
            row.d != it->second.d) {
            detail = "L/B/D mismatch at R-position " + std::to_string(p);
            return false;
        }
    }
    // The oracle's direct-from-definition tables must agree as well.
    auto nt = oracle::naive_tables(s, 4, 4, ix.params().ell);
    for (const GoldenRow& row : golden_rows()) {
        const auto& got = nt.rows[row.i - 1];
        if (got.sampled || got.l != static_cast<int64_t>(row.l) ||
            got.b.doubled != row.b_doubled || got.d != static_cast<int64_t>(row.d)) {
            detail = "oracle tables deviate at R-position " + std::to_string(row.i);
            return false;
        }
    }
    detail = "R, sampled set and L/B/D match the reference instance";
    return true;
}

// --------------------------------------------------------------------------
// criterion 2: worked-example query with its backstep chain
// --------------------------------------------------------------------------
bool crit2(std::string& detail, Scale) {
    OpIndex ix = build_golden_index(false);
    std::vector<uint64_t> p = {2, 3, 1, 2};
    const QueryTrace want = {18, 25, 27, 11};

    QueryTrace tf, ts;
    QueryResult rf = ix.query_fast(p, &tf);
    QueryResult rs = ix.query_slow(p, &ts);
    if (rf.count != 1 || !rf.position || *rf.position != 19) {
        detail = "fast path returned count " + std::to_string(rf.count);
        return false;
    }
    if (rs.count != 1 || !rs.position || *rs.position != 19) {
        detail = "slow path returned count " + std::to_string(rs.count);
        return false;
    }
    if (tf != want) {
        detail = "fast chain visited {" + fmt_positions(tf) + "}";
        return false;
    }
    if (ts != want) {
        detail = "slow chain visited {" + fmt_positions(ts) + "}";
        return false;
    }
    detail = "count 1 at position 19, chain 18 -> 25 -> 27 -> 11 on both paths";
    return true;
}

// --------------------------------------------------------------------------
// criterion 3: oracle equivalence sweep
// --------------------------------------------------------------------------
bool crit3(std::string& detail, Scale scale) {
    uint64_t target_cases = scale == Scale::Full ? 10000 : scale == Scale::Default ? 2000 : 300;
    const uint64_t sigmas[] = {2, 4, 16, uint64_t(1) << 30};
    Rng rng(0xc3);
    uint64_t cases = 0, mismatches = 0;
    std::string first_bad;

    while (cases < target_cases) {
        uint64_t n = 64 + rng.below(4096 - 64 + 1);
        uint64_t sigma = sigmas[rng.below(4)];
        bool tie_free = sigma == (uint64_t(1) << 30) && rng.below(2) == 0;
        std::vector<uint64_t> s = corpus::generate(n, sigma, rng.next(), !tie_free);
        IndexParams prm = IndexParams::compute(n, 1, 1);
        OpIndex ix = OpIndex::build(s, prm, {true});

        uint64_t patterns = 25;
        for (uint64_t t = 0; t < patterns && cases < target_cases; ++t, ++cases) {
            uint64_t m = 1 + rng.below(std::min(prm.m_max, n));
            std::vector<uint64_t> p;
            uint64_t kind = rng.below(3);
            if (kind == 0 || kind == 1) {
                uint64_t start = rng.below(n - m + 1);
                p.assign(s.begin() + start, s.begin() + start + m);
                if (kind == 1) p[rng.below(p.size())] = rng.below(sigma) + 1;
            } else {
                for (uint64_t k = 0; k < m; ++k) p.push_back(rng.below(sigma) + 1);
            }

            auto expected = oracle::naive_matches(s, p);
            QueryResult fast = ix.query_fast(p);
            QueryResult slow = ix.query_slow(p);
            std::vector<uint64_t> scanned = ix.scan_all(p);

            bool ok = fast.count == expected.count() && scanned == expected.positions &&
                      slow.count == fast.count && slow.position.has_value() == fast.position.has_value() &&
                      fast.position.has_value() == (expected.count() > 0);
            if (ok && fast.position)
                ok = std::binary_search(expected.positions.begin(), expected.positions.end(),
                                        *fast.position);
            if (ok && slow.position)
                ok = std::binary_search(expected.positions.begin(), expected.positions.end(),
                                        *slow.position);
            if (!ok) {
                ++mismatches;
                if (first_bad.empty()) {
                    std::ostringstream ss;
                    ss << "n=" << n << " sigma=" << sigma << " m=" << p.size()
                       << " expected " << expected.count() << " fast " << fast.count << " slow "
                       << slow.count;
                    first_bad = ss.str();
                }
            }
        }
    }
    std::ostringstream ss;
    ss << cases << " cases, " << mismatches << " mismatches";
    if (!first_bad.empty()) ss << "; first: " << first_bad;
    detail = ss.str();
    return mismatches == 0;
}

// --------------------------------------------------------------------------
// criterion 4: serialized bytes depend on rank structure only
// --------------------------------------------------------------------------
bool crit4(std::string& detail, Scale scale) {
    uint64_t instances = scale == Scale::Quick ? 20 : 100;
    Rng rng(0xc4);
    for (uint64_t t = 0; t < instances; ++t) {
        uint64_t n = 64 + rng.below(449);
        std::vector<uint64_t> s = corpus::generate(n, 4, rng.next(), true);
        std::vector<uint64_t> s2 = monotone_transform(s, rng);  // values up to ~2^30
        IndexParams prm = IndexParams::compute(n, 1, 1);
        auto bytes1 = OpIndex::build(s, prm, {}).serialize();
        auto bytes2 = OpIndex::build(s2, prm, {}).serialize();
        if (bytes1 != bytes2) {
            detail = "instance " + std::to_string(t) + " (n=" + std::to_string(n) +
                     ") serialized differently under a monotone transform";
            return false;
        }
    }
    detail = std::to_string(instances) +
             " instances byte-identical under monotone transforms (sizes equal for sigma 4 vs 2^30)";
    return true;
}

// --------------------------------------------------------------------------
// criterion 5: space scaling across n
// --------------------------------------------------------------------------
bool crit5(std::string& detail, Scale scale) {
    std::vector<uint64_t> sizes = scale == Scale::Quick
                                      ? std::vector<uint64_t>{1 << 10, 1 << 12}
                                      : std::vector<uint64_t>{1 << 10, 1 << 12, 1 << 14, 1 << 16};
    std::vector<double> bps;
    Rng rng(0xc5);
    std::ostringstream ss;
    for (uint64_t n : sizes) {
        std::vector<uint64_t> s = corpus::generate(n, 16, rng.next(), true);
        IndexParams prm = IndexParams::compute(n, 1, 1);
        OpIndex ix = OpIndex::build(s, prm, {});
        double bits = static_cast<double>(ix.serialize().size()) * 8.0;
        bps.push_back(bits / static_cast<double>(n));
        ss << "n=" << n << ": " << bps.back() << " bits/symbol; ";
    }
    for (size_t i = 1; i < sizes.size(); ++i) {
        double lglg_ratio = std::log2(std::log2(static_cast<double>(sizes[i]))) /
                            std::log2(std::log2(static_cast<double>(sizes[i - 1])));
        double got = bps[i] / bps[i - 1];
        ss << "ratio " << got << " (budget " << lglg_ratio * 1.10 << "); ";
        if (got > lglg_ratio * 1.10) {
            detail = ss.str() + "exceeded";
            return false;
        }
    }
    detail = ss.str();
    return true;
}

// --------------------------------------------------------------------------
// criterion 6: time scaling in m and n
// --------------------------------------------------------------------------
struct TimingPoint {
    double median_ns = 0.0;    // metric: stepping-regime median when available
    bool frequent_regime = false;  // answered from a sampled entry in the range
};

TimingPoint measure_queries(const OpIndex& ix, const std::vector<uint64_t>& s, uint64_t m,
                            uint64_t reps, Rng& rng) {
    std::vector<std::vector<uint64_t>> pats;
    pats.reserve(reps);
    for (uint64_t t = 0; t < reps; ++t) {
        uint64_t start = rng.below(s.size() - m + 1);
        pats.emplace_back(s.begin() + start, s.begin() + start + m);
    }
    for (const auto& p : pats) (void)ix.query_fast(p);  // warm
    std::vector<double> all_ns, rare_ns;
    all_ns.reserve(reps);
    for (const auto& p : pats) {
        // A range holding a sampled entry is answered by one direct windowed
        // check; only the others exercise the backward-stepping pipeline
        // whose growth is under test.
        Encoding ep = rank_encode(p);
        PrefixRange range = ix.prefix_searcher().query(ep);
        uint64_t slot_lo = 1, slot_hi = ix.num_sampled();  // first slot at or past range.lo
        while (slot_lo < slot_hi) {
            uint64_t mid = (slot_lo + slot_hi) / 2;
            if (ix.slot_rpos(mid) < range.lo) slot_lo = mid + 1;
            else slot_hi = mid;
        }
        bool direct = ix.num_sampled() > 0 && ix.slot_rpos(slot_lo) >= range.lo &&
                      ix.slot_rpos(slot_lo) <= range.hi;

        QueryResult r;
        double best = 1e18;
        for (int rep = 0; rep < 5; ++rep) {  // steady-state latency per pattern
            auto t0 = Clock::now();
            r = ix.query_fast(p);
            auto t1 = Clock::now();
            best = std::min(best, std::chrono::duration<double, std::nano>(t1 - t0).count());
        }
        if (r.count == 0) continue;  // substring patterns always occur
        all_ns.push_back(best);
        if (!direct) rare_ns.push_back(best);
    }
    auto median = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        return v.empty() ? 0.0 : v[v.size() / 2];
    };
    TimingPoint tp;
    tp.frequent_regime = rare_ns.size() * 5 < all_ns.size();  // under 20% stepping queries
    tp.median_ns = tp.frequent_regime ? median(all_ns) : median(rare_ns);
    return tp;
}

bool crit6(std::string& detail, Scale scale) {
    const std::vector<uint64_t> ms = {4, 8, 16, 32, 64};
    uint64_t reps = scale == Scale::Full ? 400 : 150;
    Rng rng(0xc6);
    std::ostringstream ss;

    std::vector<uint64_t> s16 = corpus::generate(1 << 16, 256, rng.next(), true);
    OpIndex ix16 = OpIndex::build(s16, IndexParams::compute(1 << 16, 2, 1), {});
    std::vector<uint64_t> s12 = corpus::generate(1 << 12, 256, rng.next(), true);
    OpIndex ix12 = OpIndex::build(s12, IndexParams::compute(1 << 12, 2, 1), {});

    std::vector<TimingPoint> t16, t12;
    for (uint64_t m : ms) {
        t16.push_back(measure_queries(ix16, s16, m, reps, rng));
        t12.push_back(measure_queries(ix12, s12, m, reps, rng));
        ss << "m=" << m << ": " << t16.back().median_ns << "ns/" << t12.back().median_ns << "ns; ";
    }
    // Short frequent patterns are answered from a sampled entry in the range
    // and sit far below the linear envelope; the slope budget applies between
    // points where the backward-stepping pipeline is what gets measured.
    for (size_t i = 1; i < ms.size(); ++i) {
        double linear = static_cast<double>(ms[i]) / static_cast<double>(ms[i - 1]);
        if (!t16[i - 1].frequent_regime) {
            if (t16[i].median_ns > t16[i - 1].median_ns * linear * 1.2) {
                detail = ss.str() + "m-growth exceeded between m=" + std::to_string(ms[i - 1]) +
                         " and m=" + std::to_string(ms[i]);
                return false;
            }
        } else if (t16[i - 1].median_ns > t16[i].median_ns * 1.2) {
            // Frequent short patterns skip the stepping pipeline entirely;
            // they must merely stay below the affine envelope of the next point.
            detail = ss.str() + "frequent-pattern median above the linear envelope at m=" +
                     std::to_string(ms[i - 1]);
            return false;
        }
    }
    for (size_t i = 0; i < ms.size(); ++i) {
        double lo = std::min(t16[i].median_ns, t12[i].median_ns);
        double hi = std::max(t16[i].median_ns, t12[i].median_ns);
        if (lo <= 0.0 || hi / lo > 2.0) {
            detail = ss.str() + "n-flatness exceeded at m=" + std::to_string(ms[i]);
            return false;
        }
    }
    detail = ss.str();
    return true;
}

// --------------------------------------------------------------------------
// criterion 7: succinct primitive suites
// --------------------------------------------------------------------------
bool crit7(std::string& detail, Scale scale) {
    Rng rng(0xc7);
    uint64_t shrink = scale == Scale::Quick ? 10 : 1;

    // Rank bitvector against a naive popcount oracle.
    for (uint64_t rep = 0; rep < 20 / shrink + 1; ++rep) {
        uint64_t nb = 100000;
        std::vector<bool> bits(nb);
        for (uint64_t i = 0; i < nb; ++i) bits[i] = rng.below(100) < 37;
        RankBitVector bv(bits);
        uint64_t acc = 0, ones = 0;
        std::vector<uint64_t> naive(nb + 1, 0);
        for (uint64_t i = 0; i < nb; ++i) {
            acc += bits[i];
            naive[i + 1] = acc;
            ones += bits[i];
        }
        for (uint64_t probe = 0; probe < 2000; ++probe) {
            uint64_t i = rng.below(nb + 1);
            if (bv.rank1(i) != naive[i]) {
                detail = "rank1 mismatch";
                return false;
            }
        }
        for (uint64_t k = 1; k <= ones; k += 1 + rng.below(97)) {
            uint64_t pos = bv.select1(k);
            if (!bits[pos] || naive[pos + 1] != k) {
                detail = "select1 mismatch";
                return false;
            }
        }
    }

    // Elias-Fano round-trips.
    for (uint64_t rep = 0; rep < 1000 / shrink; ++rep) {
        uint64_t cnt = rng.below(300);
        std::vector<uint64_t> vals;
        uint64_t cur = 0;
        for (uint64_t i = 0; i < cnt; ++i) {
            cur += rng.below(1000);
            vals.push_back(cur);
        }
        EliasFano ef = EliasFano::build(vals);
        for (uint64_t k = 1; k <= cnt; ++k) {
            if (ef.access(k) != vals[k - 1]) {
                detail = "elias-fano access mismatch";
                return false;
            }
        }
    }

    // Mphf bijectivity on random encodings.
    {
        uint64_t nk = 10000 / shrink;
        std::vector<Encoding> keys;
        std::map<std::vector<uint32_t>, bool> seen;
        while (keys.size() < nk) {
            uint64_t len = 1 + rng.below(12);
            Encoding e;
            std::vector<uint32_t> raw;
            for (uint64_t k = 0; k < len; ++k) {
                uint32_t v = static_cast<uint32_t>(1 + rng.below(2 * (k + 1) - 1));
                e.push_back(RankValue{v});
                raw.push_back(v);
            }
            if (seen.emplace(raw, true).second) keys.push_back(std::move(e));
        }
        Mphf h = Mphf::build(keys, 42);
        std::vector<bool> hit(nk, false);
        for (const Encoding& k : keys) {
            uint64_t v = h.eval(k);
            if (v < 1 || v > nk || hit[v - 1]) {
                detail = "mphf not bijective";
                return false;
            }
            hit[v - 1] = true;
        }
    }

    // Mmphf monotonicity on sorted keys and wps exactness on genuine prefixes.
    for (uint64_t rep = 0; rep < 100 / shrink; ++rep) {
        uint64_t n = 24 + rng.below(200);
        std::vector<uint64_t> s = corpus::generate(n, 2 + rng.below(8), rng.next(), true);
        auto r = oracle::naive_suffix_order(s);
        uint64_t cap = 1 + rng.below(16);
        std::vector<Encoding> dict;
        for (uint64_t p = 1; p <= n; ++p) {
            uint64_t j = r[p - 1];
            uint64_t len = std::min<uint64_t>(cap, n - j + 1);
            Encoding full = rank_encode(std::span<const uint64_t>(s).subspan(j - 1, len));
            dict.push_back(full);
        }
        std::vector<Encoding> distinct = dict;
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        Mmphf mm = Mmphf::build(distinct, rng.next());
        for (size_t k = 0; k < distinct.size(); ++k) {
            if (mm.eval(distinct[k]) != k + 1) {
                detail = "mmphf rank mismatch";
                return false;
            }
        }
        WeakPrefixSearcher wps = WeakPrefixSearcher::build(dict, rng.next());
        for (uint64_t start = 1; start <= n; ++start) {
            for (uint64_t len = 1; len <= std::min<uint64_t>(cap, n - start + 1); ++len) {
                Encoding q = rank_encode(std::span<const uint64_t>(s).subspan(start - 1, len));
                PrefixRange got = wps.query(q);
                // reference: binary search over the explicit dictionary
                uint64_t lo = 0, hi = 0;
                for (uint64_t d = 1; d <= n; ++d) {
                    if (is_prefix_of(q, dict[d - 1])) {
                        if (!lo) lo = d;
                        hi = d;
                    }
                }
                if (lo && (got.lo != lo || got.hi != hi)) {
                    detail = "wps range mismatch";
                    return false;
                }
            }
        }
    }
    detail = "rank, elias-fano, mphf, mmphf and weak prefix search verified";
    return true;
}

// --------------------------------------------------------------------------
// criterion 8: exhaustive tiny instances
// --------------------------------------------------------------------------
bool crit8(std::string& detail, Scale scale) {
    uint64_t max_n = scale == Scale::Quick ? 5 : 7;
    uint64_t checked = 0, mismatches = 0;
    std::string first_bad;

    std::vector<std::vector<uint64_t>> patterns;
    for (uint64_t len = 1; len <= 4; ++len) {
        uint64_t total = 1;
        for (uint64_t k = 0; k < len; ++k) total *= 3;
        for (uint64_t code = 0; code < total; ++code) {
            std::vector<uint64_t> p(len);
            uint64_t c = code;
            for (uint64_t k = 0; k < len; ++k) {
                p[k] = c % 3 + 1;
                c /= 3;
            }
            patterns.push_back(std::move(p));
        }
    }

    for (uint64_t n = 2; n <= max_n; ++n) {
        uint64_t total = 1;
        for (uint64_t k = 0; k < n; ++k) total *= 3;
        for (uint64_t code = 0; code < total; ++code) {
            std::vector<uint64_t> s(n);
            uint64_t c = code;
            for (uint64_t k = 0; k < n; ++k) {
                s[k] = c % 3 + 1;
                c /= 3;
            }
            IndexParams prm = IndexParams::compute(n, 2, 1);
            OpIndex ix = OpIndex::build(s, prm, {});
            for (const auto& p : patterns) {
                if (p.size() > prm.m_max) {
                    bool threw_fast = false, threw_slow = false;
                    try {
                        (void)ix.query_fast(p);
                    } catch (const PatternTooLong&) {
                        threw_fast = true;
                    }
                    try {
                        (void)ix.query_slow(p);
                    } catch (const PatternTooLong&) {
                        threw_slow = true;
                    }
                    if (!threw_fast || !threw_slow) {
                        ++mismatches;
                        if (first_bad.empty()) first_bad = "long pattern not rejected";
                    }
                    continue;
                }
                ++checked;
                auto expected = oracle::naive_matches(s, p);
                QueryResult fast = ix.query_fast(p);
                QueryResult slow = ix.query_slow(p);
                bool ok = fast.count == expected.count() && slow.count == expected.count() &&
                          fast.position.has_value() == (expected.count() > 0) &&
                          slow.position.has_value() == (expected.count() > 0);
                if (ok && expected.count() > 0)
                    ok = std::binary_search(expected.positions.begin(), expected.positions.end(),
                                            *fast.position) &&
                         std::binary_search(expected.positions.begin(), expected.positions.end(),
                                            *slow.position);
                if (ok && p.size() <= prm.ell)
                    ok = ix.scan_all(p) == expected.positions;
                if (!ok) {
                    ++mismatches;
                    if (first_bad.empty()) {
                        std::ostringstream ss;
                        ss << "s={" << fmt_positions(s) << "} p={" << fmt_positions(p) << "}";
                        first_bad = ss.str();
                    }
                }
            }
        }
    }
    std::ostringstream ss;
    ss << checked << " comparisons, " << mismatches << " mismatches";
    if (!first_bad.empty()) ss << "; first: " << first_bad;
    detail = ss.str();
    return mismatches == 0;
}

}  // namespace

CriterionResult run_criterion(int id, Scale scale) {
    CriterionResult res;
    res.id = id;
    static const char* names[] = {
        "golden-instance reproduction",   "worked-example query and chain",
        "oracle equivalence sweep",       "encoding-only serialization",
        "space scaling across n",         "query time scaling",
        "succinct primitive suites",      "exhaustive tiny instances"};
    res.name = id >= 1 && id <= 8 ? names[id - 1] : "unknown";
    auto t0 = Clock::now();
    try {
        switch (id) {
            case 1: res.passed = crit1(res.detail, scale); break;
            case 2: res.passed = crit2(res.detail, scale); break;
            case 3: res.passed = crit3(res.detail, scale); break;
            case 4: res.passed = crit4(res.detail, scale); break;
            case 5: res.passed = crit5(res.detail, scale); break;
            case 6: res.passed = crit6(res.detail, scale); break;
            case 7: res.passed = crit7(res.detail, scale); break;
            case 8: res.passed = crit8(res.detail, scale); break;
            default: res.passed = false; res.detail = "no such criterion";
        }
    } catch (const std::exception& e) {
        res.passed = false;
        res.detail = std::string("exception: ") + e.what();
    }
    res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return res;
}

int run_all(Scale scale, const Sink& sink, const std::vector<int>& only) {
    std::vector<int> ids = only;
    if (ids.empty())
        for (int i = 1; i <= 8; ++i) ids.push_back(i);
    int failures = 0;
    for (int id : ids) {
        CriterionResult r = run_criterion(id, scale);
        if (!r.passed) ++failures;
        if (sink) sink(r);
    }
    return failures;
}

}  // namespace selftest
}  // namespace opme
