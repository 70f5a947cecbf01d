#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "opme/bitvector.hpp"
#include "opme/elias_fano.hpp"
#include "opme/encoding.hpp"
#include "opme/mphf.hpp"
#include "opme/serial.hpp"
#include "opme/weak_prefix.hpp"
#include "opme/window_store.hpp"

namespace opme {

// Raised when a count/locate pattern exceeds the indexed length bound.
struct PatternTooLong : std::invalid_argument {
    explicit PatternTooLong(const std::string& what) : std::invalid_argument(what) {}
};

struct IndexParams {
    uint64_t n = 0;
    uint64_t c_num = 1;
    uint64_t c_den = 1;
    uint64_t ell = 0;            // window span: ceil(lg^c n) + ceil(lg n)
    uint64_t sample = 1;         // R sampling stride: floor(lg n / lg lg n)
    uint64_t occ_threshold = 1;  // occurrence cutoff in L's definition
    uint64_t m_min = 1;          // patterns shorter than this use the precomputed table
    uint64_t m_max = 1;          // ceil(lg^c n), longest pattern count/locate accept
    uint64_t fp_seed = kDefaultSeed;

    static constexpr uint64_t kDefaultSeed = 0x9ae16a3b2f90404fULL;

    struct Overrides {
        std::optional<uint64_t> ell, sample, occ_threshold, m_min, fp_seed;
    };

    // Derives all parameters from n and c; throws on inconsistent overrides.
    static IndexParams compute(uint64_t n, uint64_t c_num = 1, uint64_t c_den = 1,
                               const Overrides& ov = {});
};

// Lexicographic order of E(S[j1..n]) vs E(S[j2..n]), proper prefix smaller.
// Construction-time helper, needs the text.
int suffix_compare(std::span<const uint64_t> s, uint64_t j1, uint64_t j2);

struct QueryResult {
    uint64_t count = 0;
    std::optional<uint64_t> position;

    bool operator==(const QueryResult&) const = default;
};

// R-positions visited by the backward-step chain that produced the answer,
// starting candidate included.
using QueryTrace = std::vector<uint64_t>;

// The index proper: window store, sampled rank-encoded suffix array entries,
// L/B/D backstep tables, short-pattern table, weak prefix searcher and the
// hash-based backstep anchor. Holds no copy of the text; everything queries
// need is derived from rank information, so strictly monotone transforms of
// the input serialize to identical bytes. Immutable after build; all query
// methods are safe to call concurrently.
class OpIndex {
public:
    struct BuildOptions {
        // Cross-check every structure against the construction scratch
        // (exhaustive backstep soundness, hash bijectivity, wps probes).
        bool verify = false;
    };

    OpIndex() = default;

    static OpIndex build(std::span<const uint64_t> s, const IndexParams& params,
                         const BuildOptions& opts);
    static OpIndex build(std::span<const uint64_t> s, const IndexParams& params) {
        return build(s, params, BuildOptions{});
    }
    static OpIndex build(const std::vector<uint64_t>& s, const IndexParams& params,
                         const BuildOptions& opts) {
        return build(std::span<const uint64_t>(s), params, opts);
    }
    static OpIndex build(const std::vector<uint64_t>& s, const IndexParams& params) {
        return build(std::span<const uint64_t>(s), params, BuildOptions{});
    }

    // Number of order-preserving occurrences of p; |p| in [1, m_max].
    uint64_t count(std::span<const uint64_t> p) const { return query_fast(p).count; }

    // One match position, or nullopt when there is none.
    std::optional<uint64_t> locate_one(std::span<const uint64_t> p) const {
        return query_fast(p).position;
    }

    // Constant-probe pipeline: short table / weak prefix search + anchored
    // backward steps + one windowed verification.
    QueryResult query_fast(std::span<const uint64_t> p, QueryTrace* trace = nullptr) const;

    // Cross-check pipeline: binary search over sampled entries, per-candidate
    // stepping with binary-searched anchors. Observably identical to
    // query_fast; never touches the weak prefix searcher or the hash anchor.
    QueryResult query_slow(std::span<const uint64_t> p, QueryTrace* trace = nullptr) const;

    // All match positions, from the window store alone; |p| <= ell.
    std::vector<uint64_t> scan_all(std::span<const uint64_t> p) const;

    const IndexParams& params() const { return params_; }
    const WindowStore& window_store() const { return ws_; }
    const WeakPrefixSearcher& prefix_searcher() const { return wps_; }
    const Mmphf& anchor_mmphf() const { return anchor_h_; }

    uint64_t num_sampled() const { return is_sampled_.ones(); }
    bool is_sampled(uint64_t rpos) const { return is_sampled_.get(rpos - 1); }
    std::vector<uint64_t> sampled_positions() const;  // R-positions, increasing
    uint64_t slot_rpos(uint64_t slot) const { return is_sampled_.select1(slot) + 1; }
    uint64_t slot_value(uint64_t slot) const;  // text position R[p] of a sampled slot
    // Slot holding a sampled text position, if that position is sampled.
    std::optional<uint64_t> value_slot(uint64_t text_pos) const;

    struct BackstepRow {
        bool flag = true;       // true: no usable extension stored
        uint64_t l = 0;         // extension prefix length
        RankValue b{0};         // rank of the prepended character
        uint64_t d = 0;         // offset from the anchor slot's R-position
    };
    // Row for an unsampled R-position; throws if rpos is sampled.
    BackstepRow backstep_row(uint64_t rpos) const;

    // Anchor of an extension encoding through the mmphf + unary bitvector
    // (meaningful for encodings in the build set) and through direct binary
    // search over the sampled entries (meaningful for any encoding).
    uint64_t anchor_slot_hashed(std::span<const RankValue> ext) const;
    uint64_t anchor_slot_searched(std::span<const RankValue> ext) const;

    // One backward step at an unsampled R-position, given the extension
    // encoding of length L+1; returns the next R-position (clamp-checked).
    std::optional<uint64_t> backward_step(uint64_t rpos, std::span<const RankValue> ext) const;

    std::vector<uint8_t> serialize() const;
    static OpIndex deserialize(std::span<const uint8_t> bytes);
    void save(const std::string& path) const;
    static OpIndex load(const std::string& path);

    struct SectionSizes {
        uint64_t window_store = 0, sampled = 0, backstep = 0, anchor = 0, weak_prefix = 0,
                 short_table = 0, header = 0;
        uint64_t total() const {
            return header + window_store + sampled + backstep + anchor + weak_prefix + short_table;
        }
    };
    SectionSizes section_sizes() const;  // serialized bytes per section

private:
    IndexParams params_;
    WindowStore ws_;

    RankBitVector is_sampled_;            // bit p-1 set iff R-position p is sampled
    EliasFano sampled_values_;            // sampled text positions, sorted
    std::vector<uint32_t> slot_to_sorted_;  // slot (R order) -> index in sorted values

    std::vector<uint32_t> l_;  // per unsampled R-position in order; 0 = flag
    std::vector<uint32_t> b_;  // doubled rank, 0 when flagged
    std::vector<uint32_t> d_;  // anchor offset, 0 when flagged

    Mmphf anchor_h_;
    RankBitVector anchor_ranges_;  // unary-coded anchor slots over sorted extensions

    WeakPrefixSearcher wps_;

    struct ShortEntry {
        std::vector<uint16_t> enc;  // doubled symbols
        uint64_t count = 0;
        uint64_t position = 0;
    };
    std::vector<ShortEntry> short_table_;  // sorted by encoding

    // chain engine ------------------------------------------------------
    struct ChainResult {
        std::optional<uint64_t> match_pos;  // verified text position
        bool l_rejected = false;            // an L value blocked a step
    };
    ChainResult run_chain(uint64_t start_rpos, std::span<const uint64_t> pattern,
                          std::span<const RankValue> ep, bool hashed_anchor,
                          QueryTrace* trace) const;

    uint64_t unsampled_index(uint64_t rpos) const { return rpos - is_sampled_.rank1(rpos) - 1; }
    int compare_slot_prefix(uint64_t slot, std::span<const RankValue> q) const;
    // Suffix order of two text positions from the window store; nullopt when
    // they agree through the window span and neither ends.
    std::optional<int> compare_text_suffixes(uint64_t a, uint64_t b) const;
    QueryResult short_lookup(std::span<const RankValue> ep) const;
    void check_pattern(std::span<const uint64_t> p) const;
};

}  // namespace opme
