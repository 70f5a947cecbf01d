// Command-line front end: corpus generation, index build/save/load, queries
// and the self-test suite.
//
// Exit codes: 0 success, 1 usage, 2 I/O, 3 format/corruption, 4 selftest or
// cross-path failure.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "opme/corpus.hpp"
#include "opme/op_index.hpp"
#include "opme/selftest.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitFormat = 3;
constexpr int kExitSelftest = 4;

opme::corpus::Format parse_format(const std::string& s) {
    if (s == "text") return opme::corpus::Format::Text;
    if (s == "binary") return opme::corpus::Format::Binary;
    throw CLI::ValidationError("--format must be text or binary");
}

// "1", "2", "1.5", "3/2" -> reduced rational
std::pair<uint64_t, uint64_t> parse_c(const std::string& s) {
    uint64_t num = 0, den = 1;
    if (auto slash = s.find('/'); slash != std::string::npos) {
        num = std::stoull(s.substr(0, slash));
        den = std::stoull(s.substr(slash + 1));
    } else if (auto dot = s.find('.'); dot != std::string::npos) {
        std::string frac = s.substr(dot + 1);
        if (frac.size() > 9) frac = frac.substr(0, 9);
        num = std::stoull(s.substr(0, dot));
        for (char ch : frac) {
            num = num * 10 + static_cast<uint64_t>(ch - '0');
            den *= 10;
        }
    } else {
        num = std::stoull(s);
    }
    if (num == 0 || den == 0) throw CLI::ValidationError("--c must be positive");
    uint64_t g = std::gcd(num, den);
    return {num / g, den / g};
}

std::vector<uint64_t> parse_pattern(const std::string& text) {
    std::istringstream ss(text);
    std::vector<uint64_t> p;
    uint64_t v;
    while (ss >> v) p.push_back(v);
    if (!ss.eof()) throw opme::FormatError("pattern is not a list of unsigned integers: " + text);
    return p;
}

int cmd_build(const std::string& input, const std::string& output, const std::string& fmt,
              const std::string& c_str, uint64_t sample, uint64_t threshold, uint64_t ell,
              uint64_t seed, bool verify) {
    auto [c_num, c_den] = parse_c(c_str);
    std::vector<uint64_t> s;
    try {
        s = opme::corpus::read_file(input, parse_format(fmt));
    } catch (const opme::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    if (s.size() < 2) {
        std::cerr << "error: corpus has " << s.size() << " symbols; need at least 2\n";
        return kExitFormat;
    }
    opme::IndexParams::Overrides ov;
    if (sample) ov.sample = sample;
    if (threshold) ov.occ_threshold = threshold;
    if (ell) ov.ell = ell;
    if (seed) {
        ov.fp_seed = seed;
    } else if (const char* env = std::getenv("OPME_SEED"); env && *env) {
        ov.fp_seed = std::strtoull(env, nullptr, 10);
    }
    opme::IndexParams prm;
    try {
        prm = opme::IndexParams::compute(s.size(), c_num, c_den, ov);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    opme::OpIndex ix = opme::OpIndex::build(s, prm, {verify});
    try {
        ix.save(output);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }

    auto sz = ix.section_sizes();
    std::printf("n\t%llu\n", (unsigned long long)prm.n);
    std::printf("c\t%llu/%llu\n", (unsigned long long)prm.c_num, (unsigned long long)prm.c_den);
    std::printf("ell\t%llu\n", (unsigned long long)prm.ell);
    std::printf("sample\t%llu\n", (unsigned long long)prm.sample);
    std::printf("occ_threshold\t%llu\n", (unsigned long long)prm.occ_threshold);
    std::printf("m_min\t%llu\n", (unsigned long long)prm.m_min);
    std::printf("m_max\t%llu\n", (unsigned long long)prm.m_max);
    auto bits = [](uint64_t bytes) { return (unsigned long long)(bytes * 8); };
    std::printf("section_window_store_bits\t%llu\n", bits(sz.window_store));
    std::printf("section_sampled_bits\t%llu\n", bits(sz.sampled));
    std::printf("section_backstep_bits\t%llu\n", bits(sz.backstep));
    std::printf("section_anchor_bits\t%llu\n", bits(sz.anchor));
    std::printf("section_weak_prefix_bits\t%llu\n", bits(sz.weak_prefix));
    std::printf("section_short_table_bits\t%llu\n", bits(sz.short_table));
    std::printf("total_bits\t%llu\n", bits(sz.total()));
    std::printf("bits_per_symbol\t%.3f\n",
                static_cast<double>(sz.total()) * 8.0 / static_cast<double>(prm.n));
    if (prm.n <= 100) {
        std::string line;
        for (uint64_t p : ix.sampled_positions()) line += (line.empty() ? "" : " ") + std::to_string(p);
        std::printf("sampled_positions\t%s\n", line.c_str());
    }
    return kExitOk;
}

int cmd_query(const std::string& index_path, const std::vector<std::string>& patterns,
              const std::string& patterns_file, const std::string& mode) {
    opme::OpIndex ix;
    try {
        ix = opme::OpIndex::load(index_path);
    } catch (const opme::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    std::vector<std::string> all = patterns;
    if (!patterns_file.empty()) {
        std::ifstream f(patterns_file);
        if (!f) {
            std::cerr << "error: cannot open " << patterns_file << "\n";
            return kExitIo;
        }
        std::string line;
        while (std::getline(f, line))
            if (!line.empty()) all.push_back(line);
    }
    int rc = kExitOk;
    for (const std::string& text : all) {
        std::vector<uint64_t> p;
        try {
            p = parse_pattern(text);
        } catch (const opme::FormatError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitFormat;
        }
        try {
            auto t0 = std::chrono::steady_clock::now();
            std::string pos_col = "-";
            uint64_t count = 0;
            if (mode == "scan") {
                std::vector<uint64_t> hits = ix.scan_all(p);
                count = hits.size();
                if (!hits.empty()) {
                    pos_col.clear();
                    for (size_t i = 0; i < hits.size(); ++i)
                        pos_col += (i ? "," : "") + std::to_string(hits[i]);
                }
            } else {
                opme::QueryResult r = ix.query_fast(p);
                count = r.count;
                if (mode != "count" && r.position) pos_col = std::to_string(*r.position);
                if (mode == "both-paths") {
                    opme::QueryResult slow = ix.query_slow(p);
                    if (slow.count != r.count || slow.position.has_value() != r.position.has_value()) {
                        std::cerr << "error: fast/slow disagreement on '" << text << "'\n";
                        return kExitSelftest;
                    }
                }
            }
            auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
            std::printf("%s\t%llu\t%s\t%lld\n", text.c_str(), (unsigned long long)count,
                        pos_col.c_str(), (long long)ns);
        } catch (const opme::PatternTooLong&) {
            std::printf("%s\ttoo-long\t-\t-\n", text.c_str());
        } catch (const std::invalid_argument&) {
            std::printf("%s\terror\t-\t-\n", text.c_str());
        }
    }
    return rc;
}

int cmd_gen(const std::string& output, uint64_t n, uint64_t sigma, uint64_t seed, bool no_ties,
            const std::string& fmt) {
    try {
        auto s = opme::corpus::generate(n, sigma, seed, !no_ties);
        opme::corpus::write_file(output, s, parse_format(fmt));
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}

int cmd_selftest(bool quick, bool full, const std::vector<int>& criteria) {
    using namespace opme::selftest;
    Scale scale = full ? Scale::Full : quick ? Scale::Quick : Scale::Default;
    int failures = run_all(scale, [](const CriterionResult& r) {
        std::printf("[%s] criterion %d (%s): %s (%.2fs)\n", r.passed ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.detail.c_str(), r.seconds);
        std::fflush(stdout);
    }, criteria);
    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return kExitSelftest;
    }
    std::printf("all criteria passed\n");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"order-preserving pattern matching encoding"};
    app.require_subcommand(1);

    // build
    auto* build = app.add_subcommand("build", "build an index from a corpus");
    std::string in_path, out_path, fmt = "text", c_str = "1";
    uint64_t sample = 0, threshold = 0, ell = 0, seed = 0;
    bool verify = false;
    build->add_option("input", in_path, "corpus file")->required();
    build->add_option("-o,--output", out_path, "index file")->required();
    build->add_option("--format", fmt, "corpus format: text|binary");
    build->add_option("--c", c_str, "pattern-length exponent (default 1)");
    build->add_option("--sample", sample, "override the sampling stride");
    build->add_option("--threshold", threshold, "override the occurrence cutoff");
    build->add_option("--ell", ell, "override the window span");
    build->add_option("--seed", seed, "fingerprint seed (or env OPME_SEED)");
    build->add_flag("--verify", verify, "cross-check the build against scratch structures");

    // query
    auto* query = app.add_subcommand("query", "run patterns against an index");
    std::string index_path, mode = "locate", patterns_file;
    std::vector<std::string> patterns;
    query->add_option("index", index_path, "index file")->required();
    query->add_option("pattern", patterns, "patterns, each a quoted list of integers");
    query->add_option("--patterns-file", patterns_file, "one pattern per line");
    query->add_option("--mode", mode, "count|locate|scan|both-paths")
        ->check(CLI::IsMember({"count", "locate", "scan", "both-paths"}));

    // gen
    auto* gen = app.add_subcommand("gen", "generate a deterministic corpus");
    std::string gen_out, gen_fmt = "text";
    uint64_t gen_n = 0, gen_sigma = 256, gen_seed = 1;
    bool no_ties = false;
    gen->add_option("-o,--output", gen_out, "corpus file")->required();
    gen->add_option("-n", gen_n, "number of symbols")->required();
    gen->add_option("--sigma", gen_sigma, "alphabet size");
    gen->add_option("--seed", gen_seed, "random seed");
    gen->add_flag("--no-ties", no_ties, "draw distinct values (needs sigma >= n)");
    gen->add_option("--format", gen_fmt, "text|binary");

    // selftest
    auto* selftest = app.add_subcommand("selftest", "run the acceptance suite");
    bool quick = false, full = false;
    std::vector<int> criteria;
    selftest->add_flag("--quick", quick, "smallest scale");
    selftest->add_flag("--full", full, "full acceptance scale");
    selftest->add_option("--criterion", criteria, "run only these criteria (1..8)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (build->parsed())
            return cmd_build(in_path, out_path, fmt, c_str, sample, threshold, ell, seed, verify);
        if (query->parsed()) return cmd_query(index_path, patterns, patterns_file, mode);
        if (gen->parsed()) return cmd_gen(gen_out, gen_n, gen_sigma, gen_seed, no_ties, gen_fmt);
        if (selftest->parsed()) return cmd_selftest(quick, full, criteria);
    } catch (const opme::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
