#include "opme/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "opme/fingerprint.hpp"
#include "opme/serial.hpp"

namespace opme {
namespace corpus {

std::vector<uint64_t> read_file(const std::string& path, Format fmt) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::vector<uint64_t> out;
    if (fmt == Format::Text) {
        uint64_t v;
        while (f >> v) out.push_back(v);
        if (!f.eof()) {
            f.clear();
            std::string tok;
            f >> tok;
            throw FormatError("corpus: not an unsigned integer: '" + tok + "'");
        }
    } else {
        std::vector<char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        if (bytes.size() % 8 != 0) throw FormatError("corpus: binary file length not a multiple of 8");
        out.reserve(bytes.size() / 8);
        for (size_t i = 0; i < bytes.size(); i += 8) {
            uint64_t v = 0;
            for (int k = 0; k < 8; ++k) v |= static_cast<uint64_t>(static_cast<uint8_t>(bytes[i + k])) << (8 * k);
            out.push_back(v);
        }
    }
    return out;
}

void write_file(const std::string& path, const std::vector<uint64_t>& values, Format fmt) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    if (fmt == Format::Text) {
        std::ostringstream ss;
        for (size_t i = 0; i < values.size(); ++i) {
            if (i) ss << (i % 20 == 0 ? '\n' : ' ');
            ss << values[i];
        }
        ss << '\n';
        f << ss.str();
    } else {
        for (uint64_t v : values) {
            char bytes[8];
            for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>(v >> (8 * k));
            f.write(bytes, 8);
        }
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<uint64_t> generate(uint64_t n, uint64_t sigma, uint64_t seed, bool ties) {
    if (sigma < 1) throw std::invalid_argument("generate: sigma must be positive");
    if (!ties && sigma < n)
        throw std::invalid_argument("generate: distinct values require sigma >= n");
    std::vector<uint64_t> out;
    out.reserve(n);
    uint64_t state = seed ^ 0x6a09e667f3bcc908ULL;
    auto next = [&]() {
        state = splitmix64(state);
        return state;
    };
    if (ties) {
        for (uint64_t i = 0; i < n; ++i) out.push_back(next() % sigma + 1);
    } else {
        std::unordered_set<uint64_t> used;
        used.reserve(n * 2);
        while (out.size() < n) {
            uint64_t v = next() % sigma + 1;
            if (used.insert(v).second) out.push_back(v);
        }
    }
    return out;
}

}  // namespace corpus
}  // namespace opme
