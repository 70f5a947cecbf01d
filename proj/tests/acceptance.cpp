// Acceptance suite: one pass/fail line per criterion. Exit code is the
// number of failed criteria.

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "opme/selftest.hpp"

int main(int argc, char** argv) {
    using namespace opme::selftest;
    Scale scale = Scale::Full;
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) {
            only.push_back(std::atoi(argv[++i]));
        } else if (arg == "--scale" && i + 1 < argc) {
            std::string s = argv[++i];
            scale = s == "quick" ? Scale::Quick : s == "default" ? Scale::Default : Scale::Full;
        } else {
            std::fprintf(stderr, "usage: %s [--criterion N]... [--scale quick|default|full]\n",
                         argv[0]);
            return 64;
        }
    }
    int failures = run_all(scale, [](const CriterionResult& r) {
        std::printf("[%s] criterion %d (%s): %s (%.2fs)\n", r.passed ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.detail.c_str(), r.seconds);
        std::fflush(stdout);
    }, only);
    return failures;
}
