#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace opme {
namespace selftest {

enum class Scale { Quick, Default, Full };

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

using Sink = std::function<void(const CriterionResult&)>;

// Runs one acceptance criterion (1..8). The quick/default scales shrink the
// randomized sweeps; Full runs them as specified.
CriterionResult run_criterion(int id, Scale scale);

// Runs the requested criteria in order, reporting each through the sink.
// Returns the number of failures.
int run_all(Scale scale, const Sink& sink, const std::vector<int>& only = {});

}  // namespace selftest
}  // namespace opme
