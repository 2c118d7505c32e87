#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hisp {

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyOptions {
    std::uint64_t seed = 1;
    int instances = 200;
    /// Multiplies one factorised weight by (1 + 1e-6) in the equivalence
    /// suite, which must then fail.
    bool perturb = false;
};

/// Exact-against-factorised equivalence, P_t consistency, factorisation and
/// normalisation suites. Deterministic for a given seed.
std::vector<SuiteResult> run_verification(const VerifyOptions& options);

}  // namespace hisp
