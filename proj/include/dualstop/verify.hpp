#pragma once

#include <string>
#include <vector>

#include "dualstop/tree.hpp"

namespace dualstop {

struct Check {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    std::string note;  ///< set when the check could not run
};

struct VerifyReport {
    std::string instance;
    std::vector<Check> checks;
    [[nodiscard]] bool pass() const;
};

/// Oracle-equivalence checks on one tree (min framework): DP vs brute force
/// (when enumerable) vs max-flow, the flow martingale, the sandwich
/// 0 <= OPT - E_k <= 1/(k+1) and pathwise min Z^k <= U/k for k <= K, and
/// the round-flow identity.
VerifyReport verify_tree(const FiniteTreeProcess& tree, int K, std::string instance, double max_rules = 1e6);

}  // namespace dualstop
